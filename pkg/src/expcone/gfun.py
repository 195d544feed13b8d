"""Residual growth functions ``g`` used in facial residual functions.

``EntropyNegInf`` is ``-t ln t`` on ``(0, 1/e²]`` continued linearly as
``t + 1/e²``; ``LogInf`` is ``-1/ln t`` on ``(0, 1/e²]`` continued as
``1/4 + (e²/4) t``. Both branches meet at ``1/e²``.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = ["GFunction", "GKind", "evaluate", "growth_constant", "E2"]

E2 = math.exp(-2.0)
_E2_SQ_QUARTER = math.exp(2.0) / 4.0


class GKind(str, enum.Enum):
    POWER = "Power"
    ENTROPY = "EntropyNegInf"
    LOG = "LogInf"
    IDENTITY = "Identity"


@dataclass(frozen=True)
class GFunction:
    kind: GKind
    alpha: float | None = None

    def __post_init__(self):
        if self.kind is GKind.POWER:
            if self.alpha is None or not 0 < self.alpha <= 1:
                raise ValueError("Power needs alpha in (0, 1]")
        elif self.alpha is not None:
            raise ValueError(f"{self.kind.value} takes no alpha")

    @classmethod
    def power(cls, alpha: float):
        return cls(GKind.POWER, float(alpha))

    @classmethod
    def entropy(cls):
        return cls(GKind.ENTROPY)

    @classmethod
    def log(cls):
        return cls(GKind.LOG)

    @classmethod
    def identity(cls):
        return cls(GKind.IDENTITY)

    @property
    def exponent(self) -> float:
        """Exponent α with ``g(t) >= t^α`` near zero, as used for κ tables."""
        return self.alpha if self.kind is GKind.POWER else 1.0

    def __call__(self, t):
        return evaluate(self, t)

    def __str__(self):
        if self.kind is GKind.POWER:
            return f"Power({self.alpha:g})"
        return self.kind.value

    @classmethod
    def parse(cls, text: str) -> "GFunction":
        text = text.strip()
        m = re.fullmatch(r"(?i:power)\(\s*([^)]+)\)", text)
        if m:
            return cls.power(float(m.group(1)))
        alias = {"identity": GKind.IDENTITY, "entropy": GKind.ENTROPY, "log": GKind.LOG}
        low = text.lower()
        if low == "sqrt":
            return cls.power(0.5)
        if low in alias:
            return cls(alias[low])
        try:
            return cls(GKind(text))
        except ValueError:
            raise ValueError(f"unknown g function {text!r}") from None


def evaluate(g: GFunction, t):
    """Evaluate ``g`` at ``t >= 0``; accepts scalars or arrays."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("g is only defined for t >= 0")
    k = g.kind
    with np.errstate(divide="ignore", invalid="ignore"):
        if k is GKind.IDENTITY:
            out = arr.copy()
        elif k is GKind.POWER:
            out = np.power(arr, g.alpha)
        elif k is GKind.ENTROPY:
            low = arr <= E2
            safe = np.where(arr > 0, arr, 1.0)
            out = np.where(low, np.where(arr > 0, -safe * np.log(safe), 0.0), arr + E2)
        else:
            low = arr <= E2
            safe = np.where(arr > 0, arr, 0.5)
            out = np.where(low, np.where(arr > 0, -1.0 / np.log(safe), 0.0), 0.25 + _E2_SQ_QUARTER * arr)
    return float(out) if out.ndim == 0 else out


def default_grid(T: float = 10.0, n: int = 20001) -> np.ndarray:
    return np.unique(np.concatenate([np.logspace(-300, math.log10(T), n), np.linspace(0, T, n)[1:]]))


def growth_constant(g: GFunction, grid=None) -> float:
    """Empirical smallest ``L`` with ``g(2t) <= L g(t)`` on ``grid``.

    For the entropy and log functions the minorisation ``t <= g(t)`` is
    asserted on the same grid.
    """
    t = default_grid() if grid is None else np.asarray(grid, dtype=float)
    t = t[t > 0]
    if t.size == 0 or t.max() < 1.0:
        raise ValueError("grid must cover (0, T] with T >= 1")
    gt = evaluate(g, t)
    if g.kind in (GKind.ENTROPY, GKind.LOG) and np.any(gt < t):
        raise AssertionError(f"{g} fails t <= g(t) on the grid")
    keep = gt > 0
    return float(np.max(evaluate(g, 2 * t[keep]) / gt[keep]))

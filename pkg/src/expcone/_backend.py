"""Select the projection kernel at import time.

The compiled extension is preferred. Setting ``EXPCONE_PURE_PYTHON=1`` forces
the numpy fallback, which is also used when the extension was not built.
"""

import os

from . import _kernels_py

BACKEND = "python"
project_batch = _kernels_py.project_batch

if os.environ.get("EXPCONE_PURE_PYTHON") != "1":
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        project_batch = _compiled.project_batch
        BACKEND = "compiled"

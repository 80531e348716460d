"""Select the compiled kernels when they are importable.

Set ``NTSEARCH_PURE_PYTHON=1`` to force the pure-Python step functions.
"""

import os

kernels = None
if not os.environ.get("NTSEARCH_PURE_PYTHON"):
    try:
        from ntsearch import _kernels as kernels
    except ImportError:  # extension not built
        kernels = None

HAVE_KERNELS = kernels is not None

STEP_CODES = {"fi": 0, "bi": 1, "fd": 2, "bd": 3}


def use_kernels(accelerate: bool | None) -> bool:
    if accelerate is None:
        return HAVE_KERNELS
    if accelerate and not HAVE_KERNELS:
        raise RuntimeError("compiled kernels requested but ntsearch._kernels is unavailable")
    return accelerate

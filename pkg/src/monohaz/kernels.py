"""Backend selection for the hot loops.

The compiled extension ``monohaz._kernels`` is used when it imports;
otherwise, or when the environment variable ``MONOHAZ_PURE_PYTHON`` is set
to a non-empty value other than ``0``, the pure-Python ``_pykernels`` module
is used. Both expose ``isotonic_blocks`` and ``d_statistic_batch``.
"""

import os

from . import _pykernels

pure = _pykernels

if os.environ.get("MONOHAZ_PURE_PYTHON", "") not in ("", "0"):
    compiled = None
else:
    try:
        from . import _kernels as compiled
    except ImportError:
        compiled = None

backend = compiled if compiled is not None else pure
BACKEND = backend.NAME

isotonic_blocks = backend.isotonic_blocks
d_statistic_batch = backend.d_statistic_batch

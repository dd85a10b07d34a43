"""Pick the chain/merge kernels at import time.

The compiled module is preferred when it imports cleanly; otherwise the
pure-Python twins take over with identical interfaces and conventions.
Set BLOCKKIT_FORCE_PYTHON=1 to skip the compiled module, mainly for
parity tests and benchmarks.

Both kernels draw the same random stream and make the same decisions, so
divisions, records, visit tallies, and counters agree exactly for a given
seed.  Accumulated log-posterior floats may differ in the last bits: the
kernels group their sums differently, and only agreement within the
resync drift bound is guaranteed.
"""

from __future__ import annotations

import os

if os.environ.get("BLOCKKIT_FORCE_PYTHON"):
    _core = None
else:
    try:
        from . import _core
    except ImportError:
        _core = None

if _core is not None:
    BACKEND = "compiled"
    HAS_EXT = True
    run_chain = _core.run_chain
    GreedyColumns = _core.GreedyColumns
else:
    from . import _pycore

    BACKEND = "python"
    HAS_EXT = False
    run_chain = _pycore.run_chain
    GreedyColumns = _pycore.GreedyColumns

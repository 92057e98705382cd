"""Batched hot-path kernels.

The backend is chosen once at import time from ``DQ_CONSENSUS_BACKEND``
(``numba`` or ``numpy``). ``numba`` is the default and silently falls
back to ``numpy`` when numba cannot be imported. ``DQ_CONSENSUS_THREADS``
caps the numba thread pool used by the parallel per-agent loop.
"""

import os
import warnings

from . import numpy_impl

BACKEND_ENV = "DQ_CONSENSUS_BACKEND"
THREADS_ENV = "DQ_CONSENSUS_THREADS"


def _load_backend():
    requested = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if requested not in ("numba", "numpy"):
        warnings.warn(f"unknown {BACKEND_ENV}={requested!r}, using numpy")
        return numpy_impl, "numpy"
    if requested == "numpy":
        return numpy_impl, "numpy"
    try:
        import numba
        from . import numba_impl
    except ImportError:
        return numpy_impl, "numpy"
    if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
        # the bundled tbb is often too old and only produces a warning
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    threads = os.environ.get(THREADS_ENV)
    if threads:
        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))
    return numba_impl, "numba"


impl, BACKEND = _load_backend()

dq_mul = impl.dq_mul
dq_conj = impl.dq_conj
dq_normalize = impl.dq_normalize
dq_log = impl.dq_log
dq_exp = impl.dq_exp
q_matrix = impl.q_matrix
q8_apply = impl.q8_apply
q8_batch = impl.q8_batch
formation_outputs = impl.formation_outputs
formation_rates = impl.formation_rates
exp_step = impl.exp_step
disagreement = impl.disagreement
run_free = impl.run_free


def backends():
    """Every importable backend module keyed by name (used by tests and benchmarks)."""
    out = {"numpy": numpy_impl}
    try:
        from . import numba_impl
    except ImportError:
        pass
    else:
        out["numba"] = numba_impl
    return out

"""Kernel backend selection.

numba kernels are used when numba imports and ``PTNER_DISABLE_NUMBA`` is not
set to a truthy value; otherwise the pure-numpy kernels are used. Both export
``forward, backward, marginals, viterbi, best_outside, path_score,
emission_scores, scatter_rows``.
"""
import logging
import os

from . import _numpy_kernels as numpy_backend

logger = logging.getLogger(__name__)


def _disabled() -> bool:
    return os.environ.get("PTNER_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")


numba_backend = None
if not _disabled():
    try:
        from . import _numba_kernels as numba_backend
    except ImportError:  # pragma: no cover - numba missing
        logger.info("numba unavailable, using numpy kernels")

backend = numba_backend if numba_backend is not None else numpy_backend
BACKEND_NAME = "numba" if backend is numba_backend else "numpy"

forward = backend.forward
backward = backend.backward
marginals = backend.marginals
viterbi = backend.viterbi
best_outside = backend.best_outside
path_score = backend.path_score
emission_scores = backend.emission_scores
scatter_rows = backend.scatter_rows

"""Toeplitz spectra and zeros of random holomorphic sections on the Riemann sphere."""

import os

# TBB in common images is too old for numba; prefer OpenMP, then the builtin pool.
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")

__version__ = "0.1.0"

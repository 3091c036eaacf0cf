"""Backend selection for the hot inner loops.

The compiled Cython module is used when it was built and importable;
otherwise, or when ``IHGMM_PURE_PYTHON=1`` is set, the NumPy versions are
used. Both expose ``lloyd(X, centers, max_iters, tol)`` and
``jacobi_eigh(A, max_sweeps, tol)``.
"""
import os

from . import _pykernels

python_backend = _pykernels

try:
    if os.environ.get("IHGMM_PURE_PYTHON") == "1":
        raise ImportError("pure-Python backend forced")
    from . import _ckernels as compiled_backend
except ImportError:
    compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

lloyd = backend.lloyd
jacobi_eigh = backend.jacobi_eigh

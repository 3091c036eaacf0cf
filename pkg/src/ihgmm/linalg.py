"""Dense linear algebra primitives.

Matrices are plain C-ordered (row-major) ``float64`` NumPy arrays. Data
matrices follow the column-per-observation convention, ``X`` is ``p x n``.

Sign convention for every returned basis: the largest-magnitude entry of
each column is positive, ties broken by the lowest row index.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from . import kernels
from .exceptions import ConvergenceFailure, NotSymmetric, RankDeficient, ValidationError

#: Largest order handled by the dense LAPACK path under ``method="auto"``.
DENSE_LIMIT = 512
#: Sweep cap for the Jacobi eigensolver.
JACOBI_MAX_SWEEPS = 100
#: Restart cap for the Lanczos path (multiplied by n).
LANCZOS_MAXITER_FACTOR = 10

RESIDUAL_TOL = 1e-8
ORTHO_TOL = 1e-8
SYMMETRY_TOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class EigenPairs:
    """Top eigenpairs; ``values`` descending, ``vectors[:, j]`` pairs with ``values[j]``."""

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        object.__setattr__(self, "vectors", _frozen(self.vectors))


@dataclass(frozen=True)
class SvdFactors:
    """Truncated SVD ``a ~= left @ diag(singulars) @ right.T``."""

    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "left", _frozen(self.left))
        object.__setattr__(self, "singulars", _frozen(self.singulars))
        object.__setattr__(self, "right", _frozen(self.right))


def sign_flips(vectors):
    """Per-column signs (+1/-1) that make the largest-magnitude entry positive."""
    vectors = np.asarray(vectors)
    idx = np.argmax(np.abs(vectors), axis=0)
    lead = vectors[idx, np.arange(vectors.shape[1])]
    return np.where(lead < 0, -1.0, 1.0)


def fix_signs(vectors):
    return np.asarray(vectors) * sign_flips(vectors)


def qr_orthonormal_columns(m):
    """Orthonormal basis of the column span of ``m`` (``p x K``, ``p >= K``).

    Raises RankDeficient when a pivot of R is below ``1e-12`` times the
    norm of the corresponding input column.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValidationError("expected a 2-D matrix")
    p, K = m.shape
    if p < K:
        raise ValidationError(f"need p >= K, got p={p}, K={K}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    q, r = np.linalg.qr(m, mode="reduced")
    norms = np.linalg.norm(m, axis=0)
    piv = np.abs(np.diag(r))
    if np.any(norms == 0) or np.any(piv < 1e-12 * norms):
        raise RankDeficient("input columns are linearly dependent")
    return fix_signs(q)


def _check_symmetric(a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    fro = np.linalg.norm(a)
    if np.linalg.norm(a - a.T) > SYMMETRY_TOL * fro:
        raise NotSymmetric("matrix is not symmetric within 1e-10 relative tolerance")
    return 0.5 * (a + a.T), fro


def _pick(values, vectors, k, which):
    if which == "algebraic":
        order = np.argsort(-values, kind="stable")[:k]
    else:
        order = np.argsort(-np.abs(values), kind="stable")[:k]
    values, vectors = values[order], vectors[:, order]
    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]


def _dense(a, k, which):
    n = a.shape[0]
    if which == "algebraic":
        w, v = scipy.linalg.eigh(a, subset_by_index=[n - k, n - 1], driver="evr")
        return _pick(w, v, k, which)
    w, v = scipy.linalg.eigh(a, driver="evd")
    return _pick(w, v, k, which)


def _lanczos(a, k, which):
    n = a.shape[0]
    # deterministic, generic start vector
    v0 = 1.0 + np.sin(np.arange(1, n + 1) * 0.7071067811865476)
    ncv = min(n, max(2 * k + 1, k + 20))
    w, v = eigsh(
        a,
        k=k,
        which="LA" if which == "algebraic" else "LM",
        v0=v0,
        ncv=ncv,
        maxiter=LANCZOS_MAXITER_FACTOR * n,
        tol=0,
    )
    return _pick(w, v, k, which)


def _jacobi(a, k, which):
    out = kernels.jacobi_eigh(a, JACOBI_MAX_SWEEPS, 1e-14)
    if out is None:
        raise ConvergenceFailure(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")
    w, v, _ = out
    return _pick(w, v, k, which)


def _contract_ok(a, fro, w, v):
    k = v.shape[1]
    res = np.linalg.norm(a @ v - v * w, axis=0)
    ortho = np.linalg.norm(v.T @ v - np.eye(k))
    return bool(np.all(res <= RESIDUAL_TOL * max(1.0, fro)) and ortho <= ORTHO_TOL)


def sym_top_k_eigs(a, k, which="algebraic", method="auto"):
    """Top-``k`` eigenpairs of a symmetric matrix.

    Parameters
    ----------
    a : (n, n) array_like
        Symmetric within ``1e-10`` relative Frobenius tolerance.
    k : int
        Number of pairs, ``1 <= k <= n``.
    which : {"algebraic", "magnitude"}
        Select the algebraically largest eigenvalues (default) or those of
        largest absolute value. Output is sorted descending by value either way.
    method : {"auto", "dense", "lanczos", "jacobi"}
        ``auto`` uses LAPACK for ``n <= DENSE_LIMIT`` and implicitly
        restarted Lanczos (ARPACK) above, falling back to LAPACK if the
        Lanczos result misses the residual contract.

    Every result is checked against ``||A u - lambda u|| <= 1e-8 max(1, ||A||_F)``
    and ``||U^T U - I||_F <= 1e-8``; ConvergenceFailure is raised otherwise.
    """
    a, fro = _check_symmetric(a)
    n = a.shape[0]
    if not 1 <= k <= n:
        raise ValidationError(f"need 1 <= k <= n, got k={k}, n={n}")
    if which not in ("algebraic", "magnitude"):
        raise ValidationError(f"unknown selection {which!r}")
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT or k >= n - 1 else "lanczos"

    if method == "lanczos":
        try:
            w, v = _lanczos(a, k, which)
        except (ArpackNoConvergence, ArpackError):
            w = v = None
        if w is None or not _contract_ok(a, fro, w, v):
            w, v = _dense(a, k, which)
    elif method == "dense":
        w, v = _dense(a, k, which)
    elif method == "jacobi":
        w, v = _jacobi(a, k, which)
    else:
        raise ValidationError(f"unknown method {method!r}")

    v = fix_signs(v)
    if not _contract_ok(a, fro, w, v):
        raise ConvergenceFailure("eigenpairs miss the residual/orthonormality contract")
    return EigenPairs(values=w, vectors=v)


def thin_svd(a, k, method="auto"):
    """Top-``k`` singular triplets of a ``p x n`` matrix.

    ``method="lapack"`` truncates a full LAPACK SVD; ``"gram"`` diagonalises
    the smaller of ``A A^T`` and ``A^T A`` with :func:`sym_top_k_eigs`.
    ``auto`` picks LAPACK when ``min(p, n) <= DENSE_LIMIT``. Signs follow
    the package convention on the right singular vectors.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValidationError("expected a 2-D matrix")
    p, n = a.shape
    if not 1 <= k <= min(p, n):
        raise ValidationError(f"need 1 <= k <= min(p, n), got k={k}, shape={a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    if method == "auto":
        method = "lapack" if min(p, n) <= DENSE_LIMIT else "gram"

    if method == "gram":
        out = _gram_svd(a, k)
        if out is None:
            method = "lapack"
        else:
            left, s, right = out
    if method == "lapack":
        try:
            u, s, vt = np.linalg.svd(a, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceFailure(str(exc)) from exc
        left, s, right = u[:, :k], s[:k], vt[:k].T
    elif method != "gram":
        raise ValidationError(f"unknown method {method!r}")

    flips = sign_flips(right)
    return SvdFactors(left=left * flips, singulars=s, right=right * flips)


def _gram_svd(a, k):
    p, n = a.shape
    if p <= n:
        eig = sym_top_k_eigs(a @ a.T, k)
        lam = eig.values
        if lam[-1] <= 1e-12 * max(lam[0], 1e-300):
            return None
        s = np.sqrt(lam)
        left = np.array(eig.vectors)
        right = (a.T @ left) / s
    else:
        eig = sym_top_k_eigs(a.T @ a, k)
        lam = eig.values
        if lam[-1] <= 1e-12 * max(lam[0], 1e-300):
            return None
        s = np.sqrt(lam)
        right = np.array(eig.vectors)
        left = (a @ right) / s
    return left, s, right

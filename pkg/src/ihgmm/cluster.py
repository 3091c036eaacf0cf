"""K-means, the hollowed-Gram spectral method and its baselines.

All estimators take the ``p x n`` data matrix (one column per observation)
and return 0-based labels.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .exceptions import DegenerateCenters, ValidationError
from .linalg import EigenPairs, sym_top_k_eigs, thin_svd
from .rng import as_generator

#: Rows of the eigenvector matrix shorter than this are left unnormalised.
ZERO_ROW_TOL = 1e-12


@dataclass(frozen=True)
class KMeansConfig:
    """Lloyd settings: best of ``restarts`` k-means++ seeded runs.

    A run stops after ``max_iters`` updates or once the within-cluster sum
    of squares falls by no more than ``tol`` relative to its previous value.
    """

    restarts: int = 20
    max_iters: int = 300
    tol: float = 1e-9

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1 or self.tol < 0:
            raise ValidationError("need restarts >= 1, max_iters >= 1, tol >= 0")


@dataclass(frozen=True)
class LabelEstimate:
    z_hat: np.ndarray
    method: str
    inertia: float = float("nan")


@dataclass(frozen=True)
class HollowedSpectral:
    """Intermediates of the spectral method, kept for inspection."""

    gram: np.ndarray
    eigen: EigenPairs
    normalized: np.ndarray
    zero_rows: np.ndarray


def hollow_gram(x):
    """``X^T X`` with its diagonal set to zero, exactly symmetric."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] < 2:
        raise ValidationError("need a p x n matrix with n >= 2")
    G = x.T @ x
    G = np.triu(G, 1)
    G += G.T
    return G


def row_normalize(U):
    """Scale every row to unit length; near-zero rows stay as they are.

    Returns the normalised matrix and a mask of the rows left untouched.
    """
    U = np.asarray(U, dtype=np.float64)
    norms = np.linalg.norm(U, axis=1)
    zero = norms < ZERO_ROW_TOL
    out = U.copy()
    out[~zero] /= norms[~zero, None]
    return out, zero


def kmeans_plusplus(points, K, rng):
    """D^2-weighted seeding; returns ``K`` rows of ``points``."""
    n = points.shape[0]
    idx = [int(rng.integers(n))]
    diff = points - points[idx[0]]
    d2 = np.einsum("ij,ij->i", diff, diff)
    for _ in range(1, K):
        total = d2.sum()
        if total > 0:
            c = np.cumsum(d2)
            i = int(np.searchsorted(c, rng.random() * c[-1], side="right"))
            i = min(i, n - 1)
        else:
            i = int(rng.integers(n))
        idx.append(i)
        diff = points - points[i]
        np.minimum(d2, np.einsum("ij,ij->i", diff, diff), out=d2)
    return points[idx].copy()


def _check_monotone(history, scale=0.0):
    # relative slack, plus an absolute floor for objectives at rounding level
    h = np.asarray(history)
    slack = 1e-10 * h[:-1] + 64 * np.finfo(float).eps * scale
    if np.any(h[1:] > h[:-1] + slack):
        raise AssertionError("Lloyd objective increased between iterations")


def kmeans(points, K, cfg=KMeansConfig(), rng=None):
    """Best-of-restarts Lloyd clustering of the rows of ``points``.

    Empty clusters are reseeded at the point farthest from its centroid.
    The run with the smallest within-cluster sum of squares wins; earlier
    restarts win ties.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValidationError("points must be an n x d matrix")
    n = points.shape[0]
    if not 1 <= K <= n:
        raise ValidationError(f"need 1 <= K <= n, got K={K}, n={n}")
    rng = as_generator(rng)
    scale = float(np.einsum("ij,ij->", points, points))
    best_labels, best_ss = None, np.inf
    for _ in range(cfg.restarts):
        init = kmeans_plusplus(points, K, rng)
        labels, _, history = kernels.lloyd(points, init, cfg.max_iters, cfg.tol)
        _check_monotone(history, scale)
        if history[-1] < best_ss:
            best_labels, best_ss = labels, float(history[-1])
    return LabelEstimate(z_hat=np.asarray(best_labels, dtype=np.intp), method="KMeans", inertia=best_ss)


def _check_k(x, K, lo=1):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValidationError("expected a p x n data matrix")
    if not lo <= K <= x.shape[1]:
        raise ValidationError(f"need {lo} <= K <= n, got K={K}, n={x.shape[1]}")
    return x


def ihsc(x, K, cfg=KMeansConfig(), rng=None, which="algebraic"):
    """Spectral clustering on the hollowed Gram matrix.

    Hollow ``X^T X``, take its top-``K`` eigenvectors, normalise their rows
    and run k-means on them. Returns the label estimate together with the
    intermediates.
    """
    x = _check_k(x, K, lo=2)
    G = hollow_gram(x)
    eig = sym_top_k_eigs(G, K, which=which)
    normalized, zero = row_normalize(eig.vectors)
    est = kmeans(normalized, K, cfg, rng)
    spec = HollowedSpectral(gram=G, eigen=eig, normalized=normalized, zero_rows=zero)
    return LabelEstimate(est.z_hat, "IhSC", est.inertia), spec


def psc(x, K, cfg=KMeansConfig(), rng=None):
    """k-means on the observations projected onto the top-``K`` left singular subspace."""
    x = _check_k(x, K)
    svd = thin_svd(x, K)
    est = kmeans(np.asarray(svd.right) * svd.singulars, K, cfg, rng)
    return LabelEstimate(est.z_hat, "PSC", est.inertia)


def kmeans_raw(x, K, cfg=KMeansConfig(), rng=None):
    """k-means directly on the observations (columns of ``x``)."""
    x = _check_k(x, K)
    est = kmeans(x.T, K, cfg, rng)
    return LabelEstimate(est.z_hat, "KMeansRaw", est.inertia)


def ideal_oracle(truth, cfg=KMeansConfig(), rng=None):
    """Cluster the noiseless signal: right singular vectors, row-normalised, k-means."""
    K = truth.K
    if truth.p < K:
        raise DegenerateCenters("centers cannot have full column rank when p < K")
    s = thin_svd(truth.centers, K).singulars
    if s[-1] <= 1e-12 * s[0]:
        raise DegenerateCenters("centers do not have full column rank")
    U = thin_svd(truth.signal, K).right
    normalized, _ = row_normalize(U)
    est = kmeans(normalized, K, cfg, rng)
    return LabelEstimate(est.z_hat, "IdealOracle", est.inertia)


#: CLI/config names of the data-driven estimators.
METHODS = {
    "ihsc": lambda x, K, cfg, rng: ihsc(x, K, cfg, rng)[0],
    "psc": psc,
    "kmeans": kmeans_raw,
}
METHOD_LABELS = {"ihsc": "IhSC", "psc": "PSC", "kmeans": "KMeansRaw"}

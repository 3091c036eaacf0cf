"""Pure-NumPy twins of the compiled kernels in ``_ckernels.pyx``."""
import numpy as np


def _assign(X, C):
    dist = np.empty((C.shape[0], X.shape[0]))
    for k in range(C.shape[0]):
        diff = X - C[k]
        dist[k] = np.einsum("ij,ij->i", diff, diff)
    labels = np.argmin(dist, axis=0)
    d = dist[labels, np.arange(X.shape[0])]
    return labels.astype(np.intp), d


def _repair_and_update(X, C, labels, dist):
    K = C.shape[0]
    counts = np.bincount(labels, minlength=K)
    for k in range(K):
        if counts[k] > 0:
            continue
        spare = counts[labels] >= 2
        if not spare.any():
            continue
        cand = np.where(spare, dist, -1.0)
        far = int(np.argmax(cand))
        counts[labels[far]] -= 1
        labels[far] = k
        dist[far] = 0.0
        counts[k] = 1
    sums = np.zeros_like(C)
    np.add.at(sums, labels, X)
    nz = counts > 0
    C = sums
    C[nz] /= counts[nz, None]
    return C


def lloyd(X, centers, max_iters, tol):
    """Run Lloyd iterations from ``centers``.

    Returns ``(labels, centers, history)`` with the within-cluster sum of
    squares recorded after every assignment step.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    C = np.array(centers, dtype=np.float64, order="C", copy=True)
    labels, dist = _assign(X, C)
    ss = float(dist.sum())
    history = [ss]
    for _ in range(max_iters):
        C = _repair_and_update(X, C, labels, dist)
        labels, dist = _assign(X, C)
        new_ss = float(dist.sum())
        history.append(new_ss)
        if ss - new_ss <= tol * ss:
            break
        ss = new_ss
    return labels, C, np.asarray(history)


def jacobi_eigh(A, max_sweeps, tol):
    """Cyclic Jacobi diagonalisation; returns ``(values, vectors, sweeps)`` or None."""
    a = np.array(A, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    fro = np.sqrt(np.sum(a * a))
    iu = np.triu_indices(n, 1)
    for sweep in range(max_sweeps + 1):
        off = np.sqrt(2.0 * np.sum(a[iu] ** 2))
        if off <= tol * fro:
            return np.diag(a).copy(), v, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q]
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                rowp = a[p, :].copy()
                rowq = a[q, :]
                a[p, :] = c * rowp - s * rowq
                a[q, :] = s * rowp + c * rowq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return None

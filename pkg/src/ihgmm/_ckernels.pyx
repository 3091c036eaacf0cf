# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: Lloyd iterations and the cyclic Jacobi eigensolver.

The pure-NumPy twin lives in ``_pykernels.py`` and implements the same
arithmetic in the same order wherever that is cheap to do.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


cdef double _assign(const double[:, ::1] X, const double[:, ::1] C,
                    Py_ssize_t[::1] labels, double[::1] dist) noexcept nogil:
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], K = C.shape[0]
    cdef Py_ssize_t i, j, k, best
    cdef double acc, diff, best_d, total = 0.0
    for i in range(n):
        best = 0
        best_d = 0.0
        for k in range(K):
            acc = 0.0
            for j in range(d):
                diff = X[i, j] - C[k, j]
                acc += diff * diff
            if k == 0 or acc < best_d:
                best_d = acc
                best = k
        labels[i] = best
        dist[i] = best_d
        total += best_d
    return total


cdef void _repair_and_update(const double[:, ::1] X, double[:, ::1] C,
                             Py_ssize_t[::1] labels, double[::1] dist,
                             Py_ssize_t[::1] counts) noexcept nogil:
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], K = C.shape[0]
    cdef Py_ssize_t i, j, k, far
    cdef double far_d
    for k in range(K):
        counts[k] = 0
    for i in range(n):
        counts[labels[i]] += 1
    # empty cluster: steal the point farthest from its centroid, taken only
    # from clusters that can spare one
    for k in range(K):
        if counts[k] > 0:
            continue
        far = -1
        far_d = -1.0
        for i in range(n):
            if counts[labels[i]] >= 2 and dist[i] > far_d:
                far_d = dist[i]
                far = i
        if far < 0:
            continue
        counts[labels[far]] -= 1
        labels[far] = k
        dist[far] = 0.0
        counts[k] = 1
    for k in range(K):
        for j in range(d):
            C[k, j] = 0.0
    for i in range(n):
        k = labels[i]
        for j in range(d):
            C[k, j] += X[i, j]
    for k in range(K):
        if counts[k] > 0:
            for j in range(d):
                C[k, j] /= counts[k]


def lloyd(X, centers, Py_ssize_t max_iters, double tol):
    """Run Lloyd iterations from ``centers``.

    Returns ``(labels, centers, history)`` where ``history`` holds the
    within-cluster sum of squares after every assignment step.
    """
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    C_arr = np.array(centers, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] C = C_arr
    cdef Py_ssize_t n = Xv.shape[0], K = C.shape[0]
    labels_arr = np.zeros(n, dtype=np.intp)
    dist_arr = np.zeros(n, dtype=np.float64)
    counts_arr = np.zeros(K, dtype=np.intp)
    cdef Py_ssize_t[::1] labels = labels_arr
    cdef double[::1] dist = dist_arr
    cdef Py_ssize_t[::1] counts = counts_arr
    cdef double ss, new_ss
    cdef Py_ssize_t it

    history = []
    with nogil:
        ss = _assign(Xv, C, labels, dist)
    history.append(ss)
    for it in range(max_iters):
        with nogil:
            _repair_and_update(Xv, C, labels, dist, counts)
            new_ss = _assign(Xv, C, labels, dist)
        history.append(new_ss)
        if ss - new_ss <= tol * ss:
            break
        ss = new_ss
    return labels_arr, C_arr, np.asarray(history)


def jacobi_eigh(A, Py_ssize_t max_sweeps, double tol):
    """Cyclic Jacobi diagonalisation of a symmetric matrix.

    Returns ``(values, vectors, sweeps)``; eigenvalues are unsorted and
    ``vectors[:, j]`` pairs with ``values[j]``.
    """
    a_arr = np.array(A, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] a = a_arr
    cdef Py_ssize_t n = a.shape[0]
    v_arr = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] v = v_arr
    cdef Py_ssize_t p, q, k, sweep
    cdef double fro = 0.0, off, apq, theta, t, c, s, akp, akq
    cdef bint converged = False

    for p in range(n):
        for q in range(n):
            fro += a[p, q] * a[p, q]
    fro = sqrt(fro)

    with nogil:
        for sweep in range(max_sweeps + 1):
            off = 0.0
            for p in range(n):
                for q in range(p + 1, n):
                    off += 2.0 * a[p, q] * a[p, q]
            if sqrt(off) <= tol * fro:
                converged = True
                break
            if sweep == max_sweeps:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                    if theta >= 0.0:
                        t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                    else:
                        t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(n):
                        akp = a[k, p]
                        akq = a[k, q]
                        a[k, p] = c * akp - s * akq
                        a[k, q] = s * akp + c * akq
                    for k in range(n):
                        akp = a[p, k]
                        akq = a[q, k]
                        a[p, k] = c * akp - s * akq
                        a[q, k] = s * akp + c * akq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for k in range(n):
                        akp = v[k, p]
                        akq = v[k, q]
                        v[k, p] = c * akp - s * akq
                        v[k, q] = s * akp + c * akq
    if not converged:
        return None
    return np.diag(a_arr).copy(), v_arr, sweep

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the hot loops: per-patch dispersion statistics, the
inverse-block reveal loop, and the similarity-graph eigensolve. Mirrors
``specmask._kernels_py``."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"

MAD = 0
STD = 1
ENERGY = 2


def patch_stats(const double[:, ::1] data, Py_ssize_t fp, Py_ssize_t tp,
                Py_ssize_t ph, Py_ssize_t pw, int metric):
    """Per-patch dispersion over an (n_mels, n_frames) array."""
    if metric not in (MAD, STD, ENERGY):
        raise ValueError(f"unknown metric id {metric}")
    cdef Py_ssize_t L = fp * tp
    cdef cnp.ndarray[double, ndim=1] out = np.empty(L, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef Py_ssize_t r, c, i, j, base_r, base_c
    cdef double n = <double>(ph * pw)
    cdef double acc, dev, mean, v
    for r in range(fp):
        base_r = r * ph
        for c in range(tp):
            base_c = c * pw
            acc = 0.0
            if metric == ENERGY:
                for i in range(ph):
                    for j in range(pw):
                        v = data[base_r + i, base_c + j]
                        acc += v * v
                out_v[r * tp + c] = acc / n
                continue
            for i in range(ph):
                for j in range(pw):
                    acc += data[base_r + i, base_c + j]
            mean = acc / n
            dev = 0.0
            if metric == MAD:
                for i in range(ph):
                    for j in range(pw):
                        dev += fabs(data[base_r + i, base_c + j] - mean)
                out_v[r * tp + c] = dev / n
            else:
                for i in range(ph):
                    for j in range(pw):
                        v = data[base_r + i, base_c + j] - mean
                        dev += v * v
                out_v[r * tp + c] = sqrt(dev / n)
    return out


def reveal_blocks(unsigned char[:, ::1] visible, const long long[::1] rows,
                  const long long[::1] cols, Py_ssize_t block_h, Py_ssize_t block_w,
                  long long n_keep, long long count):
    """Reveal anchored, edge-clipped blocks until n_keep cells are visible
    or the anchor batch runs out. Mutates ``visible`` in place."""
    cdef Py_ssize_t fp = visible.shape[0]
    cdef Py_ssize_t tp = visible.shape[1]
    cdef Py_ssize_t used = 0
    cdef Py_ssize_t a, r, c, r0, c0, r1, c1
    for a in range(rows.shape[0]):
        r0 = <Py_ssize_t>rows[a]
        c0 = <Py_ssize_t>cols[a]
        r1 = r0 + block_h
        c1 = c0 + block_w
        if r1 > fp:
            r1 = fp
        if c1 > tp:
            c1 = tp
        for r in range(r0, r1):
            for c in range(c0, c1):
                if visible[r, c] == 0:
                    visible[r, c] = 1
                    count += 1
        used = a + 1
        if count >= n_keep:
            break
    return count, used


cdef Py_ssize_t _sturm_count(double[::1] d, double[::1] e, Py_ssize_t n,
                             double x, double pivmin) nogil:
    """Number of eigenvalues of the symmetric tridiagonal (d, e) below x."""
    cdef Py_ssize_t i, cnt = 0
    cdef double q = 1.0
    for i in range(n):
        if i == 0:
            q = d[0] - x
        else:
            q = d[i] - x - (e[i - 1] * e[i - 1]) / q
        if fabs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            cnt += 1
    return cnt


cdef double _bisect_eigenvalue(double[::1] d, double[::1] e, Py_ssize_t n,
                               Py_ssize_t idx, double lo, double hi,
                               double pivmin) nogil:
    """Eigenvalue of rank ``idx`` (0-based, ascending) by Sturm bisection."""
    cdef Py_ssize_t it
    cdef double mid
    for it in range(100):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _sturm_count(d, e, n, mid, pivmin) <= idx:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fiedler_vector(const double[:, ::1] matrix):
    """Second-smallest eigenpair of a real symmetric matrix.

    Householder tridiagonalization, Sturm-sequence bisection for the rank-1
    eigenvalue, inverse iteration on the tridiagonal form, and a reflector
    back-transform. No BLAS calls and fixed iteration/pivot rules, so the
    result does not depend on which linear-algebra library a host happens
    to ship; unblocked arithmetic keeps the per-element cost flat.
    Returns ``(eigenvalue, unit_vector)``; the sign of the vector is
    unspecified.
    """
    cdef Py_ssize_t n = matrix.shape[0]
    if matrix.shape[1] != n:
        raise ValueError("matrix must be square")
    if n < 2:
        raise ValueError("need at least a 2x2 matrix")

    cdef cnp.ndarray[double, ndim=2] a_arr = np.array(matrix, dtype=np.float64, order="C")
    cdef double[:, ::1] a = a_arr
    cdef cnp.ndarray[double, ndim=1] d_arr = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] e_arr = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] w_arr = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] x_arr = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[unsigned char, ndim=1] ref_arr = np.zeros(n, dtype=np.uint8)
    cdef double[::1] d = d_arr
    cdef double[::1] e = e_arr
    cdef double[::1] w = w_arr
    cdef double[::1] x = x_arr
    cdef unsigned char[::1] has_ref = ref_arr

    cdef Py_ssize_t k, i, j
    cdef double tail2, x0, alpha, v0, vnorm, acc, tau, vi, ui

    # --- Householder tridiagonalization; unit reflectors kept in a[k+1:, k]
    for k in range(n - 2):
        tail2 = 0.0
        for i in range(k + 2, n):
            tail2 += a[i, k] * a[i, k]
        x0 = a[k + 1, k]
        if tail2 == 0.0:
            e[k] = x0
            continue
        alpha = sqrt(tail2 + x0 * x0)
        if x0 >= 0.0:
            alpha = -alpha
        v0 = x0 - alpha
        vnorm = sqrt(v0 * v0 + tail2)
        a[k + 1, k] = v0 / vnorm
        for i in range(k + 2, n):
            a[i, k] = a[i, k] / vnorm
        e[k] = alpha
        has_ref[k] = 1
        # w = B v over the trailing block, read from the lower triangle
        for i in range(k + 1, n):
            w[i] = 0.0
        for i in range(k + 1, n):
            vi = a[i, k]
            acc = 0.0
            for j in range(k + 1, i):
                acc += a[i, j] * a[j, k]
                w[j] += a[i, j] * vi
            w[i] += acc + a[i, i] * vi
        tau = 0.0
        for i in range(k + 1, n):
            tau += a[i, k] * w[i]
        # B -= v u^T + u v^T with u = 2w - 2 tau v (lower triangle only)
        for i in range(k + 1, n):
            w[i] = 2.0 * w[i] - 2.0 * tau * a[i, k]
        for i in range(k + 1, n):
            vi = a[i, k]
            ui = w[i]
            for j in range(k + 1, i + 1):
                a[i, j] -= vi * w[j] + ui * a[j, k]

    for i in range(n):
        d[i] = a[i, i]
    e[n - 2] = a[n - 1, n - 2]

    # --- Gershgorin bracket and bisection safeguard
    cdef double lo = d[0], hi = d[0], radius, emax2 = 0.0, pad
    for i in range(n):
        radius = 0.0
        if i > 0:
            radius += fabs(e[i - 1])
        if i < n - 1:
            radius += fabs(e[i])
        if d[i] - radius < lo:
            lo = d[i] - radius
        if d[i] + radius > hi:
            hi = d[i] + radius
    for i in range(n - 1):
        if e[i] * e[i] > emax2:
            emax2 = e[i] * e[i]
    cdef double pivmin = 1e-290
    if emax2 * 1e-290 > pivmin:
        pivmin = emax2 * 1e-290
    pad = 1e-12 * (fabs(lo) + fabs(hi) + 1.0)
    lo -= pad
    hi += pad

    cdef double lam = _bisect_eigenvalue(d, e, n, 1, lo, hi, pivmin)

    # --- factor (T - lam I) once: tridiagonal LU with row pivoting
    cdef cnp.ndarray[double, ndim=1] dl_arr = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] dd_arr = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] du_arr = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] du2_arr = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[unsigned char, ndim=1] piv_arr = np.zeros(n, dtype=np.uint8)
    cdef double[::1] dl = dl_arr
    cdef double[::1] dd = dd_arr
    cdef double[::1] du = du_arr
    cdef double[::1] du2 = du2_arr
    cdef unsigned char[::1] piv = piv_arr

    cdef double tnorm = fabs(hi) if fabs(hi) > fabs(lo) else fabs(lo)
    cdef double floor_piv = 1e-20 * (tnorm + 1e-300)
    cdef double fact, tmp
    for i in range(n):
        dd[i] = d[i] - lam
    for i in range(n - 1):
        dl[i] = e[i]
        du[i] = e[i]
    for i in range(n - 1):
        if fabs(dd[i]) >= fabs(dl[i]):
            if fabs(dd[i]) < floor_piv:
                dd[i] = floor_piv if dd[i] >= 0.0 else -floor_piv
            fact = dl[i] / dd[i]
            dl[i] = fact
            dd[i + 1] -= fact * du[i]
        else:
            fact = dd[i] / dl[i]
            dd[i] = dl[i]
            dl[i] = fact
            tmp = dd[i + 1]
            dd[i + 1] = du[i] - fact * tmp
            du[i] = tmp
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du[i + 1]
            piv[i] = 1
    if fabs(dd[n - 1]) < floor_piv:
        dd[n - 1] = floor_piv if dd[n - 1] >= 0.0 else -floor_piv

    # --- inverse iteration from a fixed integer-hash start vector
    cdef unsigned long long z
    for i in range(n):
        z = (<unsigned long long>(i + 1)) * 0x9E3779B97F4A7C15ULL
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
        z = z ^ (z >> 31)
        x[i] = ((<double>(z >> 11)) * (1.0 / 9007199254740992.0)) - 0.5

    cdef Py_ssize_t sweep
    cdef double peak, nrm
    for sweep in range(4):
        # forward substitution with the recorded row swaps
        for i in range(n - 1):
            if piv[i] == 0:
                x[i + 1] -= dl[i] * x[i]
            else:
                tmp = x[i]
                x[i] = x[i + 1]
                x[i + 1] = tmp - dl[i] * x[i]
        # back substitution
        x[n - 1] /= dd[n - 1]
        if n >= 2:
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / dd[n - 2]
        for i in range(n - 3, -1, -1):
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / dd[i]
        # scale by the peak first so the norm cannot overflow
        peak = 0.0
        for i in range(n):
            if fabs(x[i]) > peak:
                peak = fabs(x[i])
        if peak == 0.0:
            x[0] = 1.0
            peak = 1.0
        nrm = 0.0
        for i in range(n):
            x[i] /= peak
            nrm += x[i] * x[i]
        nrm = sqrt(nrm)
        for i in range(n):
            x[i] /= nrm

    # --- back-transform through the stored reflectors
    for k in range(n - 3, -1, -1):
        if not has_ref[k]:
            continue
        acc = 0.0
        for i in range(k + 1, n):
            acc += a[i, k] * x[i]
        acc *= 2.0
        for i in range(k + 1, n):
            x[i] -= acc * a[i, k]

    nrm = 0.0
    for i in range(n):
        nrm += x[i] * x[i]
    nrm = sqrt(nrm)
    for i in range(n):
        x[i] /= nrm
    return lam, x_arr

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled QZ kernels; operation-for-operation port of ``_qz_py``."""
from libc.math cimport fabs, hypot, sqrt, copysign

import numpy as np

ctypedef fused scalar_t:
    double
    double complex

cdef double EPS = 2.0 ** -52

OK = 0
COMPLEX_PAIR = 1
NO_CONVERGENCE = 2


cdef enum:
    OK_C = 0
    COMPLEX_PAIR_C = 1
    NO_CONVERGENCE_C = 2


cdef inline double cabs_(double complex z) noexcept nogil:
    return hypot(z.real, z.imag)


cdef inline double mag(scalar_t x) noexcept nogil:
    if scalar_t is double:
        return fabs(x)
    else:
        return hypot(x.real, x.imag)


cdef inline scalar_t conj(scalar_t x) noexcept nogil:
    if scalar_t is double:
        return x
    else:
        return x.conjugate()


cdef inline double complex csqrt_(double complex z) noexcept nogil:
    cdef double r = hypot(z.real, z.imag)
    cdef double re = sqrt(0.5 * (r + z.real))
    cdef double im = sqrt(0.5 * (r - z.real))
    if z.imag < 0:
        im = -im
    return re + 1j * im


cdef inline void lartg(scalar_t f, scalar_t g, double *c, scalar_t *s) noexcept nogil:
    cdef double af, ag, rho
    cdef scalar_t ph
    if g == 0:
        c[0] = 1.0
        s[0] = 0
        return
    ag = mag(g)
    if f == 0:
        c[0] = 0.0
        s[0] = conj(g) / ag
        return
    af = mag(f)
    rho = hypot(af, ag)
    ph = f / af
    c[0] = af / rho
    s[0] = ph * conj(g) / rho


cdef inline void rot_rows(scalar_t[:, ::1] a, Py_ssize_t i, Py_ssize_t j, double c, scalar_t s) noexcept nogil:
    cdef Py_ssize_t k
    cdef scalar_t ai, aj
    cdef scalar_t sc = conj(s)
    for k in range(a.shape[1]):
        ai = a[i, k]
        aj = a[j, k]
        a[i, k] = c * ai + s * aj
        a[j, k] = c * aj - sc * ai


cdef inline void rot_cols(scalar_t[:, ::1] a, Py_ssize_t i, Py_ssize_t j, double c, scalar_t s) noexcept nogil:
    cdef Py_ssize_t k
    cdef scalar_t ai, aj
    cdef scalar_t sc = conj(s)
    for k in range(a.shape[0]):
        ai = a[k, i]
        aj = a[k, j]
        a[k, i] = c * ai - sc * aj
        a[k, j] = s * ai + c * aj


cdef inline void left(scalar_t[:, ::1] H, scalar_t[:, ::1] T, scalar_t[:, ::1] Q,
                      Py_ssize_t i, Py_ssize_t j, double c, scalar_t s) noexcept nogil:
    rot_rows(H, i, j, c, s)
    rot_rows(T, i, j, c, s)
    rot_rows(Q, i, j, c, s)


cdef inline void right(scalar_t[:, ::1] H, scalar_t[:, ::1] T, scalar_t[:, ::1] Z,
                       Py_ssize_t i, Py_ssize_t j, double c, scalar_t s) noexcept nogil:
    rot_cols(H, i, j, c, s)
    rot_cols(T, i, j, c, s)
    rot_cols(Z, i, j, c, s)


cdef void _ht_reduce(scalar_t[:, ::1] H, scalar_t[:, ::1] T, scalar_t[:, ::1] Q,
                     scalar_t[:, ::1] Z) noexcept nogil:
    cdef Py_ssize_t n = H.shape[0]
    cdef Py_ssize_t i, j
    cdef double c
    cdef scalar_t s
    for j in range(n - 2):
        for i in range(n - 1, j + 1, -1):
            lartg(H[i - 1, j], H[i, j], &c, &s)
            left(H, T, Q, i - 1, i, c, s)
            H[i, j] = 0
            lartg(T[i, i], T[i, i - 1], &c, &s)
            right(H, T, Z, i - 1, i, c, s)
            T[i, i - 1] = 0


def ht_reduce(H, T, Q, Z):
    """Reduce ``H`` to upper Hessenberg form, keeping ``T`` upper triangular."""
    cdef double complex[:, ::1] hc, tc, qc, zc
    cdef double[:, ::1] hr, tr, qr, zr
    if np.iscomplexobj(H):
        hc, tc, qc, zc = H, T, Q, Z
        _ht_reduce(hc, tc, qc, zc)
    else:
        hr, tr, qr, zr = H, T, Q, Z
        _ht_reduce(hr, tr, qr, zr)


cdef double pencil2_roots(scalar_t h00, scalar_t h01, scalar_t h10, scalar_t h11,
                          scalar_t t00, scalar_t t01, scalar_t t11,
                          scalar_t *r1, scalar_t *r2) noexcept nogil:
    # returns Re(disc); for the real field with disc < 0 both roots are the real part
    cdef scalar_t a = t00 * t11
    cdef scalar_t b = -(h00 * t11 + h11 * t00 - h10 * t01)
    cdef scalar_t cc = h00 * h11 - h01 * h10
    cdef scalar_t disc = b * b - 4.0 * a * cc
    cdef scalar_t sq, q
    if scalar_t is double:
        if disc < 0:
            r1[0] = -b / (2.0 * a)
            r2[0] = r1[0]
            return disc
        sq = sqrt(disc)
        q = -0.5 * (b + copysign(sq, b))
    else:
        sq = csqrt_(disc)
        if (b.conjugate() * sq).real < 0:
            sq = -sq
        q = -0.5 * (b + sq)
    if q == 0:
        r1[0] = 0
        r2[0] = 0
    else:
        r1[0] = q / a
        r2[0] = cc / q
    if scalar_t is double:
        return disc
    else:
        return disc.real


cdef void chase_zero(scalar_t[:, ::1] H, scalar_t[:, ::1] T, scalar_t[:, ::1] Q,
                     scalar_t[:, ::1] Z, Py_ssize_t k, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    cdef Py_ssize_t j
    cdef double c
    cdef scalar_t s
    for j in range(k, hi):
        lartg(T[j, j + 1], T[j + 1, j + 1], &c, &s)
        left(H, T, Q, j, j + 1, c, s)
        T[j + 1, j + 1] = 0
        if j > lo:
            lartg(H[j + 1, j], H[j + 1, j - 1], &c, &s)
            right(H, T, Z, j - 1, j, c, s)
            H[j + 1, j - 1] = 0
    lartg(H[hi, hi], H[hi, hi - 1], &c, &s)
    right(H, T, Z, hi - 1, hi, c, s)
    H[hi, hi - 1] = 0


cdef void sweep(scalar_t[:, ::1] H, scalar_t[:, ::1] T, scalar_t[:, ::1] Q,
                scalar_t[:, ::1] Z, Py_ssize_t lo, Py_ssize_t hi, scalar_t shift) noexcept nogil:
    cdef Py_ssize_t k
    cdef double c
    cdef scalar_t s
    lartg(H[lo, lo] - shift * T[lo, lo], H[lo + 1, lo], &c, &s)
    left(H, T, Q, lo, lo + 1, c, s)
    for k in range(lo, hi):
        lartg(T[k + 1, k + 1], T[k + 1, k], &c, &s)
        right(H, T, Z, k, k + 1, c, s)
        T[k + 1, k] = 0
        if k + 2 <= hi:
            lartg(H[k + 1, k], H[k + 2, k], &c, &s)
            left(H, T, Q, k + 1, k + 2, c, s)
            H[k + 2, k] = 0


cdef double fro(scalar_t[:, ::1] a) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double acc = 0.0, m
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            m = mag(a[i, j])
            acc += m * m
    return sqrt(acc)


cdef int _qz_iterate(scalar_t[:, ::1] H, scalar_t[:, ::1] T, scalar_t[:, ::1] Q,
                     scalar_t[:, ::1] Z, int maxit, Py_ssize_t *loc, int *sweeps) noexcept nogil:
    cdef Py_ssize_t n = H.shape[0]
    cdef double hnorm = fro(H)
    cdef double ttol = EPS * fro(T)
    cdef Py_ssize_t hi = n - 1, lo, k, kz
    cdef int stall = 0
    cdef double ref, disc
    cdef scalar_t r1, r2, ray, shift
    cdef bint real = scalar_t is double
    sweeps[0] = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            ref = mag(H[lo - 1, lo - 1]) + mag(H[lo, lo])
            if ref == 0.0:
                ref = hnorm
            if mag(H[lo, lo - 1]) <= EPS * ref:
                H[lo, lo - 1] = 0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            stall = 0
            continue
        kz = -1
        for k in range(lo, hi + 1):
            if mag(T[k, k]) <= ttol:
                kz = k
                break
        if kz >= 0:
            T[kz, kz] = 0
            chase_zero(H, T, Q, Z, kz, lo, hi)
            stall = 0
            continue
        disc = pencil2_roots(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi],
                             T[hi - 1, hi - 1], T[hi - 1, hi], T[hi, hi], &r1, &r2)
        if real and hi - lo == 1 and disc < 0:
            loc[0] = lo
            return COMPLEX_PAIR_C
        if sweeps[0] >= maxit:
            if real and disc < 0:
                loc[0] = hi - 1
                return COMPLEX_PAIR_C
            loc[0] = hi
            return NO_CONVERGENCE_C
        ray = H[hi, hi] / T[hi, hi]
        if stall > 0 and stall % 10 == 0:
            shift = ray + mag(H[hi, hi - 1] / T[hi - 1, hi - 1])
        elif mag(r1 - ray) <= mag(r2 - ray):
            shift = r1
        else:
            shift = r2
        sweep(H, T, Q, Z, lo, hi, shift)
        sweeps[0] += 1
        stall += 1
    loc[0] = -1
    return OK_C


def qz_iterate(H, T, Q, Z, int maxit):
    """Single-shift QZ iteration; returns ``(status, location, sweeps)``."""
    cdef Py_ssize_t loc = -1
    cdef int sweeps = 0
    cdef int status
    cdef double complex[:, ::1] hc, tc, qc, zc
    cdef double[:, ::1] hr, tr, qr, zr
    if np.iscomplexobj(H):
        hc, tc, qc, zc = H, T, Q, Z
        status = _qz_iterate(hc, tc, qc, zc, maxit, &loc, &sweeps)
    else:
        hr, tr, qr, zr = H, T, Q, Z
        status = _qz_iterate(hr, tr, qr, zr, maxit, &loc, &sweeps)
    return status, loc, sweeps


cdef int _tri_eigvecs(scalar_t[:, ::1] S, scalar_t[:, ::1] T, scalar_t[:, ::1] Y, double rtol) noexcept nogil:
    cdef Py_ssize_t n = S.shape[0]
    cdef Py_ssize_t r, j, k
    cdef double snorm = fro(S), tnorm = fro(T), tol
    cdef scalar_t a, b, acc_s, acc_t, den
    cdef int perturbed = 0
    for r in range(n):
        a = S[r, r]
        b = T[r, r]
        tol = rtol * (mag(b) * snorm + mag(a) * tnorm)
        Y[r, r] = 1.0
        for j in range(r - 1, -1, -1):
            acc_s = 0
            acc_t = 0
            for k in range(j + 1, r + 1):
                acc_s = acc_s + S[j, k] * Y[k, r]
                acc_t = acc_t + T[j, k] * Y[k, r]
            den = b * S[j, j] - a * T[j, j]
            if mag(den) < tol:
                den = tol
                perturbed += 1
            Y[j, r] = -(b * acc_s - a * acc_t) / den
    return perturbed


def tri_eigvecs(S, T, double rtol):
    """Eigenvectors of an upper triangular pencil; see ``_qz_py.tri_eigvecs``."""
    S = np.ascontiguousarray(S)
    T = np.ascontiguousarray(T)
    Y = np.zeros_like(S)
    cdef int perturbed
    cdef double complex[:, ::1] sc, tc, yc
    cdef double[:, ::1] sr, tr, yr
    if np.iscomplexobj(S):
        sc, tc, yc = S, T, Y
        perturbed = _tri_eigvecs(sc, tc, yc, rtol)
    else:
        sr, tr, yr = S, T, Y
        perturbed = _tri_eigvecs(sr, tr, yr, rtol)
    return Y, perturbed

"""Pure-Python QZ kernels (fallback when the compiled extension is missing).

All routines work in place on ``H``, ``T``, ``Q``, ``Z`` so that at every
stage ``H = Q M1 Z`` and ``T = Q M2 Z`` for the original pencil. Rotations are
applied to whole rows/columns; entries outside the active window are zero in
the rows/columns touched, so this matches the usual windowed updates.

``_compiled.pyx`` mirrors this file operation for operation.
"""
import math

import numpy as np

EPS = 2.0 ** -52

OK = 0
COMPLEX_PAIR = 1
NO_CONVERGENCE = 2


def lartg(f, g):
    """Rotation ``[[c, s], [-conj(s), c]]`` mapping ``[f, g]`` to ``[r, 0]``."""
    if g == 0:
        return 1.0, 0.0 * g, f
    ag = abs(g)
    if f == 0:
        return 0.0, (g / ag).conjugate(), ag
    af = abs(f)
    rho = math.hypot(af, ag)
    ph = f / af
    return af / rho, ph * g.conjugate() / rho, ph * rho


def rot_rows(a, i, j, c, s):
    ai = a[i].copy()
    aj = a[j].copy()
    a[i] = c * ai + s * aj
    a[j] = c * aj - s.conjugate() * ai


def rot_cols(a, i, j, c, s):
    # zeroes a[k, i] when (c, s) = lartg(a[k, j], a[k, i])
    ai = a[:, i].copy()
    aj = a[:, j].copy()
    a[:, i] = c * ai - s.conjugate() * aj
    a[:, j] = s * ai + c * aj


def _left(H, T, Q, i, j, c, s):
    rot_rows(H, i, j, c, s)
    rot_rows(T, i, j, c, s)
    rot_rows(Q, i, j, c, s)


def _right(H, T, Z, i, j, c, s):
    rot_cols(H, i, j, c, s)
    rot_cols(T, i, j, c, s)
    rot_cols(Z, i, j, c, s)


def _scalar(x, real):
    return float(x.real) if real else complex(x)


def ht_reduce(H, T, Q, Z):
    """Reduce ``H`` to upper Hessenberg form, keeping ``T`` upper triangular."""
    n = H.shape[0]
    real = not np.iscomplexobj(H)
    for j in range(n - 2):
        for i in range(n - 1, j + 1, -1):
            c, s, _ = lartg(_scalar(H[i - 1, j], real), _scalar(H[i, j], real))
            _left(H, T, Q, i - 1, i, c, s)
            H[i, j] = 0
            c, s, _ = lartg(_scalar(T[i, i], real), _scalar(T[i, i - 1], real))
            _right(H, T, Z, i - 1, i, c, s)
            T[i, i - 1] = 0


def pencil2_roots(h00, h01, h10, h11, t00, t01, t11, real):
    """Roots of ``det(Hb - x Tb) = 0`` for a 2x2 block with triangular ``Tb``.

    Returns ``(disc, r1, r2)``; for the real field with ``disc < 0`` the roots
    are replaced by the common real part.
    """
    a = t00 * t11
    b = -(h00 * t11 + h11 * t00 - h10 * t01)
    c = h00 * h11 - h01 * h10
    disc = b * b - 4.0 * a * c
    if real and disc < 0:
        re = -b / (2.0 * a)
        return disc, re, re
    if real:
        sq = math.sqrt(disc)
        q = -0.5 * (b + math.copysign(sq, b))
    else:
        sq = complex(np.sqrt(complex(disc)))
        if (b.conjugate() * sq).real < 0:
            sq = -sq
        q = -0.5 * (b + sq)
    if q == 0:
        return disc, 0.0 * a, 0.0 * a
    return disc, q / a, c / q


def _chase_zero(H, T, Q, Z, k, lo, hi, real):
    """Move a zero at ``T[k, k]`` down to ``T[hi, hi]`` and deflate it."""
    for j in range(k, hi):
        c, s, _ = lartg(_scalar(T[j, j + 1], real), _scalar(T[j + 1, j + 1], real))
        _left(H, T, Q, j, j + 1, c, s)
        T[j + 1, j + 1] = 0
        if j > lo:
            c, s, _ = lartg(_scalar(H[j + 1, j], real), _scalar(H[j + 1, j - 1], real))
            _right(H, T, Z, j - 1, j, c, s)
            H[j + 1, j - 1] = 0
    c, s, _ = lartg(_scalar(H[hi, hi], real), _scalar(H[hi, hi - 1], real))
    _right(H, T, Z, hi - 1, hi, c, s)
    H[hi, hi - 1] = 0


def _sweep(H, T, Q, Z, lo, hi, shift, real):
    x = _scalar(H[lo, lo], real) - shift * _scalar(T[lo, lo], real)
    y = _scalar(H[lo + 1, lo], real)
    c, s, _ = lartg(x, y)
    _left(H, T, Q, lo, lo + 1, c, s)
    for k in range(lo, hi):
        c, s, _ = lartg(_scalar(T[k + 1, k + 1], real), _scalar(T[k + 1, k], real))
        _right(H, T, Z, k, k + 1, c, s)
        T[k + 1, k] = 0
        if k + 2 <= hi:
            c, s, _ = lartg(_scalar(H[k + 1, k], real), _scalar(H[k + 2, k], real))
            _left(H, T, Q, k + 1, k + 2, c, s)
            H[k + 2, k] = 0


def _block_roots(H, T, i, real):
    return pencil2_roots(
        _scalar(H[i, i], real), _scalar(H[i, i + 1], real),
        _scalar(H[i + 1, i], real), _scalar(H[i + 1, i + 1], real),
        _scalar(T[i, i], real), _scalar(T[i, i + 1], real),
        _scalar(T[i + 1, i + 1], real), real,
    )


def qz_iterate(H, T, Q, Z, maxit):
    """Single-shift QZ iteration on a Hessenberg-triangular pencil.

    Returns ``(status, location, sweeps)``. ``status`` is ``OK``,
    ``COMPLEX_PAIR`` (real field only; ``location`` is the upper-left index
    of a 2x2 block with complex eigenvalues) or ``NO_CONVERGENCE``.
    """
    n = H.shape[0]
    real = not np.iscomplexobj(H)
    hnorm = float(np.linalg.norm(H))
    ttol = EPS * float(np.linalg.norm(T))
    hi = n - 1
    sweeps = 0
    stall = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            ref = abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])
            if ref == 0.0:
                ref = hnorm
            if abs(H[lo, lo - 1]) <= EPS * ref:
                H[lo, lo - 1] = 0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            stall = 0
            continue
        kz = -1
        for k in range(lo, hi + 1):
            if abs(T[k, k]) <= ttol:
                kz = k
                break
        if kz >= 0:
            T[kz, kz] = 0
            _chase_zero(H, T, Q, Z, kz, lo, hi, real)
            stall = 0
            continue
        disc, r1, r2 = _block_roots(H, T, hi - 1, real)
        if real and hi - lo == 1 and disc < 0:
            return COMPLEX_PAIR, lo, sweeps
        if sweeps >= maxit:
            if real and disc < 0:
                return COMPLEX_PAIR, hi - 1, sweeps
            return NO_CONVERGENCE, hi, sweeps
        ray = _scalar(H[hi, hi], real) / _scalar(T[hi, hi], real)
        if stall > 0 and stall % 10 == 0:
            shift = ray + abs(_scalar(H[hi, hi - 1], real) / _scalar(T[hi - 1, hi - 1], real))
        elif abs(r1 - ray) <= abs(r2 - ray):
            shift = r1
        else:
            shift = r2
        _sweep(H, T, Q, Z, lo, hi, shift, real)
        sweeps += 1
        stall += 1
    return OK, -1, sweeps


def tri_eigvecs(S, T, rtol):
    """Eigenvectors of the upper triangular pencil ``(S, T)``.

    Column ``r`` solves ``(T[r, r] S - S[r, r] T) y = 0`` with ``y[r] = 1`` and
    ``y[j] = 0`` for ``j > r``. A denominator below
    ``rtol * (|T[r, r]| ||S|| + |S[r, r]| ||T||)`` is replaced by that
    threshold; the number of replacements is returned alongside ``Y``.
    """
    n = S.shape[0]
    snorm = float(np.linalg.norm(S))
    tnorm = float(np.linalg.norm(T))
    Y = np.zeros_like(S)
    perturbed = 0
    for r in range(n):
        a = S[r, r]
        b = T[r, r]
        tol = rtol * (abs(b) * snorm + abs(a) * tnorm)
        Y[r, r] = 1.0
        for j in range(r - 1, -1, -1):
            acc = b * (S[j, j + 1:r + 1] @ Y[j + 1:r + 1, r]) - a * (T[j, j + 1:r + 1] @ Y[j + 1:r + 1, r])
            den = b * S[j, j] - a * T[j, j]
            if abs(den) < tol:
                den = tol
                perturbed += 1
            Y[j, r] = -acc / den
    return Y, perturbed

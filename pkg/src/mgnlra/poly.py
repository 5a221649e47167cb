"""Evaluation of the characteristic polynomial g_a(z) = sum_k a[k] z**k.

Coefficients are stored constant term first, identical to GLRR order.
The compensated scheme follows the usual error-free transformation approach
(TwoSum / TwoProduct) extended to complex arguments with real coefficients:
every real product and sum in the complex multiply-add is made exact, and the
rounding errors are collected in a correction polynomial evaluated alongside.
"""
from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    """Knuth's TwoSum: ``s + e == a + b`` exactly."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def split(a):
    """Veltkamp split of a double into two 26-bit halves."""
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """Dekker's TwoProduct: ``p + e == a * b`` exactly (absent overflow).

    numpy exposes no fused multiply-add, so the split-based form is used; it is
    exact on every IEEE-754 platform.
    """
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    e = al * bl - (((p - ah * bh) - al * bh) - ah * bl)
    return p, e


def horner_eval(p, z):
    """Plain Horner evaluation of ``sum p[k] z**k`` (vectorised over ``z``)."""
    p = np.asarray(p, dtype=float).ravel()
    z = np.asarray(z, dtype=complex)
    s = np.full(z.shape, p[-1], dtype=complex)
    for c in p[-2::-1]:
        s = s * z + c
    return s if s.ndim else complex(s)


def compensated_horner_eval(p, z):
    """Compensated Horner evaluation, accurate as if done in doubled precision.

    Returns the same value as :func:`horner_eval` up to rounding, but the error
    is bounded by ``eps * |g(z)| + O(eps**2) * cond``.
    """
    p = np.asarray(p, dtype=float).ravel()
    z = np.asarray(z, dtype=complex)
    x = np.ascontiguousarray(z.real, dtype=float)
    y = np.ascontiguousarray(z.imag, dtype=float)
    sr = np.full(x.shape, p[-1])
    si = np.zeros(x.shape)
    cr = np.zeros(x.shape)
    ci = np.zeros(x.shape)
    for c in p[-2::-1]:
        p1, e1 = two_prod(sr, x)
        p2, e2 = two_prod(si, y)
        p3, e3 = two_prod(sr, y)
        p4, e4 = two_prod(si, x)
        tr, e5 = two_sum(p1, -p2)
        nr, e6 = two_sum(tr, c)
        ni, e7 = two_sum(p3, p4)
        er = (e1 - e2) + (e5 + e6)
        ei = (e3 + e4) + e7
        # correction polynomial, evaluated in working precision
        cr, ci = cr * x - ci * y + er, cr * y + ci * x + ei
        sr, si = nr, ni
    out = (sr + cr) + 1j * (si + ci)
    return out if out.ndim else complex(out)


def unit_circle_grid(N: int, alpha: float = 0.0) -> np.ndarray:
    """Nodes ``exp(i(2 pi j / N - alpha))`` for ``j = 0..N-1``."""
    if N < 1:
        raise ValueError(f"grid size must be >= 1, got {N}")
    return np.exp(1j * (2.0 * np.pi * np.arange(N) / N - alpha))


def eval_on_grid(p, N: int, alpha: float = 0.0, compensated: bool = False) -> np.ndarray:
    """Values of g_p on the rotated grid; these are the circulant eigenvalues."""
    z = unit_circle_grid(N, alpha)
    if compensated:
        return compensated_horner_eval(p, z)
    return horner_eval(p, z)


def compensated_matmul(A, B):
    """Complex product ``A @ B`` with every real product/sum compensated.

    Intended for tall-skinny ``A`` (N x r) times small ``B`` (r x r).
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    n, k = A.shape
    m = B.shape[1]
    sr = np.zeros((n, m))
    si = np.zeros((n, m))
    er = np.zeros((n, m))
    ei = np.zeros((n, m))
    for j in range(k):
        ar = A[:, j].real[:, None]
        ai = A[:, j].imag[:, None]
        br = B[j].real[None, :]
        bi = B[j].imag[None, :]
        p1, e1 = two_prod(ar, br)
        p2, e2 = two_prod(ai, bi)
        p3, e3 = two_prod(ar, bi)
        p4, e4 = two_prod(ai, br)
        sr, f1 = two_sum(sr, p1)
        sr, f2 = two_sum(sr, -p2)
        si, f3 = two_sum(si, p3)
        si, f4 = two_sum(si, p4)
        er += (e1 - e2) + (f1 + f2)
        ei += (e3 + e4) + (f3 + f4)
    return (sr + er) + 1j * (si + ei)

"""Weighted projections onto a subspace given by a (complex) basis.

With ``W = C^T C`` the weighted pseudoinverse is ``Z^+_W x = (C Z)^+ (C x)``,
which also covers degenerate ``W`` (minimum-seminorm solution).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sl

from .core import as_coeffs, as_values
from .subspace import SubspaceBasis, basis_Z
from .weights import WeightSpec

_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    q: np.ndarray
    proj: np.ndarray
    imag_residual: float
    rank_deficient: bool = False


def weighted_lstsq(CA, Cb):
    """Minimum-norm solution of ``CA q ~ Cb`` (columns of ``Cb`` solved jointly).

    Uses thin QR of ``CA``; the singular values of the triangular factor decide
    the rank, and a rank-deficient system falls back to the SVD of that factor.
    Returns ``(q, rank_deficient)``.
    """
    CA = np.asarray(CA)
    n, r = CA.shape
    Q, R = sl.qr(CA, mode="economic")
    rhs = Q.conj().T @ Cb
    s = sl.svdvals(R)
    tol = _EPS * max(n, r) * (s[0] if s.size else 0.0)
    if s.size and s[-1] > tol:
        return sl.solve_triangular(R, rhs), False
    U, s, Vh = sl.svd(R)
    keep = s > tol
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    if rhs.ndim == 1:
        q = Vh.conj().T @ (inv * (U.conj().T @ rhs))
    else:
        q = Vh.conj().T @ (inv[:, None] * (U.conj().T @ rhs))
    return q, True


def _imag_share(v) -> float:
    den = np.linalg.norm(v)
    return float(np.linalg.norm(v.imag) / den) if den > 0 else 0.0


def weighted_pinv_apply(Z, w: WeightSpec, x) -> ProjectionResult:
    """Coordinates ``q = Z^+_W x`` and the real projection ``Re(Z q)``."""
    Z = np.asarray(Z)
    x = as_values(x)
    q, deficient = weighted_lstsq(w.factor_apply(Z), w.factor_apply(x))
    v = Z @ q
    return ProjectionResult(q=q, proj=v.real.copy(), imag_residual=_imag_share(v),
                            rank_deficient=deficient)


def project_onto_glrr(a, w: WeightSpec, x, compensated: bool = False
                      ) -> tuple[ProjectionResult, SubspaceBasis]:
    """W-projection of ``x`` onto Z(a). Missing entries of ``x`` are zeroed first."""
    a = as_coeffs(a)
    xv = np.where(w.mask, as_values(x), 0.0)
    basis = basis_Z(a, xv.size, compensated)
    return weighted_pinv_apply(basis.Z, w, xv), basis

"""Banded positive semi-definite weight matrices ``W = C^T C``.

Only the upper-triangular banded factor ``C`` is stored, in band layout:
``band[k, i] = C[i, i + k]`` for ``k = 0..p`` (entries past the end are 0).
Missing observations zero the corresponding columns of ``C``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sl


class UnstableARError(ValueError):
    """AR polynomial has a root on or inside the unit circle."""


@dataclass(frozen=True, eq=False)
class WeightSpec:
    band: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        band = np.array(self.band, dtype=float, ndmin=2)
        mask = np.asarray(self.mask, dtype=bool).ravel()
        if band.shape[1] != mask.size:
            raise ValueError(f"band has {band.shape[1]} columns, mask has {mask.size}")
        band.setflags(write=False)
        mask = mask.copy()
        mask.setflags(write=False)
        object.__setattr__(self, "band", band)
        object.__setattr__(self, "mask", mask)

    @property
    def N(self) -> int:
        return self.band.shape[1]

    @property
    def p(self) -> int:
        return self.band.shape[0] - 1

    def factor_apply(self, x):
        """``C @ x`` for a vector or an N x k matrix (real or complex)."""
        x = np.asarray(x)
        out = self.band[0].reshape((-1,) + (1,) * (x.ndim - 1)) * x
        for k in range(1, self.p + 1):
            coef = self.band[k, : self.N - k].reshape((-1,) + (1,) * (x.ndim - 1))
            out[: self.N - k] += coef * x[k:]
        return out

    def factor_transpose_apply(self, y):
        """``C^T @ y``."""
        y = np.asarray(y)
        out = self.band[0].reshape((-1,) + (1,) * (y.ndim - 1)) * y
        for k in range(1, self.p + 1):
            coef = self.band[k, : self.N - k].reshape((-1,) + (1,) * (y.ndim - 1))
            out[k:] += coef * y[: self.N - k]
        return out

    def factor_dense(self) -> np.ndarray:
        C = np.zeros((self.N, self.N))
        for k in range(self.p + 1):
            idx = np.arange(self.N - k)
            C[idx, idx + k] = self.band[k, : self.N - k]
        return C

    def dense(self) -> np.ndarray:
        """Dense ``W``; for tests and small problems only."""
        C = self.factor_dense()
        return C.T @ C


def from_factor(C, p: int | None = None) -> WeightSpec:
    """Wrap a dense upper-triangular banded factor."""
    C = np.asarray(C, dtype=float)
    N = C.shape[0]
    if C.shape != (N, N):
        raise ValueError("factor must be square")
    if np.any(np.tril(C, -1)):
        raise ValueError("factor must be upper triangular")
    if p is None:
        nz = [k for k in range(N) if np.any(np.diagonal(C, k))]
        p = max(nz) if nz else 0
    elif np.any(np.triu(C, p + 1)):
        raise ValueError(f"factor has nonzeros above superdiagonal {p}")
    band = np.zeros((p + 1, N))
    for k in range(p + 1):
        band[k, : N - k] = np.diagonal(C, k)
    mask = np.array([np.any(C[:, j]) for j in range(N)])
    return WeightSpec(band, mask)


def identity_weight(N: int) -> WeightSpec:
    return WeightSpec(np.ones((1, N)), np.ones(N, dtype=bool))


def ar_autocovariance(phi, sigma2: float, nlags: int) -> np.ndarray:
    """Autocovariances ``gamma_0..gamma_nlags`` of a stationary AR(p) process.

    Lags ``0..p`` solve the Yule-Walker system; later lags follow the recursion.
    """
    phi = np.asarray(phi, dtype=float).ravel()
    p = phi.size
    m = max(p, nlags)
    if p == 0:
        out = np.zeros(m + 1)
        out[0] = sigma2
        return out[: nlags + 1]
    A = np.eye(p + 1)
    for k in range(p + 1):
        for j in range(1, p + 1):
            A[k, abs(k - j)] -= phi[j - 1]
    rhs = np.zeros(p + 1)
    rhs[0] = sigma2
    gamma = np.empty(m + 1)
    gamma[: p + 1] = np.linalg.solve(A, rhs)
    for k in range(p + 1, m + 1):
        gamma[k] = phi @ gamma[k - 1 : k - p - 1 : -1]
    return gamma[: nlags + 1]


def _check_stable(phi):
    if phi.size == 0:
        return
    # roots of 1 - sum phi_k z^k, highest power first for np.roots
    roots = np.roots(np.concatenate([-phi[::-1], [1.0]]))
    if np.any(np.abs(roots) <= 1.0 + 1e-12):
        raise UnstableARError(f"AR coefficients {phi.tolist()} are not stationary")


def ar_precision(phi, sigma2: float, N: int) -> WeightSpec:
    """Inverse covariance of a stationary AR(p) series of length N.

    The lower-triangular whitening operator ``L`` (first p rows from the
    stationary covariance of the leading block, then innovations
    ``(x_i - sum_k phi_k x_{i-k}) / sigma``) satisfies ``L^T L = Sigma^{-1}``.
    ``Sigma^{-1}`` is persymmetric, so reversing rows and columns of ``L``
    yields an upper-triangular ``C`` with ``C^T C = Sigma^{-1}``.
    """
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    p = phi.size
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    if N <= p:
        raise ValueError(f"N={N} must exceed AR order p={p}")
    _check_stable(phi)
    sigma = np.sqrt(sigma2)
    # lower band layout: lo[k, i] = L[i, i - k]
    lo = np.zeros((p + 1, N))
    lo[0, p:] = 1.0 / sigma
    for k in range(1, p + 1):
        lo[k, p:] = -phi[k - 1] / sigma
    if p:
        gamma = ar_autocovariance(phi, sigma2, p - 1)
        G = sl.cholesky(sl.toeplitz(gamma), lower=True)
        Lp = sl.solve_triangular(G, np.eye(p), lower=True)
        for k in range(p):
            lo[k, k:p] = np.diagonal(Lp, -k)
    # C[i, j] = L[N-1-i, N-1-j]  ->  band[k, i] = lo[k, N-1-i]
    return WeightSpec(lo[:, ::-1].copy(), np.ones(N, dtype=bool))


def apply_mask(w0: WeightSpec, mask) -> WeightSpec:
    """``W = U W0 U`` with ``U = diag(mask)``, realised as ``C = C0 U``."""
    mask = np.asarray(mask, dtype=bool).ravel()
    if mask.size != w0.N:
        raise ValueError(f"mask length {mask.size} != N={w0.N}")
    band = np.array(w0.band)
    for k in range(w0.p + 1):
        band[k, : w0.N - k] *= mask[k:]
    return WeightSpec(band, mask & w0.mask)


def apply_weight(w: WeightSpec, x) -> np.ndarray:
    """``W x`` via two banded products."""
    return w.factor_transpose_apply(w.factor_apply(np.asarray(x, dtype=float)))


def seminorm(w: WeightSpec, x) -> float:
    """``||x||_W = ||C x||_2``."""
    return float(np.linalg.norm(w.factor_apply(np.asarray(x, dtype=float))))

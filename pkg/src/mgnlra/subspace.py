"""Orthonormal bases of Z(a) and the matrix F_hat via rotated circulant solves.

Z(a) is the space of length-N series annihilated by ``Q^T(a)``. ``Q^T(a)`` is
the top ``N - r`` rows of the circulant ``C(a)`` whose eigenvalues are the
values of ``g_a`` on the N-th roots of unity, so systems in ``C(a)`` are solved
by FFT. Rotating the grid by ``alpha0`` keeps roots of ``g_a`` away from the
nodes.

FFT convention: ``np.fft.fft`` (unnormalised) forward, ``np.fft.ifft`` (1/N)
inverse.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sl

from .core import BoundaryIndexSet, GlrrError, as_coeffs, as_values, trajectory
from .poly import (compensated_horner_eval, compensated_matmul, eval_on_grid,
                   horner_eval)

_SCAN_POINTS = 64
_GOLDEN_ITERS = 20
_QR_SWITCH_RATIO = 1e12
_EPS = np.finfo(float).eps


class DegenerateSubspaceError(ArithmeticError):
    """The rotated circulant is singular or too ill-conditioned to invert."""

    def __init__(self, message, objective=None):
        super().__init__(message)
        self.objective = objective


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """Orthonormal (complex) basis of Z(a) together with the circulant data."""

    Z: np.ndarray
    alpha0: float
    eigs: np.ndarray

    @property
    def N(self) -> int:
        return self.Z.shape[0]

    @property
    def r(self) -> int:
        return self.Z.shape[1]

    @property
    def min_eig(self) -> float:
        return float(np.min(np.abs(self.eigs)))

    @property
    def condition(self) -> float:
        """Ratio ``max|eigs| / min|eigs|`` of the rotated circulant."""
        mod = np.abs(self.eigs)
        return float(mod.max() / mod.min())


def alpha_objective(a, N: int, alpha: float, compensated: bool = False) -> float:
    """Smallest eigenvalue modulus ``min_j |g_a(exp(i(2 pi j/N - alpha)))|``."""
    return float(np.min(np.abs(eval_on_grid(a, N, alpha, compensated))))


def _wrap(alpha: float, N: int) -> float:
    period = 2.0 * np.pi / N
    lo = -np.pi / N
    out = lo + (alpha - lo) % period
    return out if out < np.pi / N else lo


def optimize_alpha(a, N: int, compensated: bool = False) -> float:
    """Rotation in ``[-pi/N, pi/N)`` maximising the smallest eigenvalue modulus.

    A uniform scan locates the best cell, then golden-section search refines it
    on the two neighbouring cells. The objective has period ``2 pi / N`` in
    ``alpha``, so the bracket may cross the interval ends; the result is
    wrapped back.
    """
    a = as_coeffs(a)
    step = 2.0 * np.pi / N / _SCAN_POINTS
    grid = -np.pi / N + step * np.arange(_SCAN_POINTS)
    z = np.exp(1j * (2.0 * np.pi * np.arange(N)[None, :] / N - grid[:, None]))
    g = compensated_horner_eval(a, z) if compensated else horner_eval(a, z)
    vals = np.abs(g).min(axis=1)
    k = int(np.argmax(vals))
    if vals[k] == 0.0:
        raise DegenerateSubspaceError(
            "g_a vanishes on every rotated grid; GLRR vector is degenerate", 0.0
        )
    f = lambda al: alpha_objective(a, N, al, compensated)  # noqa: E731
    lo, hi = grid[k] - step, grid[k] + step
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    best_al, best_val = grid[k], vals[k]
    for _ in range(_GOLDEN_ITERS):
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
    for al, v in ((c, fc), (d, fd)):
        if v > best_val:
            best_al, best_val = al, v
    return _wrap(best_al, N)


def rotation(M: int, alpha: float) -> np.ndarray:
    """Diagonal of ``T_M(alpha) = diag(1, e^{i alpha}, ..., e^{i (M-1) alpha})``."""
    return np.exp(1j * alpha * np.arange(M))


def _last_unit_vectors_fft(N: int, r: int) -> np.ndarray:
    # FFT of e_m is exp(-2 pi i k m / N); reduce k*m mod N for exact angles
    k = np.arange(N)[:, None]
    m = np.arange(N - r, N)[None, :]
    return np.exp(-2j * np.pi * ((k * m) % N) / N)


def _orthonormalizer(L: np.ndarray) -> np.ndarray:
    """Square ``O`` such that ``L @ O`` has orthonormal columns."""
    R = sl.qr(L, mode="r")[0][: L.shape[1]]
    diag = np.abs(np.diag(R))
    if diag.min() > 0 and diag.max() / diag.min() <= _QR_SWITCH_RATIO:
        return sl.solve_triangular(R, np.eye(R.shape[0]))
    _, s, Vh = sl.svd(L, full_matrices=False)
    return Vh.conj().T / s


def _apply_rotation_solve(Rr, O, eigs, compensated):
    B = compensated_matmul(Rr, O) if compensated else Rr @ O
    return B / eigs[:, None]


def basis_Z(a, N: int, compensated: bool = False) -> SubspaceBasis:
    """Orthonormal basis of Z(a) in C^N."""
    a = as_coeffs(a)
    r = a.size - 1
    if N <= r:
        raise GlrrError(f"N={N} must exceed GLRR order r={r}")
    alpha0 = optimize_alpha(a, N, compensated)
    eigs = eval_on_grid(a, N, alpha0, compensated)
    mod = np.abs(eigs)
    if mod.min() <= 1e3 * _EPS * mod.max():
        raise DegenerateSubspaceError(
            f"rotated circulant ill-conditioned: min|eig|={mod.min():.3e}, "
            f"max|eig|={mod.max():.3e}",
            float(mod.min()),
        )
    Rr = _last_unit_vectors_fft(N, r)
    Lr = Rr / eigs[:, None]
    O = _orthonormalizer(Lr)
    Ur = _apply_rotation_solve(Rr, O, eigs, compensated)
    # L_r is ill-conditioned near unit roots, so L_r O_r is only nearly
    # orthonormal; a Householder pass restores orthonormality without moving
    # the span
    Ur = sl.qr(Ur, mode="economic")[0]
    # ifft carries 1/N, so columns come out with norm 1/sqrt(N)
    Zt = np.fft.ifft(Ur, axis=0) * np.sqrt(N)
    Z = rotation(N, -alpha0)[:, None] * Zt
    return SubspaceBasis(Z=Z, alpha0=alpha0, eigs=eigs)


def fhat(a, tau: int, S, alpha0: float, eigs) -> np.ndarray:
    """A complex N x r matrix ``F`` with ``Q^T(a) F = M``, ``M = -(T_{r+1}(S)[K(tau)])^T``.

    ``S`` must be governed by GLRR(a) and ``a[tau-1] == -1``.
    """
    a = as_coeffs(a)
    r = a.size - 1
    s = as_values(S)
    N = s.size
    if a[tau - 1] != -1.0:
        raise GlrrError(f"pivot entry a[{tau}] must be -1, got {a[tau - 1]!r}")
    eigs = np.asarray(eigs)
    if eigs.shape != (N,) or not np.all(eigs != 0):
        raise GlrrError("eigenvalue vector must have length N and no zeros")
    idx = BoundaryIndexSet(tau, N, r)
    M = -trajectory(s, r + 1)[idx.k0].T
    Mt = np.zeros((N, r), dtype=complex)
    Mt[: N - r] = rotation(N - r, alpha0)[:, None] * M
    Ft = np.fft.ifft(np.fft.fft(Mt, axis=0) / eigs[:, None], axis=0)
    return rotation(N, -alpha0)[:, None] * Ft

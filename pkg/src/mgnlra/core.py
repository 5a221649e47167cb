"""Series containers and exact algebra on GLRR coefficient vectors.

Pivot indices ``tau`` are 1-based throughout the public API, matching the
usual mathematical notation for :math:`H_\\tau` and :math:`\\mathcal{I}(\\tau)`.
They are converted to 0-based offsets only when indexing arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class GlrrError(ValueError):
    """Invalid GLRR vector, pivot or series/order combination."""


def _frozen(arr):
    arr = np.array(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A real series with an observation mask (``True`` = observed).

    Values at missing positions are stored as 0.
    """

    values: np.ndarray
    mask: np.ndarray

    def __init__(self, values, mask=None):
        values = np.asarray(values, dtype=float).ravel()
        if values.size < 1:
            raise ValueError("series must have at least one value")
        if mask is None:
            mask = np.isfinite(values)
        mask = np.asarray(mask, dtype=bool).ravel()
        if mask.shape != values.shape:
            raise ValueError(f"mask length {mask.size} != series length {values.size}")
        values = np.where(mask, values, 0.0)
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "mask", _frozen(mask))

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def complete(self) -> bool:
        return bool(self.mask.all())

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True, eq=False)
class GlrrVector:
    """Coefficients ``a`` of a GLRR of order ``r = len(a) - 1``."""

    coeffs: np.ndarray

    def __init__(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=float).ravel()
        if coeffs.size < 2:
            raise GlrrError(f"GLRR order must be >= 1, got {coeffs.size - 1}")
        if not np.any(coeffs):
            raise GlrrError("GLRR vector must be nonzero")
        object.__setattr__(self, "coeffs", _frozen(coeffs))

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def __len__(self):
        return self.coeffs.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coeffs, dtype=dtype)


@dataclass(frozen=True)
class BoundaryIndexSet:
    """The index sets I(tau) (boundary data) and K(tau) (free coefficients).

    ``I`` and ``K`` hold 1-based indices; ``i0``/``k0`` are the 0-based versions.
    """

    tau: int
    N: int
    r: int

    def __post_init__(self):
        if not 1 <= self.tau <= self.r + 1:
            raise GlrrError(f"tau={self.tau} outside [1, {self.r + 1}]")
        if self.N <= self.r:
            raise GlrrError(f"N={self.N} must exceed r={self.r}")

    @property
    def I(self) -> np.ndarray:  # noqa: E743
        head = np.arange(1, self.tau)
        tail = np.arange(self.N - self.r + self.tau, self.N + 1)
        return np.concatenate([head, tail])

    @property
    def K(self) -> np.ndarray:
        idx = np.arange(1, self.r + 2)
        return idx[idx != self.tau]

    @property
    def i0(self) -> np.ndarray:
        return self.I - 1

    @property
    def k0(self) -> np.ndarray:
        return self.K - 1


def as_coeffs(a) -> np.ndarray:
    """Return GLRR coefficients as a float array, validating order and nonzeroness."""
    if isinstance(a, GlrrVector):
        return np.asarray(a.coeffs)
    return np.asarray(GlrrVector(a).coeffs)


def as_values(x) -> np.ndarray:
    if isinstance(x, TimeSeries):
        return np.asarray(x.values)
    return np.asarray(x, dtype=float).ravel()


def embed(series, L: int) -> np.ndarray:
    """L-trajectory (Hankel) matrix of a complete series, shape ``(L, N-L+1)``."""
    if isinstance(series, TimeSeries) and not series.complete:
        raise ValueError("cannot embed a series with missing values")
    x = as_values(series)
    N = x.size
    if not 1 < L < N:
        raise ValueError(f"window L={L} must satisfy 1 < L < N={N}")
    return sliding_window_view(x, N - L + 1).copy()


def trajectory(x, L: int) -> np.ndarray:
    """Hankel matrix without the 1 < L < N restriction (L = N gives a column).

    Internal helper; works on real or complex 1-D arrays.
    """
    x = np.asarray(x)
    return sliding_window_view(x, x.size - L + 1, axis=0)


def glrr_residual(a, series) -> np.ndarray:
    """Apply ``Q^T(a)``: entry j is ``sum_i a_i s_{j+i-1}``, length ``N - r``.

    Works for real or complex series and for 2-D inputs (columns are series).
    """
    a = as_coeffs(a)
    x = series.values if isinstance(series, TimeSeries) else np.asarray(series)
    r = a.size - 1
    N = x.shape[0]
    if N <= r:
        raise GlrrError(f"series length {N} must exceed GLRR order {r}")
    out = a[0] * x[: N - r]
    for i in range(1, r + 1):
        out = out + a[i] * x[i : N - r + i]
    return out


def normalize_pivot(b) -> tuple[np.ndarray, int]:
    """Scale ``b`` so its largest-modulus entry equals -1.

    Returns ``(a, tau)`` with 1-based ``tau``; ties go to the smallest index.
    """
    b = as_coeffs(b)
    t0 = int(np.argmax(np.abs(b)))
    return -b / b[t0], t0 + 1


def insert_pivot(adot, tau: int) -> np.ndarray:
    """H_tau: insert -1 at (1-based) position ``tau``."""
    adot = np.asarray(adot, dtype=float).ravel()
    r = adot.size
    if r < 1:
        raise GlrrError("reduced vector must have at least one entry")
    if not 1 <= tau <= r + 1:
        raise GlrrError(f"tau={tau} outside [1, {r + 1}]")
    return np.insert(adot, tau - 1, -1.0)


def remove_pivot(a, tau: int) -> np.ndarray:
    """Inverse of :func:`insert_pivot`; the pivot entry must equal -1."""
    a = np.asarray(a, dtype=float).ravel()
    if not 1 <= tau <= a.size:
        raise GlrrError(f"tau={tau} outside [1, {a.size}]")
    if a[tau - 1] != -1.0:
        raise GlrrError(f"entry at tau={tau} is {a[tau - 1]!r}, expected -1")
    return np.delete(a, tau - 1)


def self_convolve(a) -> np.ndarray:
    """Acyclic self-convolution ``a * a`` of length 2r+1."""
    a = as_coeffs(a)
    return np.convolve(a, a)

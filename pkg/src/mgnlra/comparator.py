"""FD-VPGN: variable-projection Gauss-Newton with a finite-difference Jacobian.

Stands in for VPGN, whose closed-form Jacobian of the projection map is not
implemented here. The Jacobian of ``adot -> Pi_{Z(H_tau(adot)), W} x`` is
approximated by central differences, one pair of projections per coordinate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_coeffs, as_values, insert_pivot, remove_pivot
from .projection import project_onto_glrr, weighted_lstsq
from .solver import Direction
from .weights import WeightSpec

LABEL = "FD-VPGN"
_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class FdJacobian:
    J: np.ndarray
    h: float


def default_step(adot) -> float:
    return _EPS ** (1.0 / 3.0) * (1.0 + float(np.linalg.norm(adot)))


def fd_jacobian(a, tau: int, w: WeightSpec, x, h: float | None = None,
                compensated: bool = False) -> FdJacobian:
    """Central-difference Jacobian (N x r) of the projection w.r.t. ``adot``."""
    a = as_coeffs(a)
    adot = remove_pivot(a, tau)
    if h is None:
        h = default_step(adot)
    xv = as_values(x)
    cols = []
    for i in range(adot.size):
        e = np.zeros(adot.size)
        e[i] = h
        plus = project_onto_glrr(insert_pivot(adot + e, tau), w, xv, compensated)[0].proj
        minus = project_onto_glrr(insert_pivot(adot - e, tau), w, xv, compensated)[0].proj
        cols.append((plus - minus) / (2.0 * h))
    return FdJacobian(J=np.column_stack(cols), h=h)


def vpgn_fd_direction(a, tau: int, w: WeightSpec, x, Sk, h: float | None = None,
                      compensated: bool = False) -> Direction:
    """``Delta = J^+_W (x - S_k)`` with ``J`` from :func:`fd_jacobian`."""
    xv = np.where(w.mask, as_values(x), 0.0)
    jac = fd_jacobian(a, tau, w, xv, h, compensated)
    d, deficient = weighted_lstsq(w.factor_apply(jac.J),
                                  w.factor_apply(xv - np.asarray(Sk, dtype=float)))
    return Direction(delta=np.asarray(d, dtype=float), rank_deficient=deficient)

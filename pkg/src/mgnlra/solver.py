"""Modified Gauss-Newton iteration for weighted Hankel low-rank approximation.

The iterate is a GLRR vector ``b``; each step pivot-normalises it, projects
the data onto Z(a), computes a Gauss-Newton direction for the free
coefficients and runs a backtracking line search on the projected objective.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sl

from .core import (TimeSeries, as_coeffs, as_values, embed, insert_pivot,
                   normalize_pivot, remove_pivot)
from .projection import ProjectionResult, project_onto_glrr, weighted_lstsq
from .subspace import DegenerateSubspaceError, SubspaceBasis, fhat
from .weights import WeightSpec, seminorm

log = logging.getLogger(__name__)

METHODS = ("mgn", "fdvpgn")


@dataclass
class SolverConfig:
    rank: int
    max_iterations: int = 200
    shrink: float = 0.5
    min_step: float = 2.0 ** -50
    compensated: bool = False
    decrease_tol: float = 0.0
    method: str = "mgn"
    fd_step: float | None = None
    # stop when the residual is at rounding level relative to the data
    zero_tol: float = 1e3 * np.finfo(float).eps

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")


@dataclass(frozen=True)
class Direction:
    delta: np.ndarray
    imag_residual: float = 0.0
    rank_deficient: bool = False


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    objective: float
    tau: int
    alpha0: float
    delta_norm: float
    gamma: float | None
    imag_residual: float
    rank_deficient: bool
    step_time: float  # projection of the current iterate plus its direction
    elapsed: float


@dataclass
class SolveReport:
    records: list[IterationRecord]
    signal: np.ndarray
    glrr: np.ndarray
    termination: str
    method: str = "mgn"
    message: str = ""
    objectives: np.ndarray = field(init=False)

    def __post_init__(self):
        self.objectives = np.array([rec.objective for rec in self.records])

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def accepted_steps(self) -> int:
        return sum(rec.gamma is not None for rec in self.records)

    @property
    def objective(self) -> float:
        return float(self.objectives[-1]) if self.records else float("nan")


def mgn_direction(a, tau: int, w: WeightSpec, x, basis: SubspaceBasis, Sk) -> Direction:
    """Gauss-Newton step for the free GLRR coefficients via ``(I - Pi) F_hat``."""
    a = as_coeffs(a)
    xv = np.where(w.mask, as_values(x), 0.0)
    Sk = np.asarray(Sk, dtype=float)
    F = fhat(a, tau, Sk, basis.alpha0, basis.eigs)
    CZ = w.factor_apply(basis.Z)
    coords, _ = weighted_lstsq(CZ, w.factor_apply(F))
    G = F - basis.Z @ coords
    d, deficient = weighted_lstsq(w.factor_apply(G), w.factor_apply(xv - Sk))
    den = np.linalg.norm(d)
    imag = float(np.linalg.norm(d.imag) / den) if den > 0 else 0.0
    return Direction(delta=d.real.copy(), imag_residual=imag, rank_deficient=deficient)


def initial_glrr_from_svd(x, r: int) -> np.ndarray:
    """Left singular vector of ``T_{r+1}(x)`` for its smallest singular value.

    Missing entries are replaced by the mean of the observed ones first.
    """
    if isinstance(x, TimeSeries):
        values, mask = np.asarray(x.values), np.asarray(x.mask)
    else:
        values = np.asarray(x, dtype=float).ravel()
        mask = np.isfinite(values)
    N = values.size
    if 2 * r >= N:
        raise ValueError(f"need 2r < N, got r={r}, N={N}")
    if mask.sum() < r + 1:
        raise ValueError(f"need at least r+1={r + 1} observed values, got {mask.sum()}")
    filled = np.where(mask, values, values[mask].mean())
    U = sl.svd(embed(filled, r + 1), full_matrices=False)[0]
    return U[:, r].copy()


def _direction(cfg: SolverConfig, a, tau, w, x, proj: ProjectionResult, basis) -> Direction:
    if cfg.method == "mgn":
        return mgn_direction(a, tau, w, x, basis, proj.proj)
    from .comparator import vpgn_fd_direction

    return vpgn_fd_direction(a, tau, w, x, proj.proj, h=cfg.fd_step,
                             compensated=cfg.compensated)


def solve(x, w: WeightSpec, a0, cfg: SolverConfig) -> SolveReport:
    """Run the (MGN or FD-VPGN) iteration from the GLRR ``a0``."""
    xv = as_values(x)
    if isinstance(x, TimeSeries) and not x.complete:
        xv = np.where(x.mask, xv, 0.0)
    N = xv.size
    if w.N != N:
        raise ValueError(f"weight size {w.N} != series length {N}")
    b = as_coeffs(a0)
    r = b.size - 1
    if r != cfg.rank:
        raise ValueError(f"initial GLRR has order {r}, config rank is {cfg.rank}")
    if 2 * r >= N:
        raise ValueError(f"need 2r < N, got r={r}, N={N}")

    a, tau = normalize_pivot(b)
    t0 = time.perf_counter()
    proj, basis = project_onto_glrr(a, w, xv, cfg.compensated)
    proj_time = time.perf_counter() - t0
    obj = seminorm(w, xv - proj.proj)
    records: list[IterationRecord] = []
    termination, message = "max_iterations", ""
    t_start = time.perf_counter()
    floor = cfg.zero_tol * seminorm(w, xv)

    for k in range(cfg.max_iterations):
        if obj <= floor:
            records.append(IterationRecord(
                iteration=k, objective=obj, tau=tau, alpha0=basis.alpha0,
                delta_norm=float("nan"), gamma=None, imag_residual=proj.imag_residual,
                rank_deficient=proj.rank_deficient, step_time=proj_time,
                elapsed=time.perf_counter() - t_start,
            ))
            termination = "exact_fit"
            break
        t0 = time.perf_counter()
        try:
            d = _direction(cfg, a, tau, w, xv, proj, basis)
        except DegenerateSubspaceError as exc:
            termination, message = "degenerate_subspace", str(exc)
            break
        t_dir = time.perf_counter() - t0
        adot = remove_pivot(a, tau)
        gamma, accepted = 1.0, None
        while gamma >= cfg.min_step:
            trial = insert_pivot(adot + gamma * d.delta, tau)
            t1 = time.perf_counter()
            try:
                tp, tb = project_onto_glrr(trial, w, xv, cfg.compensated)
            except DegenerateSubspaceError:
                gamma *= cfg.shrink
                continue
            tobj = seminorm(w, xv - tp.proj)
            if tobj < obj:
                accepted = (trial, tp, tb, tobj, time.perf_counter() - t1)
                break
            gamma *= cfg.shrink
        records.append(IterationRecord(
            iteration=k, objective=obj, tau=tau, alpha0=basis.alpha0,
            delta_norm=float(np.linalg.norm(d.delta)),
            gamma=gamma if accepted else None,
            imag_residual=max(proj.imag_residual, d.imag_residual),
            rank_deficient=proj.rank_deficient or d.rank_deficient,
            step_time=proj_time + t_dir, elapsed=time.perf_counter() - t_start,
        ))
        if accepted is None:
            termination = "line_search_failed"
            break
        trial, tp, tb, tobj, proj_time = accepted
        decrease = obj - tobj
        a_new, tau_new = normalize_pivot(trial)
        # Z(a) is scale-invariant; only the circulant eigenvalues rescale
        scale = -1.0 / trial[tau_new - 1]
        basis = SubspaceBasis(Z=tb.Z, alpha0=tb.alpha0, eigs=tb.eigs * scale)
        a, tau, proj, obj = a_new, tau_new, tp, tobj
        if cfg.decrease_tol > 0 and decrease <= cfg.decrease_tol * obj:
            termination = "small_decrease"
            records.append(IterationRecord(
                iteration=k + 1, objective=obj, tau=tau, alpha0=basis.alpha0,
                delta_norm=float("nan"), gamma=None, imag_residual=proj.imag_residual,
                rank_deficient=proj.rank_deficient, step_time=0.0,
                elapsed=time.perf_counter() - t_start,
            ))
            break
    log.debug("%s: %s after %d iterations, objective %.6e",
              cfg.method, termination, len(records), obj)
    return SolveReport(records=records, signal=proj.proj, glrr=a,
                       termination=termination, method=cfg.method, message=message)

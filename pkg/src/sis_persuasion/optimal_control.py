"""Finite-horizon optimal signaling via shooting and projected gradient.

The control is a piecewise-constant signal schedule; every objective
evaluation integrates the full coupled dynamics (single shooting).
Gradients are central finite differences over the control intervals, with
all perturbed trajectories integrated in one compiled batch.  The search is
projected gradient descent with a backtracking Armijo line search along the
projection arc, restarted from several constant schedules because the
problem is nonconvex; the best local solution is reported, with no claim of
global optimality.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import _kernels
from .equilibrium import StaticSignalResult, optimal_static_signal
from .model import ModelParams, ParameterError, PopulationState
from .simulate import (
    ControlSchedule,
    IntegrateOptions,
    SmithConfig,
    Trajectory,
    integral_of_y,
    integrate,
)

logger = logging.getLogger(__name__)

__all__ = [
    "StageCost",
    "OcpSpec",
    "SolverOptions",
    "OcpSolution",
    "CompareReport",
    "objective",
    "gradient",
    "solve",
    "compare_static_dynamic",
    "write_control_csv",
    "write_solution_json",
]


@dataclass(frozen=True)
class StageCost:
    """Running cost ``y + weight * (1 - mu_s)**2``.

    weight = 0 is the plain infected proportion; a positive weight penalises
    signals far from 1 (a credibility penalty on heavy false-alarming).
    """

    weight: float = 0.0

    def __post_init__(self) -> None:
        if self.weight < 0.0:
            raise ParameterError(f"stage-cost weight must be >= 0, got {self.weight}")


PLAIN_Y = StageCost(0.0)


@dataclass(frozen=True)
class OcpSpec:
    """Optimal-control problem instance.

    ``dt`` is the shooting integrator step; every objective and gradient
    evaluation uses the same fixed grid, so the finite-dimensional problem
    being optimised is exactly reproducible.
    """

    params: ModelParams
    smith: SmithConfig
    horizon_t: float
    n_intervals: int
    stage_cost: StageCost = PLAIN_Y
    init_state: PopulationState = PopulationState(0.01, 0.5, 0.5)
    init_guess: Optional[ControlSchedule] = None
    dt: float = 0.01

    def __post_init__(self) -> None:
        if self.n_intervals < 2:
            raise ParameterError(f"n_intervals must be >= 2, got {self.n_intervals}")
        if self.horizon_t <= 0.0:
            raise ParameterError(f"horizon_t must be positive, got {self.horizon_t}")
        if self.dt <= 0.0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if self.init_guess is not None:
            if (
                self.init_guess.n_intervals != self.n_intervals
                or self.init_guess.horizon_t != self.horizon_t
            ):
                raise ParameterError("init_guess dimensions do not match the spec")

    @property
    def steps_per_interval(self) -> int:
        seg = self.horizon_t / self.n_intervals
        return max(1, math.ceil(seg / self.dt - 1e-12))

    def schedule(self, values) -> ControlSchedule:
        return ControlSchedule(self.horizon_t, tuple(float(v) for v in values))


@dataclass(frozen=True)
class SolverOptions:
    """Projected-gradient settings; defaults are the contract tolerances."""

    grad_delta: float = 1e-5
    gtol: float = 1e-5
    ftol: float = 1e-9
    max_iter: int = 500
    armijo_c1: float = 1e-4
    backtrack: float = 0.5
    step0: float = 1.0
    step_max: float = 1024.0
    step_min: float = 1e-14
    starts: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class OcpSolution:
    """Best iterate found, with first-order diagnostics."""

    control: ControlSchedule
    trajectory: Trajectory
    objective: float
    iterations: int
    first_order_residual: float
    converged: bool
    exit_reason: str


def _integrate_opts(spec: OcpSpec, record_every: int = 1) -> IntegrateOptions:
    return IntegrateOptions(
        h=spec.dt, cost_weight=spec.stage_cost.weight, record_every=record_every
    )


def objective(spec: OcpSpec, u: ControlSchedule) -> float:
    """Stage-cost integral of the trajectory under schedule ``u``."""
    if u.n_intervals != spec.n_intervals or u.horizon_t != spec.horizon_t:
        raise ParameterError("schedule dimensions do not match the spec")
    traj = integrate(spec.init_state, u, spec.params, spec.smith, _integrate_opts(spec))
    return integral_of_y(traj)


def _batch_objectives(spec: OcpSpec, controls: np.ndarray) -> np.ndarray:
    p = spec.params
    _, costs, max_clamp = _kernels.schedule_batch(
        spec.init_state.y,
        spec.init_state.z_sbar,
        spec.init_state.z_ibar,
        np.ascontiguousarray(controls, dtype=np.float64),
        spec.steps_per_interval,
        p.alpha,
        p.gamma,
        p.beta_p,
        p.beta_u,
        p.c_p,
        p.c_u,
        p.loss,
        p.mu_i,
        spec.smith.sigma,
        spec.stage_cost.weight,
        spec.horizon_t,
    )
    if max_clamp > 1e-6:
        raise ParameterError(f"batch integration clamp {max_clamp:.2e} too large; reduce dt")
    return costs


def gradient(spec: OcpSpec, u: ControlSchedule, delta: float = 1e-5) -> np.ndarray:
    """Per-interval sensitivity of the objective, by central differences.

    Perturbations are clipped to [0, 1], which degrades gracefully to a
    one-sided difference at an active bound; the divisor is always the
    realised perturbation width.
    """
    base = np.asarray(u.values, dtype=np.float64)
    n = len(base)
    up = np.repeat(base[None, :], n, axis=0)
    dn = up.copy()
    hi = np.minimum(1.0, base + delta)
    lo = np.maximum(0.0, base - delta)
    up[np.arange(n), np.arange(n)] = hi
    dn[np.arange(n), np.arange(n)] = lo
    costs = _batch_objectives(spec, np.vstack([up, dn]))
    widths = hi - lo
    return (costs[:n] - costs[n:]) / widths


@dataclass
class _RunResult:
    values: np.ndarray
    objective: float
    iterations: int
    residual: float
    converged: bool
    exit_reason: str


def _projected_descent(spec: OcpSpec, u0: np.ndarray, opts: SolverOptions) -> _RunResult:
    u = np.clip(np.asarray(u0, dtype=np.float64), 0.0, 1.0)
    j = objective(spec, spec.schedule(u))
    step = opts.step0
    iterations = 0
    residual = float("inf")
    for _ in range(opts.max_iter):
        g = gradient(spec, spec.schedule(u), opts.grad_delta)
        residual = float(np.linalg.norm(u - np.clip(u - g, 0.0, 1.0)))
        if residual < opts.gtol:
            return _RunResult(u, j, iterations, residual, True, "first_order")
        step = min(step * 2.0, opts.step_max)
        accepted = False
        while step >= opts.step_min:
            u_new = np.clip(u - step * g, 0.0, 1.0)
            move = u - u_new
            move_sq = float(move @ move)
            if move_sq == 0.0:
                break
            j_new = objective(spec, spec.schedule(u_new))
            if j_new <= j - opts.armijo_c1 / step * move_sq:
                accepted = True
                break
            step *= opts.backtrack
        if not accepted:
            return _RunResult(u, j, iterations, residual, True, "line_search_exhausted")
        decrease = j - j_new
        u, j = u_new, j_new
        iterations += 1
        if decrease < opts.ftol:
            return _RunResult(u, j, iterations, residual, True, "objective_stall")
    return _RunResult(u, j, iterations, residual, False, "max_iterations")


def solve(spec: OcpSpec, opts: Optional[SolverOptions] = None) -> OcpSolution:
    """Multi-start projected gradient descent; returns the best local solution.

    Starts are the constant schedules in ``opts.starts`` plus the spec's
    initial guess when provided.  The reported objective is recomputed by an
    ordinary simulation pass over the final control.
    """
    opts = opts or SolverOptions()
    n = spec.n_intervals
    starts: list[np.ndarray] = []
    if spec.init_guess is not None:
        starts.append(np.asarray(spec.init_guess.values, dtype=np.float64))
    for c in opts.starts:
        cand = np.full(n, float(c))
        if not any(np.array_equal(cand, s) for s in starts):
            starts.append(cand)

    best: Optional[_RunResult] = None
    for i, u0 in enumerate(starts):
        run = _projected_descent(spec, u0, opts)
        logger.info(
            "start %d/%d: J=%.8f iters=%d exit=%s", i + 1, len(starts), run.objective,
            run.iterations, run.exit_reason,
        )
        if best is None or run.objective < best.objective:
            best = run
    assert best is not None

    control = spec.schedule(best.values)
    traj = integrate(spec.init_state, control, spec.params, spec.smith, _integrate_opts(spec))
    return OcpSolution(
        control=control,
        trajectory=traj,
        objective=integral_of_y(traj),
        iterations=best.iterations,
        first_order_residual=best.residual,
        converged=best.converged,
        exit_reason=best.exit_reason,
    )


@dataclass(frozen=True)
class CompareReport:
    """Static-versus-dynamic comparison on one problem instance.

    ``dominance_fraction`` is the share of sample times at which the dynamic
    infected proportion does not exceed the static one beyond 1e-6.
    """

    static: StaticSignalResult
    static_objective: float
    static_trajectory: Trajectory
    dynamic: OcpSolution
    dominance_fraction: float

    @property
    def dynamic_objective(self) -> float:
        return self.dynamic.objective


def compare_static_dynamic(
    spec: OcpSpec, opts: Optional[SolverOptions] = None
) -> CompareReport:
    """Optimal static signal versus the solved dynamic schedule.

    The constant optimal-static schedule is also fed to the solver as its
    initial guess, so the dynamic objective can never exceed the static one
    (descent is monotone from that start).
    """
    static = optimal_static_signal(spec.params)
    static_schedule = ControlSchedule.constant(static.mu_s, spec.horizon_t, spec.n_intervals)
    static_traj = integrate(
        spec.init_state, static_schedule, spec.params, spec.smith, _integrate_opts(spec)
    )
    static_obj = integral_of_y(static_traj)

    seeded = spec if spec.init_guess is not None else replace(spec, init_guess=static_schedule)
    dynamic = solve(seeded, opts)

    tol = 1e-6
    frac = float(np.mean(dynamic.trajectory.y <= static_traj.y + tol))
    return CompareReport(
        static=static,
        static_objective=static_obj,
        static_trajectory=static_traj,
        dynamic=dynamic,
        dominance_fraction=frac,
    )


def write_control_csv(schedule: ControlSchedule, path) -> None:
    """Write ``k, t_start, t_end, mu_s`` rows for a schedule."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "t_start", "t_end", "mu_s"])
        for k, value in enumerate(schedule.values):
            t0, t1 = schedule.interval_bounds(k)
            writer.writerow([k, f"{t0:.10g}", f"{t1:.10g}", f"{value:.12g}"])


def write_solution_json(
    sol: OcpSolution, path, static_baseline_objective: Optional[float] = None
) -> None:
    payload = {
        "objective": sol.objective,
        "iterations": sol.iterations,
        "first_order_residual": sol.first_order_residual,
        "converged": sol.converged,
        "exit_reason": sol.exit_reason,
        "static_baseline_objective": static_baseline_objective,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

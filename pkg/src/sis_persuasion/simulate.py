"""Coupled infection / learning dynamics under a signal schedule.

The infected proportion follows the SIS equation with the signal-dependent
effective rate, while the two unprotected shares follow smoothed
switch-rate dynamics: agents flow between protected and unprotected at
logistic rates in the utility gap, with sharpness ``sigma``.  Writing
``phi(x) = 1 / (1 + exp(x))``, the inflow/outflow balance

    dz = (1 - z) * phi(sigma * gap) - z * phi(-sigma * gap)

collapses algebraically to ``phi(sigma * gap) - z``, which is the form
integrated here.  Large ``sigma`` recovers best-response switching; its
stationary points approach the mixed-complementarity conditions of the
stationary Nash equilibrium.

Integration is fixed-step classical Runge-Kutta with the running stage cost
carried as an augmented state, so the reported cost integral uses exactly
the quadrature implied by the integrator.  Steps never straddle a control
switch.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import ModelParams, ParameterError, PopulationState, Signal, utility_gap

__all__ = [
    "SmithConfig",
    "ControlSchedule",
    "Trajectory",
    "IntegrateOptions",
    "IntegrationError",
    "rhs",
    "integrate",
    "integral_of_y",
    "write_trajectory_csv",
]


class IntegrationError(RuntimeError):
    """State left [0, 1]^3 by more than the clamp tolerance; reduce the step."""


@dataclass(frozen=True)
class SmithConfig:
    """Sharpness of the smoothed switching dynamics (0 = uniform switching)."""

    sigma: float = 20.0

    def __post_init__(self) -> None:
        if self.sigma < 0.0:
            raise ParameterError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class ControlSchedule:
    """Piecewise-constant signal fidelity over [0, horizon_t].

    ``values[k]`` applies on the half-open interval [k*T/N, (k+1)*T/N); the
    final value also applies at t = T.
    """

    horizon_t: float
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.horizon_t <= 0.0:
            raise ParameterError(f"horizon_t must be positive, got {self.horizon_t}")
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 1:
            raise ParameterError("schedule needs at least one value")
        for v in vals:
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"schedule values must lie in [0, 1], got {v}")
        object.__setattr__(self, "values", vals)

    @property
    def n_intervals(self) -> int:
        return len(self.values)

    @classmethod
    def constant(cls, value: float, horizon_t: float, n_intervals: int = 1) -> "ControlSchedule":
        return cls(horizon_t, (float(value),) * n_intervals)

    def interval_bounds(self, k: int) -> tuple[float, float]:
        n = self.n_intervals
        return (self.horizon_t * k / n, self.horizon_t * (k + 1) / n)

    def value_at(self, t: float) -> float:
        if not 0.0 <= t <= self.horizon_t:
            raise ValueError(f"t={t} outside [0, {self.horizon_t}]")
        k = min(self.n_intervals - 1, int(t / self.horizon_t * self.n_intervals))
        return self.values[k]


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution with the applied signal and running cost integral."""

    times: np.ndarray
    y: np.ndarray
    z_sbar: np.ndarray
    z_ibar: np.ndarray
    mu_s: np.ndarray
    cost: np.ndarray
    max_clamp: float = 0.0

    def __len__(self) -> int:
        return len(self.times)

    def state(self, i: int) -> PopulationState:
        return PopulationState(float(self.y[i]), float(self.z_sbar[i]), float(self.z_ibar[i]))

    def terminal_state(self) -> PopulationState:
        return self.state(-1)


@dataclass(frozen=True)
class IntegrateOptions:
    """Integrator settings.

    ``method`` is "rk4" (fixed step ``h``, the default and the reference) or
    "rk45" (adaptive, via scipy, for validation runs only).  ``cost_weight``
    adds ``cost_weight * (1 - mu_s)**2`` to the running-cost integrand on top
    of the infected proportion.
    """

    h: float = 1e-3
    cost_weight: float = 0.0
    record_every: int = 1
    clamp_tol: float = 1e-6
    method: str = "rk4"
    rtol: float = 1e-10
    atol: float = 1e-12

    def __post_init__(self) -> None:
        if self.h <= 0.0:
            raise ParameterError(f"step h must be positive, got {self.h}")
        if self.cost_weight < 0.0:
            raise ParameterError(f"cost_weight must be >= 0, got {self.cost_weight}")
        if self.record_every < 1:
            raise ParameterError("record_every must be >= 1")
        if self.method not in ("rk4", "rk45"):
            raise ParameterError(f"unknown method {self.method!r}")


def rhs(
    s: PopulationState, mu_s: float, p: ModelParams, smith: SmithConfig
) -> tuple[float, float, float]:
    """Time derivative (dy, dz_sbar, dz_ibar) at state ``s`` under ``mu_s``."""
    gap_s = utility_gap(s, Signal.SUSCEPTIBLE, mu_s, p)
    gap_i = utility_gap(s, Signal.INFECTED, mu_s, p)
    b = p.beta_p + (p.beta_u - p.beta_p) * (s.z_ibar * p.mu_i + s.z_sbar * (1.0 - p.mu_i))
    a = p.alpha + (1.0 - p.alpha) * (s.z_sbar * mu_s + s.z_ibar * (1.0 - mu_s))
    dy = ((1.0 - s.y) * b * a - p.gamma) * s.y
    dzs = _logistic(smith.sigma * gap_s) - s.z_sbar
    dzi = _logistic(smith.sigma * gap_i) - s.z_ibar
    return (dy, dzs, dzi)


def _logistic(x: float) -> float:
    # 1 / (1 + exp(x)); both branches exponentiate non-positive arguments.
    if x >= 0.0:
        t = math.exp(-x)
        return t / (1.0 + t)
    return 1.0 / (1.0 + math.exp(x))


def integrate(
    s0: PopulationState,
    schedule: ControlSchedule,
    p: ModelParams,
    smith: SmithConfig,
    opts: Optional[IntegrateOptions] = None,
) -> Trajectory:
    """Integrate the coupled dynamics over [0, horizon_t].

    The control is held constant within each schedule interval and steps are
    aligned to interval boundaries.  After every step the state is projected
    onto [0, 1]^3; the dynamics are forward invariant, so a projection
    distance above ``clamp_tol`` signals an unstable step size and raises
    :class:`IntegrationError`.
    """
    opts = opts or IntegrateOptions()
    if opts.method == "rk45":
        return _integrate_rk45(s0, schedule, p, smith, opts)

    alpha, gamma = p.alpha, p.gamma
    bp, dbeta = p.beta_p, p.beta_u - p.beta_p
    cp, cu, mui, sigma = p.c_p, p.c_u, p.mu_i, smith.sigma
    la = (1.0 - alpha) * p.loss
    one_m_alpha = 1.0 - alpha
    cw = opts.cost_weight
    exp = math.exp

    def deriv(y: float, zs: float, zi: float, mu: float) -> tuple[float, float, float, float]:
        b = bp + dbeta * (zi * mui + zs * (1.0 - mui))
        dy = ((1.0 - y) * b * (alpha + one_m_alpha * (zs * mu + zi * (1.0 - mu))) - gamma) * y
        lby_cu = la * b * y - cu
        den_i = mui * y + (1.0 - mu) * (1.0 - y)
        pis_i = (1.0 - mu) * (1.0 - y) / den_i if den_i > 0.0 else 1.0 - y
        den_s = (1.0 - mui) * y + mu * (1.0 - y)
        pis_s = mu * (1.0 - y) / den_s if den_s > 0.0 else 1.0 - y
        gap_s = pis_s * lby_cu + cu - cp
        gap_i = pis_i * lby_cu + cu - cp
        x = sigma * gap_s
        if x >= 0.0:
            t = exp(-x)
            phi_s = t / (1.0 + t)
        else:
            phi_s = 1.0 / (1.0 + exp(x))
        x = sigma * gap_i
        if x >= 0.0:
            t = exp(-x)
            phi_i = t / (1.0 + t)
        else:
            phi_i = 1.0 / (1.0 + exp(x))
        return dy, phi_s - zs, phi_i - zi, y + cw * (1.0 - mu) * (1.0 - mu)

    y, zs, zi = s0.as_tuple()
    cost = 0.0
    max_clamp = 0.0
    times = [0.0]
    ys = [y]
    zss = [zs]
    zis = [zi]
    mus = [schedule.values[0]]
    costs = [0.0]

    step_index = 0
    for k in range(schedule.n_intervals):
        t_lo, t_hi = schedule.interval_bounds(k)
        seg = t_hi - t_lo
        n_steps = max(1, math.ceil(seg / opts.h - 1e-12))
        h = seg / n_steps
        mu = schedule.values[k]
        half = 0.5 * h
        sixth = h / 6.0
        for j in range(n_steps):
            d1y, d1s, d1i, d1c = deriv(y, zs, zi, mu)
            d2y, d2s, d2i, d2c = deriv(y + half * d1y, zs + half * d1s, zi + half * d1i, mu)
            d3y, d3s, d3i, d3c = deriv(y + half * d2y, zs + half * d2s, zi + half * d2i, mu)
            d4y, d4s, d4i, d4c = deriv(y + h * d3y, zs + h * d3s, zi + h * d3i, mu)
            y += sixth * (d1y + 2.0 * (d2y + d3y) + d4y)
            zs += sixth * (d1s + 2.0 * (d2s + d3s) + d4s)
            zi += sixth * (d1i + 2.0 * (d2i + d3i) + d4i)
            cost += sixth * (d1c + 2.0 * (d2c + d3c) + d4c)
            if y < 0.0 or y > 1.0:
                clamped = min(1.0, max(0.0, y))
                max_clamp = max(max_clamp, abs(y - clamped))
                y = clamped
            if zs < 0.0 or zs > 1.0:
                clamped = min(1.0, max(0.0, zs))
                max_clamp = max(max_clamp, abs(zs - clamped))
                zs = clamped
            if zi < 0.0 or zi > 1.0:
                clamped = min(1.0, max(0.0, zi))
                max_clamp = max(max_clamp, abs(zi - clamped))
                zi = clamped
            step_index += 1
            is_last = k == schedule.n_intervals - 1 and j == n_steps - 1
            if step_index % opts.record_every == 0 or is_last:
                times.append(t_lo + (j + 1) * h)
                ys.append(y)
                zss.append(zs)
                zis.append(zi)
                mus.append(mu)
                costs.append(cost)

    if max_clamp > opts.clamp_tol:
        raise IntegrationError(
            f"projection distance {max_clamp:.3e} exceeds {opts.clamp_tol}; reduce h"
        )
    return Trajectory(
        times=np.asarray(times),
        y=np.asarray(ys),
        z_sbar=np.asarray(zss),
        z_ibar=np.asarray(zis),
        mu_s=np.asarray(mus),
        cost=np.asarray(costs),
        max_clamp=max_clamp,
    )


def _integrate_rk45(
    s0: PopulationState,
    schedule: ControlSchedule,
    p: ModelParams,
    smith: SmithConfig,
    opts: IntegrateOptions,
) -> Trajectory:
    """Adaptive cross-check path; samples on the same grid as the rk4 path."""
    from scipy.integrate import solve_ivp

    def fun(_t: float, state: np.ndarray, mu: float) -> list[float]:
        s = PopulationState(
            min(1.0, max(0.0, state[0])),
            min(1.0, max(0.0, state[1])),
            min(1.0, max(0.0, state[2])),
        )
        dy, dzs, dzi = rhs(s, mu, p, smith)
        return [dy, dzs, dzi, s.y + opts.cost_weight * (1.0 - mu) ** 2]

    state = np.array([s0.y, s0.z_sbar, s0.z_ibar, 0.0])
    times = [0.0]
    ys, zss, zis = [state[0]], [state[1]], [state[2]]
    mus = [schedule.values[0]]
    costs = [0.0]
    for k in range(schedule.n_intervals):
        t_lo, t_hi = schedule.interval_bounds(k)
        seg = t_hi - t_lo
        n_steps = max(1, math.ceil(seg / opts.h - 1e-12))
        grid = t_lo + (seg / n_steps) * np.arange(1, n_steps + 1)
        mu = schedule.values[k]
        sol = solve_ivp(
            fun,
            (t_lo, t_hi),
            state,
            t_eval=grid,
            args=(mu,),
            rtol=opts.rtol,
            atol=opts.atol,
            method="RK45",
        )
        if not sol.success:
            raise IntegrationError(f"rk45 failed on interval {k}: {sol.message}")
        take = slice(None, None, opts.record_every)
        times.extend(sol.t[take])
        ys.extend(sol.y[0, take])
        zss.extend(sol.y[1, take])
        zis.extend(sol.y[2, take])
        costs.extend(sol.y[3, take])
        mus.extend([mu] * len(sol.t[take]))
        state = sol.y[:, -1].copy()
    return Trajectory(
        times=np.asarray(times),
        y=np.asarray(ys),
        z_sbar=np.asarray(zss),
        z_ibar=np.asarray(zis),
        mu_s=np.asarray(mus),
        cost=np.asarray(costs),
        max_clamp=0.0,
    )


def integral_of_y(traj: Trajectory) -> float:
    """Accumulated running-cost integral (plain infected proportion unless a
    penalty weight was configured at integration time)."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    return float(traj.cost[-1])


def write_trajectory_csv(traj: Trajectory, path, every: int = 1) -> None:
    """Write ``t, y, z_sbar, z_ibar, mu_s, cost_integral`` rows, thinned by
    ``every`` (the final sample is always written)."""
    n = len(traj)
    idx = list(range(0, n, every))
    if idx[-1] != n - 1:
        idx.append(n - 1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "y", "z_sbar", "z_ibar", "mu_s", "cost_integral"])
        for i in idx:
            writer.writerow(
                [
                    f"{traj.times[i]:.10g}",
                    f"{traj.y[i]:.12g}",
                    f"{traj.z_sbar[i]:.12g}",
                    f"{traj.z_ibar[i]:.12g}",
                    f"{traj.mu_s[i]:.12g}",
                    f"{traj.cost[i]:.12g}",
                ]
            )

"""Stationary Nash equilibria and optimal static signals.

Fixing the signal fidelity ``mu_s`` and letting the population play best
responses yields a stationary Nash equilibrium (SNE): an endemic infected
proportion together with unprotected shares for each signal group, linked by
mixed complementarity (interior shares require indifference, corner shares
require the matching strict preference).  Under a truthful infected-signal
the SNE falls into one of five regimes, selected here by direct evaluation
of the regime conditions and certified post hoc by complementarity
residuals.

Two signal thresholds organise the picture: below ``mu_s_min`` nobody
protects; ``mu_s_max`` (the root of the told-infected indifference function
at z_ibar = 0) separates the mixed regime from the signal-following regime
and, when the protection cost clears its floor, is the optimal static
signal.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .model import (
    ModelParams,
    PopulationState,
    Signal,
    check_assumptions,
    effective_rate,
    endemic_level,
    ibar_gap_at_endemic,
    utility_gap,
)


class RootBracketError(RuntimeError):
    """A root finder was called without a sign change on its bracket."""


class ClassificationError(RuntimeError):
    """No SNE regime matched, or the matched regime failed its residual check."""


class SneCase(Enum):
    """Behavioural regime of the SNE, ordered by decreasing protection."""

    FULL_PROTECTION = 1    # everyone protects regardless of signal
    SBAR_MIXED = 2         # told-susceptible agents are indifferent (interior share)
    SIGNAL_FOLLOWING = 3   # told-susceptible unprotected, told-infected protected
    IBAR_MIXED = 4         # told-infected agents are indifferent (interior share)
    NO_PROTECTION = 5      # nobody protects


@dataclass(frozen=True)
class SneResult:
    """An SNE triple with the regime that produced it and the signal used."""

    y_star: float
    z_sbar_star: float
    z_ibar_star: float
    case_id: SneCase
    mu_s: float

    def state(self) -> PopulationState:
        return PopulationState(self.y_star, self.z_sbar_star, self.z_ibar_star)


@dataclass(frozen=True)
class Thresholds:
    """Signal thresholds and the two strategy-independent infection levels.

    mu_s_min may be arbitrarily negative (it is a formula value, not a
    probability); callers clamp it to [0, 1] before using it as a sweep
    bound.  mu_s_max always lies in [0, 1).
    """

    mu_s_min: float
    mu_s_max: float
    y_star_p: float
    y_star_int: float


_BISECT_ITERS = 200  # fixed count: identical inputs give bit-identical roots
_GAP_RESIDUAL_TOL = 1e-10
_FIXED_POINT_TOL = 1e-8
_INDIFFERENCE_TOL = 1e-6


def _bisect(f: Callable[[float], float], lo: float, hi: float) -> float:
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo < 0.0) == (f_hi < 0.0):
        raise RootBracketError(f"no sign change on [{lo}, {hi}]: f={f_lo}, {f_hi}")
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid < 0.0) == (f_lo < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def thresholds(p: ModelParams) -> Thresholds:
    """Compute both signal thresholds and the fixed infection levels.

    ``mu_s_max`` is 0 when the told-infected gap at z_ibar = 0 is already
    nonnegative at mu_s = 0, otherwise the unique root of that gap in (0, 1)
    found by bisection.
    """
    den = p.gamma * (p.c_p - (1.0 - p.alpha) * p.loss * (p.beta_u - p.gamma))
    if den != 0.0:
        mu_s_min = 1.0 - (p.beta_u - p.gamma) * (p.c_u - p.c_p) / den
    else:
        mu_s_min = float("-inf")

    g0 = ibar_gap_at_endemic(0.0, 0.0, p)
    if g0 >= 0.0:
        mu_s_max = 0.0
    else:
        if ibar_gap_at_endemic(0.0, 1.0, p) < 0.0:
            raise RootBracketError(
                "told-infected gap at z_ibar=0 is negative on all of [0, 1]; "
                "parameters are inconsistent"
            )
        mu_s_max = _bisect(lambda m: ibar_gap_at_endemic(0.0, m, p), 0.0, 1.0)
        residual = abs(ibar_gap_at_endemic(0.0, mu_s_max, p))
        if residual >= _GAP_RESIDUAL_TOL:
            raise RootBracketError(f"bisection residual {residual} too large for mu_s_max")

    return Thresholds(
        mu_s_min=mu_s_min,
        mu_s_max=mu_s_max,
        y_star_p=1.0 - p.gamma / (p.alpha * p.beta_p),
        y_star_int=p.c_p / (p.loss * (1.0 - p.alpha) * p.beta_p),
    )


def ibar_indifference_root(mu_s: float, p: ModelParams) -> float:
    """Interior unprotected share of told-infected agents at their SNE.

    The unique z in (0, 1) at which told-infected agents are indifferent at
    the endemic state with z_sbar = 1, found by bisection on [0, 1].
    """
    root = _bisect(lambda z: ibar_gap_at_endemic(z, mu_s, p), 0.0, 1.0)
    residual = abs(ibar_gap_at_endemic(root, mu_s, p))
    if residual >= _GAP_RESIDUAL_TOL:
        raise RootBracketError(f"bisection residual {residual} too large for z_ibar root")
    return root


def ibar_root_closed_form(z_root: float, mu_s: float, p: ModelParams) -> float:
    """Closed-form re-expression of the told-infected indifference root.

    Substituting the endemic level into the indifference condition and
    solving for z gives an implicit identity: evaluated at the bisection
    root, the right-hand side must reproduce the root itself.  Used as an
    independent consistency oracle; the intermediate quantities below have no
    standalone meaning.
    """
    state = PopulationState(0.0, 1.0, z_root)
    w = effective_rate(state, mu_s, p)
    y = 1.0 - p.gamma / w
    d_beta = p.beta_u - p.beta_p
    l_eq = (1.0 - p.alpha) * p.loss * d_beta * (1.0 - mu_s) * (1.0 - y)
    return (
        p.c_p * w / (p.loss * (w - p.gamma) * (1.0 - p.alpha) * d_beta)
        - (p.c_u - p.c_p) / l_eq
        - p.beta_p / d_beta
    )


def sbar_indifference_share(mu_s: float, p: ModelParams) -> float:
    """Unprotected share of told-susceptible agents pinning the endemic level
    at the indifference level (interior told-susceptible regime)."""
    y_int = p.c_p / (p.loss * (1.0 - p.alpha) * p.beta_p)
    return (p.gamma - p.alpha * p.beta_p * (1.0 - y_int)) / (
        p.beta_p * (1.0 - p.alpha) * (1.0 - y_int) * mu_s
    )


@dataclass(frozen=True)
class ComplementarityReport:
    """Signed residuals certifying an SNE triple."""

    fixed_point_residual: float
    gap_sbar: float
    gap_ibar: float
    ok: bool


def complementarity_report(
    res: SneResult,
    p: ModelParams,
    fixed_point_tol: float = _FIXED_POINT_TOL,
    gap_tol: float = _INDIFFERENCE_TOL,
) -> ComplementarityReport:
    """Check the mixed complementarity conditions for ``res``.

    A positive gap forces the unprotected share to 0, a negative gap forces
    it to 1, and an interior share requires the gap to vanish (within
    ``gap_tol``).  The infected proportion must also be the endemic fixed
    point of the strategies (within ``fixed_point_tol``).
    """
    fp = abs(res.y_star - endemic_level(res.z_sbar_star, res.z_ibar_star, res.mu_s, p))
    state = res.state()
    gap_s = utility_gap(state, Signal.SUSCEPTIBLE, res.mu_s, p)
    gap_i = utility_gap(state, Signal.INFECTED, res.mu_s, p)

    def share_ok(share: float, gap: float) -> bool:
        if share <= 0.0:
            return gap >= -gap_tol
        if share >= 1.0:
            return gap <= gap_tol
        return abs(gap) < gap_tol

    ok = fp < fixed_point_tol and share_ok(res.z_sbar_star, gap_s) and share_ok(
        res.z_ibar_star, gap_i
    )
    return ComplementarityReport(fp, gap_s, gap_i, ok)


def solve_sne(mu_s: float, p: ModelParams) -> SneResult:
    """Classify and return the SNE for signal fidelity ``mu_s``.

    Regime conditions are evaluated from most to least protection-averse
    (nobody protects first), with non-strict comparisons at measure-zero
    boundaries; the winner must pass the complementarity residual check.
    Requires a truthful infected signal (mu_i = 1).
    """
    if not 0.0 <= mu_s <= 1.0:
        raise ValueError(f"mu_s must lie in [0, 1], got {mu_s}")
    a2 = p.c_p > (1.0 - p.alpha) * p.loss * (p.beta_u - p.gamma)
    y_p = 1.0 - p.gamma / (p.alpha * p.beta_p)
    y_int = p.c_p / (p.loss * (1.0 - p.alpha) * p.beta_p)
    g0 = ibar_gap_at_endemic(0.0, mu_s, p)

    result: Optional[SneResult] = None
    if a2:
        den = p.gamma * (p.c_p - (1.0 - p.alpha) * p.loss * (p.beta_u - p.gamma))
        mu_s_min = 1.0 - (p.beta_u - p.gamma) * (p.c_u - p.c_p) / den
        if mu_s <= mu_s_min:
            result = SneResult(
                1.0 - p.gamma / p.beta_u, 1.0, 1.0, SneCase.NO_PROTECTION, mu_s
            )
    if result is None and g0 < 0.0 and ibar_gap_at_endemic(1.0, mu_s, p) > 0.0:
        z = ibar_indifference_root(mu_s, p)
        result = SneResult(
            endemic_level(1.0, z, mu_s, p), 1.0, z, SneCase.IBAR_MIXED, mu_s
        )
    if result is None and g0 >= 0.0 and endemic_level(1.0, 0.0, mu_s, p) <= y_int:
        result = SneResult(
            endemic_level(1.0, 0.0, mu_s, p), 1.0, 0.0, SneCase.SIGNAL_FOLLOWING, mu_s
        )
    if result is None and y_p < y_int < endemic_level(1.0, 0.0, mu_s, p):
        result = SneResult(
            y_int, sbar_indifference_share(mu_s, p), 0.0, SneCase.SBAR_MIXED, mu_s
        )
    if result is None and y_p >= y_int:
        result = SneResult(y_p, 0.0, 0.0, SneCase.FULL_PROTECTION, mu_s)

    if result is None:
        raise ClassificationError(
            f"no SNE regime matched at mu_s={mu_s}; numerical boundary tie suspected"
        )
    report = complementarity_report(result, p)
    if not report.ok:
        raise ClassificationError(
            f"regime {result.case_id.name} failed residuals at mu_s={mu_s}: {report}"
        )
    return result


@dataclass(frozen=True)
class StaticSignalResult:
    """Optimal static signal, its SNE, and how it was obtained."""

    mu_s: float
    sne: SneResult
    grid_derived: bool


def optimal_static_signal(
    p: ModelParams, grid_step: float = 0.005
) -> StaticSignalResult:
    """Static signal minimising the infected proportion at the SNE.

    When the protection cost clears its floor this is ``mu_s_max`` exactly;
    otherwise no closed-form argmin is available and a grid search over
    [grid_step, 1 - grid_step] is used instead (flagged in the result).
    """
    report = check_assumptions(p)
    if report.a2_protection_cost:
        mu = thresholds(p).mu_s_max
        return StaticSignalResult(mu, solve_sne(mu, p), grid_derived=False)
    grid = np.arange(grid_step, 1.0 - grid_step / 2.0, grid_step)
    best: Optional[StaticSignalResult] = None
    for mu in grid:
        sne = solve_sne(float(mu), p)
        if best is None or sne.y_star < best.sne.y_star:
            best = StaticSignalResult(float(mu), sne, grid_derived=True)
    assert best is not None
    return best


@dataclass(frozen=True)
class MonotonicityReport:
    """Numerical certificate that the SNE infection level is V-shaped in mu_s.

    Certifies strict decrease of the mixed-regime level on the open interval
    (max(0, mu_s_min), mu_s_max) and strict increase of the signal-following
    level on [mu_s_max, 1].  Not applicable when the protection-cost floor
    fails or mu_s_max = 0.
    """

    applicable: bool
    decreasing_ok: bool
    increasing_ok: bool
    violation: Optional[tuple[float, float, float, float]]
    mu_decreasing: tuple[float, ...]
    y_decreasing: tuple[float, ...]
    mu_increasing: tuple[float, ...]
    y_increasing: tuple[float, ...]

    @property
    def ok(self) -> bool:
        return self.applicable and self.decreasing_ok and self.increasing_ok


def monotonicity_certificate(p: ModelParams, grid_n: int = 100) -> MonotonicityReport:
    """Sample the SNE infection level and certify its two monotone branches.

    Reports the first violating pair, if any, rather than raising.
    """
    report = check_assumptions(p)
    th = thresholds(p)
    if not (report.a2_protection_cost and th.mu_s_max > 0.0):
        return MonotonicityReport(False, False, False, None, (), (), (), ())

    lo = max(0.0, th.mu_s_min)
    mu_dec = np.linspace(lo, th.mu_s_max, grid_n + 2)[1:-1]
    y_dec = np.array([solve_sne(float(m), p).y_star for m in mu_dec])
    mu_inc = np.linspace(th.mu_s_max, 1.0, grid_n)
    y_inc = np.array([endemic_level(1.0, 0.0, float(m), p) for m in mu_inc])

    violation: Optional[tuple[float, float, float, float]] = None
    decreasing_ok = True
    for i in range(len(y_dec) - 1):
        if not y_dec[i + 1] < y_dec[i]:
            decreasing_ok = False
            violation = (float(mu_dec[i]), float(mu_dec[i + 1]), float(y_dec[i]), float(y_dec[i + 1]))
            break
    increasing_ok = True
    if decreasing_ok:
        for i in range(len(y_inc) - 1):
            if not y_inc[i + 1] > y_inc[i]:
                increasing_ok = False
                violation = (float(mu_inc[i]), float(mu_inc[i + 1]), float(y_inc[i]), float(y_inc[i + 1]))
                break
    return MonotonicityReport(
        True,
        decreasing_ok,
        increasing_ok,
        violation,
        tuple(float(m) for m in mu_dec),
        tuple(float(v) for v in y_dec),
        tuple(float(m) for m in mu_inc),
        tuple(float(v) for v in y_inc),
    )

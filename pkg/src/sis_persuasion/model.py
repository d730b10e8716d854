"""Core model types and pointwise formulas.

An SIS epidemic spreads through a large population in which nobody observes
their own infection state directly.  A sender broadcasts a binary signal
(``told susceptible`` / ``told infected``) whose fidelities are ``mu_s``
(probability a susceptible agent is told susceptible) and ``mu_i``
(probability an infected agent is told infected).  Agents form a Bayesian
posterior from the signal and the publicly known infected proportion ``y``,
then choose whether to adopt a partially effective protection.

Everything in this module is a pure function of immutable value objects, so
all of it is safe to call from concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class ParameterError(ValueError):
    """A model parameter violates its admissible range."""


class SignalDomainError(ValueError):
    """A signal fidelity lies outside [0, 1]."""


class EndemicExistenceError(RuntimeError):
    """The endemic equilibrium does not exist (effective rate <= recovery rate)."""


class Signal(Enum):
    """The two broadcast signals: 'you look susceptible' / 'you look infected'."""

    SUSCEPTIBLE = "sbar"
    INFECTED = "ibar"


@dataclass(frozen=True)
class ModelParams:
    """Epidemic and economic constants.

    alpha:  protection effectiveness factor for susceptible agents, in (0, 1)
            (a protected susceptible is infected at ``alpha`` times the
            unprotected rate).
    gamma:  recovery rate, in (0, 1).
    beta_p: transmission rate of a protected infected agent.
    beta_u: transmission rate of an unprotected infected agent;
            0 < beta_p < beta_u < 1.
    c_p:    cost of adopting protection, > 0.
    c_u:    cost borne by an unprotected infected agent, > 0.
    loss:   loss incurred by a susceptible agent upon becoming infected, > 0.
    mu_i:   infected-signal fidelity, in [0, 1]; 1 means infected agents are
            always told so.
    """

    alpha: float
    gamma: float
    beta_p: float
    beta_u: float
    c_p: float
    c_u: float
    loss: float
    mu_i: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.gamma < 1.0:
            raise ParameterError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not 0.0 < self.beta_p < self.beta_u < 1.0:
            raise ParameterError(
                f"need 0 < beta_p < beta_u < 1, got beta_p={self.beta_p}, beta_u={self.beta_u}"
            )
        if self.c_p <= 0.0 or self.c_u <= 0.0 or self.loss <= 0.0:
            raise ParameterError("c_p, c_u and loss must all be positive")
        if not 0.0 <= self.mu_i <= 1.0:
            raise ParameterError(f"mu_i must lie in [0, 1], got {self.mu_i}")


_STATE_TOL = 1e-9


def _unit_clamp(value: float, name: str) -> float:
    """Clamp tiny excursions beyond [0, 1]; reject anything larger."""
    if 0.0 <= value <= 1.0:
        return float(value)
    if -_STATE_TOL <= value <= 1.0 + _STATE_TOL:
        return min(1.0, max(0.0, float(value)))
    raise ParameterError(f"{name} must lie in [0, 1] (tolerance {_STATE_TOL}), got {value}")


@dataclass(frozen=True)
class PopulationState:
    """Full dynamical state of the population game.

    y:      infected proportion.
    z_sbar: unprotected fraction among agents told susceptible.
    z_ibar: unprotected fraction among agents told infected.
    """

    y: float
    z_sbar: float
    z_ibar: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "y", _unit_clamp(self.y, "y"))
        object.__setattr__(self, "z_sbar", _unit_clamp(self.z_sbar, "z_sbar"))
        object.__setattr__(self, "z_ibar", _unit_clamp(self.z_ibar, "z_ibar"))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.y, self.z_sbar, self.z_ibar)


@dataclass(frozen=True)
class AssumptionReport:
    """Advisory flags; each is a pure predicate of ModelParams.

    a1_truthful:         mu_i == 1 (infected agents receive a truthful signal).
    a1_costs:            c_p < c_u (known-infected agents prefer protecting).
    a1_recovery:         gamma < alpha * beta_p (the endemic level is positive
                         no matter what strategies are played).
    a2_protection_cost:  c_p > (1 - alpha) * loss * (beta_u - gamma), the
                         protection-cost floor under which the largest
                         admissible static signal is optimal.
    """

    a1_truthful: bool
    a1_costs: bool
    a1_recovery: bool
    a2_protection_cost: bool

    @property
    def a1_all(self) -> bool:
        return self.a1_truthful and self.a1_costs and self.a1_recovery


def check_assumptions(p: ModelParams) -> AssumptionReport:
    """Evaluate the standing assumptions on ``p`` (reporting, not rejection)."""
    return AssumptionReport(
        a1_truthful=p.mu_i == 1.0,
        a1_costs=p.c_p < p.c_u,
        a1_recovery=p.gamma < p.alpha * p.beta_p,
        a2_protection_cost=p.c_p > (1.0 - p.alpha) * p.loss * (p.beta_u - p.gamma),
    )


def _check_mu_s(mu_s: float) -> float:
    if not 0.0 <= mu_s <= 1.0:
        raise SignalDomainError(f"mu_s must lie in [0, 1], got {mu_s}")
    return float(mu_s)


def infectiousness(z_sbar: float, z_ibar: float, p: ModelParams) -> float:
    """Average transmission rate of the infected population.

    Infected agents are told infected with probability ``mu_i`` and told
    susceptible otherwise, so the unprotected share among them is
    ``z_ibar * mu_i + z_sbar * (1 - mu_i)``.
    """
    return p.beta_p + (p.beta_u - p.beta_p) * (z_ibar * p.mu_i + z_sbar * (1.0 - p.mu_i))


def effective_rate(s: PopulationState, mu_s: float, p: ModelParams) -> float:
    """Effective transmission rate of the aggregate SIS dynamics.

    Product of the average infectiousness of the infected population and the
    average susceptibility of the susceptible population; lies in
    [alpha * beta_p, beta_u].
    """
    mu_s = _check_mu_s(mu_s)
    b = infectiousness(s.z_sbar, s.z_ibar, p)
    a = p.alpha + (1.0 - p.alpha) * (s.z_sbar * mu_s + s.z_ibar * (1.0 - mu_s))
    return b * a


def posterior_infected(y: float, signal: Signal, mu_s: float, mu_i: float) -> float:
    """Posterior probability of being infected given the received signal.

    Bayes' rule with the infected proportion ``y`` as prior.  When the
    received signal has zero probability under (y, mu_s, mu_i) the posterior
    is defined to equal the prior, which keeps sweeps over fidelities free of
    NaNs at the measure-zero corners.
    """
    mu_s = _check_mu_s(mu_s)
    if not 0.0 <= mu_i <= 1.0:
        raise SignalDomainError(f"mu_i must lie in [0, 1], got {mu_i}")
    if not 0.0 <= y <= 1.0:
        raise ParameterError(f"prior y must lie in [0, 1], got {y}")
    if signal is Signal.INFECTED:
        num = mu_i * y
        den = mu_i * y + (1.0 - mu_s) * (1.0 - y)
    else:
        num = (1.0 - mu_i) * y
        den = (1.0 - mu_i) * y + mu_s * (1.0 - y)
    if den == 0.0:
        return y
    return num / den


def posterior_susceptible(y: float, signal: Signal, mu_s: float, mu_i: float) -> float:
    """Complement of :func:`posterior_infected`; the two sum to 1 exactly."""
    return 1.0 - posterior_infected(y, signal, mu_s, mu_i)


def utility_gap(s: PopulationState, signal: Signal, mu_s: float, p: ModelParams) -> float:
    """Expected-utility difference (protect minus stay unprotected).

    A positive value means protection is strictly preferred by recipients of
    ``signal``.  A protected agent pays ``c_p``; an unprotected infected agent
    pays ``c_u``; an unprotected susceptible agent faces infection loss
    ``loss`` at the population force of infection, reduced by ``alpha`` under
    protection.  Averaging over the posterior gives

        pi_s * (1 - alpha) * loss * b * y + pi_i * c_u - c_p,

    with ``b`` the average infectiousness of the infected population.
    """
    mu_s = _check_mu_s(mu_s)
    b = infectiousness(s.z_sbar, s.z_ibar, p)
    pi_s = posterior_susceptible(s.y, signal, mu_s, p.mu_i)
    return pi_s * ((1.0 - p.alpha) * p.loss * b * s.y - p.c_u) + p.c_u - p.c_p


def endemic_level(z_sbar: float, z_ibar: float, mu_s: float, p: ModelParams) -> float:
    """Stationary infected proportion ``1 - gamma / effective_rate``.

    Raises :class:`EndemicExistenceError` when the effective rate does not
    exceed the recovery rate (only possible when gamma >= alpha * beta_p).
    """
    rate = effective_rate(PopulationState(0.0, z_sbar, z_ibar), mu_s, p)
    if rate <= p.gamma:
        raise EndemicExistenceError(
            f"no endemic equilibrium: effective rate {rate} <= gamma {p.gamma}"
        )
    return 1.0 - p.gamma / rate


def sbar_gap_at_endemic(z_ibar: float, mu_s: float, p: ModelParams) -> float:
    """Utility gap of told-susceptible agents at the endemic state with
    every told-susceptible agent unprotected (z_sbar = 1)."""
    y = endemic_level(1.0, z_ibar, mu_s, p)
    return (1.0 - p.alpha) * p.loss * (p.beta_p + (p.beta_u - p.beta_p) * z_ibar) * y - p.c_p


def ibar_gap_at_endemic(z_ibar: float, mu_s: float, p: ModelParams) -> float:
    """Rescaled utility gap of told-infected agents at the same endemic state.

    Equals the told-infected utility gap multiplied by the (positive)
    normalising constant of their posterior, so it shares the gap's sign and
    roots.  Root-finding in the equilibrium module brackets this function.
    """
    y = endemic_level(1.0, z_ibar, mu_s, p)
    return y * (p.c_u - p.c_p) + (1.0 - mu_s) * (1.0 - y) * sbar_gap_at_endemic(z_ibar, mu_s, p)


def stable_logistic(x: float) -> float:
    """Overflow-safe ``1 / (1 + exp(x))``.

    Both branches exponentiate a non-positive argument, so extreme inputs
    underflow cleanly to 0 or 1 instead of overflowing.
    """
    if x >= 0.0:
        t = math.exp(-x)
        return t / (1.0 + t)
    return 1.0 / (1.0 + math.exp(x))

"""Core domain types: groups, articles, user preferences and model parameters.

Conventions used throughout the package: groups and articles are indexed
0/1 (group A / article a are 0), and 2x2 tables are numpy arrays indexed
``[group, article]``. Group g's preferred article has the same index as g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
from scipy import special

from .errors import ZeroPsi

__all__ = [
    "Group",
    "Article",
    "PreferenceSpec",
    "ModelParams",
    "Targeting",
    "compute_psi",
    "click_fraction",
    "params_from_preferences",
]


class Group(IntEnum):
    A = 0
    B = 1

    @property
    def opposite(self) -> "Group":
        return Group(1 - self)

    @property
    def preferred_article(self) -> "Article":
        return Article(int(self))


class Article(IntEnum):
    a = 0
    b = 1

    @property
    def opposite(self) -> "Article":
        return Article(1 - self)


@dataclass(frozen=True)
class PreferenceSpec:
    """Beta-distributed like probability plus the click cost/value pair.

    A shown user draws a like probability p ~ Beta(alpha, beta), clicks
    iff value * p >= cost, and likes with probability p given a click.
    """

    alpha: float
    beta: float
    cost: float = 1.0
    value: float = 2000.0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError(f"Beta shapes must be positive, got ({self.alpha}, {self.beta})")
        if self.cost <= 0 or self.value <= 0:
            raise ValueError(f"cost and value must be positive, got ({self.cost}, {self.value})")

    @property
    def threshold(self) -> float:
        """Smallest like probability at which a user clicks."""
        return self.cost / self.value

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)


def compute_psi(spec: PreferenceSpec) -> float:
    """Click-and-like rate: E[p; p >= cost/value] under Beta(alpha, beta).

    Evaluated through the regularized incomplete Beta identity
    integral_tau^1 p f(p) dp = mean * (1 - I_tau(alpha+1, beta)),
    which is stable for the extreme shapes that occur in fitted data.
    """
    tau = spec.threshold
    if tau >= 1.0:
        raise ZeroPsi(
            f"cost/value = {tau:.4g} >= 1 censors all clicks; the model assumes psi > 0"
        )
    return spec.mean * (1.0 - special.betainc(spec.alpha + 1.0, spec.beta, tau))


def click_fraction(spec: PreferenceSpec) -> float:
    """Fraction of shown users who click: 1 - CDF_Beta(cost/value)."""
    tau = min(spec.threshold, 1.0)
    return 1.0 - special.betainc(spec.alpha, spec.beta, tau)


@dataclass(frozen=True)
class Targeting:
    """Platform decision at t=1: fraction of each group shown article a.

    The article-b fractions are always the complements and never stored.
    """

    theta_A_a: float
    theta_B_a: float

    def __post_init__(self):
        for name, v in (("theta_A_a", self.theta_A_a), ("theta_B_a", self.theta_B_a)):
            if not (-1e-12 <= v <= 1.0 + 1e-12):
                raise ValueError(f"{name} = {v} outside [0, 1]")

    @property
    def theta_A_b(self) -> float:
        return 1.0 - self.theta_A_a

    @property
    def theta_B_b(self) -> float:
        return 1.0 - self.theta_B_a

    def table(self) -> np.ndarray:
        """2x2 array theta[group, article]."""
        return np.array(
            [[self.theta_A_a, self.theta_A_b], [self.theta_B_a, self.theta_B_b]]
        )

    def as_tuple(self) -> tuple:
        return (self.theta_A_a, self.theta_B_a)


@dataclass
class ModelParams:
    """Population shares, homophily, click-and-like rates and the horizon.

    ``mode`` controls validation strictness. In "strict" mode the homophily
    probabilities must lie in (1/2, 1), matching the theory's assumptions;
    "simulation" mode accepts q in (0, 1] with a warning, because fitted
    datasets violate the theoretical bounds.
    """

    pi_A: float
    q_A: float
    q_B: float
    psi: np.ndarray  # psi[group, article] in (0, 1]
    horizon_T: int
    total_mass_M: float | None = None  # bookkeeping only; dynamics are per unit mass
    mode: str = "strict"
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=float)
        if self.psi.shape != (2, 2):
            raise ValueError(f"psi must be 2x2, got shape {self.psi.shape}")
        if not (0.0 < self.pi_A < 1.0):
            raise ValueError(f"pi_A = {self.pi_A} outside (0, 1)")
        if self.horizon_T < 1:
            raise ValueError(f"horizon_T must be >= 1, got {self.horizon_T}")
        if self.total_mass_M is not None and self.total_mass_M <= 0:
            raise ValueError("total_mass_M must be positive when given")
        if np.any(self.psi <= 0.0) or np.any(self.psi > 1.0):
            raise ValueError(f"all psi entries must lie in (0, 1], got {self.psi}")
        if self.mode not in ("strict", "simulation"):
            raise ValueError(f"mode must be 'strict' or 'simulation', got {self.mode!r}")
        self._validate_homophily()
        self._collect_warnings()

    def _validate_homophily(self):
        for name, q in (("q_A", self.q_A), ("q_B", self.q_B)):
            if self.mode == "strict":
                if not (0.5 < q < 1.0):
                    raise ValueError(f"{name} = {q} outside (1/2, 1); use mode='simulation'")
            else:
                if not (0.0 < q <= 1.0):
                    raise ValueError(f"{name} = {q} outside (0, 1]")
                if not (0.5 < q < 1.0):
                    self.warnings.append(
                        f"{name} = {q} outside the homophily range (1/2, 1); "
                        "theoretical guarantees may not apply"
                    )

    def _collect_warnings(self):
        # Group-share consistency; the fitted parameter sets violate it,
        # so it is reported rather than enforced.
        lhs = self.q_A * self.pi_A + (1.0 - self.q_B) * self.pi_B
        if not math.isclose(lhs, self.pi_A, rel_tol=1e-9, abs_tol=1e-12):
            self.warnings.append(
                f"group-share consistency q_A*pi_A + (1-q_B)*pi_B = {lhs:.6g} != pi_A = "
                f"{self.pi_A:.6g}; group shares will drift over time"
            )
        # In-group preference ordering implied by stochastic dominance.
        if not (self.psi[0, 0] > self.psi[0, 1]):
            self.warnings.append(
                f"psi_A,a = {self.psi[0, 0]:.6g} <= psi_A,b = {self.psi[0, 1]:.6g}; "
                "group A does not prefer its in-group article"
            )
        if not (self.psi[1, 1] > self.psi[1, 0]):
            self.warnings.append(
                f"psi_B,b = {self.psi[1, 1]:.6g} <= psi_B,a = {self.psi[1, 0]:.6g}; "
                "group B does not prefer its in-group article"
            )

    @property
    def pi_B(self) -> float:
        return 1.0 - self.pi_A

    @property
    def pi(self) -> np.ndarray:
        return np.array([self.pi_A, self.pi_B])

    @property
    def q(self) -> np.ndarray:
        return np.array([self.q_A, self.q_B])


def params_from_preferences(
    prefs, pi_A: float, q_A: float, q_B: float, T: int, mode: str = "strict",
    total_mass_M: float | None = None,
) -> ModelParams:
    """Build ModelParams from a 2x2 table of PreferenceSpec.

    ``prefs`` is indexed [group][article]. Validation warnings are collected
    on the returned object, not raised; ZeroPsi propagates.
    """
    psi = np.array(
        [[compute_psi(prefs[g][s]) for s in range(2)] for g in range(2)]
    )
    return ModelParams(
        pi_A=pi_A, q_A=q_A, q_B=q_B, psi=psi, horizon_T=T, mode=mode,
        total_mass_M=total_mass_M,
    )

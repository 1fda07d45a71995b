"""Fair-exposure notions and the constraint geometry of the targeting LP.

The average-exposure fairness constraints bound the ratios

    sum_t l[A,a] / sum_t l[B,b]   and   sum_t l[A,b] / sum_t l[B,a]

between delta_lo < 1 < delta_hi. After clearing (positive) denominators
each side becomes a half-space in (theta_Aa, theta_Ba); the four bounding
lines all have negative slope and are exposed here with their axis
intercepts for use by the vertex-enumeration solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominator, ZeroDenominator
from .model import ModelParams, Targeting
from .propagation import MassTrajectory, PropagationCoefficients

__all__ = [
    "FairnessBounds",
    "ConstraintGeometry",
    "constraint_geometry",
    "exposure_ratios",
    "constant_fair_exposure_check",
    "max_average_exposure",
    "intergroup_dominance_condition",
]


@dataclass(frozen=True)
class FairnessBounds:
    delta_lo: float
    delta_hi: float

    def __post_init__(self):
        if not (0.0 < self.delta_lo < 1.0 < self.delta_hi):
            raise ValueError(
                f"fairness bounds must satisfy 0 < delta_lo < 1 < delta_hi, "
                f"got ({self.delta_lo}, {self.delta_hi})"
            )


# Constraint line directions: y1 and y4 cap theta_Ba from above, y2 and y3
# from below. Indices into the arrays below are (line number - 1).
UPPER_LINES = (0, 3)
LOWER_LINES = (1, 2)


@dataclass(frozen=True)
class ConstraintGeometry:
    """The four fairness constraint lines theta_Ba = intercept + slope*theta_Aa."""

    intercepts: np.ndarray  # y_i at theta_Aa = 0, length 4
    slopes: np.ndarray  # all negative
    sums: dict  # the (m, n) coefficient sums the lines were built from

    def value(self, i: int, theta_Aa) -> float:
        """Height of line y_{i+1} at the given theta_Aa."""
        return self.intercepts[i] + self.slopes[i] * theta_Aa

    def x_intercept(self, i: int) -> float:
        """theta_Aa at which line y_{i+1} crosses zero."""
        return -self.intercepts[i] / self.slopes[i]

    def satisfied(self, theta_Aa, theta_Ba, tol: float = 1e-9):
        """Whether a point meets all four half-spaces (and the unit box)."""
        ok = (theta_Aa >= -tol) & (theta_Aa <= 1.0 + tol)
        ok &= (theta_Ba >= -tol) & (theta_Ba <= 1.0 + tol)
        for i in UPPER_LINES:
            ok &= theta_Ba <= self.value(i, theta_Aa) + tol
        for i in LOWER_LINES:
            ok &= theta_Ba >= self.value(i, theta_Aa) - tol
        return ok


def constraint_geometry(coeffs: PropagationCoefficients, bounds: FairnessBounds) -> ConstraintGeometry:
    """Build the four bounding lines from the coefficient sums."""
    sw, su = coeffs.sw, coeffs.su
    dlo, dhi = bounds.delta_lo, bounds.delta_hi

    # Denominator sums: m-bar/m-underbar for (A,a) pair with (B,b), and for
    # (A,b) pair with (B,a); numerator sums n likewise.
    m_hi_Aa = su[0, 0] + dhi * sw[1, 1]
    m_lo_Aa = su[0, 0] + dlo * sw[1, 1]
    m_hi_Ab = su[0, 1] + dhi * sw[1, 0]
    m_lo_Ab = su[0, 1] + dlo * sw[1, 0]
    n_hi_Aa = sw[0, 0] + dhi * su[1, 1]
    n_lo_Aa = sw[0, 0] + dlo * su[1, 1]
    n_hi_Ab = sw[0, 1] + dhi * su[1, 0]
    n_lo_Ab = sw[0, 1] + dlo * su[1, 0]
    m_Ab = su[0, 1] + sw[0, 1]
    m_Bb = su[1, 1] + sw[1, 1]

    for name, v in (("m_hi_Aa", m_hi_Aa), ("m_lo_Aa", m_lo_Aa),
                    ("m_hi_Ab", m_hi_Ab), ("m_lo_Ab", m_lo_Ab)):
        if v <= 0.0:
            raise DegenerateDenominator(
                f"coefficient sum {name} = {v} is not positive; coefficients corrupted"
            )

    intercepts = np.array([
        dhi * m_Bb / m_hi_Aa,  # y1, upper
        dlo * m_Bb / m_lo_Aa,  # y2, lower
        m_Ab / m_hi_Ab,        # y3, lower
        m_Ab / m_lo_Ab,        # y4, upper
    ])
    slopes = np.array([
        -n_hi_Aa / m_hi_Aa,
        -n_lo_Aa / m_lo_Aa,
        -n_hi_Ab / m_hi_Ab,
        -n_lo_Ab / m_lo_Ab,
    ])
    sums = {
        "m_hi_Aa": m_hi_Aa, "m_lo_Aa": m_lo_Aa, "m_hi_Ab": m_hi_Ab, "m_lo_Ab": m_lo_Ab,
        "n_hi_Aa": n_hi_Aa, "n_lo_Aa": n_lo_Aa, "n_hi_Ab": n_hi_Ab, "n_lo_Ab": n_lo_Ab,
        "m_Ab": m_Ab, "m_Bb": m_Bb,
        "sw": sw, "su": su,
    }
    return ConstraintGeometry(intercepts=intercepts, slopes=slopes, sums=sums)


def exposure_ratios(traj: MassTrajectory) -> tuple[float, float]:
    """Preferred and non-preferred cross-group exposure ratios.

    Returns (sum l[A,a] / sum l[B,b], sum l[A,b] / sum l[B,a]).
    """
    tot = traj.totals_per_cell()
    if tot[1, 1] <= 0.0:
        raise ZeroDenominator("group B receives zero mass of article b")
    if tot[1, 0] <= 0.0:
        raise ZeroDenominator("group B receives zero mass of article a")
    return float(tot[0, 0] / tot[1, 1]), float(tot[0, 1] / tot[1, 0])


def constant_fair_exposure_check(params: ModelParams, e: float) -> dict:
    """Feasibility of holding cross-group exposure equal at level e every step.

    Possible iff, for both articles, the growth multipliers of the paired
    (group, article) cells coincide; then theta = (e, 1-e) achieves it.
    """
    if not (0.0 < e < 1.0):
        raise ValueError(f"target exposure level e = {e} outside (0, 1)")
    ratio = params.pi_B / params.pi_A
    feasible = True
    residuals = []
    for s in range(2):
        lhs = params.psi[0, s] * (params.q_A + ratio * (1.0 - params.q_B))
        rhs = params.psi[1, 1 - s] * (ratio * params.q_B + (1.0 - params.q_A))
        residuals.append(lhs - rhs)
        if abs(lhs - rhs) > 1e-9 * max(abs(lhs), abs(rhs)):
            feasible = False
    return {
        "feasible": feasible,
        "required_theta": Targeting(e, 1.0 - e) if feasible else None,
        "residuals": residuals,
    }


def max_average_exposure(coeffs: PropagationCoefficients, g: int, s: int, params: ModelParams) -> float:
    """Largest achievable average exposure of group g to article s."""
    return float((coeffs.sw[g, s] + coeffs.su[g, s]) / (coeffs.T * params.pi[g]))


def intergroup_dominance_condition(params: ModelParams) -> bool:
    """Whether preferred targeting still over-exposes group A to article b.

    True iff group B's inflow dominates A's intra-group propagation and the
    article-b like rates dominate the size-adjusted article-a rates.
    """
    first = params.q_A * params.pi_A / ((1.0 - params.q_B) * params.pi_B)
    second = (params.psi[0, 0] * params.psi[1, 0]) / (
        params.pi_B * params.psi[0, 1] * params.psi[1, 1]
    )
    return first < 1.0 and second < 1.0

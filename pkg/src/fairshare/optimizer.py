"""Solvers for the platform's targeting problem.

The engagement objective is linear in (theta_Aa, theta_Ba), so the
unconstrained optimum is a corner of the unit box and the fair-exposure
optimum is a vertex of the box intersected with four half-spaces. The
solver is plain vertex enumeration rather than an LP library: with 2
variables and at most 6 constraints there are at most a couple dozen
candidates, and exact candidates are far easier to test. A dense-grid
oracle is kept alongside as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCandidateSet, InfeasibleProblem, ZFormSingular
from .fairness import ConstraintGeometry, FairnessBounds, constraint_geometry
from .model import ModelParams, Targeting
from .propagation import PropagationCoefficients, objective_coefficients

__all__ = [
    "FairSolution",
    "solve_agnostic",
    "solve_agnostic_zform",
    "check_feasible",
    "check_feasible_geometric",
    "enumerate_vertices",
    "solve_fair",
    "price_of_fairness",
    "grid_feasible",
    "grid_solve",
]

_FEAS_TOL = 1e-9
_DEDUP_TOL = 1e-12
_TIE_TOL = 1e-12

# Tie-break reference: show each group its in-group article.
_PREFERRED = (1.0, 0.0)


@dataclass(frozen=True)
class FairSolution:
    theta: Targeting | None
    objective: float
    mode: str  # "agnostic", "fair_aware" or "grid_oracle"
    feasible: bool
    vertex_class: int | None = None  # candidate family 1..5
    binding_constraints: tuple = ()
    pof: float | None = None
    ties: tuple = ()  # coefficient names resolved by the tie rule

    def to_dict(self) -> dict:
        return {
            "theta": list(self.theta.as_tuple()) if self.theta is not None else None,
            "objective": self.objective,
            "mode": self.mode,
            "feasible": self.feasible,
            "vertex_class": self.vertex_class,
            "binding_constraints": list(self.binding_constraints),
            "pof": self.pof,
            "ties": list(self.ties),
        }


def solve_agnostic(coeffs: PropagationCoefficients) -> FairSolution:
    """Unconstrained optimum: indicator on the sign of each linear coefficient.

    Zero coefficients (within 1e-12) are resolved to 1 and flagged, since
    any value is then optimal.
    """
    c_Aa, c_Ba, const = objective_coefficients(coeffs)
    ties = []
    if abs(c_Aa) <= _TIE_TOL:
        ties.append("c_Aa")
    if abs(c_Ba) <= _TIE_TOL:
        ties.append("c_Ba")
    theta = Targeting(
        1.0 if c_Aa >= -_TIE_TOL else 0.0,
        1.0 if c_Ba >= -_TIE_TOL else 0.0,
    )
    obj = c_Aa * theta.theta_A_a + c_Ba * theta.theta_B_a + const
    return FairSolution(theta=theta, objective=obj, mode="agnostic", feasible=True,
                        ties=tuple(ties))


def _geometric_double_sums(a1: float, a2: float, T: int) -> tuple[float, float]:
    """z1 = sum_t sum_{j<t} a1^{t-j-1} a2^j and z2 with the inner sum to t-2."""
    for a in (a1, a2):
        if abs(a - 1.0) < 1e-9:
            raise ZFormSingular(f"decay rate {a} too close to 1 for the closed sums")
    if abs(a1 - a2) < 1e-12:
        raise ZFormSingular(f"decay rates {a1}, {a2} coincide")
    den = (a1 - 1.0) * (a2 - 1.0) * (a1 - a2)
    z1 = ((a2 - 1.0) * a1 ** (T + 1) - a1 * a2 ** (T + 1)
          + a1 + a2 * (a2 ** T - 1.0)) / den
    z2 = ((a2 - 1.0) * a1 ** T - a1 * a2 ** T
          + a1 + a2 * (a2 ** (T - 1) - 1.0)) / den
    return z1, z2


def solve_agnostic_zform(params: ModelParams, coeffs: PropagationCoefficients) -> FairSolution:
    """Corner solution via the geometric-sum form of the objective gradient.

    Algebraically identical decision to solve_agnostic; kept as a second
    derivation path and cross-checked against it in tests. Raises
    ZFormSingular when a decay rate sits at 1 or the rates coincide;
    callers should fall back to solve_agnostic.
    """
    T = params.horizon_T
    z = [_geometric_double_sums(coeffs.a1[s], coeffs.a2[s], T) for s in range(2)]
    qsum = 1.0 - params.q_A - params.q_B
    decision = []
    for g in range(2):
        # Both articles carry the same +psi*(1-q_A-q_B)*z2 correction: the
        # per-article column sums of the matrix powers verify this form.
        num = params.psi[g, 0] * (z[0][0] + params.psi[1 - g, 0] * qsum * z[0][1])
        den = params.psi[g, 1] * (z[1][0] + params.psi[1 - g, 1] * qsum * z[1][1])
        decision.append(1.0 if num / den > 1.0 else 0.0)
    theta = Targeting(decision[0], decision[1])
    c_Aa, c_Ba, const = objective_coefficients(coeffs)
    obj = c_Aa * theta.theta_A_a + c_Ba * theta.theta_B_a + const
    return FairSolution(theta=theta, objective=obj, mode="agnostic", feasible=True)


def check_feasible(coeffs: PropagationCoefficients, bounds: FairnessBounds) -> dict:
    """Infeasibility certificate for the fair-exposure constraints.

    Four named cases give interpretable certificates: a lower constraint
    line dominating an upper one across the positive quadrant (cases 1
    and 2) or a lower line clearing the top of the box (cases 3 and 4).
    These are sound but not complete: a lower line can dominate an upper
    one on the unit box while the two cross just outside it, which the
    axis-intercept comparisons miss. The verdict is therefore backed by
    the exact envelope test; such residual infeasibilities are tagged
    case 5. Returns {"feasible", "violated_case"}.
    """
    case = _certificate_case(coeffs, bounds)
    if case is not None:
        return {"feasible": False, "violated_case": case}
    if not check_feasible_geometric(coeffs, bounds):
        return {"feasible": False, "violated_case": 5}
    return {"feasible": True, "violated_case": None}


def _certificate_case(coeffs: PropagationCoefficients, bounds: FairnessBounds):
    geo = constraint_geometry(coeffs, bounds)
    s = geo.sums
    dlo, dhi = bounds.delta_lo, bounds.delta_hi
    y2_0 = dlo * s["m_Bb"] / s["m_lo_Aa"]
    y3_0 = s["m_Ab"] / s["m_hi_Ab"]
    y4_0 = s["m_Ab"] / s["m_lo_Ab"]
    y1_0 = dhi * s["m_Bb"] / s["m_hi_Aa"]

    # Case 1: lower line y2 strictly above upper line y4 at both axes.
    if y2_0 > y4_0 and dlo * s["m_Bb"] / s["n_lo_Aa"] > s["m_Ab"] / s["n_lo_Ab"]:
        return 1
    # Case 2: lower line y3 strictly above upper line y1 at both axes.
    if y3_0 > y1_0 and s["m_Ab"] / s["n_hi_Ab"] > dhi * s["m_Bb"] / s["n_hi_Aa"]:
        return 2
    # Case 3: lower line y2 clears the (1,1) corner of the box.
    if dlo * s["sw"][1, 1] > s["sw"][0, 0]:
        lhs = dlo * s["m_Bb"] / s["m_lo_Aa"]
        rhs = dlo * s["m_Bb"] / (dlo * s["m_Bb"] - s["n_lo_Aa"])
        if lhs > rhs:
            return 3
    # Case 4: lower line y3 clears the (1,1) corner of the box.
    if s["su"][0, 1] > dhi * s["su"][1, 0]:
        lhs = s["m_Ab"] / s["m_hi_Ab"]
        rhs = s["m_Ab"] / (s["m_Ab"] - s["n_hi_Ab"])
        if lhs > rhs:
            return 4
    return None


def check_feasible_geometric(coeffs: PropagationCoefficients, bounds: FairnessBounds) -> bool:
    """Exact feasibility via the piecewise-linear envelope gap.

    The feasible set is nonempty iff max_x [min(upper lines, 1) -
    max(lower lines, 0)] >= 0 on [0,1]; the max of a piecewise-linear
    function is attained at a breakpoint, all of which are pairwise line
    intersections or box edges.
    """
    geo = constraint_geometry(coeffs, bounds)
    xs = [0.0, 1.0]
    lines = [(geo.intercepts[i], geo.slopes[i]) for i in range(4)]
    lines += [(0.0, 0.0), (1.0, 0.0)]  # the horizontal box edges
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            (b1, s1), (b2, s2) = lines[i], lines[j]
            if abs(s1 - s2) < 1e-15:
                continue
            x = (b2 - b1) / (s1 - s2)
            if -1e-12 <= x <= 1.0 + 1e-12:
                xs.append(min(max(x, 0.0), 1.0))
    x = np.array(xs)
    upper = np.minimum(1.0, np.minimum(geo.value(0, x), geo.value(3, x)))
    lower = np.maximum(0.0, np.maximum(geo.value(1, x), geo.value(2, x)))
    return bool(np.any(upper - lower >= -_FEAS_TOL))


def _clamp(v: float) -> float:
    return min(1.0, max(0.0, v))


def enumerate_vertices(coeffs: PropagationCoefficients, bounds: FairnessBounds):
    """All candidate optima of the constrained problem.

    Families 1-4 are the pairwise intersections of an upper and a lower
    constraint line; family 5 covers line-box-edge intersections and the
    box corners. Every raw point is clamped to the box, deduplicated and
    kept only if it satisfies all constraints.
    """
    geo = constraint_geometry(coeffs, bounds)
    raw: list[tuple[float, float, int]] = []

    # Upper x lower line intersections. (upper, lower) -> family tag.
    pair_class = {(0, 3): 1, (0, 2): 2, (1, 3): 3, (1, 2): 4}
    for (i, j), cls in pair_class.items():
        bi, si = geo.intercepts[i], geo.slopes[i]
        bj, sj = geo.intercepts[j], geo.slopes[j]
        if abs(si - sj) < 1e-15:
            continue
        x = (bj - bi) / (si - sj)
        raw.append((x, bi + si * x, cls))

    # Line x box-edge intersections.
    for i in range(4):
        for x_edge in (0.0, 1.0):
            raw.append((x_edge, geo.value(i, x_edge), 5))
        for y_edge in (0.0, 1.0):
            if abs(geo.slopes[i]) > 1e-15:
                raw.append(((y_edge - geo.intercepts[i]) / geo.slopes[i], y_edge, 5))

    # Box corners.
    for x in (0.0, 1.0):
        for y in (0.0, 1.0):
            raw.append((x, y, 5))

    candidates = []
    for x, y, cls in raw:
        x, y = _clamp(x), _clamp(y)
        if not geo.satisfied(x, y, tol=_FEAS_TOL):
            continue
        if any(abs(x - cx) < _DEDUP_TOL and abs(y - cy) < _DEDUP_TOL
               for cx, cy, _ in candidates):
            continue
        candidates.append((x, y, cls))
    return [(Targeting(x, y), cls) for x, y, cls in candidates], geo


def _binding(geo: ConstraintGeometry, theta: Targeting) -> tuple:
    x, y = theta.theta_A_a, theta.theta_B_a
    names = []
    for i in range(4):
        if abs(y - geo.value(i, x)) <= _FEAS_TOL:
            names.append(f"y{i + 1}")
    if min(x, 1.0 - x, y, 1.0 - y) <= _FEAS_TOL:
        names.append("box")
    return tuple(names)


def solve_fair(coeffs: PropagationCoefficients, bounds: FairnessBounds) -> FairSolution:
    """Constrained optimum by enumerate-then-filter over candidate vertices.

    Equal-objective ties go to the candidate nearest the in-group-article
    targeting (1, 0), then lexicographically.
    """
    c_Aa, c_Ba, const = objective_coefficients(coeffs)
    if not check_feasible(coeffs, bounds)["feasible"]:
        return FairSolution(theta=None, objective=float("nan"), mode="fair_aware",
                            feasible=False)
    cands, geo = enumerate_vertices(coeffs, bounds)
    if not cands:
        raise EmptyCandidateSet(
            "feasibility certificate passed but no candidate vertex survived filtering"
        )

    scale = max(abs(c_Aa), abs(c_Ba), abs(const), 1.0)

    def sort_key(item):
        theta, _ = item
        obj = c_Aa * theta.theta_A_a + c_Ba * theta.theta_B_a
        dist = (theta.theta_A_a - _PREFERRED[0]) ** 2 + (theta.theta_B_a - _PREFERRED[1]) ** 2
        return (-round(obj / scale, 12), dist, theta.as_tuple())

    theta, cls = min(cands, key=sort_key)
    obj = c_Aa * theta.theta_A_a + c_Ba * theta.theta_B_a + const
    return FairSolution(theta=theta, objective=obj, mode="fair_aware", feasible=True,
                        vertex_class=cls, binding_constraints=_binding(geo, theta))


def price_of_fairness(coeffs: PropagationCoefficients, bounds: FairnessBounds) -> float:
    """Ratio of unconstrained to constrained optimal engagement (>= 1)."""
    fair = solve_fair(coeffs, bounds)
    if not fair.feasible:
        raise InfeasibleProblem("price of fairness undefined on an infeasible instance")
    agn = solve_agnostic(coeffs)
    if fair.objective <= 0.0 or agn.objective <= 0.0:
        raise InfeasibleProblem("price of fairness needs positive engagement totals")
    return agn.objective / fair.objective


def _grid(coeffs: PropagationCoefficients, bounds: FairnessBounds, resolution: int):
    geo = constraint_geometry(coeffs, bounds)
    ax = np.linspace(0.0, 1.0, resolution)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    return geo.satisfied(X, Y, tol=_FEAS_TOL), X, Y


def grid_feasible(coeffs: PropagationCoefficients, bounds: FairnessBounds,
                  resolution: int = 201) -> bool:
    """Independent feasibility oracle: scan a dense grid of targetings."""
    mask, _, _ = _grid(coeffs, bounds, resolution)
    return bool(mask.any())


def grid_solve(coeffs: PropagationCoefficients, bounds: FairnessBounds,
               resolution: int = 1001) -> FairSolution:
    """Independent optimality oracle: best grid point of the feasible set.

    Accurate to (|c_Aa| + |c_Ba|) * grid step in the objective.
    """
    c_Aa, c_Ba, const = objective_coefficients(coeffs)
    mask, X, Y = _grid(coeffs, bounds, resolution)
    if not mask.any():
        return FairSolution(theta=None, objective=float("nan"), mode="grid_oracle",
                            feasible=False)
    obj = np.where(mask, c_Aa * X + c_Ba * Y, -np.inf)
    i, j = np.unravel_index(np.argmax(obj), obj.shape)
    theta = Targeting(float(X[i, j]), float(Y[i, j]))
    return FairSolution(theta=theta, objective=float(obj[i, j] + const),
                        mode="grid_oracle", feasible=True)

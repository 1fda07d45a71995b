"""Exception types shared across the package."""


class FairshareError(Exception):
    """Base class for all package-specific errors."""


class ZeroPsi(FairshareError):
    """Click-and-like rate would be zero (cost/value threshold >= 1)."""


class NearDefectiveMatrix(FairshareError):
    """Propagation eigenvalues too close to separate; closed form unreliable."""


class DegenerateDenominator(FairshareError):
    """A coefficient sum needed as a denominator is zero; coefficients corrupted."""


class ZeroDenominator(FairshareError):
    """An exposure ratio denominator is zero for the given targeting."""


class ZFormSingular(FairshareError):
    """Geometric-sum form undefined (eigenvalue at 1 or coincident roots)."""


class EmptyCandidateSet(FairshareError):
    """Vertex enumeration found no feasible candidate on an instance deemed feasible."""


class InfeasibleProblem(FairshareError):
    """Requested quantity undefined because the constrained problem is infeasible."""


class InfeasibleHomophily(FairshareError):
    """No valid block probabilities for the requested (q, pi, degree) combination."""


class DegenerateSample(FairshareError):
    """All samples identical; Beta MLE undefined."""


class NoEvents(FairshareError):
    """Event log contains no usable events for the requested estimate."""


class UnknownPreset(FairshareError):
    """Requested parameter preset does not exist."""

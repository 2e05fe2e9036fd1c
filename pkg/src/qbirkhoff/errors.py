"""Exception hierarchy.

Two families matter to callers: :class:`HypothesisViolation` means the input
does not satisfy a mathematical assumption of the construction (CLI exit code
3), :class:`NumericalFailure` means the input is admissible but the requested
evaluation could not be carried out reliably (CLI exit code 4).
"""

from __future__ import annotations


class QBirkhoffError(Exception):
    """Base class for every error raised by this package."""


class HypothesisViolation(QBirkhoffError):
    """An assumption of the construction is not met.

    ``hypothesis`` names the assumption that failed, so reports and the CLI
    can point at it directly.
    """

    def __init__(self, message: str, hypothesis: str = "unspecified"):
        super().__init__(message)
        self.hypothesis = hypothesis


class NumericalFailure(QBirkhoffError):
    """Evaluation failed for numerical (not mathematical) reasons."""


# core linear algebra
class SingularInput(HypothesisViolation):
    pass


class ResonantSpectrum(HypothesisViolation):
    pass


class NotUnipotent(HypothesisViolation):
    pass


class IllConditioned(NumericalFailure):
    pass


# theta functions / evaluation domain
class QTooCloseToOne(NumericalFailure):
    pass


class ZeroArgument(NumericalFailure):
    pass


class OnPoleSpiral(NumericalFailure):
    pass


# q-systems
class PoleAtZeroOrInfinity(HypothesisViolation):
    pass


class SingularLeadingMatrix(HypothesisViolation):
    pass


class Resonant(HypothesisViolation):
    pass


class NoConvergence(NumericalFailure):
    pass


class PropagationThroughPole(NumericalFailure):
    pass


class IllConditionedInversion(NumericalFailure):
    pass


# deformation / rationality
class DegenerateFit(NumericalFailure):
    pass


# confluence
class ResonantExponents(HypothesisViolation):
    pass


class PathTooCloseToSingularity(NumericalFailure):
    pass


class OnSpiralRay(NumericalFailure):
    pass


class UnsupportedSpiralGeometry(NumericalFailure):
    pass


# q-Painleve VI
class AssumptionViolated(HypothesisViolation):
    pass


class AlphaOnThetaSpiral(HypothesisViolation):
    pass

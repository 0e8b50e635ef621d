"""Exception hierarchy.

``ValidationError`` covers bad inputs and violated preconditions (the CLI maps
these to exit code 2). ``SolverError`` covers numerical failures of an
otherwise valid configuration (exit code 3).
"""


class KPPFrontError(Exception):
    pass


class ValidationError(KPPFrontError, ValueError):
    pass


class SolverError(KPPFrontError, RuntimeError):
    pass


# model
class ZeroMismatch(ValidationError):
    pass


class WrongSlopeSign(ValidationError):
    pass


class NotConcave(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class EmptyKernel(ValidationError):
    pass


# continuum
class CriticalOrSubcriticalSpeed(ValidationError):
    pass


class NoAdmissibleTheta(ValidationError):
    pass


class NonMonotoneProfile(SolverError):
    pass


class TailFitFailure(SolverError):
    pass


class DecayCertificateFailure(SolverError):
    pass


# weight
class SmoothingFailure(SolverError):
    pass


# linear theory
class GridMismatch(ValidationError):
    pass


class SingularOperator(SolverError):
    pass


class EigSolverNoConvergence(SolverError):
    pass


class NonPositiveMargin(SolverError):
    pass


# front solver
class NewtonDiverged(SolverError):
    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class DerivativeNearZero(SolverError):
    pass


class ResidualGrowth(SolverError):
    pass


class AmplitudeTooLarge(SolverError):
    pass


class NotContracting(SolverError):
    pass


class LeftBall(SolverError):
    pass


class VerificationFailure(SolverError):
    pass


# lattice simulation
class BlowUp(SolverError):
    pass


class StabilityCapViolated(ValidationError):
    pass


class PoorFit(SolverError):
    pass

"""Exception hierarchy.

Two families matter to callers: :class:`InputError` (malformed input, exit
code 2 on the CLI) and :class:`GeometricFailure` (a well-formed object that
fails a geometric check, exit code 1).
"""


class FoldkitError(Exception):
    """Base class for all foldkit errors."""

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details


class InputError(FoldkitError):
    pass


class GeometricFailure(FoldkitError):
    pass


# expr
class ExprSyntaxError(InputError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}", offset=offset)
        self.offset = offset


class UnknownFunction(InputError):
    pass


class UnknownVariable(InputError):
    pass


class DomainError(FoldkitError):
    """Evaluation left the domain of a function (sqrt < 0, log <= 0, x/0)."""


# lattice
class ZeroVector(InputError):
    pass


class RankDeficient(InputError):
    pass


class NotUnimodular(GeometricFailure):
    pass


class DimensionMismatch(InputError):
    pass


class PointOutsideTemplate(InputError):
    pass


class InconsistentTemplate(GeometricFailure):
    pass


# singularity
class NewtonDivergence(FoldkitError):
    pass


class KernelNotTransverse(GeometricFailure):
    pass


class ResidualTooLarge(GeometricFailure):
    pass


# form
class OddDimension(InputError):
    pass


class NotClosed(GeometricFailure):
    pass


class DegenerateVanishing(GeometricFailure):
    pass


class KernelTooLarge(GeometricFailure):
    pass


class NotInKernel(InputError):
    pass


class NotTransverse(InputError):
    pass


class Unsolvable(GeometricFailure):
    """i_X sigma = beta has no solution at a fold point.

    ``kernel_vector`` is a null vector of sigma on which beta does not vanish.
    """

    def __init__(self, message, kernel_vector, pairing):
        super().__init__(message, kernel_vector=list(kernel_vector), pairing=pairing)
        self.kernel_vector = kernel_vector
        self.pairing = pairing


class SingularSolveFailure(GeometricFailure):
    pass


# hamiltonian
class MixedEvidence(GeometricFailure):
    pass


# cohom
class InvalidComplex(InputError):
    pass


class NonIntegralCoboundary(InputError):
    pass


class NotBasic(GeometricFailure):
    pass


class BasisMismatch(InputError):
    pass


# models
class AnnihilatorNotRank1(GeometricFailure):
    pass


class OutsideCone(GeometricFailure):
    pass


class NotOnLevelSet(GeometricFailure):
    pass


class NonPositivePairing(GeometricFailure):
    pass


# cli
class DimensionUnsupported(InputError):
    pass

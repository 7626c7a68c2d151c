"""Exceptions raised by nclp.

Errors that stand for a numerical decision carry the measured quantity so a report can
echo it back.
"""


class NclpError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(NclpError):
    pass


class CodecError(NclpError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class DimensionMismatch(NclpError):
    pass


class ExponentMismatch(NclpError):
    pass


class NotPositive(NclpError):
    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class NotFaithful(NclpError):
    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class DegenerateBasis(NclpError):
    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class NotSubalgebra(NclpError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotInvariant(NclpError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class OutsideBicommutant(NclpError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InvalidSymmetrizer(NclpError):
    pass


class SingularLambda(NclpError):
    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class ReconstructionMismatch(NclpError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class AmbiguousBlock(NclpError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class NotAntiauto(NclpError):
    pass


class SingularSystem(NclpError):
    def __init__(self, message, nullity=None):
        super().__init__(message)
        self.nullity = nullity


class InvalidTriple(NclpError):
    def __init__(self, message, invariant=None, residual=None):
        super().__init__(message)
        self.invariant = invariant
        self.residual = residual


class NotIsometry(NclpError):
    def __init__(self, message, deviation=None):
        super().__init__(message)
        self.deviation = deviation


class DecompositionFailure(NclpError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class WrongAlgebra(NclpError):
    pass


class InvalidCFM(NclpError):
    pass


class NoWitnessFound(NclpError):
    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class NotIncreasing(NclpError):
    pass

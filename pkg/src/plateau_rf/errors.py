"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """A physical value, frequency or argument is outside its legal domain."""


class SingularFrequencyError(ArithmeticError):
    """The network response is singular at the requested frequency."""


class SingularMatrixError(ArithmeticError):
    """The nodal admittance matrix cannot be solved."""


class LosslessContractError(ValueError):
    """An ABCD matrix expected to be lossless carries dissipative parts."""


class NotBracketedError(ValueError):
    pass


class AmbiguousBracketError(ValueError):
    pass


class NonResonantPointError(ValueError):
    """Im[Y] does not rise through zero at the given frequency."""


class ConditioningError(ArithmeticError):
    pass


class PoleFindingError(ArithmeticError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class InvalidDomainError(ValueError):
    pass


class DegenerateGeometryError(ValueError):
    """Points do not determine a circle (e.g. they are collinear)."""


class PhaseUnwrapError(ValueError):
    pass


class GridMismatchError(ValueError):
    pass

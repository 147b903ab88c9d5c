"""Exception hierarchy shared by all modules."""


class NiedererError(Exception):
    """Base class for all errors raised by this package."""


class NonPositiveDeterminant(NiedererError, ValueError):
    pass


class NotARotation(NiedererError, ValueError):
    pass


class SingularLocus(NiedererError, ValueError):
    """An event sits on the pole t* = -delta/gamma of the Moebius map."""


class WindowCrossesPole(NiedererError, ValueError):
    pass


class StationaryMap(NiedererError, ZeroDivisionError):
    pass


class DegenerateFit(NiedererError, ArithmeticError):
    pass


class CollisionSingularity(NiedererError, ArithmeticError):
    pass


class NonFiniteState(NiedererError, ArithmeticError):
    pass


class LinearSolveFailure(NiedererError, ArithmeticError):
    pass


class SupportClipped(NiedererError, ValueError):
    """Mapped or shifted support runs into the grid edge (aliasing risk)."""


class CFLViolation(NiedererError, ValueError):
    pass


class PositivityLoss(NiedererError, ArithmeticError):
    pass


class WrongPolytrope(NiedererError, ValueError):
    pass


class ConfigError(NiedererError, ValueError):
    pass

"""Exception types raised across the workbench."""


class QlbwError(Exception):
    """Base class for every error the workbench raises on purpose."""


# lattice parsing / validation
class LatticeError(QlbwError):
    pass


class MalformedJsonError(LatticeError):
    pass


class UnknownBoundaryKindError(LatticeError):
    pass


class BoundsOutOfRangeError(LatticeError):
    pass


class SeparationViolationError(LatticeError):
    pass


class NonPowerOfTwoExtentError(LatticeError):
    pass


# circuit IR
class CircuitError(QlbwError):
    pass


class IndexOutOfRangeError(CircuitError):
    pass


class MeasureNotTerminalError(CircuitError):
    pass


class NonUnitaryGateError(CircuitError):
    pass


class InsufficientScratchError(CircuitError):
    pass


# components
class ComponentError(QlbwError):
    pass


class InvalidDimensionError(ComponentError):
    pass


class ConstantOutOfRangeError(ComponentError):
    pass


class PositionInsideObstacleError(ComponentError):
    pass


# simulation
class SimulationError(QlbwError):
    pass


class QubitCountMismatchError(SimulationError):
    pass


class MeasureInUnitaryApplyError(SimulationError):
    pass


class NormDriftError(SimulationError):
    pass


class UnresolvableReflectionError(SimulationError):
    pass


class PositionOutOfRangeError(QlbwError):
    pass

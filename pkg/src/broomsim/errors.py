"""Exception hierarchy shared across the package."""


class BroomsimError(Exception):
    """Base class for all errors raised by broomsim."""


class DocumentSyntaxError(BroomsimError):
    """The input text is not well-formed YAML."""


class SchemaError(BroomsimError):
    """A Broombridge document violates the schema.

    Attributes:
        path: dotted location of the offending node, e.g.
            ``integral_sets[0].n_electrons``.
        reason: human readable explanation.
    """

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class ArgumentError(BroomsimError, ValueError):
    """An argument is outside its allowed domain."""


class CapacityError(BroomsimError):
    """The requested system is larger than the configured limit."""


class DimensionError(BroomsimError, ValueError):
    """Operands have incompatible dimensions."""


class ConvergenceError(BroomsimError):
    """An iterative solver did not converge."""


class UnknownLabel(BroomsimError):
    """No initial state with the requested label."""


class ZeroNorm(BroomsimError):
    """A state or operator that must be nonzero vanished."""


class OverlapError(BroomsimError):
    """A control qubit lies in the support of the controlled operator."""


class RangeError(BroomsimError, ValueError):
    """A value lies outside its admissible range."""


class ZeroOverlap(BroomsimError):
    """The trial state has no weight on any eigenstate."""


class NoSolution(BroomsimError):
    """No energy in the window is consistent with the phase."""


class MultipleSolutions(BroomsimError):
    """More than one energy in the window is consistent with the phase."""


class InsufficientPoints(BroomsimError):
    """Too few usable points to perform a fit."""


class SingularDesign(BroomsimError):
    """The fit design matrix is singular."""


class InsufficientSamples(BroomsimError):
    """Too few samples for the requested statistic."""


class UnknownModel(BroomsimError):
    """No cost model registered under the requested name."""

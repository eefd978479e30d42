"""Exception hierarchy.

``DataError`` covers bad input files and labels, ``SolverError`` covers
numerical failures of the fitting procedures. The CLI maps them to exit
codes 2 and 3.
"""


class PhasefracError(Exception):
    """Base class for all package errors."""


class DataError(PhasefracError):
    pass


class SolverError(PhasefracError):
    pass


class AllZero(DataError):
    pass


class GridMismatch(DataError):
    pass


class NegativeIntensity(DataError):
    pass


class BadComposition(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class PhaseMismatch(DataError):
    pass


class EmptyInput(DataError):
    pass


class ParseError(DataError):
    pass


class MissingFile(DataError):
    pass


class VersionMismatch(DataError):
    pass


class TooManyPhases(DataError):
    pass


class UnobservedPhase(SolverError):
    def __init__(self, phase, message=None):
        self.phase = phase
        super().__init__(message or f"phase {phase!r} never appears in the training labels")


class ZeroPattern(SolverError):
    def __init__(self, phase, message=None):
        self.phase = phase
        super().__init__(message or f"library pattern for phase {phase!r} is identically zero")


class DegenerateFit(SolverError):
    pass


class PhaseDropout(SolverError):
    """Some leave-one-out training split loses every sample of a phase.

    ``dropouts`` lists ``(fold_index, sample_id, phase_name)`` triples.
    """

    def __init__(self, dropouts):
        self.dropouts = list(dropouts)
        desc = ", ".join(f"fold {k} ({sid}) loses {name!r}" for k, sid, name in self.dropouts)
        super().__init__(f"phase dropout in leave-one-out folds: {desc}")

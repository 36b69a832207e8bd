"""Exception hierarchy. Each class carries the CLI exit code for its failure class."""


class TennisRankError(Exception):
    exit_code = 1


class ConfigError(TennisRankError):
    exit_code = 3


class DatasetError(TennisRankError):
    exit_code = 4


class UnmappedLayoutError(DatasetError):
    def __init__(self, path, header):
        self.path = str(path)
        self.header = list(header)
        super().__init__(f"{self.path}: no column map covers header {self.header}")


class UnknownLabelError(DatasetError):
    """A series, round or surface label missing from its alias table."""

    def __init__(self, kind, label):
        self.kind = kind
        self.label = label
        super().__init__(f"unknown {kind} label {label!r}; extend the {kind} alias table")


class AmbiguousNameError(DatasetError):
    def __init__(self, name, candidates):
        self.name = name
        self.candidates = sorted(candidates)
        super().__init__(f"{name!r} matches several known players: {', '.join(self.candidates)}")


class IntegrityError(DatasetError):
    pass


class UnknownTournamentError(TennisRankError):
    exit_code = 5


class ConvergenceError(TennisRankError):
    exit_code = 6

    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"PageRank did not converge after {iterations} iterations (L1 residual {residual:.3e})")


class CrossCheckError(TennisRankError):
    exit_code = 7


class InsufficientDataError(TennisRankError):
    exit_code = 8


class EvaluatorError(TennisRankError):
    exit_code = 9

    def __init__(self, params, cause):
        self.params = params
        super().__init__(f"evaluator failed at {params}: {cause}")

"""Exception hierarchy.

Everything raised on purpose by the package derives from
:class:`SuperLearnerError`.  Input problems additionally subclass
``ValueError`` so callers that only know the builtins still catch them.
"""


class SuperLearnerError(Exception):
    pass


class InputError(SuperLearnerError, ValueError):
    """Bad data, bad configuration, or a violated precondition."""


class RuntimeFailure(SuperLearnerError, RuntimeError):
    """A computation that was set up correctly but could not complete."""


# dataset
class MissingValue(InputError):
    pass


class NonNumericCell(InputError):
    pass


class UnknownColumn(InputError):
    pass


class SingleClassOutcome(InputError):
    pass


class InvalidDataset(InputError):
    pass


class AllCovariatesDropped(InputError):
    pass


# folds
class InvalidV(InputError):
    pass


class SingleClass(InputError):
    pass


class FoldOutOfRange(InputError, IndexError):
    pass


class IncompatibleSchemes(InputError):
    pass


# metrics
class LengthMismatch(InputError):
    pass


class EmptyInput(InputError):
    pass


# learners
class UnknownCovariate(InputError):
    pass


class InvalidHyperparam(InputError):
    pass


class SchemaMismatch(InputError):
    pass


class SingularDesign(RuntimeFailure):
    pass


class NonConvergence(RuntimeFailure):
    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


# meta-learners
class NonFiniteRisk(InputError):
    pass


class DegenerateWeights(RuntimeFailure):
    pass


class DimensionMismatch(InputError):
    pass


# engine
class AllCandidatesFailed(RuntimeFailure):
    pass


class CandidateFailure(RuntimeFailure):
    """A learner error annotated with where it happened."""

    def __init__(self, candidate, fold, cause):
        where = "full data" if fold is None else f"fold {fold}"
        super().__init__(f"candidate {candidate!r} failed on {where}: {cause}")
        self.candidate = candidate
        self.fold = fold
        self.cause = cause


# cli / persistence
class ConfigError(InputError):
    pass


class CorruptArchive(InputError):
    pass


class VersionMismatch(InputError):
    pass

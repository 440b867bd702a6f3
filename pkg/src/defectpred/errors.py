"""Exception hierarchy. Each family carries the CLI exit code it maps to."""


class DefectPredError(Exception):
    exit_code = 5


class ConfigError(DefectPredError):
    exit_code = 2


class RepositoryError(DefectPredError):
    exit_code = 3


class NotARepository(RepositoryError):
    pass


class UnknownBranch(RepositoryError):
    pass


class CorruptObject(RepositoryError):
    def __init__(self, obj: str, detail: str = ""):
        self.obj = obj
        super().__init__(f"corrupt or missing object {obj}" + (f": {detail}" if detail else ""))


class PathAbsentAtCommit(RepositoryError):
    pass


class LineOutOfRange(RepositoryError):
    pass


class DataError(DefectPredError):
    exit_code = 4


class RootFixCommit(DataError):
    pass


class UnknownIntroduction(DataError):
    pass


class TooFewSamples(DataError):
    def __init__(self, cls: int, count: int, k: int):
        self.cls = cls
        self.count = count
        super().__init__(f"class {cls} has {count} samples, need at least {k}")


class DegenerateMinority(DataError):
    pass


class EmptyTrainingSet(DataError):
    pass


class SingleClassTrainingSet(DataError):
    pass


class KTooLarge(DataError):
    pass


class EmptyEvaluationSet(DataError):
    pass


class LengthMismatch(DataError):
    pass


class SingleClassEvaluationSet(DataError):
    pass


class NoMembers(DataError):
    pass

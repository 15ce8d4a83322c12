"""Exception hierarchy shared by the package.

Everything derives from ``ValueError`` so callers that only care about
"bad input" can catch one thing.
"""


class FuzzyTcpError(ValueError):
    pass


class FuzzyError(FuzzyTcpError):
    """Invalid membership function, alpha level, universe, etc."""


class InferenceError(FuzzyTcpError):
    pass


class DatasetError(FuzzyTcpError):
    """Malformed or semantically invalid test-case data."""


class PrerequisiteCycleError(DatasetError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("prerequisite cycle: " + "→".join(str(i) for i in self.cycle))


class SurveyError(FuzzyTcpError):
    pass


class ClampWarning(UserWarning):
    """A crisp input fell outside its universe and was clamped."""

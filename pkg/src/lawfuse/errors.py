"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
EndpointError -> 3.
"""


class LawfuseError(Exception):
    pass


class ConfigError(LawfuseError):
    """Bad configuration values, unusable flag combinations, missing paths."""


class DataError(LawfuseError):
    """Malformed or inconsistent input data."""


class RuleSyntaxError(DataError):
    """Rulebase text that does not conform to the grammar."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class RulebaseError(DataError):
    """Structurally invalid rulebase: duplicate ids, undeclared predicates."""


class MissingAssignmentError(DataError):
    """Formula evaluation hit an atom without an assigned score."""


class CorpusError(DataError):
    """Malformed corpus records or dangling cross-references."""


class ScoreTableError(DataError):
    """Score or embedding files violating their declared contract."""


class MissingScoreError(ScoreTableError):
    """A required (left, right) pair is absent from an external table."""


class EndpointError(LawfuseError):
    """Permanent failure talking to the external completion endpoint."""

"""Exception types shared across the package.

The CLI maps these onto exit codes: SchemaError and InvalidConfigError are
usage/configuration problems (exit 2), everything else derived from
QwalktreeError is a runtime/data problem (exit 1).
"""


class QwalktreeError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(QwalktreeError, ValueError):
    """An argument violates the operation's documented preconditions."""


class InvalidConfigError(QwalktreeError, ValueError):
    """A configuration value is out of range or inconsistent."""


class SchemaError(QwalktreeError):
    """A file is structurally wrong (missing column, missing profile, ...)."""


class RowError(QwalktreeError):
    """A single data row failed validation; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DegenerateFeatureError(QwalktreeError):
    """A feature has no usable variation (constant column)."""


class DivergenceUndefinedError(QwalktreeError):
    """KL divergence is undefined: reference has a zero where p > 0."""


class UndefinedMetricError(QwalktreeError):
    """The metric has no value for this input (e.g. AUC with one class)."""


class CheckpointError(QwalktreeError):
    """A checkpoint file is corrupt, truncated, or of an unknown version."""

"""Exception hierarchy for the package.

Three failure families, mirrored by the CLI exit codes:

* :class:`LoadError` — a file could not be read or decoded (exit code 2),
* :class:`ValidationError` — inputs violate a documented precondition (exit code 3),
* :class:`SolverError` — a numerical routine broke down (exit code 4).
"""


class PotOodError(Exception):
    """Base class for every error raised by this package."""


class LoadError(PotOodError):
    """A file could not be read or decoded."""


class MalformedHeader(LoadError):
    """A binary feature file has a bad magic, version, or truncated header."""


class MalformedValue(LoadError):
    """A text file contains a token that cannot be parsed as a number."""


class IoFailure(LoadError):
    """The operating system refused a read or write."""


class ValidationError(PotOodError):
    """Inputs violate a documented precondition."""


class DimensionMismatch(ValidationError):
    """Array shapes are inconsistent with each other or with a header."""


class NonFiniteValue(ValidationError):
    """An input contains NaN or infinity."""


class NegativeLabel(ValidationError):
    """A class label is negative."""


class LabelOutOfRange(ValidationError):
    """A class label is >= the declared number of classes."""


class EmptyClass(ValidationError):
    """A class has no training samples, so its prototype is undefined."""

    def __init__(self, class_id: int):
        self.class_id = int(class_id)
        super().__init__(f"class {self.class_id} has no samples")


class EmptyInput(ValidationError):
    """An operation that needs at least one element received none."""


class OmegaOutOfRange(ValidationError):
    """The extrapolation factor must be strictly greater than 1."""


class BatchTooSmall(ValidationError):
    """Streaming batch size must be at least 2."""


class UnsortedInput(ValidationError):
    """Positions passed to the 1-D solver must be sorted ascending."""


class MassMismatch(ValidationError):
    """Two mass vectors do not carry equal total mass."""


class InvalidSpec(ValidationError):
    """A synthetic-benchmark specification fails its consistency checks."""


class SolverError(PotOodError):
    """A numerical routine failed to produce a usable result."""


class NumericalUnderflow(SolverError):
    """Scaling vectors degenerated to zero/non-finite values mid-solve."""

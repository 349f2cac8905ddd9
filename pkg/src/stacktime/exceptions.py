"""Exception hierarchy.

Every error raised by the package derives from :class:`StackTimeError`.
The CLI maps the two families below onto exit codes: budget errors exit
with 3, every other input problem with 2.
"""


class StackTimeError(Exception):
    """Base class for all package errors."""


class EnumerationBudgetError(StackTimeError):
    """An exponential enumeration would exceed its configured cap."""

    def __init__(self, what, size, cap):
        self.what = what
        self.size = size
        self.cap = cap
        super().__init__(f"{what} of size {size} exceeds enumeration cap {cap}")


class InvalidStatementError(StackTimeError, ValueError):
    """A statement references unknown ingredients or has an empty truth set."""


class InvalidTaskError(StackTimeError, ValueError):
    """A task's outputs are not all completions of its inputs."""


class GroundingError(StackTimeError):
    """A macro ingredient has no completion with matching truth set."""

    def __init__(self, message, layer=None):
        self.layer = layer
        if layer is not None:
            message = f"layer {layer}: {message}"
        super().__init__(message)


class ChangeConstraintError(StackTimeError, ValueError):
    """Two consecutive trajectory states are equal."""

    def __init__(self, index):
        self.index = index
        super().__init__(f"trajectory state at index {index} repeats the previous state")


class WindowBoundsError(StackTimeError, IndexError):
    """A window would extend past the end of a finite trajectory."""


class ClaimBoundsError(WindowBoundsError):
    """A phenomenal claim points at a window outside the trajectory."""


class TheoremViolationError(StackTimeError, AssertionError):
    """A checked theorem failed on a concrete instance."""


class ModelError(StackTimeError, ValueError):
    """A model file failed to parse, validate or resolve."""

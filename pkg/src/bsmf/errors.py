"""Exception hierarchy shared by every stage of the pipeline."""


class BsmfError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(BsmfError, ValueError):
    """Operand dimensions do not line up."""


class ValidationError(BsmfError, ValueError):
    """A value violates a documented invariant."""


class InputError(BsmfError, ValueError):
    """Malformed or inconsistent user input (files, texts, ids)."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class ModeError(BsmfError, ValueError):
    """Operation is not defined for the configured factorization mode."""


class OptimizerError(BsmfError, RuntimeError):
    """The solver produced a non-finite loss."""

    def __init__(self, iteration, loss):
        self.iteration = iteration
        self.loss = loss
        super().__init__(f"loss diverged to {loss!r} at iteration {iteration}")

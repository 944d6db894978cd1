"""Exception types shared by the library and the command line."""


class QuadsurfError(Exception):
    """Base class; the CLI maps it to exit code 1."""


class BudgetExceeded(QuadsurfError, RuntimeError):
    """A configured work or memory budget was hit; the CLI exits with 2."""

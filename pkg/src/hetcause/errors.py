"""Exception taxonomy shared by the library and the CLI exit codes."""


class HetcauseError(Exception):
    """Base class for all errors raised by this package."""


class DataError(HetcauseError):
    """Bad user input: unreadable files, malformed CSV, insufficient sample.

    Mapped to exit code 1 by the CLI.
    """


class NumericalError(HetcauseError):
    """Numerical failure: singular matrices, non-PD profiles, quadrature.

    Mapped to exit code 2 by the CLI.
    """

"""Exception hierarchy shared across the toolkit.

Two broad classes are distinguished so the CLI can map them to distinct
exit codes: problems with *inputs* (files, metadata, windows, configs)
raise :class:`ValidationError`; failures while *computing* (detectors,
solvers) raise :class:`ProcessingError`.
"""


class StresscalError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(StresscalError, ValueError):
    """Malformed or inconsistent input data, metadata, or configuration."""


class ProcessingError(StresscalError, RuntimeError):
    """A detector or solver failed on otherwise valid input."""


class SolverError(ProcessingError):
    """An iterative solver did not reach its convergence criterion."""

"""Exceptions raised by pytorch_corner.

Precondition violations (bad shapes, out of range sites, negative rates) raise
the builtin ValueError. The classes below cover failures that the command line
runner maps to distinct exit codes.
"""


class ConfigError(ValueError):
  """An invalid run configuration."""

  def __init__(self, message, path=None, line=None):
    """Initializes a new ConfigError instance.

    Args:
      message: What is wrong with the configuration.
      path: The configuration file the offending value came from, if any.
      line: The 1-based line of the offending key inside 'path', if known.
    """
    location = ''
    if path is not None:
      location = f'{path}:{line}: ' if line is not None else f'{path}: '
    super().__init__(location + message)
    self.path = path
    self.line = line


class NumericalError(RuntimeError):
  """Base class for failures of the numerical machinery."""


class IntegratorError(NumericalError):
  """The coherent substep could not meet its tolerance within its budget."""

  def __init__(self, message, steps=0, rejected=0, t_reached=0.):
    super().__init__(
        f'{message} (steps={steps}, rejected={rejected}, '
        f't_reached={t_reached:.6g})')
    self.steps = steps
    self.rejected = rejected
    self.t_reached = t_reached


class TruncationError(NumericalError):
  """The Gram matrix was not finite or the truncation budget was unreachable."""


class PhysicalityError(NumericalError):
  """A reconstructed quantum channel is not completely positive."""

"""Base classes for coherent-substep integrators."""

import torch

from pytorch_corner import errors
from pytorch_corner import ops


class Integrator:
  """The base class for integrators of dC/dt = -i H_eff C.

  Subclasses implement `_propagate`. Zero and purely diagonal generators are
  handled here exactly, so subclasses only ever see operators with at least
  one off-diagonal term.
  """

  def __init__(self, tol=1e-8, max_steps=100000):
    """Initializes a new Integrator instance.

    Args:
      tol: Relative local error tolerance per substep.
      max_steps: Budget of (accepted + rejected) internal steps per call.
        Exhausting it raises IntegratorError.
    """
    assert tol > 0, 'tol must be positive.'
    self.tol = tol
    self.max_steps = max_steps
    self.reset_stats()

  def reset_stats(self):
    self._stats = {'calls': 0, 'steps': 0, 'rejected': 0, 'matvecs': 0}

  @property
  def stats(self):
    return dict(self._stats)

  def _count(self, **kwargs):
    for key, value in kwargs.items():
      self._stats[key] += value

  def propagate(self, op, columns, dt):
    """Evolves every column of 'columns' under -i op for a time 'dt'.

    Args:
      op: An OperatorSpec, typically built by build_effective_hamiltonian.
      columns: An N x M complex tensor. It is not modified.
      dt: The duration to integrate over.
    Returns:
      The evolved N x M tensor.
    """
    if dt < 0:
      raise ValueError(f'Cannot integrate backwards in time (dt={dt}).')
    self._count(calls=1)
    if dt == 0 or op.is_zero:
      return columns.clone()
    diagonal, is_diagonal = ops.diagonal_part(op)
    if is_diagonal:
      return torch.exp(-1j * dt * diagonal)[:, None] * columns
    out = self._propagate(op, columns.to(ops.DTYPE), dt)
    if not torch.isfinite(out).all():
      raise errors.IntegratorError(
          f'{type(self).__name__} produced a non-finite state',
          self._stats['steps'], self._stats['rejected'])
    return out

  def _propagate(self, op, columns, dt):
    raise NotImplementedError()

"""Dense matrix exponential propagation for small Hilbert spaces."""

import collections

import torch

from pytorch_corner import ops
from pytorch_corner.integrators import base


class DenseExponential(base.Integrator):
  """Exact propagation through a cached dense exp(-i dt H_eff).

  Only usable when the operator can be densified, i.e. N <= max_dim. The tol
  and max_steps arguments are accepted for interface compatibility.
  """

  def __init__(self, tol=1e-8, max_steps=1, max_dim=2 ** 10, cache_size=16):
    super().__init__(tol, max_steps)
    self.max_dim = max_dim
    self._cache_size = cache_size
    self._cache = collections.OrderedDict()

  def propagator(self, op, dt):
    """Returns the N x N matrix exp(-i dt op), cached per (op, dt)."""
    key = (op, dt)
    if key in self._cache:
      self._cache.move_to_end(key)
      return self._cache[key]
    if op.hilbert.dim > self.max_dim:
      raise ValueError(
          f'Dense exponentials are limited to N <= {self.max_dim}, got '
          f'N={op.hilbert.dim}; use the krylov integrator instead.')
    matrix = torch.linalg.matrix_exp(-1j * dt * op.to_dense())
    self._cache[key] = matrix
    if len(self._cache) > self._cache_size:
      self._cache.popitem(last=False)
    return matrix

  def _propagate(self, op, columns, dt):
    self._count(steps=1, matvecs=1)
    return self.propagator(op, dt) @ columns

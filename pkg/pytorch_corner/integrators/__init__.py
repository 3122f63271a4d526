"""Integrators for the coherent substep dC/dt = -i H_eff C."""

import torch

from pytorch_corner import errors
from pytorch_corner import ops
from pytorch_corner.integrators import base
from pytorch_corner.integrators.expm import DenseExponential
from pytorch_corner.integrators.krylov import KrylovExponential
from pytorch_corner.integrators.rk45 import DormandPrince


class ExplicitEuler(base.Integrator):
  """Fixed-step explicit Euler, used for sanity checks only."""

  def __init__(self, tol=1e-8, max_steps=100000, n_substeps=1):
    """Initializes a new ExplicitEuler instance.

    Args:
      tol: Unused, the step count is fixed.
      max_steps: Upper bound on n_substeps.
      n_substeps: Number of equal Euler steps per call.
    """
    super().__init__(tol, max_steps)
    if not 1 <= n_substeps <= max_steps:
      raise ValueError(f'n_substeps must lie in [1, {max_steps}].')
    self.n_substeps = n_substeps

  def _propagate(self, op, columns, dt):
    h = dt / self.n_substeps
    y = columns
    start = float(torch.linalg.vector_norm(y))
    for _ in range(self.n_substeps):
      y = y - 1j * h * ops.apply_to_columns(op, y)
      self._count(steps=1, matvecs=1)
    if float(torch.linalg.vector_norm(y)) > 1e6 * max(start, 1e-300):
      raise errors.IntegratorError(
          'Explicit Euler diverged', self._stats['steps'], 0, dt)
    return y


INTEGRATOR_MAP = {
    'euler': ExplicitEuler,
    'rk45': DormandPrince,
    'krylov': KrylovExponential,
    'expm': DenseExponential,
}


def make_integrator(name, tol=1e-8, max_steps=None):
  """Instantiates one of INTEGRATOR_MAP by name.

  Args:
    name: A key of INTEGRATOR_MAP.
    tol: The integrator tolerance.
    max_steps: Optional step budget; each integrator has its own default.
  """
  if name not in INTEGRATOR_MAP:
    raise ValueError(
        f"Unknown integrator '{name}', expected one of {sorted(INTEGRATOR_MAP)}.")
  kwargs = {'tol': tol}
  if max_steps is not None:
    kwargs['max_steps'] = max_steps
  return INTEGRATOR_MAP[name](**kwargs)


__all__ = [
    'DenseExponential',
    'DormandPrince',
    'ExplicitEuler',
    'INTEGRATOR_MAP',
    'KrylovExponential',
    'make_integrator',
]

"""Adaptive Dormand-Prince 5(4) Runge-Kutta integrator.

The fifth order solution is propagated and the embedded fourth order solution
provides the local error estimate. The last stage is evaluated at the new
point and reused as the first stage of the next step (FSAL).
"""

import torch

from pytorch_corner import errors
from pytorch_corner import ops
from pytorch_corner.integrators import base

_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0., 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# Difference between the fifth and the fourth order weights.
_E = (71 / 57600, 0., -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525,
      -1 / 40)


class DormandPrince(base.Integrator):
  """Explicit adaptive Runge-Kutta pair; accurate but not stiffness-stable."""

  def __init__(self, tol=1e-8, max_steps=100000, safety=0.9):
    super().__init__(tol, max_steps)
    self._safety = safety
    self._h = None

  def _error_ratio(self, y, y_new, err):
    scale = torch.maximum(y.abs(), y_new.abs())
    atol = self.tol * max(float(y.abs().max()), 1e-300)
    return float((err.abs() / (atol + self.tol * scale)).max())

  def integrate(self, fn, y0, duration):
    """Integrates dy/dt = fn(y) from 0 to 'duration'.

    Args:
      fn: The right hand side, a function of the state tensor only.
      y0: Initial state tensor of any shape.
      duration: Integration length.
    Returns:
      The state at 'duration'.
    """
    y = y0
    k1 = fn(y)
    self._count(matvecs=1)
    t = 0.
    h = self._h
    if h is None:
      d0, d1 = float(y.abs().max()), float(k1.abs().max())
      h = 0.01 * d0 / d1 if d1 > 1e-300 and d0 > 0 else duration
    steps = 0
    while t < duration:
      if steps >= self.max_steps:
        raise errors.IntegratorError(
            'Dormand-Prince exhausted its step budget', self._stats['steps'],
            self._stats['rejected'], t)
      step = min(h, duration - t)
      k = [k1]
      for i in range(1, 7):
        yi = y
        for a, kj in zip(_A[i], k):
          if a != 0:
            yi = yi + (step * a) * kj
        k.append(fn(yi))
      self._count(matvecs=6)
      y_new = yi
      err = sum((step * e) * kj for e, kj in zip(_E, k) if e != 0)
      ratio = self._error_ratio(y, y_new, err)
      steps += 1
      if ratio <= 1.:
        t = duration if step == duration - t else t + step
        y, k1 = y_new, k[6]
        self._count(steps=1)
        factor = 5. if ratio == 0 else min(5., self._safety * ratio ** -0.2)
      else:
        self._count(rejected=1)
        factor = max(0.2, self._safety * ratio ** -0.2)
        if step * factor < 1e-14 * max(duration, 1.):
          raise errors.IntegratorError(
              'Dormand-Prince step size underflow', self._stats['steps'],
              self._stats['rejected'], t)
      if ratio > 1. or step == h:
        h = step * factor
    self._h = h
    return y

  def _propagate(self, op, columns, dt):
    return self.integrate(
        lambda c: -1j * ops.apply_to_columns(op, c), columns, dt)

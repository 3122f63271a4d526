"""Krylov subspace approximation of exp(-i tau H_eff) applied to columns.

All M columns are processed together: one Arnoldi process per column, batched
along the last axis so that each Krylov iteration costs a single call to
apply_to_columns. The step size tau is chosen adaptively from the usual
a posteriori estimate, i.e. the last entry of the exponential of the Hessenberg
matrix augmented by one row.
"""

import torch

from pytorch_corner import errors
from pytorch_corner import ops
from pytorch_corner.integrators import base


class KrylovExponential(base.Integrator):
  """Adaptive time-stepping Arnoldi exponential integrator."""

  def __init__(self, tol=1e-8, max_steps=10000, krylov_dim=30):
    """Initializes a new KrylovExponential instance.

    Args:
      tol: Local error tolerance relative to the largest column norm.
      max_steps: Budget of (accepted + rejected) steps per call.
      krylov_dim: Maximum Krylov subspace dimension m.
    """
    super().__init__(tol, max_steps)
    assert krylov_dim >= 1, 'krylov_dim must be at least 1.'
    self.krylov_dim = krylov_dim
    self._tau = None

  def _arnoldi(self, op, w, beta):
    """Builds the batched Arnoldi basis of -i op started from w / beta.

    Returns:
      basis: A (k + 1, N, M) tensor of orthonormal vectors (zero past a
        breakdown).
      hessenberg: An (M, k + 1, k + 1) tensor whose last column is zero.
    """
    n, m = w.shape
    kdim = min(self.krylov_dim, n)
    safe_beta = torch.where(beta > 0, beta, torch.ones_like(beta))
    basis = [w / safe_beta]
    hessenberg = torch.zeros((m, kdim + 1, kdim + 1), dtype=ops.DTYPE)
    scale = 0.
    for j in range(kdim):
      p = -1j * ops.apply_to_columns(op, basis[j])
      self._count(matvecs=1)
      # Modified Gram-Schmidt, with one reorthogonalization pass.
      for _ in range(2):
        for i in range(j + 1):
          hij = (basis[i].conj() * p).sum(dim=0)
          hessenberg[:, i, j] += hij
          p = p - hij * basis[i]
      s = torch.linalg.vector_norm(p, dim=0)
      scale = max(scale, float(hessenberg[:, :j + 1, j].abs().max()))
      broken = s <= 1e-12 * max(scale, 1.)
      s = torch.where(broken, torch.zeros_like(s), s)
      hessenberg[:, j + 1, j] = s
      basis.append(torch.where(broken, torch.zeros_like(p),
                               p / torch.where(broken, torch.ones_like(s), s)))
      if broken.all():
        kdim = j + 1
        break
    return (torch.stack(basis[:kdim + 1]),
            hessenberg[:, :kdim + 1, :kdim + 1])

  def _propagate(self, op, columns, dt):
    w = columns
    t = 0.
    tau = dt if self._tau is None else min(self._tau, dt)
    steps = 0
    while dt - t > 1e-15 * dt:
      beta = torch.linalg.vector_norm(w, dim=0)
      if not (beta > 0).any():
        break
      basis, hessenberg = self._arnoldi(op, w, beta)
      k = basis.shape[0] - 1
      target = self.tol * float(beta.max())
      while True:
        if steps >= self.max_steps:
          raise errors.IntegratorError(
              'Krylov integrator exhausted its step budget',
              self._stats['steps'], self._stats['rejected'], t)
        steps += 1
        step = min(tau, dt - t)
        coeffs = torch.linalg.matrix_exp(step * hessenberg)[:, :, 0]
        err = float((beta * coeffs[:, k].abs()).max())
        if err <= target:
          break
        self._count(rejected=1)
        tau = step * max(0.2, 0.9 * (target / err) ** (1 / (k + 1)))
        if tau < 1e-14 * dt:
          raise errors.IntegratorError(
              'Krylov step size underflow', self._stats['steps'],
              self._stats['rejected'], t)
      w = torch.einsum('inm,mi->nm', basis, beta[:, None] * coeffs)
      t = dt if step == dt - t else t + step
      self._count(steps=1)
      if step < tau:
        continue
      if err == 0:
        tau = 5. * tau
      else:
        tau *= min(5., 0.9 * (target / err) ** (1 / (k + 1)))
    self._tau = tau
    return w

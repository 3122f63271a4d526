"""Brute-force reference integration of the Lindblad master equation.

The full N x N density matrix is flattened and integrated with scipy's DOP853
solver, independent of the integrators used by the corner engine. Operators
are applied to rho from the left through their structured kernels, so no
N^2 x N^2 superoperator is ever materialized.
"""

import dataclasses
import functools
import time

import numpy as np
from scipy import integrate
import torch

from pytorch_corner import circuits
from pytorch_corner import corner
from pytorch_corner import errors
from pytorch_corner import noise as noise_lib
from pytorch_corner import ops

# Largest Hilbert space dimension integrate_exact accepts.
MAX_EXACT_DIM = 2 ** 10


@dataclasses.dataclass
class DenseState:
  """A dense density matrix at time t."""

  rho: torch.Tensor
  t: float = 0.

  @classmethod
  def from_pure_state(cls, psi):
    psi = torch.as_tensor(psi).to(ops.DTYPE)
    psi = psi / torch.linalg.vector_norm(psi)
    return cls(torch.outer(psi, psi.conj()))

  @classmethod
  def from_corner(cls, state):
    return cls(state.density(), state.t)

  def check(self, atol=1e-9):
    """Asserts unit trace, Hermiticity and positivity within atol."""
    assert abs(complex(torch.trace(self.rho)) - 1) <= atol, 'Trace is not 1.'
    assert float((self.rho - self.rho.conj().T).abs().max()) <= atol, (
        'rho is not Hermitian.')
    assert float(torch.linalg.eigvalsh(self.rho).min()) >= -atol, (
        'rho is not positive semidefinite.')


def _left(op, rho):
  return ops.apply_to_columns(op, rho)


def lindblad_rhs(rho, hamiltonian, noise):
  """-i [H, rho] + sum_i (J_i rho J_i^dagger - {J_i^dagger J_i, rho} / 2).

  Evaluated as A = H_eff rho, rhs = -i (A - A^dagger) + sum_i J_i (J_i rho)^dagger
  which holds because rho is Hermitian.
  """
  if isinstance(rho, DenseState):
    rho = rho.rho
  return _rhs(rho, _effective_hamiltonian(hamiltonian, noise), noise)


@functools.lru_cache(maxsize=32)
def _effective_hamiltonian(hamiltonian, noise):
  return ops.build_effective_hamiltonian(hamiltonian, noise)


def _rhs(rho, h_eff, noise):
  a = _left(h_eff, rho)
  out = -1j * (a - a.conj().T)
  for jump in noise.jumps:
    if jump.is_zero:
      continue
    j_rho = _left(jump, rho)
    out = out + _left(jump, j_rho.conj().T)
  return out


def integrate_exact(rho0, schedule, noise, tol=1e-10, max_dim=MAX_EXACT_DIM):
  """Integrates the master equation through every segment of 'schedule'.

  Args:
    rho0: The initial DenseState (or N x N tensor).
    schedule: A GateSchedule; Hamiltonians switch suddenly between segments.
    noise: The NoiseModel.
    tol: Relative and absolute local tolerance of the DOP853 solver.
    max_dim: Refuse Hilbert spaces larger than this.
  Returns:
    The final DenseState.
  Raises:
    IntegratorError: If the solver fails inside a segment.
  """
  if not isinstance(rho0, DenseState):
    rho0 = DenseState(torch.as_tensor(rho0).to(ops.DTYPE))
  n = rho0.rho.shape[0]
  if n > max_dim:
    raise ValueError(
        f'Exact integration is limited to N <= {max_dim}, got N={n}.')
  rho, t = rho0.rho.to(ops.DTYPE), rho0.t
  for segment in schedule.segments:
    if segment.duration == 0:
      continue
    h_eff = _effective_hamiltonian(segment.hamiltonian, noise)

    def flat_rhs(_, y, h=h_eff):
      r = torch.from_numpy(np.ascontiguousarray(y).reshape(n, n))
      return _rhs(r, h, noise).resolve_conj().numpy().ravel()

    solution = integrate.solve_ivp(
        flat_rhs, (0., segment.duration), rho.resolve_conj().numpy().ravel(),
        method='DOP853', rtol=tol, atol=tol)
    if not solution.success:
      raise errors.IntegratorError(
          f'DOP853 failed in segment {segment.label!r}: {solution.message}',
          steps=int(solution.nfev), t_reached=t + float(solution.t[-1]))
    rho = torch.from_numpy(solution.y[:, -1].reshape(n, n).copy())
    rho = 0.5 * (rho + rho.conj().T)
    t += segment.duration
  return DenseState(rho, t)


def _psd_sqrt(rho):
  evals, evecs = torch.linalg.eigh(0.5 * (rho + rho.conj().T))
  root = evals.clamp(min=0.).sqrt().to(ops.DTYPE)
  return (evecs * root[None, :]) @ evecs.conj().T


def fidelity_dense(rho, sigma):
  """Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)), not squared."""
  rho = rho.rho if isinstance(rho, DenseState) else rho
  sigma = sigma.rho if isinstance(sigma, DenseState) else sigma
  root = _psd_sqrt(rho)
  inner = root @ sigma @ root
  evals = torch.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
  return float(evals.clamp(min=0.).sqrt().sum())


def fidelity_to_dense(state, rho):
  """Fidelity of a corner basis against a dense state in O(M^2 N + M N^2).

  C^dagger rho C is sqrt(rho_c) rho sqrt(rho_c) in the eigenbasis of the
  corner state, so F is the sum of square roots of its eigenvalues.
  """
  rho = rho.rho if isinstance(rho, DenseState) else rho
  inner = state.C.conj().T @ rho @ state.C
  evals = torch.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
  return float(evals.clamp(min=0.).sqrt().sum())


@dataclasses.dataclass
class BenchmarkResult:
  L: int
  epsilon: float
  t_corner_s: float
  t_exact_s: float
  fidelity_cross: float
  max_M: int


def benchmark_pair(n_qubits, gamma_T, epsilon, dt=0.05, noise_kind='decay',
                   exact_tol=1e-8, cfg=None):
  """Runs the corner and the dense engine on the same noisy QFT.

  Args:
    n_qubits: Register size L.
    gamma_T: The noise strength gamma * T_QFT.
    epsilon: Truncation budget of the corner run.
    dt: Outer step of the corner run.
    noise_kind: A key of noise.NOISE_MAP.
    exact_tol: Tolerance of the dense integration.
    cfg: Optional StepConfig overriding dt and epsilon.
  Returns:
    A BenchmarkResult with both wall times and F(rho_corner, rho_exact).
  """
  schedule = circuits.qft_schedule(n_qubits)
  gamma = gamma_T / schedule.total_duration
  noise = noise_lib.make_noise(noise_kind, n_qubits, gamma)
  psi0 = circuits.inverse_qft_ghz_state(n_qubits)
  if cfg is None:
    cfg = corner.StepConfig(dt=dt, eps=epsilon)

  max_m = [1]
  start = time.time()
  final = corner.evolve_schedule(
      corner.from_pure_state(psi0), schedule, noise, cfg,
      observer=lambda s: max_m.append(s.M))
  t_corner = time.time() - start

  start = time.time()
  exact = integrate_exact(DenseState.from_pure_state(psi0), schedule, noise,
                          tol=exact_tol)
  t_exact = time.time() - start
  return BenchmarkResult(n_qubits, cfg.eps, t_corner, t_exact,
                         fidelity_to_dense(final, exact), max(max_m))


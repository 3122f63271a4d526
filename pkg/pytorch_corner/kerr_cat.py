"""Two-photon driven Kerr resonator with one and two photon loss.

H = K a^dag^2 a^2 + omega_c a^dag a + G (a^2 + a^dag^2), with jump operators
sqrt(gamma) a and sqrt(kappa) a^2. The drive and Kerr rates make the coherent
substep stiff, so this model is the test bed for the adaptive integrators.
At long times the state is a mixture of the even and odd cats |C_alpha^+->
which, for a positive drive G, lie along the imaginary axis.
"""

import dataclasses
import math

import numpy as np
import qutip
import torch

from pytorch_corner import circuits
from pytorch_corner import corner
from pytorch_corner import noise as noise_lib
from pytorch_corner import ops


@dataclasses.dataclass
class KerrParams:
  """Rates of the Kerr-cat model and the Fock cutoff n_ph."""

  K: float = 10.
  omega_c: float = 1.
  G: float = 50.
  gamma: float = 1.
  kappa: float = 2.
  n_ph: int = 20

  def __post_init__(self):
    if self.gamma < 0 or self.kappa < 0:
      raise ValueError('Loss rates must be nonnegative.')
    if self.n_ph < 2:
      raise ValueError(f'n_ph must be at least 2, got {self.n_ph}.')

  @classmethod
  def reference(cls, gamma=1., n_ph=20):
    """kappa = 2 gamma, omega_c = gamma, K = 10 gamma, G = 50 gamma."""
    return cls(K=10 * gamma, omega_c=gamma, G=50 * gamma, gamma=gamma,
               kappa=2 * gamma, n_ph=n_ph)


def kerr_model(params):
  """Returns (H, NoiseModel) on a boson mode with cutoff params.n_ph."""
  hilbert = ops.HilbertSpec.boson(params.n_ph)
  a = ops.destroy(hilbert)
  a_dag = ops.create(hilbert)
  hamiltonian = (params.K * (a_dag @ a_dag @ a @ a)
                 + params.omega_c * (a_dag @ a)
                 + params.G * (a @ a + a_dag @ a_dag))
  hamiltonian = ops.OperatorSpec(hilbert, hamiltonian.terms,
                                 hermitian_hint=True)
  jumps = [math.sqrt(params.gamma) * a, math.sqrt(params.kappa) * (a @ a)]
  return hamiltonian, noise_lib.NoiseModel(hilbert, jumps)


def photon_number(state):
  """<a^dag a> of a corner state on a boson mode."""
  n = torch.arange(state.N, dtype=torch.float64)
  return float((n[:, None] * state.C.abs() ** 2).sum())


def parity(column):
  """<(-1)^(a^dag a)> of a single (possibly unnormalized) Fock column."""
  signs = (-1.) ** torch.arange(column.shape[0], dtype=torch.float64)
  weights = column.abs() ** 2
  return float((signs * weights).sum() / weights.sum())


def column_parities(state):
  return [parity(state.C[:, k]) for k in range(state.M)]


def total_parity(state):
  signs = (-1.) ** torch.arange(state.N, dtype=torch.float64)
  return float((signs[:, None] * state.C.abs() ** 2).sum())


def tail_population(state, levels=1):
  """Population of the top 'levels' Fock states, a cutoff adequacy check."""
  return float((state.C[-levels:].abs() ** 2).sum())


@dataclasses.dataclass
class KerrResult:
  """The final corner state of a Kerr-cat run and its trajectory."""

  state: corner.CornerBasis
  times: list
  photon_numbers: list
  dims: list
  total_parities: list
  tail_population: float
  integrator_stats: dict

  @property
  def parities(self):
    return column_parities(self.state)


def run_kerr_cat(params, t_final=None, cfg=None, sample_every=10,
                 cutoff_tol=1e-6, strict_cutoff=False, observer=None):
  """Evolves the vacuum under the Kerr-cat Lindbladian.

  Args:
    params: KerrParams.
    t_final: Final time, defaults to 10 / gamma (or 10 / kappa if gamma = 0).
    cfg: StepConfig; defaults to dt = 0.01 / rate and eps = 1e-4 with the
      Krylov integrator.
    sample_every: Trajectory sampling stride in steps.
    cutoff_tol: Largest acceptable population of the top Fock level.
    strict_cutoff: Raise ValueError when the cutoff check fails.
    observer: Optional extra fn(state) called at every sample.
  Returns:
    A KerrResult.
  """
  rate = params.gamma if params.gamma > 0 else params.kappa
  if rate <= 0:
    raise ValueError('At least one of gamma and kappa must be positive.')
  if t_final is None:
    t_final = 10. / rate
  if cfg is None:
    cfg = corner.StepConfig(dt=0.01 / rate, eps=1e-4)
  hamiltonian, noise = kerr_model(params)
  vacuum = torch.zeros(params.n_ph + 1, dtype=ops.DTYPE)
  vacuum[0] = 1.
  schedule = circuits.GateSchedule(
      hamiltonian.hilbert, [circuits.Segment('kerr', hamiltonian, t_final)])
  times, photons, dims, parities = [], [], [], []

  def record(state):
    times.append(state.t)
    photons.append(photon_number(state))
    dims.append(state.M)
    parities.append(total_parity(state))
    if observer is not None:
      observer(state)

  propagator = corner.CornerPropagator(noise, cfg)
  final = propagator.evolve(corner.from_pure_state(vacuum), schedule,
                            observer=record, sample_every=sample_every)
  tail = tail_population(final)
  if tail > cutoff_tol and strict_cutoff:
    raise ValueError(
        f'Top Fock level holds population {tail:.3g} > {cutoff_tol}; '
        f'increase n_ph.')
  return KerrResult(final, times, photons, dims, parities, tail,
                    propagator.integrator.stats)


def phase_space_grid(extent=7.5, points=101):
  """Equally spaced Re(alpha) (and Im(alpha)) values in [-extent, extent]."""
  return torch.linspace(-extent, extent, points, dtype=torch.float64)


def wigner(column, xvec, yvec=None):
  """Wigner function W(x + i y) of a pure Fock-basis column.

  Delegates to qutip with g = 2, so that alpha = x + i y and the integral over
  dx dy is one (vacuum: W(0) = 2 / pi).

  Args:
    column: Fock amplitudes of length n_ph + 1; normalized internally.
    xvec: Grid of Re(alpha).
    yvec: Grid of Im(alpha), defaults to xvec.
  Returns:
    A len(yvec) x len(xvec) float64 tensor.
  """
  yvec = xvec if yvec is None else yvec
  column = torch.as_tensor(column).to(ops.DTYPE)
  column = column / torch.linalg.vector_norm(column)
  dim = column.shape[0]
  extent = max(float(xvec.abs().max()), float(yvec.abs().max()))
  if extent ** 2 > 4 * dim:
    raise ValueError(
        f'A grid extending to |alpha| = {extent} is not resolved by a Fock '
        f'cutoff of {dim - 1}.')
  ket = qutip.Qobj(column.resolve_conj().numpy()[:, None])
  w = qutip.wigner(ket, xvec.numpy(), yvec.numpy(), method='iterative', g=2.)
  return torch.from_numpy(np.real(w).astype(np.float64))


def leading_wigners(state, n_columns=4, extent=7.5, points=101):
  """Wigner fields of the leading corner columns, with their weights p_k."""
  grid = phase_space_grid(extent, points)
  count = min(n_columns, state.M)
  return [(float(state.p[k]), wigner(state.C[:, k], grid))
          for k in range(count)]

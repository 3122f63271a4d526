"""Time-dependent corner-space propagation of a Lindblad master equation.

The density matrix is carried as rho = C C^dagger where the columns of the
N x M matrix C are sqrt(p_k) |phi_k>. One step of length dt consists of

  1. the coherent substep C -> exp(-i dt H_eff) C, integrated exactly,
  2. the jump expansion T = [K_0 C, sqrt(dt) J_1 C, ..., sqrt(dt) J_D C], where
     the jump columns act on the corner before the coherent substep,
  3. the Gram truncation: the nonzero spectrum of T T^dagger is read off the
     small W x W matrix T^dagger T, and the leading eigenvectors are mapped
     back through T.
"""

import dataclasses
import math

import torch

from pytorch_corner import errors
from pytorch_corner import integrators
from pytorch_corner import ops


@dataclasses.dataclass
class StepConfig:
  """Numerical parameters of a single corner-space step.

  Attributes:
    dt: Outer time step.
    ode_tol: Relative tolerance of the coherent substep integrator.
    eps: Truncation budget per step, the largest discarded trace fraction.
      Discards add up over the T / dt steps of a run.
    M_max: Optional cap on the corner dimension.
    p_floor: Eigenvalues below this floor are treated as zero.
    integrator: A key of integrators.INTEGRATOR_MAP.
    max_ode_steps: Optional step budget of the integrator.
    strict: Whether an unreachable eps under M_max raises TruncationError
      instead of only flagging the state.
  """

  dt: float = 0.05
  ode_tol: float = 1e-8
  eps: float = 1e-6
  M_max: int = None
  p_floor: float = 1e-14
  integrator: str = 'krylov'
  max_ode_steps: int = None
  strict: bool = False

  def __post_init__(self):
    if not self.dt > 0:
      raise ValueError(f'dt must be positive, got {self.dt}.')
    if not 0 < self.eps < 1:
      raise ValueError(f'eps must lie in (0, 1), got {self.eps}.')
    if not self.ode_tol > 0:
      raise ValueError(f'ode_tol must be positive, got {self.ode_tol}.')
    if self.p_floor < 0:
      raise ValueError(f'p_floor must be nonnegative, got {self.p_floor}.')
    if self.M_max is not None and self.M_max < 1:
      raise ValueError(f'M_max must be at least 1, got {self.M_max}.')
    if self.integrator not in integrators.INTEGRATOR_MAP:
      raise ValueError(f"Unknown integrator '{self.integrator}'.")


@dataclasses.dataclass
class CornerBasis:
  """A weighted low-rank factor C of the density matrix, rho = C C^dagger.

  Attributes:
    C: N x M complex tensor, column k is sqrt(p_k) |phi_k>.
    p: Length M float64 tensor of descending weights.
    t: Simulation time.
    eps_step: Trace fraction discarded by the last truncation.
    eps_budget: The truncation budget the state was produced with.
    trace_drift: |Tr(T T^dagger) - 1| of the last step, before renormalization.
    eps_total: Sum of eps_step over all steps so far.
    eps_unreachable: Whether the last truncation hit M_max before eps.
  """

  C: torch.Tensor
  p: torch.Tensor
  t: float = 0.
  eps_step: float = 0.
  eps_budget: float = 0.
  trace_drift: float = 0.
  eps_total: float = 0.
  eps_unreachable: bool = False

  @property
  def N(self):
    return self.C.shape[0]

  @property
  def M(self):
    return self.C.shape[1]

  def density(self):
    """Returns the dense N x N density matrix C C^dagger (small N only)."""
    if self.N > ops.MAX_DENSE_DIM:
      raise ValueError(f'Refusing to densify a state of dimension {self.N}.')
    return self.C @ self.C.conj().T

  def nbytes(self):
    return (self.C.element_size() * self.C.nelement() +
            self.p.element_size() * self.p.nelement())

  def state_dict(self):
    return dataclasses.asdict(self)

  @classmethod
  def from_state_dict(cls, state):
    return cls(**state)


class TransitionBuffer:
  """A contiguous N x capacity work array that grows geometrically.

  The transition matrix T has M (D + 1) columns and M changes every step, so
  the storage is reallocated only when the requested width exceeds the
  current capacity, and then at least doubled.
  """

  def __init__(self, n, capacity=8):
    self._n = n
    self._data = torch.empty((n, capacity), dtype=ops.DTYPE)
    self.n_resizes = 0

  @property
  def capacity(self):
    return self._data.shape[1]

  def view(self, width):
    if width > self.capacity:
      self._data = torch.empty(
          (self._n, max(width, 2 * self.capacity)), dtype=ops.DTYPE)
      self.n_resizes += 1
    return self._data[:, :width]


def from_pure_state(psi):
  """Wraps a (not necessarily normalized) state vector as a rank one corner."""
  psi = torch.as_tensor(psi).to(ops.DTYPE)
  if psi.ndim != 1:
    raise ValueError(f'Expected a state vector, got shape {tuple(psi.shape)}.')
  norm = float(torch.linalg.vector_norm(psi))
  if norm == 0:
    raise ValueError('Cannot build a corner basis from the zero vector.')
  return CornerBasis(C=(psi / norm)[:, None],
                     p=torch.ones(1, dtype=torch.float64))


def coherent_substep(C_in, h_eff, dt, tol=1e-8, integrator=None):
  """Evolves every column of C_in under dc/dt = -i h_eff c for a time dt.

  Args:
    C_in: N x M complex tensor.
    h_eff: The effective Hamiltonian from ops.build_effective_hamiltonian.
    dt: Duration of the substep.
    tol: Tolerance used when 'integrator' is not given.
    integrator: Optional integrators.Integrator instance; defaults to the
      Krylov integrator.
  """
  if integrator is None:
    integrator = integrators.KrylovExponential(tol=tol)
  return integrator.propagate(h_eff, C_in, dt)


def expand_transition_basis(C, noise, dt, C_pre=None, buffer=None):
  """Assembles T = [K_0 C, sqrt(dt) J_1 C_pre, ..., sqrt(dt) J_D C_pre].

  Column m of T is K_nu applied to column mu with nu = m // M and mu = m % M.

  Args:
    C: N x M corner after the coherent substep (the K_0 block).
    noise: A NoiseModel with D jump operators.
    dt: The step length.
    C_pre: N x M corner before the coherent substep. Defaults to C.
    buffer: Optional TransitionBuffer to assemble T in.
  Returns:
    The N x M (D + 1) tensor T.
  """
  if C_pre is None:
    C_pre = C
  n, m = C.shape
  if n != noise.hilbert.dim:
    raise ValueError(
        f'Corner has N={n} rows but the noise acts on N={noise.hilbert.dim}.')
  if tuple(C_pre.shape) != (n, m):
    raise ValueError(
        f'Shape mismatch: {tuple(C.shape)} vs {tuple(C_pre.shape)}.')
  width = m * (noise.D + 1)
  if buffer is None:
    T = torch.empty((n, width), dtype=ops.DTYPE)
  else:
    T = buffer.view(width)
  T[:, :m] = C
  scale = math.sqrt(dt)
  for i, jump in enumerate(noise.jumps, start=1):
    if jump.is_zero:
      T[:, i * m:(i + 1) * m] = 0
    else:
      T[:, i * m:(i + 1) * m] = scale * ops.apply_to_columns(jump, C_pre)
  return T


def _fix_phases(columns):
  """Rotates each column so that its largest-magnitude entry is real > 0."""
  index = columns.abs().argmax(dim=0)
  pivot = columns.gather(0, index[None, :])[0]
  phase = pivot / pivot.abs().clamp(min=1e-300)
  return columns * phase.conj()[None, :]


def gram_truncate(T, cfg, t=0.):
  """Truncates T T^dagger to its leading eigenvectors.

  Args:
    T: N x W complex tensor.
    cfg: A StepConfig providing eps, M_max, p_floor and strict.
    t: Time stamp of the returned state.
  Returns:
    A CornerBasis with orthogonal columns and weights summing to one.
  """
  sigma = T.conj().T @ T
  if not torch.isfinite(sigma).all():
    raise errors.TruncationError('Gram matrix is not finite.')
  sigma = 0.5 * (sigma + sigma.conj().T)
  evals, evecs = torch.linalg.eigh(sigma)
  evals, evecs = evals.flip(0), evecs.flip(1)
  evals = torch.where(evals > max(0., cfg.p_floor), evals,
                      torch.zeros_like(evals))
  total = float(evals.sum())
  if total <= 0:
    raise errors.TruncationError('Corner state has vanished (zero trace).')
  n_positive = max(int((evals > 0).sum()), 1)
  discarded = (1. - torch.cumsum(evals, dim=0) / total).clamp(min=0.)
  within = torch.nonzero(discarded[:n_positive] <= cfg.eps)
  m = int(within[0]) + 1 if len(within) else n_positive
  unreachable = False
  if cfg.M_max is not None and m > cfg.M_max:
    if cfg.strict:
      raise errors.TruncationError(
          f'eps={cfg.eps} needs M={m} > M_max={cfg.M_max}.')
    m, unreachable = cfg.M_max, True
  kept = evals[:m]
  kept_total = float(kept.sum())
  columns = _fix_phases(T @ evecs[:, :m])
  return CornerBasis(
      C=columns / math.sqrt(kept_total),
      p=kept / kept_total,
      t=t,
      eps_step=float(discarded[m - 1]),
      eps_budget=cfg.eps,
      trace_drift=abs(total - 1.),
      eps_unreachable=unreachable)


class CornerPropagator:
  """Steps corner bases under a fixed NoiseModel and StepConfig.

  Caches the effective Hamiltonian of every Hamiltonian it has seen, the
  integrator instance and the transition buffer, so that repeated steps under
  the same gate do no setup work.
  """

  def __init__(self, noise, cfg):
    self.noise = noise
    self.cfg = cfg
    self.integrator = integrators.make_integrator(
        cfg.integrator, cfg.ode_tol, cfg.max_ode_steps)
    self._buffer = TransitionBuffer(noise.hilbert.dim)
    self._h_eff = {}
    # Steps whose truncation stopped at M_max before reaching eps.
    self.n_unreachable = 0

  def effective_hamiltonian(self, hamiltonian):
    key = id(hamiltonian)
    if key not in self._h_eff or self._h_eff[key][0] is not hamiltonian:
      self._h_eff[key] = (
          hamiltonian,
          ops.build_effective_hamiltonian(hamiltonian, self.noise))
    return self._h_eff[key][1]

  def step(self, state, hamiltonian, dt=None):
    """Advances 'state' by dt (defaults to cfg.dt) under 'hamiltonian'."""
    dt = self.cfg.dt if dt is None else dt
    if dt < 0:
      raise ValueError(f'Step length must be nonnegative, got {dt}.')
    h_eff = self.effective_hamiltonian(hamiltonian)
    coherent = self.integrator.propagate(h_eff, state.C, dt)
    T = expand_transition_basis(
        coherent, self.noise, dt, C_pre=state.C, buffer=self._buffer)
    out = gram_truncate(T, self.cfg, t=state.t + dt)
    out.eps_total = state.eps_total + out.eps_step
    self.n_unreachable += int(out.eps_unreachable)
    return out

  def evolve(self, state, schedule, observer=None, sample_every=1,
             on_segment=None):
    """Runs every segment of 'schedule' with sudden Hamiltonian switching.

    Args:
      state: The initial CornerBasis.
      schedule: Anything with a 'segments' sequence of objects carrying
        'hamiltonian' and 'duration'.
      observer: Optional fn(state) called at the start, every 'sample_every'
        steps and at the end.
      sample_every: Observer stride in steps.
      on_segment: Optional fn(index, segment, state) called when each
        segment starts.
    Returns:
      The final CornerBasis.
    """
    assert sample_every >= 1, 'sample_every must be positive.'
    if not schedule.segments:
      raise ValueError('Cannot evolve under an empty schedule.')
    dt = self.cfg.dt
    if observer is not None:
      observer(state)
    n_steps = 0
    observed = True
    for index, segment in enumerate(schedule.segments):
      if segment.duration < 0:
        raise ValueError(
            f'Segment {index} has negative duration {segment.duration}.')
      if on_segment is not None:
        on_segment(index, segment, state)
      start = state.t
      n_sub = 0
      if segment.duration > 0:
        n_sub = max(1, math.ceil(segment.duration / dt - 1e-9))
      for i in range(n_sub):
        h = dt if i < n_sub - 1 else segment.duration - (n_sub - 1) * dt
        state = self.step(state, segment.hamiltonian, h)
        if i == n_sub - 1:
          state.t = start + segment.duration
        n_steps += 1
        observed = False
        if observer is not None and n_steps % sample_every == 0:
          observer(state)
          observed = True
    if observer is not None and not observed:
      observer(state)
    return state


def step(state, hamiltonian, noise, cfg):
  """One corner-space step: coherent substep, jump expansion, truncation."""
  return CornerPropagator(noise, cfg).step(state, hamiltonian)


def evolve_schedule(state, schedule, noise, cfg, observer=None,
                    sample_every=1, on_segment=None):
  """Evolves 'state' through every segment of a GateSchedule."""
  return CornerPropagator(noise, cfg).evolve(
      state, schedule, observer, sample_every, on_segment)

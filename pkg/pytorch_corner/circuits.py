"""Continuous-time gate schedules and reference states for qubit circuits.

Gates are realized by switching suddenly between constant Hamiltonians. With
the default (canonical) pulses a Hadamard pair composes to H and a
controlled-phase segment of duration theta / delta imprints the phase
exp(i theta) on |down down> = |11>. The `literal` switch uses the printed
pulse Hamiltonians instead, (delta / 2) sigma_y for the first Hadamard pulse
and a delta / 2 prefactor for the controlled phase, which compose to Z H Z and
to a phase of 2 theta respectively.
"""

import dataclasses
import json
import math

import torch

from pytorch_corner import integrators
from pytorch_corner import ops


@dataclasses.dataclass
class Segment:
  """A constant Hamiltonian applied for 'duration'.

  Attributes:
    label: Human readable name, e.g. 'H0/y' or 'CP2,0'.
    hamiltonian: The OperatorSpec generating the segment.
    duration: Nonnegative duration.
    gate: Index of the gate the segment belongs to.
  """

  label: str
  hamiltonian: ops.OperatorSpec
  duration: float
  gate: int = 0

  def __post_init__(self):
    if self.duration < 0:
      raise ValueError(
          f"Segment '{self.label}' has negative duration {self.duration}.")

  def to_dict(self):
    return {'label': self.label,
            'gate': self.gate,
            'duration': self.duration,
            'hamiltonian': self.hamiltonian.to_dict()}

  @classmethod
  def from_dict(cls, d):
    return cls(d['label'], ops.OperatorSpec.from_dict(d['hamiltonian']),
               float(d['duration']), int(d.get('gate', 0)))


@dataclasses.dataclass
class GateSchedule:
  """An ordered list of Segments on a common HilbertSpec."""

  hilbert: ops.HilbertSpec
  segments: list = dataclasses.field(default_factory=list)

  def __post_init__(self):
    for segment in self.segments:
      if segment.hamiltonian.hilbert != self.hilbert:
        raise ValueError(
            f"Segment '{segment.label}' acts on {segment.hamiltonian.hilbert}, "
            f'expected {self.hilbert}.')

  @property
  def total_duration(self):
    return sum(s.duration for s in self.segments)

  @property
  def n_gates(self):
    return len({s.gate for s in self.segments})

  def __add__(self, other):
    if other.hilbert != self.hilbert:
      raise ValueError('Cannot concatenate schedules on different spaces.')
    offset = max((s.gate for s in self.segments), default=-1) + 1
    shifted = [dataclasses.replace(s, gate=s.gate + offset)
               for s in other.segments]
    return GateSchedule(self.hilbert, self.segments + shifted)

  def to_text(self):
    """Serializes the schedule to JSON for inspection and replay."""
    return json.dumps({'hilbert': self.hilbert.to_dict(),
                       'segments': [s.to_dict() for s in self.segments]},
                      indent=1)

  @classmethod
  def from_text(cls, text):
    d = json.loads(text)
    return cls(ops.HilbertSpec.from_dict(d['hilbert']),
               [Segment.from_dict(s) for s in d['segments']])


def _check_site(n_qubits, site):
  if not 0 <= site < n_qubits:
    raise ValueError(f'Qubit {site} out of range for {n_qubits} qubit(s).')


def hadamard_segments(n_qubits, site, delta=1., literal=False, gate=0):
  """Returns the two pulses realizing a Hadamard gate on 'site'.

  A pi/2 rotation about y for a time pi / (2 delta) followed by a pi rotation
  about z for a time pi / delta.
  """
  _check_site(n_qubits, site)
  hilbert = ops.HilbertSpec.qubits(n_qubits)
  y_sign = 1. if literal else -1.
  return [
      Segment(f'H{site}/y', ops.sigma_y(hilbert, site, y_sign * delta / 2),
              math.pi / (2 * delta), gate),
      Segment(f'H{site}/z', ops.sigma_z(hilbert, site, delta / 2),
              math.pi / delta, gate),
  ]


def controlled_phase_hamiltonian(n_qubits, j, k, delta=1., literal=False):
  """(c delta)(sz_j + sz_k - sz_j sz_k - 1), with c = 1/4 (or 1/2 if literal)."""
  _check_site(n_qubits, j)
  _check_site(n_qubits, k)
  if j == k:
    raise ValueError(f'Control and target must differ, got j = k = {j}.')
  hilbert = ops.HilbertSpec.qubits(n_qubits)
  scale = delta / 2 if literal else delta / 4
  return ops.OperatorSpec(
      hilbert,
      [(scale, [(j, ops.PAULI_Z)]),
       (scale, [(k, ops.PAULI_Z)]),
       (-scale, [(j, ops.PAULI_Z), (k, ops.PAULI_Z)]),
       (-scale, [])],
      hermitian_hint=True)


def controlled_phase_segment(n_qubits, j, k, theta, delta=1., literal=False,
                             gate=0):
  """Returns the segment of duration theta / delta for a CP(theta) gate."""
  if theta < 0:
    raise ValueError(f'theta must be nonnegative, got {theta}.')
  return Segment(f'CP{j},{k}',
                 controlled_phase_hamiltonian(n_qubits, j, k, delta, literal),
                 theta / delta, gate)


def qft_schedule(n_qubits, delta=1., literal=False):
  """The gate-ladder QFT without terminal swaps.

  For each qubit i: a Hadamard pair on i, then CP(pi / 2^m) controlled by
  qubit i + m for m = 1 .. L - 1 - i.
  """
  if n_qubits < 1:
    raise ValueError(f'Need at least one qubit, got {n_qubits}.')
  segments = []
  gate = 0
  for i in range(n_qubits):
    segments.extend(hadamard_segments(n_qubits, i, delta, literal, gate))
    gate += 1
    for m in range(1, n_qubits - i):
      segments.append(controlled_phase_segment(
          n_qubits, i + m, i, math.pi / 2 ** m, delta, literal, gate))
      gate += 1
  return GateSchedule(ops.HilbertSpec.qubits(n_qubits), segments)


def qft_duration(n_qubits, delta=1.):
  """Closed form of qft_schedule(n_qubits, delta).total_duration."""
  total = n_qubits * 3 * math.pi / 2
  for i in range(n_qubits):
    total += sum(math.pi / 2 ** m for m in range(1, n_qubits - i))
  return total / delta


def inverse_qft_ghz_state(n_qubits):
  """psi_0 = (2N)^(-1/2) sum_n (1 + exp(2 pi i n / N)) |n>, mapped to GHZ by F."""
  if n_qubits < 1:
    raise ValueError(f'Need at least one qubit, got {n_qubits}.')
  n = 2 ** n_qubits
  phases = torch.exp(
      2j * math.pi * torch.arange(n, dtype=torch.float64) / n)
  return ((1 + phases) / math.sqrt(2 * n)).to(ops.DTYPE)


def ghz_state(n_qubits):
  psi = torch.zeros(2 ** n_qubits, dtype=ops.DTYPE)
  psi[0] = psi[-1] = 1 / math.sqrt(2)
  return psi


def basis_state(bits):
  """|b_0 b_1 ...> for a string like '0110' (site 0 first)."""
  if not bits or any(b not in '01' for b in bits):
    raise ValueError(f"Expected a nonempty bit string, got '{bits}'.")
  psi = torch.zeros(2 ** len(bits), dtype=ops.DTYPE)
  psi[int(bits, 2)] = 1.
  return psi


def ideal_output(schedule, psi_in, tol=1e-12):
  """Applies every segment's exact unitary to psi_in (the noiseless output)."""
  integrator = integrators.KrylovExponential(tol=tol)
  column = torch.as_tensor(psi_in).to(ops.DTYPE)[:, None]
  for segment in schedule.segments:
    column = integrator.propagate(segment.hamiltonian, column,
                                  segment.duration)
  return column[:, 0]


def ideal_unitary(schedule):
  """The dense N x N unitary of the whole schedule (small N only)."""
  n = schedule.hilbert.dim
  unitary = torch.eye(n, dtype=ops.DTYPE)
  for segment in schedule.segments:
    unitary = torch.linalg.matrix_exp(
        -1j * segment.duration * segment.hamiltonian.to_dense()) @ unitary
  return unitary

"""Dissipation channels expressed as sets of jump operators."""

import math

from pytorch_corner import ops


class NoiseModel:
  """A set of jump operators J_i, each already scaled by sqrt(rate)."""

  def __init__(self, hilbert, jumps=()):
    """Initializes a new NoiseModel instance.

    Args:
      hilbert: The HilbertSpec shared by every jump operator.
      jumps: An iterable of OperatorSpecs.
    """
    self.hilbert = hilbert
    self.jumps = tuple(jumps)
    for jump in self.jumps:
      if jump.hilbert != hilbert:
        raise ValueError(
            f'Jump operator acts on {jump.hilbert}, expected {hilbert}.')

  @property
  def D(self):
    return len(self.jumps)

  def __repr__(self):
    return f'NoiseModel({self.hilbert}, D={self.D})'


def _site_rates(n_qubits, gamma):
  """Expands a uniform rate or a per-site sequence into per-site rates."""
  if isinstance(gamma, (int, float)):
    rates = [float(gamma)] * n_qubits
  else:
    rates = [float(g) for g in gamma]
    if len(rates) != n_qubits:
      raise ValueError(
          f'Got {len(rates)} per-site rates for {n_qubits} qubits.')
  for rate in rates:
    if rate < 0:
      raise ValueError(f'Rates must be nonnegative, got {rate}.')
  return rates


def empty(hilbert):
  return NoiseModel(hilbert, ())


def local_decay(n_qubits, gamma):
  """Relaxation |up> -> |down> on every qubit, J_i = sqrt(gamma) sigma_i^-.

  Args:
    n_qubits: Number of qubits L.
    gamma: Either one rate for all qubits or a sequence of per-site rates.
  """
  hilbert = ops.HilbertSpec.qubits(n_qubits)
  rates = _site_rates(n_qubits, gamma)
  return NoiseModel(hilbert, [ops.sigma_minus(hilbert, i, math.sqrt(r))
                              for i, r in enumerate(rates)])


def local_dephasing(n_qubits, gamma):
  """Pure dephasing on every qubit, J_i = sqrt(gamma) sigma_i^z."""
  hilbert = ops.HilbertSpec.qubits(n_qubits)
  rates = _site_rates(n_qubits, gamma)
  return NoiseModel(hilbert, [ops.sigma_z(hilbert, i, math.sqrt(r))
                              for i, r in enumerate(rates)])


def collective_dephasing(n_qubits, gamma):
  """One collective channel J_z = sqrt(gamma / L) sum_i sigma_i^z."""
  if gamma < 0:
    raise ValueError(f'Rates must be nonnegative, got {gamma}.')
  hilbert = ops.HilbertSpec.qubits(n_qubits)
  scale = math.sqrt(gamma / n_qubits)
  jump = ops.zero(hilbert)
  for i in range(n_qubits):
    jump = jump + ops.sigma_z(hilbert, i, scale)
  return NoiseModel(hilbert, [jump])


NOISE_MAP = {
    'decay': local_decay,
    'dephasing': local_dephasing,
    'collective': collective_dephasing,
}


def make_noise(kind, n_qubits, gamma):
  """Builds one of the NOISE_MAP channels by name."""
  if kind not in NOISE_MAP:
    raise ValueError(
        f"Unknown noise type '{kind}', expected one of {sorted(NOISE_MAP)}.")
  return NOISE_MAP[kind](n_qubits, gamma)

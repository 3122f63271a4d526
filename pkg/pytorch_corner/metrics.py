"""Fidelities, entropies and spin statistics evaluated on corner bases.

Everything here works from the columns of C = [sqrt(p_k) phi_k] directly and
never forms an N x N density matrix.
"""

import collections
import dataclasses
import math

import numpy as np
import torch

from pytorch_corner import ops

# Largest reduced density matrix entanglement_entropy will diagonalize.
MAX_REDUCED_DIM = 2 ** 12

FitResult = collections.namedtuple(
    'FitResult', ['a', 'n_S0', 'B0', 'I0', 'residual'])
SpinStatistics = collections.namedtuple('SpinStatistics', ['n_S', 'B'])


def _n_qubits(n):
  n_qubits = int(round(math.log2(n)))
  if 2 ** n_qubits != n:
    raise ValueError(f'Dimension {n} is not a power of two.')
  return n_qubits


def _check_same_dim(a, b):
  if a.shape[0] != b.shape[0]:
    raise ValueError(
        f'Dimension mismatch: N={a.shape[0]} vs N={b.shape[0]}.')


def fidelity_mixed(a, b):
  """Uhlmann fidelity Tr sqrt(sqrt(rho_a) rho_b sqrt(rho_a)) of two corners.

  With O = C_a^dagger C_b, the matrix O O^dagger is sqrt(rho_a) rho_b
  sqrt(rho_a) written in the eigenbasis of rho_a, so F is the sum of the
  singular values of O.
  """
  _check_same_dim(a.C, b.C)
  overlap = a.C.conj().T @ b.C
  return float(torch.linalg.svdvals(overlap).sum())


def fidelity_to_pure(a, phi):
  """F(rho, |phi>) = sqrt(sum_k p_k |<phi|phi_k>|^2)."""
  phi = torch.as_tensor(phi).to(ops.DTYPE)
  _check_same_dim(a.C, phi)
  phi = phi / torch.linalg.vector_norm(phi)
  return float(torch.linalg.vector_norm(a.C.conj().T @ phi))


def von_neumann_entropy(a):
  """-sum_k p_k ln p_k over the retained weights, in nats."""
  p = a.p[a.p > 0]
  return float(-(p * torch.log(p)).sum())


def _stacked_blocks(C, cut, side):
  n_qubits = _n_qubits(C.shape[0])
  if not 1 <= cut < n_qubits:
    raise ValueError(f'Cut {cut} out of range for {n_qubits} qubits.')
  left, right = 2 ** cut, 2 ** (n_qubits - cut)
  # blocks[k] is column k reshaped to left x right.
  blocks = C.T.reshape(C.shape[1], left, right)
  if side == 'A':
    blocks = blocks.transpose(1, 2)
  elif side != 'B':
    raise ValueError(f"side must be 'A' or 'B', got '{side}'.")
  return blocks.reshape(-1, blocks.shape[-1])


def reduced_spectrum(a, cut, side='B', max_dim=MAX_REDUCED_DIM):
  """Eigenvalues of the reduced state of one side of the cut.

  Side 'B' keeps sites cut .. L-1 (tracing out the first 'cut' sites), side
  'A' keeps sites 0 .. cut-1. The spectrum is computed from whichever of the
  two Gram matrices of the stacked blocks is smaller.
  """
  x = _stacked_blocks(a.C, cut, side)
  rows, cols = x.shape
  if min(rows, cols) > max_dim:
    raise ValueError(
        f'Reduced state needs a {min(rows, cols)}-dimensional '
        f'eigenproblem, above the cap {max_dim}.')
  if rows <= cols:
    gram = x @ x.conj().T
  else:
    gram = x.T @ x.conj()
  gram = 0.5 * (gram + gram.conj().T)
  return torch.linalg.eigvalsh(gram).clamp(min=0.)


def entanglement_entropy(a, cut, side='B', max_dim=MAX_REDUCED_DIM):
  """S(tr_{0..cut-1} rho) in nats; side='A' traces out the other half."""
  p = reduced_spectrum(a, cut, side, max_dim)
  p = p[p > 1e-15]
  return float(-(p * torch.log(p)).sum())


def entanglement_profile(a, max_dim=MAX_REDUCED_DIM):
  """S_ent for every cut 1 .. L-1; cuts above the cap are reported as nan."""
  n_qubits = _n_qubits(a.N)
  profile = []
  for cut in range(1, n_qubits):
    try:
      profile.append(entanglement_entropy(a, cut, max_dim=max_dim))
    except ValueError:
      profile.append(float('nan'))
  return profile


def up_populations(a):
  """Tr[|up><up|_l rho] for every site l."""
  n_qubits = _n_qubits(a.N)
  probs = (a.C.abs() ** 2).sum(dim=1).reshape((2,) * n_qubits)
  populations = []
  for site in range(n_qubits):
    other = tuple(d for d in range(n_qubits) if d != site)
    marginal = probs.sum(dim=other) if other else probs
    populations.append(float(marginal[0]))
  return populations


def spin_statistics(a):
  """Returns the spin-up count n_S and the 1-based spin-up barycenter B.

  B is nan for the all-down state.
  """
  populations = up_populations(a)
  n_s = sum(populations)
  if n_s <= 1e-12:
    return SpinStatistics(n_s, float('nan'))
  barycenter = sum((l + 1) * p for l, p in enumerate(populations)) / n_s
  return SpinStatistics(n_s, barycenter)


@dataclasses.dataclass
class SweepRecord:
  """The outcome of one noisy QFT run from a computational basis state."""

  index: int
  bits: str
  n_S: float
  B: float
  infidelity: float


@dataclasses.dataclass
class BipartitionEntropySeries:
  """S_ent at one cut over time."""

  cut: int
  samples: list = dataclasses.field(default_factory=list)

  def append(self, t, value):
    assert value >= -1e-12, 'Entropies are nonnegative.'
    self.samples.append((t, value))


def bilinear_fit(records):
  """Fits 1 - F = a (n_S - n_S0)(B - B0) + I0 by linear least squares.

  The surface is expanded to a n_S B + b n_S + c B + d, which is linear in
  (a, b, c, d), and the parameters are recovered as n_S0 = -c / a,
  B0 = -b / a and I0 = d - b c / a. When a vanishes the surface is flat and
  only I0 = d is defined.

  Returns:
    A FitResult with the RMS residual of the fit.
  """
  if len(records) < 8:
    raise ValueError(f'Need at least 8 records, got {len(records)}.')
  n_s = np.array([r.n_S for r in records], dtype=np.float64)
  b = np.array([r.B for r in records], dtype=np.float64)
  y = np.array([r.infidelity for r in records], dtype=np.float64)
  if not (np.isfinite(n_s).all() and np.isfinite(b).all()):
    raise ValueError('Records must have finite n_S and B.')
  if len(np.unique(np.round(n_s, 9))) < 3 or len(np.unique(np.round(b, 9))) < 3:
    raise ValueError('Records must span at least 3 distinct n_S and B values.')
  design = np.stack([n_s * b, n_s, b, np.ones_like(n_s)], axis=1)
  coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
  if rank < 4:
    raise ValueError('Degenerate design matrix: records are collinear.')
  residual = float(np.sqrt(np.mean((design @ coef - y) ** 2)))
  a, b_coef, c, d = (float(v) for v in coef)
  if abs(a) <= 1e-12 * max(1., abs(b_coef), abs(c), abs(d)):
    return FitResult(a, float('nan'), float('nan'), d, residual)
  return FitResult(a, -c / a, -b_coef / a, d - b_coef * c / a, residual)


def n_s_sensitivity(fit, b_values):
  """Range of dI / dn_S = a (B - B0) over the sampled B values.

  Args:
    fit: A FitResult from bilinear_fit.
    b_values: The B values the fit was made on.
  Returns:
    (low, high); both are nan for a flat fit.
  """
  if not math.isfinite(fit.B0):
    return float('nan'), float('nan')
  b_values = np.asarray(b_values, dtype=np.float64)
  ends = fit.a * (np.array([b_values.min(), b_values.max()]) - fit.B0)
  return float(ends.min()), float(ends.max())

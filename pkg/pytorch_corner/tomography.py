"""Numerical process tomography of noisy two-qubit gates.

Channels are represented by their Choi matrix J = sum_ab |a><b| (x) E(|a><b|)
(input factor first). For a Kraus operator K this is vec(K) vec(K)^dagger with
column stacking, i.e. J[a d + i, b d + j] = <i|E(|a><b|)|j>. The process
matrix is chi_mn with E(rho) = sum_mn chi_mn P_m rho P_n^dagger over the 16
two-qubit Pauli strings in lexicographic order II, IX, IY, IZ, XI, ...; the
first letter acts on site 0.
"""

import csv
import dataclasses
import itertools
import math

import torch

from pytorch_corner import circuits
from pytorch_corner import dense
from pytorch_corner import errors
from pytorch_corner import ops

_PAULIS = {'I': ops.PAULI_I, 'X': ops.PAULI_X, 'Y': ops.PAULI_Y,
           'Z': ops.PAULI_Z}
_N_QUBITS = 2
_DIM = 2 ** _N_QUBITS


def _single_qubit_inputs():
  """Density matrices of |0>, |1>, |+> and |+i>."""
  s = 1 / math.sqrt(2)
  kets = torch.tensor([[1, 0], [0, 1], [s, s], [s, 1j * s]], dtype=ops.DTYPE)
  return [torch.outer(k, k.conj()) for k in kets]


def _unit_coefficients():
  """c[u, s] such that matrix unit u = sum_s c[u, s] input_s (u = 2 a + b)."""
  states = torch.stack([p.reshape(-1) for p in _single_qubit_inputs()], dim=1)
  return torch.linalg.inv(states).T


def pauli_labels(n_qubits=_N_QUBITS):
  return [''.join(p) for p in itertools.product('IXYZ', repeat=n_qubits)]


def pauli_basis(n_qubits=_N_QUBITS):
  """The Pauli strings as dense matrices, in pauli_labels order."""
  out = []
  for label in pauli_labels(n_qubits):
    matrix = torch.ones((1, 1), dtype=ops.DTYPE)
    for letter in label:
      matrix = torch.kron(matrix, _PAULIS[letter])
    out.append(matrix)
  return out


def _vec(matrix):
  """Column-stacking vectorization."""
  return matrix.T.reshape(-1)


def kraus_to_choi(kraus):
  """J = sum_K vec(K) vec(K)^dagger."""
  vecs = torch.stack([_vec(torch.as_tensor(k).to(ops.DTYPE)) for k in kraus])
  return vecs.T @ vecs.conj()


def choi_to_chi(choi):
  """chi = B^dagger J B / d^2 where column m of B is vec(P_m)."""
  d = int(round(math.sqrt(choi.shape[0])))
  n_qubits = int(round(math.log2(d)))
  basis = torch.stack([_vec(p) for p in pauli_basis(n_qubits)], dim=1)
  return basis.conj().T @ choi @ basis / d ** 2


def apply_choi(choi, rho):
  """E(rho) = sum_ab rho_ab E(|a><b|) read off the Choi matrix."""
  d = rho.shape[0]
  blocks = choi.reshape(d, d, d, d)
  return torch.einsum('ab,aibj->ij', rho, blocks)


def check_physical(choi, cp_tol=1e-8, tp_tol=1e-7):
  """Raises PhysicalityError unless the Choi matrix is CP and TP."""
  d = int(round(math.sqrt(choi.shape[0])))
  hermitian = 0.5 * (choi + choi.conj().T)
  min_eig = float(torch.linalg.eigvalsh(hermitian).min())
  if min_eig < -cp_tol:
    raise errors.PhysicalityError(
        f'Choi matrix has eigenvalue {min_eig:.3g} < -{cp_tol}; the '
        f'integration is not accurate enough.')
  partial = torch.einsum('aibi->ab', choi.reshape(d, d, d, d))
  deviation = float((partial - torch.eye(d, dtype=ops.DTYPE)).abs().max())
  if deviation > tp_tol:
    raise errors.PhysicalityError(
        f'Channel is not trace preserving (deviation {deviation:.3g}).')


def channel_from_evolution(schedule, noise, tol=1e-10, check=True):
  """The Choi matrix of the noisy two-qubit gate 'schedule'.

  The 16 product states of {|0>, |1>, |+>, |+i>} are integrated through the
  master equation and their outputs recombined into the responses to the
  matrix units.
  """
  if schedule.hilbert != ops.HilbertSpec.qubits(_N_QUBITS):
    raise ValueError(f'Tomography requires two qubits, got {schedule.hilbert}.')
  inputs = _single_qubit_inputs()
  outputs = {}
  for s0, s1 in itertools.product(range(4), repeat=2):
    rho = torch.kron(inputs[s0], inputs[s1])
    outputs[s0, s1] = dense.integrate_exact(
        dense.DenseState(rho), schedule, noise, tol=tol).rho
  coeffs = _unit_coefficients()
  choi = torch.zeros((_DIM ** 2, _DIM ** 2), dtype=ops.DTYPE)
  for (a0, b0), (a1, b1) in itertools.product(
      itertools.product(range(2), repeat=2), repeat=2):
    response = torch.zeros((_DIM, _DIM), dtype=ops.DTYPE)
    for s0, s1 in itertools.product(range(4), repeat=2):
      c = coeffs[2 * a0 + b0, s0] * coeffs[2 * a1 + b1, s1]
      response = response + c * outputs[s0, s1]
    a, b = 2 * a0 + a1, 2 * b0 + b1
    unit = torch.zeros((_DIM, _DIM), dtype=ops.DTYPE)
    unit[a, b] = 1.
    choi = choi + torch.kron(unit, response)
  if check:
    check_physical(choi)
  return choi


def dissipator_choi(noise, tau):
  """Choi matrix of exp(tau D) for the dissipator D of 'noise' alone."""
  d = noise.hilbert.dim
  eye = torch.eye(d, dtype=ops.DTYPE)
  generator = torch.zeros((d * d, d * d), dtype=ops.DTYPE)
  for jump in noise.jumps:
    j = jump.to_dense()
    loss = j.conj().T @ j
    generator = (generator + torch.kron(j.conj(), j)
                 - 0.5 * torch.kron(eye, loss) - 0.5 * torch.kron(loss.T.contiguous(), eye))
  superop = torch.linalg.matrix_exp(tau * generator)
  # superop[j d + i, b d + a] = <i|E(|a><b|)|j>.
  return superop.reshape(d, d, d, d).permute(3, 1, 2, 0).reshape(d * d, d * d)


def remove_ideal_gate(choi, unitary):
  """Choi of E_G where the simulated channel is E_G(U rho U^dagger)."""
  w = torch.kron(unitary.conj(), torch.eye(unitary.shape[0], dtype=ops.DTYPE))
  return w @ choi @ w.conj().T


@dataclasses.dataclass
class ChiMatrix:
  """The Pauli process matrix of an error channel.

  Attributes:
    chi: 16 x 16 complex tensor.
    gamma_tau: The scale gamma * tau the report is normalized by.
  """

  chi: torch.Tensor
  gamma_tau: float = 1.

  @property
  def labels(self):
    return pauli_labels(_N_QUBITS)

  def report(self):
    """|chi| / (gamma tau) with the identity element set to zero."""
    scaled = self.chi.abs() / self.gamma_tau
    scaled[0, 0] = 0.
    return scaled

  def weight_profile(self):
    """Returns (max single-qubit, max two-qubit) reported magnitudes.

    An element (m, n) counts as two-qubit when either Pauli string acts
    nontrivially on both qubits.
    """
    report = self.report()
    weights = [sum(c != 'I' for c in label) for label in self.labels]
    single, double = 0., 0.
    for m, n in itertools.product(range(len(weights)), repeat=2):
      w = max(weights[m], weights[n])
      if w == 1:
        single = max(single, float(report[m, n]))
      elif w == 2:
        double = max(double, float(report[m, n]))
    return single, double

  def to_csv(self, path):
    report = self.report()
    with open(path, 'w', newline='') as f:
      writer = csv.writer(f)
      writer.writerow([''] + self.labels)
      for label, row in zip(self.labels, report.tolist()):
        writer.writerow([label] + [f'{v:.6e}' for v in row])


def error_chi(choi, ideal, gamma_tau=1.):
  """The chi matrix of the error channel E_G of a simulated gate.

  Args:
    choi: Choi matrix of the simulated noisy gate.
    ideal: The GateSchedule whose noiseless unitary is removed.
    gamma_tau: Report normalization.
  """
  unitary = circuits.ideal_unitary(ideal)
  return ChiMatrix(choi_to_chi(remove_ideal_gate(choi, unitary)), gamma_tau)


def controlled_phase_gate(theta=math.pi / 2, delta=1., literal=False):
  """The default gate under test, CP(pi / 2) lasting tau = pi / (2 delta)."""
  segment = circuits.controlled_phase_segment(
      _N_QUBITS, 0, 1, theta, delta, literal)
  return circuits.GateSchedule(ops.HilbertSpec.qubits(_N_QUBITS), [segment])

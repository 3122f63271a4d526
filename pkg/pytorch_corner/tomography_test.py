"""Tests for process tomography of noisy two-qubit gates."""

import math
import os
import tempfile
import unittest

import torch

from pytorch_corner import circuits
from pytorch_corner import errors
from pytorch_corner import noise
from pytorch_corner import ops
from pytorch_corner import tomography


def _amplitude_damping_chi(p):
  """Analytic single-qubit amplitude damping chi in the (I, X, Y, Z) basis."""
  s = math.sqrt(1 - p)
  c0 = torch.tensor([(1 + s) / 2, 0, 0, (s - 1) / 2], dtype=ops.DTYPE)
  c1 = math.sqrt(p) * torch.tensor([0, 0.5, -0.5j, 0], dtype=ops.DTYPE)
  return torch.outer(c0, c0.conj()) + torch.outer(c1, c1.conj())


class ChoiTest(unittest.TestCase):

  def test_kraus_round_trip(self):
    p = 0.3
    eye = torch.eye(2, dtype=ops.DTYPE)
    k0 = torch.kron(torch.diag(torch.tensor([math.sqrt(1 - p), 1],
                                            dtype=ops.DTYPE)), eye)
    k1 = torch.kron(math.sqrt(p) * ops.SIGMA_MINUS, eye)
    chi = tomography.choi_to_chi(tomography.kraus_to_choi([k0, k1]))
    expected = torch.zeros((16, 16), dtype=ops.DTYPE)
    expected[::4, ::4] = _amplitude_damping_chi(p)
    self.assertLess(float((chi - expected).abs().max()), 1e-12)

  def test_apply_choi_matches_kraus(self):
    generator = torch.Generator().manual_seed(0)
    k = torch.complex(
        torch.randn((4, 4), generator=generator, dtype=torch.float64),
        torch.randn((4, 4), generator=generator, dtype=torch.float64))
    rho = torch.eye(4, dtype=ops.DTYPE) / 4
    rho[0, 1], rho[1, 0] = 0.1j, -0.1j
    got = tomography.apply_choi(tomography.kraus_to_choi([k]), rho)
    self.assertLess(float((got - k @ rho @ k.conj().T).abs().max()), 1e-12)

  def test_check_physical(self):
    identity = tomography.kraus_to_choi([torch.eye(4, dtype=ops.DTYPE)])
    tomography.check_physical(identity)
    with self.assertRaises(errors.PhysicalityError):
      tomography.check_physical(-identity)
    with self.assertRaises(errors.PhysicalityError):
      tomography.check_physical(2 * identity)

  def test_pauli_labels(self):
    labels = tomography.pauli_labels()
    self.assertEqual(len(labels), 16)
    self.assertEqual(labels[:5], ['II', 'IX', 'IY', 'IZ', 'XI'])


class ChannelFromEvolutionTest(unittest.TestCase):

  def test_zero_duration_gate_is_identity(self):
    gate = tomography.controlled_phase_gate(theta=0.)
    choi = tomography.channel_from_evolution(
        gate, noise.empty(gate.hilbert))
    expected = tomography.kraus_to_choi([torch.eye(4, dtype=ops.DTYPE)])
    self.assertLess(float((choi - expected).abs().max()), 1e-10)

  def test_noiseless_controlled_phase(self):
    gate = tomography.controlled_phase_gate()
    choi = tomography.channel_from_evolution(gate, noise.empty(gate.hilbert))
    unitary = circuits.ideal_unitary(gate)
    expected = tomography.kraus_to_choi([unitary])
    self.assertLess(float((choi - expected).abs().max()), 1e-8)
    purity = float(torch.trace(choi @ choi).real) / 16
    self.assertAlmostEqual(purity, 1., places=7)
    chi = tomography.error_chi(choi, gate)
    self.assertAlmostEqual(float(chi.chi[0, 0].real), 1., places=8)
    off = chi.chi.clone()
    off[0, 0] = 0.
    self.assertLess(float(off.abs().max()), 1e-8)

  def test_decay_is_trace_preserving(self):
    gate = tomography.controlled_phase_gate()
    choi = tomography.channel_from_evolution(
        gate, noise.local_decay(2, 1e-3))
    partial = torch.einsum('aibi->ab', choi.reshape(4, 4, 4, 4))
    self.assertLess(
        float((partial - torch.eye(4, dtype=ops.DTYPE)).abs().max()), 1e-8)

  def test_requires_two_qubits(self):
    schedule = circuits.GateSchedule(ops.HilbertSpec.qubits(1),
                                     circuits.hadamard_segments(1, 0))
    with self.assertRaises(ValueError):
      tomography.channel_from_evolution(
          schedule, noise.empty(schedule.hilbert))


class ErrorChiTest(unittest.TestCase):

  def setUp(self):
    self.gate = tomography.controlled_phase_gate()
    self.tau = self.gate.total_duration
    self.gamma = 1e-2

  def test_dephasing_is_z_only(self):
    model = noise.local_dephasing(2, self.gamma)
    choi = tomography.channel_from_evolution(self.gate, model)
    chi = tomography.error_chi(choi, self.gate, self.gamma * self.tau)
    report = chi.report()
    for m, row in enumerate(chi.labels):
      for n, column in enumerate(chi.labels):
        if set(row + column) <= set('IZ'):
          continue
        self.assertLess(float(report[m, n]), 1e-3, (row, column))
    zz = chi.labels.index('ZZ')
    iz = chi.labels.index('IZ')
    self.assertGreater(float(report[iz, iz]), 1e-2)
    self.assertLess(float(report[zz, zz]), float(report[iz, iz]))

  def test_commuting_noise_matches_digital_model(self):
    model = noise.local_dephasing(2, self.gamma)
    choi = tomography.channel_from_evolution(self.gate, model)
    chi = tomography.error_chi(choi, self.gate)
    digital = tomography.choi_to_chi(
        tomography.dissipator_choi(model, self.tau))
    self.assertLess(float((chi.chi - digital).abs().max()), 1e-8)

  def test_decay_has_single_and_two_qubit_errors(self):
    model = noise.local_decay(2, self.gamma)
    choi = tomography.channel_from_evolution(self.gate, model)
    chi = tomography.error_chi(choi, self.gate, self.gamma * self.tau)
    single, double = chi.weight_profile()
    self.assertGreater(single, 1e-2)
    self.assertGreater(double, 1e-4)
    self.assertLess(double, single)

  def test_report_and_csv(self):
    chi = tomography.ChiMatrix(torch.eye(16, dtype=ops.DTYPE), gamma_tau=2.)
    report = chi.report()
    self.assertEqual(float(report[0, 0]), 0.)
    self.assertEqual(float(report[1, 1]), 0.5)
    with tempfile.TemporaryDirectory() as directory:
      path = os.path.join(directory, 'chi.csv')
      chi.to_csv(path)
      with open(path) as f:
        lines = f.read().splitlines()
    self.assertEqual(len(lines), 17)
    self.assertTrue(lines[0].startswith(',II,IX'))
    self.assertTrue(lines[2].startswith('IX,'))


if __name__ == '__main__':
  unittest.main()

"""Tests for gate schedules against dense unitary oracles."""

import math
import unittest

import torch

from pytorch_corner import circuits
from pytorch_corner import ops


def _dft(n_qubits):
  n = 2 ** n_qubits
  k = torch.arange(n, dtype=torch.float64)
  return (torch.exp(2j * math.pi * torch.outer(k, k) / n) /
          math.sqrt(n)).to(ops.DTYPE)


def _bit_reversal(n_qubits):
  n = 2 ** n_qubits
  perm = torch.zeros((n, n), dtype=ops.DTYPE)
  for i in range(n):
    j = int(format(i, f'0{n_qubits}b')[::-1], 2)
    perm[j, i] = 1.
  return perm


def _equal_up_to_phase(a, b, atol=1e-9):
  index = int(b.abs().reshape(-1).argmax())
  phase = a.reshape(-1)[index] / b.reshape(-1)[index]
  return (abs(abs(complex(phase)) - 1) < atol and
          float((a - phase * b).abs().max()) < atol)


class GateTest(unittest.TestCase):

  def test_hadamard(self):
    schedule = circuits.GateSchedule(ops.HilbertSpec.qubits(1),
                                     circuits.hadamard_segments(1, 0))
    hadamard = torch.tensor([[1, 1], [1, -1]], dtype=ops.DTYPE) / math.sqrt(2)
    unitary = circuits.ideal_unitary(schedule)
    self.assertTrue(_equal_up_to_phase(unitary, hadamard))
    self.assertTrue(_equal_up_to_phase(unitary @ unitary,
                                       torch.eye(2, dtype=ops.DTYPE)))

  def test_literal_hadamard_is_conjugated_by_z(self):
    schedule = circuits.GateSchedule(
        ops.HilbertSpec.qubits(1), circuits.hadamard_segments(1, 0,
                                                              literal=True))
    z = torch.diag(torch.tensor([1, -1], dtype=ops.DTYPE))
    hadamard = torch.tensor([[1, 1], [1, -1]], dtype=ops.DTYPE) / math.sqrt(2)
    self.assertTrue(_equal_up_to_phase(circuits.ideal_unitary(schedule),
                                       z @ hadamard @ z))

  def test_controlled_phase_marks_down_down(self):
    theta = math.pi / 3
    schedule = circuits.GateSchedule(
        ops.HilbertSpec.qubits(2),
        [circuits.controlled_phase_segment(2, 0, 1, theta)])
    expected = torch.diag(torch.tensor(
        [1, 1, 1, complex(math.cos(theta), math.sin(theta))],
        dtype=ops.DTYPE))
    self.assertTrue(_equal_up_to_phase(circuits.ideal_unitary(schedule),
                                       expected))

  def test_controlled_phase_composes(self):
    hilbert = ops.HilbertSpec.qubits(3)
    quarter = circuits.controlled_phase_segment(3, 2, 0, math.pi / 4)
    half = circuits.controlled_phase_segment(3, 2, 0, math.pi / 2)
    twice = circuits.ideal_unitary(
        circuits.GateSchedule(hilbert, [quarter, quarter]))
    once = circuits.ideal_unitary(circuits.GateSchedule(hilbert, [half]))
    self.assertLess(float((twice - once).abs().max()), 1e-12)

  def test_invalid_gates(self):
    with self.assertRaises(ValueError):
      circuits.hadamard_segments(2, 2)
    with self.assertRaises(ValueError):
      circuits.controlled_phase_segment(2, 1, 1, 1.)
    with self.assertRaises(ValueError):
      circuits.controlled_phase_segment(2, 0, 1, -1.)
    with self.assertRaises(ValueError):
      circuits.Segment('bad', ops.zero(ops.HilbertSpec.qubits(1)), -0.1)


class QFTTest(unittest.TestCase):

  def test_gate_count(self):
    for n_qubits in range(1, 6):
      schedule = circuits.qft_schedule(n_qubits)
      self.assertEqual(schedule.n_gates, n_qubits * (n_qubits + 1) // 2)
      self.assertEqual(len(schedule.segments),
                       2 * n_qubits + n_qubits * (n_qubits - 1) // 2)

  def test_three_qubit_angles(self):
    schedule = circuits.qft_schedule(3)
    durations = [s.duration for s in schedule.segments
                 if s.label.startswith('CP')]
    for got, expected in zip(durations, [math.pi / 2, math.pi / 4,
                                         math.pi / 2]):
      self.assertAlmostEqual(got, expected)

  def test_duration(self):
    self.assertAlmostEqual(circuits.qft_schedule(1).total_duration,
                           3 * math.pi / 2)
    previous = 0.
    for n_qubits in range(1, 9):
      duration = circuits.qft_duration(n_qubits, delta=2.)
      self.assertAlmostEqual(
          duration, circuits.qft_schedule(n_qubits, delta=2.).total_duration)
      self.assertGreater(duration, previous)
      previous = duration

  def test_unitary_is_bit_reversed_dft(self):
    for n_qubits in range(1, 5):
      unitary = circuits.ideal_unitary(circuits.qft_schedule(n_qubits))
      expected = _bit_reversal(n_qubits) @ _dft(n_qubits)
      self.assertTrue(_equal_up_to_phase(unitary, expected), n_qubits)

  def test_inverse_qft_ghz_state(self):
    self.assertTrue(torch.allclose(circuits.inverse_qft_ghz_state(1),
                                   circuits.basis_state('0')))
    for n_qubits in range(1, 11):
      psi = circuits.inverse_qft_ghz_state(n_qubits)
      self.assertAlmostEqual(float(torch.linalg.norm(psi)), 1., places=12)
    psi = circuits.inverse_qft_ghz_state(4)
    ghz = _dft(4) @ psi
    self.assertLess(float((ghz - circuits.ghz_state(4)).abs().max()), 1e-12)

  def test_ideal_output_of_qft_is_ghz(self):
    psi = circuits.ideal_output(circuits.qft_schedule(4),
                                circuits.inverse_qft_ghz_state(4))
    overlap = abs(complex(circuits.ghz_state(4).conj() @ psi))
    self.assertGreaterEqual(overlap, 1 - 1e-6)
    self.assertAlmostEqual(float(torch.linalg.norm(psi)), 1., places=12)

  def test_ideal_output_of_empty_schedule(self):
    psi = circuits.basis_state('101')
    out = circuits.ideal_output(
        circuits.GateSchedule(ops.HilbertSpec.qubits(3)), psi)
    self.assertTrue(torch.equal(out, psi))

  def test_basis_state_site_zero_first(self):
    psi = circuits.basis_state('100')
    self.assertEqual(int(psi.abs().argmax()), 4)
    with self.assertRaises(ValueError):
      circuits.basis_state('102')


class ScheduleTest(unittest.TestCase):

  def test_text_round_trip(self):
    schedule = circuits.qft_schedule(3)
    restored = circuits.GateSchedule.from_text(schedule.to_text())
    self.assertEqual([s.label for s in restored.segments],
                     [s.label for s in schedule.segments])
    self.assertAlmostEqual(restored.total_duration, schedule.total_duration)
    self.assertLess(
        float((circuits.ideal_unitary(restored) -
               circuits.ideal_unitary(schedule)).abs().max()), 1e-12)

  def test_concatenation_renumbers_gates(self):
    hilbert = ops.HilbertSpec.qubits(2)
    a = circuits.GateSchedule(hilbert, circuits.hadamard_segments(2, 0))
    b = circuits.GateSchedule(hilbert, circuits.hadamard_segments(2, 1))
    self.assertEqual((a + b).n_gates, 2)

  def test_rejects_mixed_spaces(self):
    with self.assertRaises(ValueError):
      circuits.GateSchedule(ops.HilbertSpec.qubits(2),
                            circuits.hadamard_segments(1, 0))


if __name__ == '__main__':
  unittest.main()

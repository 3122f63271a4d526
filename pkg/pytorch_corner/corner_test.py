"""Tests for the corner-space step and its dense oracles."""

import math
import types
import unittest

import torch

from pytorch_corner import circuits
from pytorch_corner import corner
from pytorch_corner import errors
from pytorch_corner import metrics
from pytorch_corner import noise
from pytorch_corner import ops


def _random_matrix(n, m, seed=0):
  generator = torch.Generator().manual_seed(seed)
  return torch.complex(
      torch.randn((n, m), generator=generator, dtype=torch.float64),
      torch.randn((n, m), generator=generator, dtype=torch.float64))


def _idle(hilbert, duration):
  return circuits.GateSchedule(
      hilbert, [circuits.Segment('idle', ops.zero(hilbert), duration)])


class GramTruncateTest(unittest.TestCase):

  def test_single_column(self):
    u = _random_matrix(8, 1)
    state = corner.gram_truncate(u, corner.StepConfig())
    self.assertEqual(state.M, 1)
    self.assertAlmostEqual(float(state.p[0]), 1., places=12)
    overlap = (state.C[:, 0].conj() @ u[:, 0]).abs()
    self.assertAlmostEqual(float(overlap), float(torch.linalg.norm(u)),
                           places=10)

  def test_duplicate_columns_are_rank_one(self):
    u = _random_matrix(8, 1)
    u = u / torch.linalg.norm(u) / math.sqrt(2)
    state = corner.gram_truncate(torch.cat([u, u], dim=1), corner.StepConfig())
    self.assertEqual(state.M, 1)
    self.assertAlmostEqual(float(state.p[0]), 1., places=12)

  def test_matches_dense_eigendecomposition(self):
    T = _random_matrix(16, 6, seed=3)
    cfg = corner.StepConfig(eps=1e-10)
    state = corner.gram_truncate(T, cfg)
    dense = T @ T.conj().T
    total = float(torch.trace(dense).real)
    self.assertEqual(state.M, 6)
    self.assertLess(
        float(torch.linalg.norm(state.density() * total - dense)), 1e-9)
    expected = torch.linalg.eigvalsh(dense).flip(0)[:6] / total
    self.assertLess(float((state.p - expected).abs().max()), 1e-9)
    self.assertAlmostEqual(state.trace_drift, abs(total - 1.), places=9)

  def test_columns_are_orthogonal_with_weights_p(self):
    state = corner.gram_truncate(_random_matrix(32, 9, seed=1),
                                 corner.StepConfig(eps=1e-3))
    gram = state.C.conj().T @ state.C
    weights = torch.diag(state.p).to(ops.DTYPE)
    self.assertLess(float((gram - weights).abs().max()), 1e-10)
    self.assertAlmostEqual(float(state.p.sum()), 1., places=12)
    self.assertTrue(bool((state.p[:-1] >= state.p[1:]).all()))
    self.assertLessEqual(state.eps_step, 1e-3)

  def test_phase_fixing(self):
    state = corner.gram_truncate(_random_matrix(16, 4, seed=2),
                                 corner.StepConfig(eps=1e-12))
    index = state.C.abs().argmax(dim=0)
    pivots = state.C.gather(0, index[None, :])[0]
    self.assertLess(float(pivots.imag.abs().max()), 1e-12)
    self.assertTrue(bool((pivots.real > 0).all()))

  def test_M_max_caps_and_flags(self):
    T = _random_matrix(16, 6, seed=4)
    state = corner.gram_truncate(T, corner.StepConfig(eps=1e-10, M_max=2))
    self.assertEqual(state.M, 2)
    self.assertTrue(state.eps_unreachable)
    self.assertGreater(state.eps_step, 1e-10)
    with self.assertRaises(errors.TruncationError):
      corner.gram_truncate(
          T, corner.StepConfig(eps=1e-10, M_max=2, strict=True))

  def test_non_finite_raises(self):
    T = _random_matrix(4, 2)
    T[0, 0] = float('nan')
    with self.assertRaises(errors.TruncationError):
      corner.gram_truncate(T, corner.StepConfig())

  def test_invalid_config(self):
    with self.assertRaises(ValueError):
      corner.StepConfig(dt=0.)
    with self.assertRaises(ValueError):
      corner.StepConfig(eps=1.)
    with self.assertRaises(ValueError):
      corner.StepConfig(integrator='leapfrog')


class TransitionBasisTest(unittest.TestCase):

  def test_no_jumps(self):
    C = _random_matrix(4, 2)
    T = corner.expand_transition_basis(
        C, noise.empty(ops.HilbertSpec.qubits(2)), 0.1)
    self.assertTrue(torch.equal(T, C))

  def test_single_qubit_decay(self):
    gamma, dt = 0.5, 0.1
    up = torch.tensor([[1.], [0.]], dtype=ops.DTYPE)
    T = corner.expand_transition_basis(up, noise.local_decay(1, gamma), dt)
    self.assertEqual(tuple(T.shape), (2, 2))
    self.assertTrue(torch.equal(T[:, 0], up[:, 0]))
    self.assertAlmostEqual(float(T[1, 1].real), math.sqrt(gamma * dt))
    self.assertEqual(float(T[0, 1].abs()), 0.)

  def test_column_layout_matches_kraus_oracle(self):
    model = noise.local_decay(2, 0.3)
    dt = 0.05
    C = _random_matrix(4, 2, seed=5)
    C_pre = _random_matrix(4, 2, seed=6)
    T = corner.expand_transition_basis(C, model, dt, C_pre=C_pre)
    self.assertEqual(tuple(T.shape), (4, 6))
    for nu, jump in enumerate(model.jumps, start=1):
      for mu in range(2):
        expected = math.sqrt(dt) * jump.to_dense() @ C_pre[:, mu]
        self.assertLess(float((T[:, nu * 2 + mu] - expected).abs().max()),
                        1e-14)

  def test_shape_mismatch(self):
    with self.assertRaises(ValueError):
      corner.expand_transition_basis(_random_matrix(8, 1),
                                     noise.local_decay(2, 1.), 0.1)

  def test_buffer_grows_geometrically(self):
    buffer = corner.TransitionBuffer(4, capacity=2)
    self.assertEqual(tuple(buffer.view(2).shape), (4, 2))
    self.assertEqual(buffer.n_resizes, 0)
    buffer.view(3)
    self.assertEqual(buffer.capacity, 4)
    buffer.view(4)
    self.assertEqual(buffer.n_resizes, 1)
    buffer.view(20)
    self.assertEqual(buffer.capacity, 20)
    self.assertEqual(buffer.n_resizes, 2)


class CornerStepTest(unittest.TestCase):

  def test_coherent_substep_scalar_decay(self):
    gamma, tau = 0.4, 0.5
    hilbert = ops.HilbertSpec.qubits(1)
    h_eff = ops.build_effective_hamiltonian(ops.zero(hilbert),
                                            noise.local_decay(1, gamma))
    up = torch.tensor([[1.], [0.]], dtype=ops.DTYPE)
    out = corner.coherent_substep(up, h_eff, tau)
    self.assertAlmostEqual(float(torch.linalg.norm(out)),
                           math.exp(-gamma * tau / 2), places=10)

  def test_identity_step(self):
    hilbert = ops.HilbertSpec.qubits(2)
    state = corner.from_pure_state(circuits.ghz_state(2))
    out = corner.step(state, ops.zero(hilbert), noise.empty(hilbert),
                      corner.StepConfig())
    self.assertEqual(out.M, 1)
    self.assertAlmostEqual(metrics.fidelity_mixed(state, out), 1., places=12)
    self.assertAlmostEqual(out.t, 0.05)

  def test_trace_drift_is_second_order(self):
    hilbert = ops.HilbertSpec.qubits(1)
    model = noise.local_decay(1, 1.)
    up = corner.from_pure_state(circuits.basis_state('0'))
    drifts = []
    for dt in (0.02, 0.01):
      out = corner.step(up, ops.zero(hilbert), model, corner.StepConfig(dt=dt))
      drifts.append(out.trace_drift)
    self.assertAlmostEqual(drifts[0] / drifts[1], 4., delta=0.2)
    self.assertAlmostEqual(drifts[1], 0.01 ** 2 / 2, delta=1e-6)

  def test_amplitude_damping(self):
    hilbert = ops.HilbertSpec.qubits(1)
    up = corner.from_pure_state(circuits.basis_state('0'))
    final = corner.evolve_schedule(up, _idle(hilbert, 1.),
                                   noise.local_decay(1, 1.),
                                   corner.StepConfig(dt=1e-3))
    self.assertAlmostEqual(metrics.up_populations(final)[0], math.exp(-1.),
                           delta=1e-3)
    self.assertEqual(final.M, 2)

  def test_dephasing_coherence(self):
    hilbert = ops.HilbertSpec.qubits(1)
    plus = torch.tensor([1., 1.], dtype=ops.DTYPE) / math.sqrt(2)
    gamma = 0.5
    final = corner.evolve_schedule(corner.from_pure_state(plus),
                                   _idle(hilbert, 1.),
                                   noise.local_dephasing(1, gamma),
                                   corner.StepConfig(dt=1e-3))
    self.assertAlmostEqual(float(final.density()[0, 1].real),
                           0.5 * math.exp(-1.), delta=1e-3)

  def test_hadamard_on_zero(self):
    hilbert = ops.HilbertSpec.qubits(1)
    schedule = circuits.GateSchedule(hilbert,
                                     circuits.hadamard_segments(1, 0))
    final = corner.evolve_schedule(
        corner.from_pure_state(circuits.basis_state('0')), schedule,
        noise.empty(hilbert), corner.StepConfig(ode_tol=1e-12))
    plus = torch.tensor([1., 1.], dtype=ops.DTYPE) / math.sqrt(2)
    self.assertGreaterEqual(metrics.fidelity_to_pure(final, plus), 1 - 1e-8)

  def test_noiseless_qft_stays_pure(self):
    schedule = circuits.qft_schedule(3)
    hilbert = schedule.hilbert
    psi = circuits.inverse_qft_ghz_state(3)
    dims = []
    final = corner.evolve_schedule(
        corner.from_pure_state(psi), schedule, noise.empty(hilbert),
        corner.StepConfig(ode_tol=1e-10), observer=lambda s: dims.append(s.M))
    self.assertEqual(set(dims), {1})
    self.assertGreaterEqual(
        metrics.fidelity_to_pure(final, circuits.ghz_state(3)), 1 - 1e-7)

  def test_zero_hamiltonian_segments_are_identity(self):
    hilbert = ops.HilbertSpec.qubits(2)
    state = corner.from_pure_state(circuits.ghz_state(2))
    schedule = _idle(hilbert, 0.3) + _idle(hilbert, 0.2)
    final = corner.evolve_schedule(state, schedule, noise.empty(hilbert),
                                   corner.StepConfig())
    self.assertAlmostEqual(metrics.fidelity_mixed(state, final), 1.,
                           places=12)
    self.assertAlmostEqual(final.t, 0.5, places=12)

  def test_evolve_hits_segment_boundaries(self):
    hilbert = ops.HilbertSpec.qubits(1)
    schedule = _idle(hilbert, 0.12) + _idle(hilbert, 0.01)
    times, starts = [], []
    final = corner.evolve_schedule(
        corner.from_pure_state(circuits.basis_state('0')), schedule,
        noise.local_decay(1, 0.1), corner.StepConfig(dt=0.05),
        observer=lambda s: times.append(s.t),
        on_segment=lambda i, segment, s: starts.append((i, s.t)))
    self.assertEqual(len(times), 5)
    self.assertEqual(times[0], 0.)
    self.assertEqual(times[3], 0.12)
    self.assertAlmostEqual(final.t, 0.13, places=12)
    self.assertEqual([i for i, _ in starts], [0, 1])
    self.assertEqual(starts[1][1], 0.12)

  def test_sample_stride_still_observes_final_state(self):
    hilbert = ops.HilbertSpec.qubits(1)
    times = []
    corner.evolve_schedule(
        corner.from_pure_state(circuits.basis_state('0')),
        _idle(hilbert, 0.25), noise.empty(hilbert),
        corner.StepConfig(dt=0.05), observer=lambda s: times.append(s.t),
        sample_every=2)
    self.assertEqual(len(times), 4)
    self.assertAlmostEqual(times[-1], 0.25)

  def test_invalid_schedules(self):
    hilbert = ops.HilbertSpec.qubits(1)
    state = corner.from_pure_state(circuits.basis_state('0'))
    propagator = corner.CornerPropagator(noise.empty(hilbert),
                                         corner.StepConfig())
    with self.assertRaises(ValueError):
      propagator.evolve(state, circuits.GateSchedule(hilbert, []))
    negative = types.SimpleNamespace(segments=[types.SimpleNamespace(
        label='bad', hamiltonian=ops.zero(hilbert), duration=-1.)])
    with self.assertRaises(ValueError):
      propagator.evolve(state, negative)

  def test_unreachable_steps_are_counted(self):
    hilbert = ops.HilbertSpec.qubits(2)
    propagator = corner.CornerPropagator(
        noise.local_decay(2, 1.), corner.StepConfig(eps=1e-12, M_max=1))
    state = corner.from_pure_state(circuits.ghz_state(2))
    for _ in range(3):
      state = propagator.step(state, ops.zero(hilbert))
    self.assertEqual(state.M, 1)
    self.assertEqual(propagator.n_unreachable, 3)

  def test_state_dict_round_trip(self):
    state = corner.gram_truncate(_random_matrix(8, 3), corner.StepConfig(),
                                 t=0.7)
    restored = corner.CornerBasis.from_state_dict(state.state_dict())
    self.assertTrue(torch.equal(restored.C, state.C))
    self.assertEqual(restored.t, 0.7)


if __name__ == '__main__':
  unittest.main()

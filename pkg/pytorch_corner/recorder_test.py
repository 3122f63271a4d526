"""Tests for the time series recorder and corner checkpoints."""

import csv
import io
import math
import os
import tempfile
import unittest
from unittest import mock

import torch

from pytorch_corner import circuits
from pytorch_corner import corner
from pytorch_corner import noise
from pytorch_corner import recorder


class RecorderTest(unittest.TestCase):

  def _run(self, rec, n_qubits=3):
    schedule = circuits.qft_schedule(n_qubits)
    return corner.evolve_schedule(
        corner.from_pure_state(circuits.inverse_qft_ghz_state(n_qubits)),
        schedule, noise.local_decay(n_qubits, 0.05), corner.StepConfig(),
        observer=rec, sample_every=5, on_segment=rec.segment_started)

  def test_rows_and_csv(self):
    rec = recorder.Recorder(entanglement=True, verbose=False)
    final = self._run(rec)
    self.assertEqual(rec.rows[0]['t'], 0.)
    self.assertEqual(rec.rows[0]['M'], 1)
    self.assertEqual(rec.rows[-1]['t'], final.t)
    self.assertEqual(rec.max_M, max(row['M'] for row in rec.rows))
    for row in rec.rows:
      self.assertAlmostEqual(row['exp_S'], math.exp(row['S']))
      self.assertLessEqual(row['S'], math.log(row['M']) + 1e-12)
      self.assertIn('S_ent_2', row)
    self.assertEqual(rec.rows[-1]['segment'], 'H2/z')
    with tempfile.TemporaryDirectory() as directory:
      path = os.path.join(directory, 'series.csv')
      rec.to_csv(path)
      with open(path) as f:
        rows = list(csv.DictReader(f))
    self.assertEqual(len(rows), len(rec.rows))
    self.assertEqual(list(rows[0].keys())[:4], ['t', 'segment', 'M', 'S'])

  def test_progress_lines(self):
    rec = recorder.Recorder(name='qft')
    with mock.patch('sys.stdout', new_callable=io.StringIO) as stdout:
      self._run(rec, n_qubits=2)
    lines = stdout.getvalue().splitlines()
    self.assertEqual(len(lines), 5)
    self.assertTrue(lines[0].startswith('[qft] segment 0: H0/y'))

  def test_tensorboard_events(self):
    with tempfile.TemporaryDirectory() as directory:
      rec = recorder.Recorder(log_dir=directory, verbose=False)
      self._run(rec, n_qubits=2)
      rec.add_field('wigner/test', torch.rand(5, 5, dtype=torch.float64))
      rec.close()
      events = [f for f in os.listdir(directory) if 'tfevents' in f]
    self.assertEqual(len(events), 1)

  def test_checkpoint_round_trip(self):
    state = self._run(recorder.Recorder(verbose=False), n_qubits=2)
    with tempfile.TemporaryDirectory() as directory:
      path = os.path.join(directory, 'nested', 'corner.pt')
      recorder.save_corner(state, path)
      restored = recorder.load_corner(path)
    self.assertTrue(torch.equal(restored.C, state.C))
    self.assertTrue(torch.equal(restored.p, state.p))
    self.assertEqual(restored.t, state.t)
    self.assertEqual(restored.eps_total, state.eps_total)


if __name__ == '__main__':
  unittest.main()

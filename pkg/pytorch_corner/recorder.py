"""Records the time series of a corner-space run.

A Recorder is passed as the observer of CornerPropagator.evolve. Every sample
is written to TensorBoard under corner/*, entanglement/* and perf/*, kept in
memory, and can be dumped to a plot-ready CSV file.
"""

import csv
import math
import os
import time

import torch
from torch.utils import tensorboard

from pytorch_corner import corner
from pytorch_corner import metrics


class Recorder:
  """Observer collecting (t, M, S, exp S, trace drift, eps, S_ent) rows.

  Note that the recorder is stateful: rows accumulate across calls, so one
  instance should observe exactly one run.
  """

  def __init__(self,
               log_dir=None,
               entanglement=False,
               max_reduced_dim=metrics.MAX_REDUCED_DIM,
               verbose=True,
               name='run'):
    """Initializes a new Recorder instance.

    Args:
      log_dir: Directory for TensorBoard event files. No events are written if
        None.
      entanglement: Whether to evaluate S_ent for every cut (qubits only).
      max_reduced_dim: Cap passed to metrics.entanglement_profile.
      verbose: Whether to print one progress line per segment.
      name: Experiment name used in progress lines.
    """
    self._entanglement = entanglement
    self._max_reduced_dim = max_reduced_dim
    self._verbose = verbose
    self._name = name
    self._segment = ''
    self._sample = 0
    self._start_time = time.time()
    self.rows = []
    self.max_M = 0
    self._summary_writer = None
    if log_dir is not None:
      self._summary_writer = tensorboard.SummaryWriter(log_dir, max_queue=100)

  def __call__(self, state):
    entropy = metrics.von_neumann_entropy(state)
    row = {'t': state.t,
           'segment': self._segment,
           'M': state.M,
           'S': entropy,
           'exp_S': math.exp(entropy),
           'trace_drift': state.trace_drift,
           'eps_step': state.eps_step,
           'eps_total': state.eps_total}
    if self._entanglement:
      profile = metrics.entanglement_profile(state, self._max_reduced_dim)
      for cut, value in enumerate(profile, start=1):
        row[f'S_ent_{cut}'] = value
    self.rows.append(row)
    self.max_M = max(self.max_M, state.M)
    self._log(row)
    self._sample += 1

  def _log(self, row):
    if self._summary_writer is None:
      return
    step = self._sample
    writer = self._summary_writer
    writer.add_scalar('corner/M', row['M'], step)
    writer.add_scalar('corner/entropy', row['S'], step)
    writer.add_scalar('corner/exp_entropy', row['exp_S'], step)
    writer.add_scalar('corner/trace_drift', row['trace_drift'], step)
    writer.add_scalar('corner/eps_step', row['eps_step'], step)
    writer.add_scalar('corner/t', row['t'], step)
    entanglement = {k: v for k, v in row.items() if k.startswith('S_ent_')}
    if entanglement:
      writer.add_scalars('entanglement/S_ent', entanglement, step)
    elapsed = time.time() - self._start_time
    if step > 0 and elapsed > 0:
      writer.add_scalar('perf/steps_per_sec', step / elapsed, step)
      writer.add_scalar('perf/millis_per_step', elapsed / step * 1000, step)

  def segment_started(self, index, segment, state):
    """on_segment callback: tags the following rows and prints progress."""
    self._segment = segment.label
    if self._verbose:
      print(f'[{self._name}] segment {index}: {segment.label} '
            f't={state.t:.4f} M={state.M}')

  def add_field(self, tag, field, step=0):
    """Logs a 2-D real field (e.g. a Wigner function) as an image."""
    if self._summary_writer is None:
      return
    lo, hi = float(field.min()), float(field.max())
    image = (field - lo) / (hi - lo) if hi > lo else torch.zeros_like(field)
    self._summary_writer.add_image(tag, image[None], step)

  def to_csv(self, path):
    if not self.rows:
      return
    fields = list(self.rows[0].keys())
    with open(path, 'w', newline='') as f:
      writer = csv.DictWriter(f, fieldnames=fields)
      writer.writeheader()
      writer.writerows(self.rows)

  def close(self):
    if self._summary_writer is not None:
      self._summary_writer.close()


def save_corner(state, path):
  """Checkpoints a CornerBasis with torch.save."""
  directory = os.path.dirname(path)
  if directory:
    os.makedirs(directory, exist_ok=True)
  torch.save(state.state_dict(), path)


def load_corner(path):
  """Inverse of save_corner."""
  return corner.CornerBasis.from_state_dict(torch.load(path))

"""Run configuration and the experiments driven by run.py.

Each run_* function takes a RunConfig, writes its CSV/JSON outputs under
config.output_dir (when set) and returns the JSON-serializable result record.
"""

import concurrent.futures
import contextlib
import csv
import dataclasses
import json
import math
import os
import re
import time

import numpy as np
import torch

from pytorch_corner import circuits
from pytorch_corner import corner
from pytorch_corner import dense
from pytorch_corner import errors
from pytorch_corner import integrators
from pytorch_corner import kerr_cat
from pytorch_corner import metrics
from pytorch_corner import noise as noise_lib
from pytorch_corner import recorder as recorder_lib
from pytorch_corner import tomography

EXPERIMENTS = ('qft', 'scaling', 'sweep', 'benchmark', 'tomography', 'kerrcat')
INITIAL_STATES = ('ghz_preimage', 'all_up', 'all_down', 'bitstring',
                  'random_basis')


@dataclasses.dataclass
class RunConfig:
  """All knobs of a run. Rates are in units of delta (delta = 1 by default)."""

  experiment: str = 'qft'
  L: int = 8
  L_list: list = None
  delta: float = 1.
  gamma_over_delta: float = None
  gamma_T_qft: float = None
  gamma_over_delta_list: list = None
  noise: str = 'decay'
  epsilon: float = 1e-6
  M_max: int = None
  dt: float = 0.05
  ode_tol: float = 1e-8
  integrator: str = 'krylov'
  literal: bool = False
  initial_state: str = 'ghz_preimage'
  bitstring: str = None
  scaling_states: list = dataclasses.field(
      default_factory=lambda: ['ghz_preimage'])
  sweep_count: int = 128
  sweep_noises: list = dataclasses.field(
      default_factory=lambda: ['decay', 'dephasing'])
  seed: int = 0
  sample_every: int = 1
  entanglement: bool = False
  convergence_check: bool = False
  strict_epsilon: bool = False
  exact_tol: float = 1e-8
  kerr_K: float = 10.
  kerr_omega_c: float = 1.
  kerr_G: float = 50.
  kerr_gamma: float = 1.
  kerr_kappa: float = 2.
  kerr_n_ph: int = 20
  kerr_dt: float = 0.01
  kerr_t_final: float = 10.
  output_dir: str = None
  log_dir: str = None
  name: str = None
  threads: int = None
  workers: int = 1
  deterministic: bool = False
  verbose: bool = True

  @classmethod
  def from_dict(cls, d, path=None, lines=None):
    """Builds a RunConfig, rejecting unknown keys.

    Args:
      d: A mapping of field names to values.
      path: The file the mapping came from, used in error messages.
      lines: Optional mapping of key to its 1-based line in 'path'.
    """
    lines = lines or {}
    fields = {f.name: f for f in dataclasses.fields(cls)}
    for key, value in d.items():
      if key not in fields:
        raise errors.ConfigError(f"Unknown key '{key}'.", path, lines.get(key))
      kind = fields[key].type
      if value is None or (kind is float and isinstance(value, int)):
        continue
      if not isinstance(value, kind) or (
          kind is int and isinstance(value, bool)):
        raise errors.ConfigError(
            f"{key}: expected {kind.__name__}, got {value!r}", path,
            lines.get(key))
    config = cls(**d)
    config._path, config._lines = path, lines
    return config

  def to_dict(self):
    return dataclasses.asdict(self)

  @classmethod
  def load(cls, path, defaults=None):
    """Reads a JSON config file; errors carry the offending line.

    Args:
      path: The JSON file.
      defaults: Optional field values (e.g. command line flags) that the file
        overrides.
    """
    with open(path) as f:
      text = f.read()
    try:
      d = json.loads(text)
    except json.JSONDecodeError as e:
      raise errors.ConfigError(f'Invalid JSON: {e.msg}.', path, e.lineno)
    if not isinstance(d, dict):
      raise errors.ConfigError('Expected a JSON object.', path, 1)
    lines = {}
    for number, line in enumerate(text.splitlines(), start=1):
      for key in re.findall(r'"([A-Za-z_][A-Za-z0-9_]*)"\s*:', line):
        lines.setdefault(key, number)
    return cls.from_dict({**(defaults or {}), **d}, path, lines)

  def save(self, path):
    with open(path, 'w') as f:
      json.dump(self.to_dict(), f, indent=2, sort_keys=True)

  def merged(self, **overrides):
    """A copy with 'overrides' applied, keeping the source location."""
    config = dataclasses.replace(self, **overrides)
    config._path = getattr(self, '_path', None)
    config._lines = getattr(self, '_lines', {})
    return config

  def _fail(self, key, message):
    raise errors.ConfigError(
        f'{key}: {message}', getattr(self, '_path', None),
        getattr(self, '_lines', {}).get(key))

  def validate(self):
    """Raises ConfigError unless the configuration is consistent."""
    if self.experiment not in EXPERIMENTS:
      self._fail('experiment', f"unknown experiment '{self.experiment}'")
    if self.L < 1:
      self._fail('L', f'must be at least 1, got {self.L}')
    if self.delta <= 0:
      self._fail('delta', f'must be positive, got {self.delta}')
    if self.experiment in ('qft', 'sweep', 'benchmark', 'tomography'):
      if (self.gamma_over_delta is None) == (self.gamma_T_qft is None):
        self._fail('gamma_over_delta',
                   'exactly one of gamma_over_delta and gamma_T_qft is required')
    if self.experiment == 'scaling':
      if (self.gamma_over_delta is None and
          not self.gamma_over_delta_list and self.gamma_T_qft is None):
        self._fail('gamma_over_delta_list', 'no noise strength given')
    for key in ('gamma_over_delta', 'gamma_T_qft'):
      value = getattr(self, key)
      if value is not None and value < 0:
        self._fail(key, f'must be nonnegative, got {value}')
    if self.noise not in noise_lib.NOISE_MAP:
      self._fail('noise', f"unknown noise type '{self.noise}'")
    for kind in self.sweep_noises:
      if kind not in noise_lib.NOISE_MAP:
        self._fail('sweep_noises', f"unknown noise type '{kind}'")
    if not 0 < self.epsilon < 1:
      self._fail('epsilon', f'must lie in (0, 1), got {self.epsilon}')
    if self.M_max is not None and self.M_max < 1:
      self._fail('M_max', f'must be at least 1, got {self.M_max}')
    if self.dt <= 0:
      self._fail('dt', f'must be positive, got {self.dt}')
    if self.ode_tol <= 0:
      self._fail('ode_tol', f'must be positive, got {self.ode_tol}')
    if self.integrator not in integrators.INTEGRATOR_MAP:
      self._fail('integrator', f"unknown integrator '{self.integrator}'")
    if self.initial_state not in INITIAL_STATES:
      self._fail('initial_state', f"unknown initial state '{self.initial_state}'")
    for state in self.scaling_states:
      if state not in ('ghz_preimage', 'all_up', 'all_down'):
        self._fail('scaling_states', f"unsupported initial state '{state}'")
    if self.initial_state == 'bitstring':
      if self.bitstring is None:
        self._fail('bitstring', 'required when initial_state is bitstring')
      if len(self.bitstring) != self.L or set(self.bitstring) - set('01'):
        self._fail('bitstring', f'must be {self.L} characters of 0 and 1')
    if self.experiment == 'sweep' and not 1 <= self.sweep_count <= 2 ** self.L:
      self._fail('sweep_count', f'must lie in [1, 2^L], got {self.sweep_count}')
    if self.sample_every < 1:
      self._fail('sample_every', 'must be positive')
    if self.workers < 1:
      self._fail('workers', 'must be positive')
    if self.threads is not None and self.threads < 1:
      self._fail('threads', 'must be positive')
    if self.kerr_n_ph < 2 or self.kerr_dt <= 0 or self.kerr_t_final <= 0:
      self._fail('kerr_n_ph', 'Kerr cutoff, step and duration must be positive')
    return self

  def step_config(self, dt=None):
    return corner.StepConfig(
        dt=self.dt if dt is None else dt, ode_tol=self.ode_tol,
        eps=self.epsilon, M_max=self.M_max, integrator=self.integrator)

  def gamma(self, duration):
    """The decay rate, from gamma/delta or from gamma * 'duration'."""
    if self.gamma_over_delta is not None:
      return self.gamma_over_delta * self.delta
    return self.gamma_T_qft / duration


@contextlib.contextmanager
def configured_threads(config):
  """Applies the threads / deterministic knobs to torch for a block.

  The previous thread count and deterministic-algorithms mode are restored on
  exit, so a deterministic run does not change later runs in the process.
  """
  threads = torch.get_num_threads()
  deterministic = torch.are_deterministic_algorithms_enabled()
  warn_only = torch.is_deterministic_algorithms_warn_only_enabled()
  try:
    if config.deterministic:
      torch.set_num_threads(1)
      torch.use_deterministic_algorithms(True)
    elif config.threads is not None:
      torch.set_num_threads(config.threads)
    yield
  finally:
    torch.set_num_threads(threads)
    torch.use_deterministic_algorithms(deterministic, warn_only=warn_only)


def _finite_or_none(value):
  if value is None or not math.isfinite(value):
    return None
  return value


def _output_path(config, file_name):
  if config.output_dir is None:
    return None
  os.makedirs(config.output_dir, exist_ok=True)
  prefix = config.name or config.experiment
  return os.path.join(config.output_dir, f'{prefix}_{file_name}')


def _write_json(config, record):
  path = _output_path(config, 'result.json')
  if path is not None:
    with open(path, 'w') as f:
      json.dump(record, f, indent=2, sort_keys=True)


def _write_rows(path, header, rows):
  if path is None:
    return
  with open(path, 'w', newline='') as f:
    writer = csv.writer(f)
    writer.writerow(header)
    writer.writerows(rows)


def _map(fn, items, config):
  """Maps over independent runs, in worker processes unless deterministic."""
  if config.workers == 1 or config.deterministic:
    return [fn(item) for item in items]
  with concurrent.futures.ProcessPoolExecutor(config.workers) as pool:
    return list(pool.map(fn, items))


def initial_state(config, n_qubits=None, kind=None):
  """The initial state vector selected by config.initial_state (or 'kind')."""
  n_qubits = config.L if n_qubits is None else n_qubits
  kind = config.initial_state if kind is None else kind
  if kind == 'ghz_preimage':
    return circuits.inverse_qft_ghz_state(n_qubits)
  if kind == 'all_up':
    return circuits.basis_state('0' * n_qubits)
  if kind == 'all_down':
    return circuits.basis_state('1' * n_qubits)
  if kind == 'bitstring':
    return circuits.basis_state(config.bitstring)
  return circuits.basis_state(sample_bitstrings(config, n_qubits, 1)[0])


def sample_bitstrings(config, n_qubits, count):
  """Distinct basis states drawn without replacement from a seeded generator."""
  generator = torch.Generator().manual_seed(config.seed)
  indices = torch.randperm(2 ** n_qubits, generator=generator)[:count]
  return [format(int(i), f'0{n_qubits}b') for i in indices]


def _simulate_qft(config, psi, recorder=None, dt=None):
  """Runs the noisy QFT on psi; returns (final state, ideal, run metadata)."""
  schedule = circuits.qft_schedule(config.L, config.delta, config.literal)
  duration = schedule.total_duration
  gamma = config.gamma(duration)
  noise = noise_lib.make_noise(config.noise, config.L, gamma)
  propagator = corner.CornerPropagator(noise, config.step_config(dt))
  on_segment = None if recorder is None else recorder.segment_started
  start = time.time()
  final = propagator.evolve(
      corner.from_pure_state(psi), schedule, observer=recorder,
      sample_every=config.sample_every, on_segment=on_segment)
  wall_time = time.time() - start
  ideal = circuits.ideal_output(schedule, psi)
  hamiltonian_bytes = max(s.hamiltonian.nbytes() for s in schedule.segments)
  meta = {'gamma': gamma,
          'T_qft': duration,
          'wall_time_s': wall_time,
          'eps_unreachable_steps': propagator.n_unreachable,
          'hamiltonian_nbytes': hamiltonian_bytes,
          'integrator_stats': propagator.integrator.stats}
  return final, ideal, meta


def run_qft(config):
  """A single noisy QFT run with a time series of M, S and S_ent."""
  config.validate()
  psi = initial_state(config)
  recorder = recorder_lib.Recorder(
      log_dir=config.log_dir, entanglement=config.entanglement,
      verbose=config.verbose, name=config.name or 'qft')
  final, ideal, meta = _simulate_qft(config, psi, recorder)
  recorder.close()
  fidelity = metrics.fidelity_to_pure(final, ideal)
  stats = metrics.spin_statistics(corner.from_pure_state(psi))
  record = {
      'L': config.L,
      'gamma_over_delta': meta['gamma'] / config.delta,
      'gamma_T': meta['gamma'] * meta['T_qft'],
      'T_qft': meta['T_qft'],
      'epsilon': config.epsilon,
      'dt': config.dt,
      'noise': config.noise,
      'initial_state': config.initial_state,
      'fidelity_to_ideal': fidelity,
      'n_S': stats.n_S,
      'B': _finite_or_none(stats.B),
      'max_M': recorder.max_M,
      'final_M': final.M,
      'eps_total': final.eps_total,
      'eps_unreachable_steps': meta['eps_unreachable_steps'],
      'hamiltonian_nbytes': meta['hamiltonian_nbytes'],
      'corner_nbytes': final.nbytes(),
      'entanglement_is_qualitative': True,
      'wall_time_s': None if config.deterministic else meta['wall_time_s'],
  }
  if config.convergence_check:
    half = config.merged(convergence_check=False, output_dir=None,
                         log_dir=None, verbose=False)
    final_half, ideal_half, _ = _simulate_qft(half, psi, dt=config.dt / 2)
    record['dt_convergence'] = abs(
        fidelity - metrics.fidelity_to_pure(final_half, ideal_half))
  if config.output_dir is not None:
    recorder.to_csv(_output_path(config, 'timeseries.csv'))
  _write_json(config, record)
  if config.log_dir is not None:
    recorder_lib.save_corner(final, os.path.join(config.log_dir, 'corner.pt'))
  if config.strict_epsilon and meta['eps_unreachable_steps']:
    raise errors.TruncationError(
        f"epsilon={config.epsilon} was unreachable under M_max={config.M_max} "
        f"in {meta['eps_unreachable_steps']} step(s).")
  return record


def _qft_infidelity(args):
  config, kind = args
  psi = initial_state(config, kind=kind)
  final, ideal, meta = _simulate_qft(config, psi)
  return 1. - metrics.fidelity_to_pure(final, ideal), meta['wall_time_s']


def run_scaling(config):
  """Infidelity vs L for each noise strength; fits the log-log slope."""
  config.validate()
  sizes = config.L_list or [6, 8, 10, 12]
  gammas = config.gamma_over_delta_list or [config.gamma_over_delta]
  jobs = []
  for gamma in gammas:
    for kind in config.scaling_states:
      for n_qubits in sizes:
        sub = config.merged(L=n_qubits, gamma_over_delta=gamma,
                            gamma_T_qft=None if gamma is not None
                            else config.gamma_T_qft,
                            output_dir=None, log_dir=None, verbose=False)
        jobs.append((sub, kind))
  results = _map(_qft_infidelity, jobs, config)
  rows, slopes = [], {}
  for (sub, kind), (infidelity, wall) in zip(jobs, results):
    rows.append([sub.gamma_over_delta, kind, sub.L, infidelity,
                 None if config.deterministic else wall])
  for gamma in gammas:
    for kind in config.scaling_states:
      points = [(r[2], r[3]) for r in rows if r[0] == gamma and r[1] == kind]
      if len(points) >= 2 and all(p[1] > 0 for p in points):
        x = np.log([p[0] for p in points])
        y = np.log([p[1] for p in points])
        slopes[f'{gamma}/{kind}'] = float(np.polyfit(x, y, 1)[0])
  _write_rows(_output_path(config, 'scaling.csv'),
              ['gamma_over_delta', 'initial_state', 'L', 'infidelity',
               'wall_time_s'], rows)
  record = {'L_list': sizes, 'gamma_over_delta_list': gammas,
            'initial_states': config.scaling_states, 'slopes': slopes,
            'infidelities': [r[3] for r in rows]}
  _write_json(config, record)
  return record


def _sweep_one(args):
  config, bits = args
  psi = circuits.basis_state(bits)
  final, ideal, _ = _simulate_qft(config, psi)
  stats = metrics.spin_statistics(corner.from_pure_state(psi))
  return metrics.SweepRecord(int(bits, 2), bits, stats.n_S, stats.B,
                             1. - metrics.fidelity_to_pure(final, ideal))


def run_sweep(config):
  """Noisy QFT from sampled basis states for each noise type, plus the fit."""
  config.validate()
  bitstrings = sample_bitstrings(config, config.L, config.sweep_count)
  record = {'L': config.L, 'seed': config.seed,
            'prng': 'torch.Generator.randperm', 'count': len(bitstrings),
            'fits': {}}
  for kind in config.sweep_noises:
    sub = config.merged(noise=kind, output_dir=None, log_dir=None,
                        verbose=False)
    records = _map(_sweep_one, [(sub, b) for b in bitstrings], config)
    _write_rows(_output_path(config, f'sweep_{kind}.csv'),
                ['index', 'bits', 'n_S', 'B', 'infidelity'],
                [[r.index, r.bits, r.n_S, _finite_or_none(r.B), r.infidelity]
                 for r in records])
    usable = [r for r in records if r.n_S > 0]
    try:
      fit = metrics.bilinear_fit(usable)
      record['fits'][kind] = {k: _finite_or_none(v)
                              for k, v in fit._asdict().items()}
      record['fits'][kind]['n_S_sensitivity'] = [
          _finite_or_none(v)
          for v in metrics.n_s_sensitivity(fit, [r.B for r in usable])]
    except ValueError as e:
      record['fits'][kind] = {'error': str(e)}
    record[f'mean_infidelity_{kind}'] = float(
        np.mean([r.infidelity for r in records]))
  _write_json(config, record)
  return record


def _benchmark_one(args):
  config, n_qubits = args
  gamma_T = config.gamma_T_qft
  if gamma_T is None:
    gamma_T = (config.gamma_over_delta * config.delta *
               circuits.qft_duration(n_qubits, config.delta))
  cfg = config.step_config()
  return dense.benchmark_pair(n_qubits, gamma_T, config.epsilon,
                              noise_kind=config.noise,
                              exact_tol=config.exact_tol, cfg=cfg)


def run_benchmark(config):
  """Corner vs. dense wall time and cross fidelity for several L."""
  config.validate()
  sizes = config.L_list or [4, 6, 8]
  results = _map(_benchmark_one, [(config, n) for n in sizes], config)
  rows = [[r.L, r.epsilon, r.t_corner_s, r.t_exact_s, r.fidelity_cross]
          for r in results]
  _write_rows(_output_path(config, 'benchmark.csv'),
              ['L', 'epsilon', 't_corner_s', 't_exact_s', 'fidelity_cross'],
              rows)
  record = {'L_list': sizes, 'epsilon': config.epsilon,
            'fidelity_cross': [r.fidelity_cross for r in results],
            'max_M': [r.max_M for r in results]}
  if not config.deterministic:
    record['speedup'] = [r.t_exact_s / max(r.t_corner_s, 1e-12)
                         for r in results]
  _write_json(config, record)
  return record


def run_tomography(config):
  """chi^err of the noisy CP(pi/2) gate, next to the digital error model."""
  config.validate()
  gate = tomography.controlled_phase_gate(delta=config.delta,
                                          literal=config.literal)
  tau = gate.total_duration
  gamma = config.gamma(tau)
  noise = noise_lib.make_noise(config.noise, 2, gamma)
  gamma_tau = gamma * tau if gamma > 0 else 1.
  choi = tomography.channel_from_evolution(gate, noise, tol=config.exact_tol)
  chi = tomography.error_chi(choi, gate, gamma_tau)
  digital = tomography.ChiMatrix(
      tomography.choi_to_chi(tomography.dissipator_choi(noise, tau)),
      gamma_tau)
  single, double = chi.weight_profile()
  report = chi.report()
  # Pure dephasing errors live on the {I, Z} x {I, Z} block.
  z_support = torch.tensor([set(label) <= set('IZ') for label in chi.labels])
  off_support = report.clone()
  off_support[z_support[:, None] & z_support[None, :]] = 0.
  if config.output_dir is not None:
    chi.to_csv(_output_path(config, 'chi.csv'))
    digital.to_csv(_output_path(config, 'chi_digital.csv'))
  record = {'noise': config.noise, 'gamma_tau': gamma * tau,
            'max_single_qubit': single, 'max_two_qubit': double,
            'max_off_z_support': float(off_support.max()),
            'max_digital_difference': float(
                (chi.chi - digital.chi).abs().max() / gamma_tau)}
  _write_json(config, record)
  return record


def run_kerrcat(config):
  """Kerr-cat relaxation from vacuum; parities and Wigner fields."""
  config.validate()
  params = kerr_cat.KerrParams(
      K=config.kerr_K, omega_c=config.kerr_omega_c, G=config.kerr_G,
      gamma=config.kerr_gamma, kappa=config.kerr_kappa, n_ph=config.kerr_n_ph)
  cfg = corner.StepConfig(dt=config.kerr_dt, ode_tol=config.ode_tol,
                          eps=config.epsilon, M_max=config.M_max,
                          integrator=config.integrator)
  recorder = recorder_lib.Recorder(
      log_dir=config.log_dir, verbose=config.verbose,
      name=config.name or 'kerrcat')
  start = time.time()
  result = kerr_cat.run_kerr_cat(params, config.kerr_t_final, cfg,
                                 sample_every=config.sample_every,
                                 observer=recorder)
  wall_time = time.time() - start
  wigners = kerr_cat.leading_wigners(result.state)
  grid = kerr_cat.phase_space_grid()
  for k, (p, field) in enumerate(wigners):
    recorder.add_field(f'wigner/column_{k}', field)
    path = _output_path(config, f'wigner_{k}.csv')
    if path is not None:
      with open(path, 'w') as f:
        f.write(f'# p={p!r}\n')
        f.write('re_alpha,im_alpha,W\n')
        for i, y in enumerate(grid.tolist()):
          for j, x in enumerate(grid.tolist()):
            f.write(f'{x},{y},{float(field[i, j])}\n')
  recorder.close()
  _write_rows(_output_path(config, 'trajectory.csv'),
              ['t', 'photon_number', 'M', 'parity'],
              list(zip(result.times, result.photon_numbers, result.dims,
                       result.total_parities)))
  record = {'p': result.state.p[:4].tolist(),
            'parities': result.parities[:4],
            'max_M': max(result.dims),
            'final_M': result.state.M,
            'photon_number': result.photon_numbers[-1],
            'max_photon_number': max(result.photon_numbers),
            'tail_population': result.tail_population,
            'integrator_stats': result.integrator_stats,
            'wall_time_s': None if config.deterministic else wall_time}
  _write_json(config, record)
  return record


EXPERIMENT_MAP = {
    'qft': run_qft,
    'scaling': run_scaling,
    'sweep': run_sweep,
    'benchmark': run_benchmark,
    'tomography': run_tomography,
    'kerrcat': run_kerrcat,
}

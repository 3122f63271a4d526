"""Structured operators for qubit registers and single bosonic modes.

An OperatorSpec is a sum of terms, each term a complex coefficient times a
product of small dense matrices acting on distinct sites. Operators are applied
to state vectors (or to every column of a corner basis at once) one local
factor at a time, so nothing of size N x N is ever formed outside of the
explicit `to_dense` oracle.

Conventions (used throughout the package):
  * Sites are 0-based and site 0 is the most significant bit of the basis
    index, i.e. qubit 1 of a circuit diagram is site 0.
  * For qubits |0> is the excited state |up> and |1> is |down>, so that
    sigma_z = diag(1, -1) and sigma_minus = |1><0|.
"""

import collections
import dataclasses
import functools
import math

import torch

DTYPE = torch.complex128
# Largest dimension for which `to_dense` is allowed.
MAX_DENSE_DIM = 2 ** 12


@dataclasses.dataclass(frozen=True)
class HilbertSpec:
  """Either a register of 'size' qubits or one boson mode with cutoff 'size'."""

  kind: str
  size: int

  def __post_init__(self):
    if self.kind not in ('qubits', 'boson'):
      raise ValueError(f"Unknown Hilbert space kind '{self.kind}'.")
    if self.size < 1:
      raise ValueError(f'Hilbert space size must be >= 1, got {self.size}.')

  @classmethod
  def qubits(cls, n_qubits):
    return cls('qubits', int(n_qubits))

  @classmethod
  def boson(cls, n_ph):
    return cls('boson', int(n_ph))

  @property
  def local_dims(self):
    if self.kind == 'qubits':
      return (2,) * self.size
    return (self.size + 1,)

  @property
  def n_sites(self):
    return len(self.local_dims)

  @property
  def dim(self):
    return math.prod(self.local_dims)

  def to_dict(self):
    return {'kind': self.kind, 'size': self.size}

  @classmethod
  def from_dict(cls, d):
    return cls(d['kind'], int(d['size']))


Term = collections.namedtuple('Term', ['coeff', 'factors'])


def _as_matrix(matrix):
  if not torch.is_tensor(matrix):
    matrix = torch.tensor(matrix)
  return matrix.to(DTYPE)


def _is_identity(matrix):
  eye = torch.eye(matrix.shape[0], dtype=DTYPE)
  return bool(torch.equal(matrix, eye))


def _is_diagonal(matrix):
  return bool(torch.equal(matrix, torch.diag_embed(torch.diagonal(matrix))))


def _term_key(factors):
  return tuple((site, tuple(m.flatten().tolist())) for site, m in factors)


def _simplify(terms):
  """Drops identity factors and zero terms and merges like terms."""
  merged = collections.OrderedDict()
  for coeff, factors in terms:
    if coeff == 0:
      continue
    kept = []
    for site, matrix in sorted(factors, key=lambda f: f[0]):
      if _is_identity(matrix):
        continue
      kept.append((site, matrix))
    if any(not torch.any(m != 0) for _, m in kept):
      continue
    key = _term_key(kept)
    if key in merged:
      merged[key] = Term(merged[key].coeff + coeff, merged[key].factors)
    else:
      merged[key] = Term(coeff, tuple(kept))
  return tuple(t for t in merged.values() if t.coeff != 0)


class OperatorSpec:
  """A sum of products of local operators on a HilbertSpec.

  Instances are immutable. Hashing and equality are by identity, which lets
  the application kernels cache per-operator precomputations.
  """

  def __init__(self, hilbert, terms=(), hermitian_hint=False):
    """Initializes a new OperatorSpec instance.

    Args:
      hilbert: The HilbertSpec the operator acts on.
      terms: An iterable of (coeff, factors) pairs where factors is an
        iterable of (site, matrix) pairs with distinct sites. Matrices may be
        anything torch.tensor accepts.
      hermitian_hint: Whether the caller knows the operator to be Hermitian.
    """
    self.hilbert = hilbert
    self.hermitian_hint = bool(hermitian_hint)
    dims = hilbert.local_dims
    checked = []
    for coeff, factors in terms:
      seen = set()
      converted = []
      for site, matrix in factors:
        site = int(site)
        if not 0 <= site < len(dims):
          raise ValueError(
              f'Site index {site} out of range for {len(dims)} site(s).')
        if site in seen:
          raise ValueError(f'Site {site} appears twice in the same term.')
        seen.add(site)
        matrix = _as_matrix(matrix)
        if tuple(matrix.shape) != (dims[site], dims[site]):
          raise ValueError(
              f'Factor on site {site} has shape {tuple(matrix.shape)}, '
              f'expected {(dims[site], dims[site])}.')
        converted.append((site, matrix))
      checked.append((complex(coeff), converted))
    self.terms = _simplify(checked)

  @property
  def is_zero(self):
    return not self.terms

  @property
  def n_terms(self):
    return len(self.terms)

  def _check_same_space(self, other):
    if other.hilbert != self.hilbert:
      raise ValueError(
          f'Operators act on different spaces: {self.hilbert} vs '
          f'{other.hilbert}.')

  def __add__(self, other):
    self._check_same_space(other)
    return OperatorSpec(
        self.hilbert, self.terms + other.terms,
        hermitian_hint=self.hermitian_hint and other.hermitian_hint)

  def __sub__(self, other):
    return self + (-1.) * other

  def __neg__(self):
    return (-1.) * self

  def __mul__(self, scalar):
    scalar = complex(scalar)
    return OperatorSpec(
        self.hilbert, [(c * scalar, f) for c, f in self.terms],
        hermitian_hint=self.hermitian_hint and scalar.imag == 0)

  __rmul__ = __mul__

  def __matmul__(self, other):
    self._check_same_space(other)
    terms = []
    for c1, f1 in self.terms:
      for c2, f2 in other.terms:
        factors = dict(f2)
        for site, matrix in f1:
          factors[site] = matrix @ factors[site] if site in factors else matrix
        terms.append((c1 * c2, factors.items()))
    return OperatorSpec(self.hilbert, terms)

  def adjoint(self):
    terms = [(c.conjugate(), [(s, m.conj().T) for s, m in f])
             for c, f in self.terms]
    return OperatorSpec(self.hilbert, terms, hermitian_hint=self.hermitian_hint)

  def nbytes(self):
    """Memory held by the structured representation."""
    total = 0
    for _, factors in self.terms:
      total += 16 + sum(m.element_size() * m.nelement() for _, m in factors)
    return total

  def to_dense(self):
    """Returns the N x N matrix as a sum of Kronecker products (test oracle)."""
    n = self.hilbert.dim
    if n > MAX_DENSE_DIM:
      raise ValueError(f'Refusing to densify an operator of dimension {n}.')
    dense = torch.zeros((n, n), dtype=DTYPE)
    for coeff, factors in self.terms:
      by_site = dict(factors)
      out = torch.ones((1, 1), dtype=DTYPE)
      for site, d in enumerate(self.hilbert.local_dims):
        out = torch.kron(out, by_site.get(site, torch.eye(d, dtype=DTYPE)).contiguous())
      dense += coeff * out
    return dense

  def to_dict(self):
    terms = []
    for coeff, factors in self.terms:
      terms.append({
          'coeff': [coeff.real, coeff.imag],
          'factors': [{'site': site,
                       'real': m.real.tolist(),
                       'imag': m.imag.tolist()} for site, m in factors],
      })
    return {'hilbert': self.hilbert.to_dict(),
            'hermitian_hint': self.hermitian_hint,
            'terms': terms}

  @classmethod
  def from_dict(cls, d):
    hilbert = HilbertSpec.from_dict(d['hilbert'])
    terms = []
    for t in d['terms']:
      factors = [
          (f['site'], torch.complex(torch.tensor(f['real'], dtype=torch.float64),
                                    torch.tensor(f['imag'], dtype=torch.float64)))
          for f in t['factors']]
      terms.append((complex(*t['coeff']), factors))
    return cls(hilbert, terms, hermitian_hint=d.get('hermitian_hint', False))

  def __repr__(self):
    return (f'OperatorSpec({self.hilbert.kind}={self.hilbert.size}, '
            f'n_terms={self.n_terms}, hermitian_hint={self.hermitian_hint})')


# Local matrices in the |0> = |up>, |1> = |down> convention.
PAULI_I = _as_matrix([[1, 0], [0, 1]])
PAULI_X = _as_matrix([[0, 1], [1, 0]])
PAULI_Y = _as_matrix([[0, -1j], [1j, 0]])
PAULI_Z = _as_matrix([[1, 0], [0, -1]])
SIGMA_MINUS = _as_matrix([[0, 0], [1, 0]])
SIGMA_PLUS = _as_matrix([[0, 1], [0, 0]])
PROJECTOR_UP = _as_matrix([[1, 0], [0, 0]])
PROJECTOR_DOWN = _as_matrix([[0, 0], [0, 1]])


def local(hilbert, site, matrix, coeff=1., hermitian_hint=False):
  """A single-term operator acting with 'matrix' on 'site'."""
  return OperatorSpec(hilbert, [(coeff, [(site, matrix)])],
                      hermitian_hint=hermitian_hint)


def identity(hilbert, coeff=1.):
  return OperatorSpec(hilbert, [(coeff, [])],
                      hermitian_hint=complex(coeff).imag == 0)


def zero(hilbert):
  return OperatorSpec(hilbert, [], hermitian_hint=True)


def sigma_x(hilbert, site, coeff=1.):
  return local(hilbert, site, PAULI_X, coeff, complex(coeff).imag == 0)


def sigma_y(hilbert, site, coeff=1.):
  return local(hilbert, site, PAULI_Y, coeff, complex(coeff).imag == 0)


def sigma_z(hilbert, site, coeff=1.):
  return local(hilbert, site, PAULI_Z, coeff, complex(coeff).imag == 0)


def sigma_minus(hilbert, site, coeff=1.):
  return local(hilbert, site, SIGMA_MINUS, coeff)


def sigma_plus(hilbert, site, coeff=1.):
  return local(hilbert, site, SIGMA_PLUS, coeff)


def projector_up(hilbert, site, coeff=1.):
  return local(hilbert, site, PROJECTOR_UP, coeff, complex(coeff).imag == 0)


def destroy_matrix(n_ph):
  """The annihilation operator truncated to Fock states 0..n_ph."""
  amplitudes = torch.sqrt(torch.arange(1, n_ph + 1, dtype=torch.float64))
  return torch.diag(amplitudes, 1).to(DTYPE)


def destroy(hilbert, coeff=1.):
  assert hilbert.kind == 'boson', 'destroy() requires a boson mode.'
  return local(hilbert, 0, destroy_matrix(hilbert.size), coeff)


def create(hilbert, coeff=1.):
  assert hilbert.kind == 'boson', 'create() requires a boson mode.'
  return local(hilbert, 0, destroy_matrix(hilbert.size).T.contiguous(), coeff)


def number(hilbert, coeff=1.):
  assert hilbert.kind == 'boson', 'number() requires a boson mode.'
  n = torch.arange(hilbert.size + 1, dtype=torch.float64).to(DTYPE)
  return local(hilbert, 0, torch.diag(n), coeff, complex(coeff).imag == 0)


_Kernel = collections.namedtuple('_Kernel', ['diagonal', 'terms'])


@functools.lru_cache(maxsize=64)
def _compile(op):
  """Folds all diagonal terms of 'op' into one length-N vector.

  Returns:
    A _Kernel whose 'diagonal' is either None or a length-N tensor and whose
    'terms' are the remaining (coeff, factors) pairs.
  """
  dims = op.hilbert.local_dims
  diagonal = None
  offdiagonal = []
  for coeff, factors in op.terms:
    if not all(_is_diagonal(m) for _, m in factors):
      offdiagonal.append((coeff, factors))
      continue
    values = torch.full(dims, coeff, dtype=DTYPE)
    for site, matrix in factors:
      shape = [1] * len(dims)
      shape[site] = dims[site]
      values = values * torch.diagonal(matrix).reshape(shape)
    diagonal = values if diagonal is None else diagonal + values
  if diagonal is not None:
    diagonal = diagonal.reshape(-1)
  return _Kernel(diagonal, tuple(offdiagonal))


def diagonal_part(op):
  """Returns (diagonal, is_diagonal) for the operator's compiled kernel."""
  kernel = _compile(op)
  return kernel.diagonal, not kernel.terms


def _apply_factor(matrix, x, site):
  out = torch.tensordot(matrix, x, dims=([1], [site]))
  return torch.movedim(out, 0, site)


def _check_columns(hilbert, columns):
  if columns.ndim != 2:
    raise ValueError(f'Expected an N x M matrix, got shape {tuple(columns.shape)}.')
  if columns.shape[0] != hilbert.dim:
    raise ValueError(
        f'Dimension mismatch: operator acts on N={hilbert.dim}, got '
        f'{columns.shape[0]} rows.')
  if columns.shape[1] < 1:
    raise ValueError('Need at least one column.')


def apply_to_columns(op, columns):
  """Applies 'op' to every column of an N x M matrix.

  Args:
    op: The OperatorSpec to apply.
    columns: An N x M complex tensor. It is not modified.
  Returns:
    The N x M tensor op @ columns.
  """
  _check_columns(op.hilbert, columns)
  columns = columns.to(DTYPE)
  n, m = columns.shape
  kernel = _compile(op)
  if kernel.diagonal is not None:
    out = kernel.diagonal[:, None] * columns
  else:
    out = torch.zeros_like(columns)
  if kernel.terms:
    x = columns.reshape(op.hilbert.local_dims + (m,))
    for coeff, factors in kernel.terms:
      y = x
      for site, matrix in factors:
        y = _apply_factor(matrix, y, site)
      out = out + coeff * y.reshape(n, m)
  return out


def apply_operator(op, v):
  """Applies 'op' to a single state vector of length N."""
  if v.ndim != 1:
    raise ValueError(f'Expected a vector, got shape {tuple(v.shape)}.')
  return apply_to_columns(op, v[:, None])[:, 0]


def build_effective_hamiltonian(hamiltonian, noise):
  """Returns H - (i/2) sum_i J_i^dagger J_i as an OperatorSpec.

  Args:
    hamiltonian: The system Hamiltonian.
    noise: A NoiseModel whose jumps act on the same space.
  """
  if noise.hilbert != hamiltonian.hilbert:
    raise ValueError(
        f'Hamiltonian acts on {hamiltonian.hilbert} but the noise model acts '
        f'on {noise.hilbert}.')
  if not noise.jumps:
    return hamiltonian
  loss = zero(hamiltonian.hilbert)
  for jump in noise.jumps:
    loss = loss + jump.adjoint() @ jump
  return OperatorSpec(hamiltonian.hilbert,
                      hamiltonian.terms + ((-0.5j) * loss).terms,
                      hermitian_hint=False)

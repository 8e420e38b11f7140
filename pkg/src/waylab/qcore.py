"""Dense complex linear algebra over finite-dimensional Hilbert spaces.

Operators are plain ``numpy`` complex arrays.  Composite spaces are ordered
tensor products; the leg order is fixed at construction and never reshuffled
implicitly.  Construction-level checks (state norms, density operators) use
``tolerances.construct``, operator-level checks use ``tolerances.validate``.
Both knobs are module-global and may be adjusted by embedding code.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ValidationError",
    "DimensionMismatch",
    "InvariantViolation",
    "Tolerances",
    "tolerances",
    "max_dim",
    "as_matrix",
    "as_state_array",
    "dagger",
    "op_norm",
    "commutator",
    "tensor",
    "herm_eig",
    "mat_exp_i",
    "unitarity_residual",
    "require_unitary",
    "require_hermitian",
    "projector",
    "orthonormal_extension",
    "StateVector",
    "DensityOperator",
    "CompositeSpace",
    "partial_trace",
]

DEFAULT_MAX_DIM = 4096

# Full Gram-matrix unitarity checks are cubic; above this dimension the check
# falls back to deterministic random probes.
_EXACT_UNITARITY_DIM = 1024


class ValidationError(ValueError):
    """An object failed its construction or precondition checks."""


class DimensionMismatch(ValidationError):
    """Operand shapes or Hilbert-space dimensions are incompatible."""


class InvariantViolation(RuntimeError):
    """A mathematical invariant failed at runtime on valid input.

    Distinct from ValidationError: the inputs were fine, the computation
    produced something the theory forbids.  Signals a bug somewhere.
    """


@dataclass
class Tolerances:
    """Global numeric tolerances.

    ``validate`` guards operator-level identities (hermiticity, POVM sums,
    unitarity); ``construct`` guards state-level construction invariants
    (norms, traces).
    """

    validate: float = 1e-10
    construct: float = 1e-12


tolerances = Tolerances()


def max_dim() -> int:
    """Total Hilbert-space dimension cap.

    Read from the ``WAYLAB_MAX_DIM`` environment variable on each call so
    embedding code can adjust it; defaults to 4096.
    """
    raw = os.environ.get("WAYLAB_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValidationError(f"WAYLAB_MAX_DIM must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValidationError(f"WAYLAB_MAX_DIM must be positive, got {value}")
    return value


def _check_dim_budget(dim: int, what: str) -> None:
    cap = max_dim()
    if dim > cap:
        raise ValidationError(f"{what} has dimension {dim}, exceeding the cap {cap} (WAYLAB_MAX_DIM)")


def as_matrix(a, *, square: bool = False, what: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a 2-D complex array, rejecting non-finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValidationError(f"{what} must be 2-D, got shape {m.shape}")
    if m.size and not np.isfinite(m).all():
        raise ValidationError(f"{what} contains non-finite entries")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{what} must be square, got shape {m.shape}")
    return m


def as_state_array(v, *, what: str = "state vector") -> np.ndarray:
    """Coerce ``v`` to a 1-D complex array, rejecting non-finite entries."""
    vec = np.asarray(v, dtype=complex)
    if vec.ndim != 1:
        raise ValidationError(f"{what} must be 1-D, got shape {vec.shape}")
    if vec.size == 0:
        raise ValidationError(f"{what} must be nonempty")
    if not np.isfinite(vec).all():
        raise ValidationError(f"{what} contains non-finite entries")
    return vec


def dagger(a) -> np.ndarray:
    """Conjugate transpose."""
    return np.conj(np.asarray(a)).T


def op_norm(a) -> float:
    """Operator norm (largest singular value)."""
    m = np.asarray(a, dtype=complex)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def commutator(a, b) -> np.ndarray:
    """[a, b] = ab - ba."""
    a = as_matrix(a, square=True, what="commutator operand")
    b = as_matrix(b, square=True, what="commutator operand")
    if a.shape != b.shape:
        raise DimensionMismatch(f"commutator operands differ in shape: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def tensor(a, b) -> np.ndarray:
    """Kronecker product with the left factor on the slow index."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def hermiticity_residual(a) -> float:
    """Largest entrywise deviation of ``a`` from its adjoint."""
    m = np.asarray(a, dtype=complex)
    return float(np.abs(m - dagger(m)).max()) if m.size else 0.0


def require_hermitian(a, *, tol: float | None = None, what: str = "operator") -> np.ndarray:
    m = as_matrix(a, square=True, what=what)
    tol = tolerances.validate if tol is None else tol
    res = hermiticity_residual(m)
    if res > tol:
        raise ValidationError(f"{what} is not self-adjoint: residual {res:.3e} exceeds {tol:.1e}")
    return m


def herm_eig(a, *, tol: float | None = None):
    """Eigendecomposition of a self-adjoint operator.

    Parameters
    ----------
    a : array_like
        Square matrix, self-adjoint within ``tol`` (entrywise).
    tol : float, optional
        Hermiticity tolerance; defaults to ``tolerances.validate``.

    Returns
    -------
    eigenvalues : ndarray
        Real eigenvalues in ascending order.
    eigenvectors : ndarray
        Unitary matrix whose columns are the matching eigenvectors.
    """
    m = require_hermitian(a, tol=tol, what="herm_eig input")
    w, v = np.linalg.eigh(m)
    return w, v


def mat_exp_i(h, t: float = 1.0) -> np.ndarray:
    """exp(i t h) for self-adjoint ``h``, through the eigendecomposition."""
    w, v = herm_eig(h)
    phases = np.exp(1j * float(t) * w)
    return (v * phases) @ dagger(v)


def unitarity_residual(u, *, probes: int = 16) -> float:
    """Deviation of ``u`` from unitarity.

    For dimensions up to 1024 this is the largest entrywise residual of both
    Gram matrices; above that, the largest probe-vector residual over a
    deterministic pseudo-random sample (cheap, probabilistic).
    """
    m = as_matrix(u, square=True, what="unitary candidate")
    n = m.shape[0]
    if n <= _EXACT_UNITARITY_DIM:
        eye = np.eye(n)
        left = np.abs(dagger(m) @ m - eye).max()
        right = np.abs(m @ dagger(m) - eye).max()
        return float(max(left, right))
    rng = np.random.default_rng(8128)
    worst = 0.0
    for _ in range(probes):
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        v /= np.linalg.norm(v)
        worst = max(worst, float(np.linalg.norm(dagger(m) @ (m @ v) - v, np.inf)))
        worst = max(worst, float(np.linalg.norm(m @ (dagger(m) @ v) - v, np.inf)))
    return worst


def require_unitary(u, *, tol: float | None = None, what: str = "operator") -> np.ndarray:
    m = as_matrix(u, square=True, what=what)
    tol = tolerances.validate if tol is None else tol
    res = unitarity_residual(m)
    if res > tol:
        raise ValidationError(f"{what} is not unitary: residual {res:.3e} exceeds {tol:.1e}")
    return m


def projector(vec) -> np.ndarray:
    """Rank-one projector |v><v| for a unit vector."""
    v = as_state_array(vec)
    return np.outer(v, np.conj(v))


def orthonormal_extension(isometry) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the column span.

    Columns of ``isometry`` must be orthonormal.  The complement is built by
    Gram-Schmidt over the standard basis in index order, so the result is
    deterministic and reproduces canonical completions (e.g. the CNOT gate
    from the z-basis square-root coupling).
    """
    v = as_matrix(isometry, what="isometry")
    dim, k = v.shape
    if k > dim:
        raise DimensionMismatch("isometry has more columns than rows")
    gram = np.abs(dagger(v) @ v - np.eye(k)).max() if k else 0.0
    if gram > 1e-9:
        raise ValidationError(f"isometry columns are not orthonormal: residual {gram:.3e}")
    cols = [v[:, j] for j in range(k)]
    extra = []
    for i in range(dim):
        if len(cols) + len(extra) - k >= dim - k:
            break
        cand = np.zeros(dim, dtype=complex)
        cand[i] = 1.0
        for basis_vec in cols + extra:
            cand = cand - basis_vec * np.vdot(basis_vec, cand)
        norm = np.linalg.norm(cand)
        if norm < 1e-7:
            continue
        cand = cand / norm
        # second Gram-Schmidt pass for numerical orthogonality
        for basis_vec in cols + extra:
            cand = cand - basis_vec * np.vdot(basis_vec, cand)
        cand = cand / np.linalg.norm(cand)
        extra.append(cand)
    if len(extra) != dim - k:
        raise ValidationError("failed to complete the isometry to a unitary basis")
    if not extra:
        return np.zeros((dim, 0), dtype=complex)
    return np.column_stack(extra)


@dataclass(eq=False)
class StateVector:
    """Unit vector in C^d.

    The Euclidean norm must be 1 within ``tolerances.construct``; use
    :meth:`normalized` to rescale raw amplitude data.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        vec = as_state_array(self.amplitudes)
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > tolerances.construct:
            raise ValidationError(f"state vector norm {norm!r} deviates from 1 beyond {tolerances.construct:.1e}")
        self.amplitudes = vec

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        vec = as_state_array(amplitudes)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(vec / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "StateVector":
        if not 0 <= index < dim:
            raise ValidationError(f"basis index {index} out of range for dimension {dim}")
        vec = np.zeros(dim, dtype=complex)
        vec[index] = 1.0
        return cls(vec)

    @classmethod
    def coerce(cls, value) -> "StateVector":
        """Accept an existing StateVector or raw unit-norm amplitude data."""
        return value if isinstance(value, cls) else cls(value)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> "DensityOperator":
        return DensityOperator(projector(self.amplitudes))


@dataclass(eq=False)
class DensityOperator:
    """Self-adjoint, positive, trace-one operator."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, square=True, what="density operator")
        res = hermiticity_residual(m)
        if res > tolerances.construct:
            raise ValidationError(f"density operator not self-adjoint: residual {res:.3e}")
        m = (m + dagger(m)) / 2.0
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > tolerances.construct:
            raise ValidationError(f"density operator trace {trace!r} deviates from 1")
        low = float(np.linalg.eigvalsh(m).min())
        if low < -tolerances.construct:
            raise ValidationError(f"density operator has negative eigenvalue {low:.3e}")
        self.matrix = m

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityOperator":
        return state.density()

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(np.eye(dim, dtype=complex) / dim)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class CompositeSpace:
    """Ordered tensor product of finite-dimensional factors."""

    factor_dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise ValidationError(f"factor dimensions must be positive, got {self.factor_dims}")
        object.__setattr__(self, "factor_dims", dims)
        _check_dim_budget(self.dim, "composite space")

    @property
    def dim(self) -> int:
        return int(np.prod(self.factor_dims))

    @property
    def n_factors(self) -> int:
        return len(self.factor_dims)


def partial_trace(rho, space: CompositeSpace, keep: int) -> DensityOperator:
    """Trace out every leg of ``space`` except ``keep``.

    Parameters
    ----------
    rho : DensityOperator or array_like
        State on the full composite space.
    space : CompositeSpace
        Leg structure of ``rho``.
    keep : int
        Index of the leg to keep.

    Returns
    -------
    DensityOperator
        Reduced state on factor ``keep``.
    """
    mat = rho.matrix if isinstance(rho, DensityOperator) else as_matrix(rho, square=True, what="state")
    dims = space.factor_dims
    n = space.n_factors
    if mat.shape[0] != space.dim:
        raise DimensionMismatch(f"state dimension {mat.shape[0]} does not match composite dimension {space.dim}")
    if not 0 <= keep < n:
        raise ValidationError(f"keep index {keep} out of range for {n} legs")
    tens = mat.reshape(dims + dims)
    row = list(range(n))
    col = [i if i != keep else n for i in range(n)]
    reduced = np.einsum(tens, row + col, [keep, n])
    return DensityOperator(reduced)

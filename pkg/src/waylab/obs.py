"""Discrete observables with numeric value maps.

An observable is a finite POVM: an ordered outcome set, one effect per
outcome, plus a real value for each label.  Outcome geometry is either
linear or cyclic; cyclic sets support smearing by convolution and the
overall-width spread measure, both computed in index space.

Constructing a :class:`DiscreteObservable` checks structure only (shapes,
finiteness).  The POVM conditions are checked by :func:`validate_povm`,
which is report-style so deliberately broken inputs can be inspected, and
enforced by :func:`require_povm`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import (
    DensityOperator,
    DimensionMismatch,
    StateVector,
    ValidationError,
    as_matrix,
    commutator,
    hermiticity_residual,
    herm_eig,
    op_norm,
    require_unitary,
    tolerances,
)

__all__ = [
    "OutcomeSet",
    "cyclic_lattice",
    "ProbDist",
    "DiscreteObservable",
    "pvm_from_basis",
    "PovmReport",
    "validate_povm",
    "require_povm",
    "spectral_pvm",
    "born",
    "smear_cyclic",
    "variance",
    "overall_width",
    "observable_distance",
    "compatible",
]


@dataclass(frozen=True)
class OutcomeSet:
    """Ordered outcome labels with a real value per label.

    Parameters
    ----------
    labels : tuple
        Distinct hashable identifiers (ints or strings in practice).
    values : tuple of float
        Physical value assigned to each label, same order.
    cyclic : bool
        Cyclic geometry flag.  When set, index arithmetic modulo the label
        count is meaningful (smearing, width windows wrap around).
    """

    labels: tuple
    values: tuple
    cyclic: bool = False

    def __post_init__(self):
        labels = tuple(self.labels)
        values = tuple(float(v) for v in self.values)
        if not labels:
            raise ValidationError("outcome set must be nonempty")
        if len(set(labels)) != len(labels):
            raise ValidationError("outcome labels must be distinct")
        if len(values) != len(labels):
            raise DimensionMismatch(f"{len(labels)} labels but {len(values)} values")
        if not all(np.isfinite(values)):
            raise ValidationError("outcome values must be finite")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise ValidationError(f"unknown outcome label {label!r}") from None

    def value(self, label) -> float:
        return self.values[self.index(label)]


def cyclic_lattice(n: int, *, centered: bool = True) -> OutcomeSet:
    """Cyclic outcome set on Z_n with integer labels 0..n-1.

    Values are the centered residue representatives when ``centered`` (the
    range roughly -n/2..n/2), otherwise 0..n-1.
    """
    n = int(n)
    if n < 1:
        raise ValidationError(f"lattice size must be positive, got {n}")
    labels = tuple(range(n))
    if centered:
        half = n // 2
        values = tuple(float((j + half) % n - half) for j in labels)
    else:
        values = tuple(float(j) for j in labels)
    return OutcomeSet(labels, values, cyclic=True)


@dataclass(eq=False)
class ProbDist:
    """Probability distribution over an outcome set.

    Weights must be nonnegative and sum to 1 within 1e-12.
    """

    outcomes: OutcomeSet
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.shape[0] != self.outcomes.n:
            raise DimensionMismatch(f"expected {self.outcomes.n} weights, got shape {w.shape}")
        if not np.isfinite(w).all():
            raise ValidationError("weights must be finite")
        if w.min() < 0.0:
            raise ValidationError(f"weights must be nonnegative, min is {w.min():.3e}")
        total = float(w.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"weights sum to {total!r}, not 1")
        self.weights = w

    @classmethod
    def point_mass(cls, outcomes: OutcomeSet, label) -> "ProbDist":
        w = np.zeros(outcomes.n)
        w[outcomes.index(label)] = 1.0
        return cls(outcomes, w)

    @classmethod
    def uniform(cls, outcomes: OutcomeSet) -> "ProbDist":
        return cls(outcomes, np.full(outcomes.n, 1.0 / outcomes.n))

    def weight(self, label) -> float:
        return float(self.weights[self.outcomes.index(label)])

    def mean(self) -> float:
        return float(np.dot(self.weights, self.outcomes.values))


@dataclass(eq=False)
class DiscreteObservable:
    """Finite collection of effects indexed by an outcome set.

    ``basis`` and ``basis_partition`` are optional provenance for PVMs built
    from an orthonormal basis: effect i is the projector onto the basis
    columns listed in partition group i.  They make sharpness structural and
    let serialization round-trip exactly.
    """

    outcomes: OutcomeSet
    effects: tuple
    basis: np.ndarray | None = None
    basis_partition: tuple | None = None

    def __post_init__(self):
        effs = tuple(as_matrix(e, square=True, what="effect") for e in self.effects)
        if len(effs) != self.outcomes.n:
            raise DimensionMismatch(f"{self.outcomes.n} outcomes but {len(effs)} effects")
        dims = {e.shape[0] for e in effs}
        if len(dims) != 1:
            raise DimensionMismatch(f"effects live on different dimensions: {sorted(dims)}")
        self.effects = effs
        if self.basis is not None:
            b = as_matrix(self.basis, square=True, what="observable basis")
            if b.shape[0] != effs[0].shape[0]:
                raise DimensionMismatch("basis dimension does not match the effects")
            self.basis = b
            part = tuple(tuple(int(i) for i in grp) for grp in (self.basis_partition or ()))
            flat = [i for grp in part for i in grp]
            if len(part) != self.outcomes.n or sorted(flat) != list(range(b.shape[0])):
                raise ValidationError("basis partition must assign every basis column to exactly one outcome")
            self.basis_partition = part

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.outcomes.n

    def effect(self, label) -> np.ndarray:
        return self.effects[self.outcomes.index(label)]

    def operator(self) -> np.ndarray:
        """First-moment operator sum(value * effect)."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for v, e in zip(self.outcomes.values, self.effects):
            out += v * e
        return out

    def is_sharp(self, tol: float | None = None) -> bool:
        """Whether the effects are mutually orthogonal projections."""
        if self.basis is not None:
            return True
        tol = tolerances.validate if tol is None else tol
        for i, a in enumerate(self.effects):
            for j, b in enumerate(self.effects):
                target = a if i == j else 0.0
                if np.abs(a @ b - target).max() > tol:
                    return False
        return True


def pvm_from_basis(basis, partition, outcomes: OutcomeSet) -> DiscreteObservable:
    """PVM whose i-th effect projects onto the basis columns in group i.

    Parameters
    ----------
    basis : array_like
        Unitary matrix; columns are the measurement basis.
    partition : sequence of sequences of int
        One group of column indices per outcome, disjoint and covering all
        columns.
    outcomes : OutcomeSet
    """
    b = require_unitary(basis, what="measurement basis")
    part = tuple(tuple(int(i) for i in grp) for grp in partition)
    effects = []
    for grp in part:
        cols = b[:, list(grp)]
        effects.append(cols @ np.conj(cols).T)
    return DiscreteObservable(outcomes, tuple(effects), basis=b, basis_partition=part)


@dataclass(frozen=True)
class PovmReport:
    """Result of checking the POVM conditions.

    ``positivity_violation`` is the worst negative eigenvalue across effects
    (as a magnitude, 0 when all effects are positive) and
    ``normalisation_residual`` the operator norm of sum(effects) - identity.
    """

    ok: bool
    hermiticity_residual: float
    positivity_violation: float
    normalisation_residual: float


def validate_povm(obs: DiscreteObservable, tol: float | None = None) -> PovmReport:
    """Check self-adjointness, positivity, and normalisation of the effects."""
    tol = tolerances.validate if tol is None else tol
    herm = max(hermiticity_residual(e) for e in obs.effects)
    worst_neg = 0.0
    total = np.zeros((obs.dim, obs.dim), dtype=complex)
    for e in obs.effects:
        sym = (e + np.conj(e).T) / 2.0
        low = float(np.linalg.eigvalsh(sym).min())
        worst_neg = max(worst_neg, -low)
        total += e
    norm_res = op_norm(total - np.eye(obs.dim))
    ok = herm <= tol and worst_neg <= tol and norm_res <= tol
    return PovmReport(ok, float(herm), float(worst_neg), float(norm_res))


def require_povm(obs: DiscreteObservable, tol: float | None = None, what: str = "observable") -> DiscreteObservable:
    report = validate_povm(obs, tol)
    if not report.ok:
        raise ValidationError(
            f"{what} is not a valid POVM: hermiticity {report.hermiticity_residual:.3e}, "
            f"positivity {report.positivity_violation:.3e}, "
            f"normalisation {report.normalisation_residual:.3e}"
        )
    return obs


def spectral_pvm(a, merge_tol: float = 1e-8) -> DiscreteObservable:
    """Spectral measure of a self-adjoint operator.

    Eigenvalues closer than ``merge_tol`` are merged into one outcome whose
    value is the cluster mean and whose effect is the summed eigenprojection.
    Labels are decimal renderings of the values.
    """
    w, v = herm_eig(a)
    clusters = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] > merge_tol:
            clusters.append([i])
        else:
            clusters[-1].append(i)
    values = tuple(float(np.mean(w[c])) for c in clusters)
    labels = tuple(f"{x:.12g}" for x in values)
    if len(set(labels)) != len(labels):
        labels = tuple(f"{x:.17g}" for x in values)
    outcomes = OutcomeSet(labels, values)
    partition = tuple(tuple(c) for c in clusters)
    effects = []
    for c in partition:
        cols = v[:, list(c)]
        effects.append(cols @ np.conj(cols).T)
    return DiscreteObservable(outcomes, tuple(effects), basis=v, basis_partition=partition)


def born(rho, obs: DiscreteObservable) -> ProbDist:
    """Outcome distribution tr[rho E(x)].

    Accepts a DensityOperator, a StateVector, or a raw density matrix.
    Weights within -1e-12 of zero are clamped to 0; anything lower raises.
    """
    if isinstance(rho, StateVector):
        vec = rho.amplitudes
        if vec.shape[0] != obs.dim:
            raise DimensionMismatch(f"state dimension {vec.shape[0]} vs observable dimension {obs.dim}")
        raw = [float(np.real(np.vdot(vec, e @ vec))) for e in obs.effects]
    else:
        mat = rho.matrix if isinstance(rho, DensityOperator) else as_matrix(rho, square=True, what="state")
        if mat.shape[0] != obs.dim:
            raise DimensionMismatch(f"state dimension {mat.shape[0]} vs observable dimension {obs.dim}")
        raw = [float(np.real(np.trace(mat @ e))) for e in obs.effects]
    weights = []
    for x, p in zip(obs.outcomes.labels, raw):
        if p < -1e-12:
            raise ValidationError(f"negative probability {p:.3e} at outcome {x!r}")
        weights.append(max(p, 0.0))
    return ProbDist(obs.outcomes, np.asarray(weights))


def smear_cyclic(pvm: DiscreteObservable, kernel: ProbDist) -> DiscreteObservable:
    """Convolve a sharp cyclic observable with a noise kernel.

    Effect at index i becomes sum_j kernel[(i-j) mod N] * P_j, the reading
    distribution of "true value plus kernel-distributed shift".
    """
    if not pvm.outcomes.cyclic or not kernel.outcomes.cyclic:
        raise ValidationError("smear_cyclic needs cyclic outcome geometry on both arguments")
    n = pvm.outcomes.n
    if kernel.outcomes.n != n:
        raise DimensionMismatch(f"kernel has {kernel.outcomes.n} cells, observable has {n}")
    if not pvm.is_sharp():
        raise ValidationError("smear_cyclic input must be sharp")
    k = kernel.weights
    effects = []
    for i in range(n):
        acc = np.zeros((pvm.dim, pvm.dim), dtype=complex)
        for j in range(n):
            acc += k[(i - j) % n] * pvm.effects[j]
        effects.append(acc)
    return DiscreteObservable(pvm.outcomes, tuple(effects))


def variance(d: ProbDist) -> float:
    """Variance of the numeric value map under the distribution."""
    vals = np.asarray(d.outcomes.values)
    mean = float(np.dot(d.weights, vals))
    return float(np.dot(d.weights, (vals - mean) ** 2))


def overall_width(d: ProbDist, eps: float) -> int:
    """Minimal count of consecutive cells carrying mass at least 1-eps.

    Windows wrap around for cyclic outcome sets.  A slack of 1e-12 guards
    the comparison so exactly-attained thresholds count.
    """
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"eps must lie strictly between 0 and 1, got {eps}")
    w = d.weights
    n = w.shape[0]
    need = 1.0 - eps - 1e-12
    ext = np.concatenate([w, w]) if d.outcomes.cyclic else w
    prefix = np.concatenate([[0.0], np.cumsum(ext)])
    starts = n if d.outcomes.cyclic else None
    for width in range(1, n + 1):
        if d.outcomes.cyclic:
            sums = prefix[width:width + starts] - prefix[:starts]
        else:
            sums = prefix[width:] - prefix[:n - width + 1]
        if sums.size and float(sums.max()) >= need:
            return width
    return n


def observable_distance(e1: DiscreteObservable, e2: DiscreteObservable) -> float:
    """Worst-case effect discrepancy max_x ||e1(x) - e2(x)|| in operator norm.

    Upper-bounds the Born-probability difference at any state and outcome.
    """
    if e1.outcomes != e2.outcomes:
        raise DimensionMismatch("observables must share an outcome set")
    if e1.dim != e2.dim:
        raise DimensionMismatch(f"dimension mismatch: {e1.dim} vs {e2.dim}")
    return max(op_norm(a - b) for a, b in zip(e1.effects, e2.effects))


def compatible(e1: DiscreteObservable, e2: DiscreteObservable, tol: float | None = None) -> bool:
    """Whether every effect of e1 commutes with every effect of e2."""
    if e1.dim != e2.dim:
        raise DimensionMismatch(f"dimension mismatch: {e1.dim} vs {e2.dim}")
    tol = tolerances.validate if tol is None else tol
    for a in e1.effects:
        for b in e2.effects:
            if op_norm(commutator(a, b)) > tol:
                return False
    return True

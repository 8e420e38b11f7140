"""Measurement schemes and their audits.

A scheme couples the system to an apparatus by a unitary, prepares the
apparatus in a vector state, and reads a sharp pointer observable after the
interaction.  The scheme determines a unique system observable (the one
reproducing the pointer statistics on every input state); this module
extracts it and quantifies how far a scheme is from measuring a given
target, from repeatability, from conserving an additive quantity, and from
the Yanase condition.

Pointer readings are relabelled onto target outcomes by the scheme's
``relabel`` map, so pointer and target may use different value scales.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qcore import (
    CompositeSpace,
    DensityOperator,
    DimensionMismatch,
    StateVector,
    ValidationError,
    as_matrix,
    commutator,
    dagger,
    herm_eig,
    op_norm,
    orthonormal_extension,
    require_hermitian,
    require_unitary,
    tensor,
    tolerances,
)
from .obs import (
    DiscreteObservable,
    OutcomeSet,
    pvm_from_basis,
    require_povm,
)

__all__ = [
    "MeasurementScheme",
    "ConservedPair",
    "restrict",
    "heisenberg_pointer",
    "pointer_operator",
    "measured_observable",
    "prc_defect",
    "repeatability_defect",
    "conservation_defect",
    "yanase_defect",
    "weak_yanase_defect",
    "sqrt_coupling_scheme",
]


@dataclass(eq=False)
class MeasurementScheme:
    """Unitary measurement scheme with a sharp pointer.

    Parameters
    ----------
    system_dim, apparatus_dim : int
    coupling : array_like
        Unitary on system tensor apparatus, system leg first (slow index).
    pointer : DiscreteObservable
        PVM on the apparatus.
    apparatus_state : StateVector
        Apparatus preparation.
    relabel : dict, optional
        Total map from pointer outcome labels to target outcome labels.
        Defaults to the identity on the pointer labels.
    """

    system_dim: int
    apparatus_dim: int
    coupling: np.ndarray
    pointer: DiscreteObservable
    apparatus_state: StateVector
    relabel: dict = None

    def __post_init__(self):
        ds = int(self.system_dim)
        da = int(self.apparatus_dim)
        if ds < 1 or da < 1:
            raise ValidationError("scheme dimensions must be positive")
        CompositeSpace((ds, da))
        u = require_unitary(self.coupling, what="coupling")
        if u.shape[0] != ds * da:
            raise DimensionMismatch(f"coupling acts on dimension {u.shape[0]}, expected {ds * da}")
        if self.pointer.dim != da:
            raise DimensionMismatch(f"pointer dimension {self.pointer.dim} does not match apparatus {da}")
        require_povm(self.pointer, what="pointer")
        if not self.pointer.is_sharp():
            raise ValidationError("pointer must be sharp (projection valued)")
        self.apparatus_state = StateVector.coerce(self.apparatus_state)
        if self.apparatus_state.dim != da:
            raise DimensionMismatch(f"apparatus state dimension {self.apparatus_state.dim}, expected {da}")
        labels = self.pointer.outcomes.labels
        relabel = dict(self.relabel) if self.relabel is not None else {x: x for x in labels}
        missing = [x for x in labels if x not in relabel]
        if missing:
            raise ValidationError(f"relabel is not total on pointer labels, missing {missing}")
        extra = [x for x in relabel if x not in set(labels)]
        if extra:
            raise ValidationError(f"relabel has keys outside the pointer labels: {extra}")
        self.system_dim = ds
        self.apparatus_dim = da
        self.coupling = u
        self.relabel = relabel

    @property
    def total_dim(self) -> int:
        return self.system_dim * self.apparatus_dim


@dataclass(eq=False)
class ConservedPair:
    """Additive conserved quantity l_sys x 1 + 1 x l_app."""

    l_sys: np.ndarray
    l_app: np.ndarray

    def __post_init__(self):
        self.l_sys = require_hermitian(self.l_sys, what="system part of conserved quantity")
        self.l_app = require_hermitian(self.l_app, what="apparatus part of conserved quantity")

    def total(self) -> np.ndarray:
        ds = self.l_sys.shape[0]
        da = self.l_app.shape[0]
        return tensor(self.l_sys, np.eye(da)) + tensor(np.eye(ds), self.l_app)


def restrict(lam, sigma) -> np.ndarray:
    """Pull a joint operator back to the system through a fixed apparatus state.

    Returns the unique system operator G with tr[rho G] = tr[(rho x sigma) lam]
    for every system state rho; on product operators it acts as
    A x B -> A tr[B sigma].  Linear, unital, positive.
    """
    mat = as_matrix(lam, square=True, what="joint operator")
    sig = sigma.matrix if isinstance(sigma, DensityOperator) else as_matrix(sigma, square=True, what="apparatus state")
    da = sig.shape[0]
    total = mat.shape[0]
    if total % da != 0:
        raise DimensionMismatch(f"joint dimension {total} does not factor over apparatus dimension {da}")
    ds = total // da
    lam4 = mat.reshape(ds, da, ds, da)
    return np.einsum("satb,ba->st", lam4, sig)


def _check_conserved_dims(m: MeasurementScheme, c: ConservedPair) -> None:
    if c.l_sys.shape[0] != m.system_dim:
        raise DimensionMismatch(f"l_sys dimension {c.l_sys.shape[0]}, system is {m.system_dim}")
    if c.l_app.shape[0] != m.apparatus_dim:
        raise DimensionMismatch(f"l_app dimension {c.l_app.shape[0]}, apparatus is {m.apparatus_dim}")


def heisenberg_pointer(m: MeasurementScheme, x) -> np.ndarray:
    """Time-evolved pointer effect U*(I x Z(x))U on system tensor apparatus."""
    z = m.pointer.effect(x)
    joint = tensor(np.eye(m.system_dim), z)
    return dagger(m.coupling) @ joint @ m.coupling


def pointer_operator(m: MeasurementScheme) -> np.ndarray:
    """Pointer first-moment operator sum(value * Z(x)) on the apparatus."""
    return m.pointer.operator()


def _coupled_columns(m: MeasurementScheme) -> np.ndarray:
    """U (I x phi) as a (dS*dA, dS) block of columns."""
    v_phi = tensor(np.eye(m.system_dim), m.apparatus_state.amplitudes.reshape(-1, 1))
    return m.coupling @ v_phi


def _preimage_effects(m: MeasurementScheme, targets: OutcomeSet) -> list:
    """Summed pointer effect over the relabel preimage of each target label."""
    target_set = set(targets.labels)
    for x, y in m.relabel.items():
        if y not in target_set:
            raise ValidationError(f"relabel sends pointer outcome {x!r} to {y!r}, which is not a target label")
    da = m.apparatus_dim
    sums = {y: np.zeros((da, da), dtype=complex) for y in targets.labels}
    for x, y in m.relabel.items():
        sums[y] += m.pointer.effect(x)
    return [sums[y] for y in targets.labels]


def measured_observable(m: MeasurementScheme, targets: OutcomeSet) -> DiscreteObservable:
    """Extract the system observable the scheme measures.

    Effect at target label y is the restriction of the time-evolved pointer
    effect for the preimage f^{-1}(y), evaluated through the apparatus
    preparation; equivalently the unique POVM reproducing the relabelled
    pointer statistics on every input state.
    """
    w = _coupled_columns(m)
    wr = w.reshape(m.system_dim, m.apparatus_dim, m.system_dim)
    effects = []
    for z_sum in _preimage_effects(m, targets):
        e = np.einsum("sai,ab,sbj->ij", np.conj(wr), z_sum, wr)
        effects.append(e)
    out = DiscreteObservable(targets, tuple(effects))
    return require_povm(out, what="measured observable")


def prc_defect(m: MeasurementScheme, target: DiscreteObservable) -> float:
    """Worst-case deviation from probability reproducibility against a target.

    Zero exactly when the scheme's outcome statistics match the target's
    Born statistics on every input state.
    """
    from .obs import observable_distance

    if target.dim != m.system_dim:
        raise DimensionMismatch(f"target dimension {target.dim}, system is {m.system_dim}")
    measured = measured_observable(m, target.outcomes)
    return observable_distance(measured, target)


def repeatability_defect(m: MeasurementScheme, targets: OutcomeSet) -> float:
    """How far immediate repetition is from confirming the first outcome.

    For each target outcome y compares the two-step effect (measured effect
    on the system, pointer preimage on the apparatus, both after the
    coupling) with the single-step effect E(y); returns the worst operator
    norm difference.  Zero for every input state exactly when the scheme is
    repeatable.
    """
    measured = measured_observable(m, targets)
    w = _coupled_columns(m)
    wr = w.reshape(m.system_dim, m.apparatus_dim, m.system_dim)
    worst = 0.0
    for e_y, b_y in zip(measured.effects, _preimage_effects(m, targets)):
        two_step = np.einsum("sai,st,ab,tbj->ij", np.conj(wr), e_y, b_y, wr)
        worst = max(worst, op_norm(two_step - e_y))
    return worst


def conservation_defect(m: MeasurementScheme, c: ConservedPair) -> float:
    """Operator norm of [U, l_sys x 1 + 1 x l_app]."""
    _check_conserved_dims(m, c)
    return op_norm(commutator(m.coupling, c.total()))


def yanase_defect(m: MeasurementScheme, c: ConservedPair) -> float:
    """Operator norm of the pointer operator's commutator with l_app.

    Zero exactly when the pointer can be read without disturbing the
    apparatus share of the conserved quantity (the Yanase condition, taken
    at the level of the pointer first-moment operator).
    """
    _check_conserved_dims(m, c)
    return op_norm(commutator(pointer_operator(m), c.l_app))


def weak_yanase_defect(m: MeasurementScheme, c: ConservedPair) -> float:
    """Commutator norm of the time-evolved pointer operator with the total charge."""
    _check_conserved_dims(m, c)
    zhat = tensor(np.eye(m.system_dim), pointer_operator(m))
    evolved = dagger(m.coupling) @ zhat @ m.coupling
    return op_norm(commutator(evolved, c.total()))


def _psd_sqrt(e: np.ndarray) -> np.ndarray:
    w, v = herm_eig(e)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ dagger(v)


def sqrt_coupling_scheme(e: DiscreteObservable) -> MeasurementScheme:
    """Canonical scheme measuring a given POVM exactly.

    Uses a pointer space with one dimension per outcome, apparatus prepared
    in the first basis vector, and a unitary extending the isometry
    psi x e_0 -> sum_x sqrt(E(x)) psi x e_x.  The extension is completed by
    Gram-Schmidt over the standard basis in index order, which is
    deterministic (and reproduces the CNOT gate for the z-basis projective
    input).  Probability reproducibility is exact; for projective input the
    scheme is also repeatable.
    """
    require_povm(e, what="target observable")
    ds = e.dim
    k = e.n_outcomes
    CompositeSpace((ds, k))
    roots = [_psd_sqrt(eff) for eff in e.effects]
    # row index is composite (s, x) = s*k + x; column i is the image of |i> x |0>
    iso = np.zeros((ds * k, ds), dtype=complex)
    for x in range(k):
        for s in range(ds):
            iso[s * k + x, :] = roots[x][s, :]
    complement = orthonormal_extension(iso)
    u = np.zeros((ds * k, ds * k), dtype=complex)
    extra = 0
    for j in range(ds * k):
        if j % k == 0:
            u[:, j] = iso[:, j // k]
        else:
            u[:, j] = complement[:, extra]
            extra += 1
    pointer = pvm_from_basis(np.eye(k), tuple((i,) for i in range(k)), e.outcomes)
    phi = StateVector.basis(k, 0)
    return MeasurementScheme(ds, k, u, pointer, phi, relabel={x: x for x in e.outcomes.labels})

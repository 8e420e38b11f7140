"""Relativisation against a quantum reference frame.

A finite cyclic group acts on the system and on a reference space through
unitary representations.  The yen map turns a system operator into an
invariant joint operator by averaging conjugations against a covariant
reference observable; restricting back through a localised reference state
recovers the original operator up to a residual that shrinks as the state
localises.  This module provides the map, its structural properties
(invariance, homomorphism for sharp references), localisation, and the
square-root scheme that measures relativised observables.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .qcore import (
    DimensionMismatch,
    StateVector,
    ValidationError,
    as_matrix,
    dagger,
    herm_eig,
    op_norm,
    require_hermitian,
    tensor,
    tolerances,
)
from .obs import DiscreteObservable, observable_distance, require_povm
from .scheme import MeasurementScheme, sqrt_coupling_scheme

__all__ = [
    "CyclicGroup",
    "Representation",
    "CovariantObservable",
    "yen",
    "yen_povm",
    "invariance_defect",
    "homomorphism_defect",
    "localised_state",
    "restricted_yen",
    "relational_scheme",
    "BudgetResidual",
    "high_localisation_audit",
    "unsharp_reference",
]

# Exhaustive support search is used while C(dim, budget) stays below this;
# beyond it a deterministic window-seeded local search takes over.
_SUBSET_CAP = 20000


@dataclass(frozen=True)
class CyclicGroup:
    """Z_N with elements 0..N-1 under addition mod N."""

    order: int

    def __post_init__(self):
        n = int(self.order)
        if n < 1:
            raise ValidationError(f"group order must be positive, got {self.order}")
        object.__setattr__(self, "order", n)

    @property
    def elements(self) -> range:
        return range(self.order)

    @property
    def identity(self) -> int:
        return 0


@dataclass(eq=False)
class Representation:
    """Unitary representation of Z_N generated by a self-adjoint operator.

    U(k) = exp(i 2pi k (L - shift)/N), where ``shift`` is the common
    fractional offset of the generator spectrum.  The spectrum must lie in
    Z + shift within 1e-9 so that U(N) = I; subtracting the offset changes
    no commutator (the half-integer spin convention).
    """

    group: CyclicGroup
    generator: np.ndarray

    def __post_init__(self):
        gen = require_hermitian(self.generator, what="representation generator")
        w, v = herm_eig(gen)
        base = float(np.round(w[0]))
        shift = float(w[0]) - base
        residues = w - shift
        defect = float(np.abs(residues - np.round(residues)).max())
        if defect > 1e-9:
            raise ValidationError(
                f"generator spectrum is not integer after a global shift (residual {defect:.3e})"
            )
        self.generator = gen
        self.shift = shift
        n = self.group.order
        levels = np.round(residues)
        self._unitaries = tuple(
            (v * np.exp(2j * np.pi * k * levels / n)) @ dagger(v) for k in range(n)
        )

    @property
    def dim(self) -> int:
        return self.generator.shape[0]

    def unitary(self, k: int) -> np.ndarray:
        return self._unitaries[int(k) % self.group.order]


@dataclass(eq=False)
class CovariantObservable:
    """Reference observable with outcomes on the group, covariant under it.

    Conjugating effect j by U_R(k) must give effect j+k (mod N) within 1e-9.
    """

    rep: Representation
    obs: DiscreteObservable

    def __post_init__(self):
        n = self.rep.group.order
        if self.obs.dim != self.rep.dim:
            raise DimensionMismatch(
                f"observable dimension {self.obs.dim} does not match representation dimension {self.rep.dim}"
            )
        if self.obs.outcomes.labels != tuple(range(n)):
            raise ValidationError("covariant observable outcomes must be the group elements 0..N-1")
        require_povm(self.obs, what="reference observable")
        worst = 0.0
        for k in range(n):
            u = self.rep.unitary(k)
            for j in range(n):
                moved = u @ self.obs.effects[j] @ dagger(u)
                diff = moved - self.obs.effects[(j + k) % n]
                fro = float(np.linalg.norm(diff))
                worst = max(worst, fro if fro <= 1e-9 else op_norm(diff))
        if worst > 1e-9:
            raise ValidationError(f"observable is not covariant: defect {worst:.3e}")

    @property
    def group(self) -> CyclicGroup:
        return self.rep.group

    def effect(self, k: int) -> np.ndarray:
        return self.obs.effects[int(k) % self.group.order]


def _require_same_group(rep_s: Representation, f: CovariantObservable) -> int:
    if rep_s.group != f.rep.group:
        raise ValidationError(
            f"group mismatch: system representation on Z_{rep_s.group.order}, reference on Z_{f.rep.group.order}"
        )
    return rep_s.group.order


def yen(a, rep_s: Representation, f: CovariantObservable) -> np.ndarray:
    """Relativise a system operator against the reference.

    Returns sum_k U_S(k) a U_S(k)* tensor F(k) on system tensor reference.
    Positive, unital, linear; a *-homomorphism exactly when F is sharp.
    """
    n = _require_same_group(rep_s, f)
    mat = as_matrix(a, square=True, what="system operator")
    if mat.shape[0] != rep_s.dim:
        raise DimensionMismatch(f"operator dimension {mat.shape[0]}, system representation is {rep_s.dim}")
    out = np.zeros((rep_s.dim * f.rep.dim,) * 2, dtype=complex)
    for k in range(n):
        u = rep_s.unitary(k)
        out += tensor(u @ mat @ dagger(u), f.effect(k))
    return out


def yen_povm(e: DiscreteObservable, rep_s: Representation, f: CovariantObservable) -> DiscreteObservable:
    """Relativise a POVM effect-wise; outcome set is unchanged."""
    require_povm(e, what="observable to relativise")
    effects = tuple(yen(eff, rep_s, f) for eff in e.effects)
    return require_povm(DiscreteObservable(e.outcomes, effects), what="relativised observable")


def invariance_defect(op_sr, rep_s: Representation, rep_r: Representation) -> float:
    """Worst deviation of a joint operator from diagonal-action invariance.

    Maximizes op_norm((U_S(k) x U_R(k)) op (U_S(k) x U_R(k))* - op) over the
    group.  Zero on the range of the yen map.
    """
    if rep_s.group != rep_r.group:
        raise ValidationError("representations must share a group")
    mat = as_matrix(op_sr, square=True, what="joint operator")
    if mat.shape[0] != rep_s.dim * rep_r.dim:
        raise DimensionMismatch(
            f"operator dimension {mat.shape[0]}, expected {rep_s.dim * rep_r.dim}"
        )
    worst = 0.0
    for k in rep_s.group.elements:
        w = tensor(rep_s.unitary(k), rep_r.unitary(k))
        worst = max(worst, op_norm(w @ mat @ dagger(w) - mat))
    return worst


def homomorphism_defect(a, b, rep_s: Representation, f: CovariantObservable) -> float:
    """op_norm(yen(ab) - yen(a) yen(b)); vanishes for sharp references."""
    prod = yen(as_matrix(a, square=True) @ as_matrix(b, square=True), rep_s, f)
    return op_norm(prod - yen(a, rep_s, f) @ yen(b, rep_s, f))


def _support_value(g: np.ndarray, subset: tuple) -> float:
    block = g[np.ix_(subset, subset)]
    return float(np.linalg.eigvalsh(block)[-1])


def _window_candidates(n: int, budget: int) -> list:
    wins = []
    for start in range(n):
        win = tuple(sorted((start + i) % n for i in range(budget)))
        if win not in wins:
            wins.append(win)
    return wins


def _local_search(g: np.ndarray, n: int, budget: int, seeds: list) -> tuple:
    best = None
    best_val = -np.inf
    for cand in seeds:
        val = _support_value(g, cand)
        if val > best_val + 1e-12:
            best, best_val = cand, val
    for _ in range(50):
        improved = False
        members = list(best)
        outside = [i for i in range(n) if i not in best]
        for i, m in enumerate(members):
            for o in outside:
                trial = tuple(sorted(members[:i] + [o] + members[i + 1:]))
                val = _support_value(g, trial)
                if val > best_val + 1e-12:
                    best, best_val = trial, val
                    improved = True
        if not improved:
            break
    return best


def localised_state(f: CovariantObservable, at: int, budget: int | None = None) -> StateVector:
    """Reference state concentrating the F-distribution at a group element.

    Maximizes <eta|F(at)|eta> over states supported on at most ``budget``
    eigenvectors of the reference generator (unlimited when ``budget`` is
    None).  The search is exhaustive over supports while the subset count
    stays small, then falls back to a deterministic window-seeded local
    search.  With an unlimited budget and a sharp reference the probability
    reaches 1 exactly.
    """
    n = f.rep.dim
    if budget is None:
        budget = n
    budget = int(budget)
    if budget < 1:
        raise ValidationError(f"budget must be at least 1, got {budget}")
    if budget > n:
        raise ValidationError(f"budget {budget} exceeds the reference dimension {n}")
    _, v = herm_eig(f.rep.generator)
    g = dagger(v) @ f.effect(at) @ v
    g = (g + dagger(g)) / 2.0
    if budget == n:
        subset = tuple(range(n))
    elif math.comb(n, budget) <= _SUBSET_CAP:
        best, best_val = None, -np.inf
        for cand in itertools.combinations(range(n), budget):
            val = _support_value(g, cand)
            if val > best_val + 1e-12:
                best, best_val = cand, val
        subset = best
    else:
        subset = _local_search(g, n, budget, _window_candidates(n, budget))
    block = g[np.ix_(subset, subset)]
    _, vecs = np.linalg.eigh(block)
    top = vecs[:, -1]
    amp = np.zeros(n, dtype=complex)
    amp[list(subset)] = top
    eta = v @ amp
    lead = int(np.argmax(np.abs(eta)))
    phase = eta[lead] / abs(eta[lead])
    return StateVector.normalized(eta * np.conj(phase))


def restricted_yen(a, rep_s: Representation, f: CovariantObservable, eta: StateVector) -> np.ndarray:
    """Relativise and pull back through a reference state in one step.

    Returns sum_k <eta|F(k)|eta> U_S(k) a U_S(k)*, which equals
    restrict(yen(a), |eta><eta|).
    """
    n = _require_same_group(rep_s, f)
    mat = as_matrix(a, square=True, what="system operator")
    if eta.dim != f.rep.dim:
        raise DimensionMismatch(f"reference state dimension {eta.dim}, reference space is {f.rep.dim}")
    vec = eta.amplitudes
    out = np.zeros_like(mat)
    for k in range(n):
        weight = float(np.real(np.vdot(vec, f.effect(k) @ vec)))
        u = rep_s.unitary(k)
        out = out + weight * (u @ mat @ dagger(u))
    return out


def relational_scheme(e_tilde: DiscreteObservable) -> MeasurementScheme:
    """Scheme measuring a (typically relativised) joint observable exactly.

    Square-root coupling with one pointer dimension per outcome; probability
    reproducibility is exact, and projective inputs give a repeatable
    scheme.  No conservation property of the unitary completion is claimed.
    """
    return sqrt_coupling_scheme(e_tilde)


@dataclass(frozen=True)
class BudgetResidual:
    """One row of a localisation audit."""

    budget: int
    probability: float
    residual: float


def high_localisation_audit(
    e: DiscreteObservable,
    rep_s: Representation,
    f: CovariantObservable,
    budgets,
) -> tuple:
    """Residual of the restricted relativisation at growing localisation budgets.

    For each budget, localises the reference at the group identity, maps
    each effect of ``e`` through the restricted yen, and reports the
    distance to ``e`` together with the localisation probability achieved.
    """
    n = _require_same_group(rep_s, f)
    rows = []
    for budget in budgets:
        eta = localised_state(f, f.group.identity, budget)
        vec = eta.amplitudes
        prob = float(np.real(np.vdot(vec, f.effect(f.group.identity) @ vec)))
        induced = DiscreteObservable(
            e.outcomes,
            tuple(restricted_yen(eff, rep_s, f, eta) for eff in e.effects),
        )
        rows.append(BudgetResidual(int(budget), prob, observable_distance(induced, e)))
    return tuple(rows)


def unsharp_reference(f: CovariantObservable, mu: float) -> CovariantObservable:
    """Mix the reference with uniform noise: (1-mu) F(k) + mu I/N."""
    if not 0.0 <= mu <= 1.0:
        raise ValidationError(f"mixing weight must lie in [0, 1], got {mu}")
    n = f.rep.dim
    blur = mu * np.eye(n) / f.group.order
    effects = tuple((1.0 - mu) * eff + blur for eff in f.obs.effects)
    return CovariantObservable(f.rep, DiscreteObservable(f.obs.outcomes, effects))

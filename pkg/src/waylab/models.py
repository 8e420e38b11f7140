"""Canonical model constructors at desk scale.

Every family lives on finite cyclic registers.  Coupling strengths are
quantized in units of 2*pi/n so that position-difference phases are well
defined on Z_n; this is what makes the Ozawa lattice conserve the total
cyclic shift exactly, while the von Neumann lattice deliberately does not.

Discrete Fourier conventions: omega = exp(2i pi/n), momentum basis vectors
|k~> = n^{-1/2} sum_q omega^{qk} |q>, so the matrix F[q, k] = omega^{qk}/sqrt(n)
maps momentum amplitudes to position amplitudes.  A phase omega^{cq} diagonal
in position kicks momentum k -> k+c; a phase omega^{ck} diagonal in momentum
shifts position q -> q-c (both mod n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .qcore import StateVector, ValidationError, dagger, tensor
from .obs import (
    DiscreteObservable,
    OutcomeSet,
    ProbDist,
    cyclic_lattice,
    pvm_from_basis,
    spectral_pvm,
)
from .scheme import ConservedPair, MeasurementScheme, sqrt_coupling_scheme
from .relfr import CovariantObservable, CyclicGroup, Representation

__all__ = [
    "ModelDescriptor",
    "MODEL_FAMILIES",
    "fourier_matrix",
    "position_pvm",
    "momentum_pvm",
    "shift_generator",
    "relative_position_pvm",
    "make_swap",
    "make_lueders",
    "make_von_neumann_lattice",
    "von_neumann_kernel",
    "von_neumann_conserved_pair",
    "make_ozawa_lattice",
    "ozawa_relabel",
    "ozawa_apparatus_state",
    "ozawa_xi_for_profile",
    "ozawa_conserved_pair",
    "ozawa_measured_kernel",
    "ozawa_expected_kernel",
    "QubitRotorFamily",
    "make_qubit_rotor",
]

MODEL_FAMILIES = ("swap", "lueders", "von_neumann_lattice", "ozawa_lattice", "qubit_rotor")


@dataclass(frozen=True)
class ModelDescriptor:
    """Named model family plus its parameter map (CLI/JSON surface)."""

    family: str
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in MODEL_FAMILIES:
            raise ValidationError(f"unknown model family {self.family!r}; known: {MODEL_FAMILIES}")
        allowed = {
            "swap": {"dim"},
            "lueders": {},
            "von_neumann_lattice": {"n", "lam_index"},
            "ozawa_lattice": {"n", "lam_index", "reading"},
            "qubit_rotor": {"n"},
        }[self.family]
        bad = set(self.parameters) - set(allowed)
        if bad:
            raise ValidationError(f"family {self.family!r} does not take parameters {sorted(bad)}")


def fourier_matrix(n: int) -> np.ndarray:
    """F[q, k] = omega^{qk}/sqrt(n); columns are the momentum basis."""
    q = np.arange(n)
    return np.exp(2j * np.pi * np.outer(q, q) / n) / math.sqrt(n)


def position_pvm(n: int) -> DiscreteObservable:
    """Sharp cyclic position on C^n, labels 0..n-1, centered values."""
    return pvm_from_basis(np.eye(n), tuple((i,) for i in range(n)), cyclic_lattice(n))


def momentum_pvm(n: int) -> DiscreteObservable:
    """Sharp observable of the Fourier-conjugate basis."""
    return pvm_from_basis(fourier_matrix(n), tuple((i,) for i in range(n)), cyclic_lattice(n))


def shift_generator(n: int) -> np.ndarray:
    """Integer momentum generator: F diag(0..n-1) F*; generates position shifts."""
    f = fourier_matrix(n)
    return f @ np.diag(np.arange(n, dtype=float)) @ dagger(f)


def relative_position_pvm(n: int) -> DiscreteObservable:
    """Sharp relative position on C^n x C^n: outcome d collects (q1 - q2) mod n = d.

    Commutes with the simultaneous cyclic shift of both registers, so it is
    invariant under the conserved total momentum.
    """
    n = int(n)
    partition = tuple(
        tuple(q1 * n + q2 for q1 in range(n) for q2 in range(n) if (q1 - q2) % n == d)
        for d in range(n)
    )
    return pvm_from_basis(np.eye(n * n), partition, cyclic_lattice(n))


def make_swap(dim: int, pointer: DiscreteObservable, apparatus_state: StateVector | None = None) -> MeasurementScheme:
    """Scheme whose coupling exchanges system and apparatus.

    Transplants the pointer to the system exactly, whatever the apparatus
    preparation.
    """
    dim = int(dim)
    if pointer.dim != dim:
        raise ValidationError(f"pointer dimension {pointer.dim} does not match dim {dim}")
    swap = np.zeros((dim * dim, dim * dim))
    for i in range(dim):
        for j in range(dim):
            swap[j * dim + i, i * dim + j] = 1.0
    phi = apparatus_state if apparatus_state is not None else StateVector.basis(dim, 0)
    return MeasurementScheme(dim, dim, swap, pointer, phi)


def make_lueders(pvm: DiscreteObservable) -> MeasurementScheme:
    """Lueders coupling for a sharp observable.

    Sends psi x e_0 to sum_i P_i psi x e_i; for the z-basis PVM on a qubit
    the coupling is exactly the CNOT gate.  Measures the input exactly and
    repeatably.
    """
    if not pvm.is_sharp():
        raise ValidationError("make_lueders needs a sharp observable")
    return sqrt_coupling_scheme(pvm)


def _require_unit_quantum(n: int, lam_index: int, what: str) -> int:
    m = int(lam_index) % int(n)
    if m == 0 or math.gcd(m, n) != 1:
        raise ValidationError(
            f"{what}: lam_index must be a unit mod n for an invertible reading map, got {lam_index} mod {n}"
        )
    return m


def make_von_neumann_lattice(
    n: int, lam_index: int, apparatus_state: StateVector | None = None
) -> MeasurementScheme:
    """Position measurement by a momentum-generated shift of the probe.

    Coupling exp(i lam Q x P_A) with lam = lam_index*2pi/n acts as the
    controlled shift |q, a> -> |q, a - lam_index*q>.  The pointer is the
    probe position; reading a estimates position through the inverse shift.
    The measured observable is the position PVM smeared by a kernel set by
    the probe state (a position eigenstate gives a sharp measurement).
    Total cyclic momentum is NOT conserved by this coupling.
    """
    n = int(n)
    if n < 2:
        raise ValidationError(f"need n >= 2, got {n}")
    m = _require_unit_quantum(n, lam_index, "von Neumann lattice")
    u = np.zeros((n * n, n * n))
    for q in range(n):
        for a in range(n):
            u[q * n + (a - m * q) % n, q * n + a] = 1.0
    inv = pow(m, -1, n)
    relabel = {a: (-inv * a) % n for a in range(n)}
    phi = apparatus_state if apparatus_state is not None else StateVector.basis(n, 0)
    return MeasurementScheme(n, n, u, position_pvm(n), phi, relabel=relabel)


def von_neumann_kernel(n: int, lam_index: int, apparatus_state: StateVector | None = None) -> ProbDist:
    """Closed-form smearing kernel of the lattice model: |phi((-m t) mod n)|^2."""
    n = int(n)
    m = _require_unit_quantum(n, lam_index, "von Neumann lattice")
    phi = StateVector.coerce(apparatus_state) if apparatus_state is not None else StateVector.basis(n, 0)
    if phi.dim != n:
        raise ValidationError(f"probe state dimension {phi.dim}, expected {n}")
    amps = phi.amplitudes
    w = np.array([abs(amps[(-m * t) % n]) ** 2 for t in range(n)])
    return ProbDist(cyclic_lattice(n), w / w.sum())


def von_neumann_conserved_pair(n: int) -> ConservedPair:
    """Total cyclic momentum pair; the lattice coupling fails to conserve it."""
    g = shift_generator(int(n))
    return ConservedPair(g, g)


def _centered(x: int, n: int) -> int:
    return (int(x) + n // 2) % n - n // 2


def ozawa_relabel(n: int, lam_index: int) -> dict:
    """Reading map from the momentum-difference pointer to a shift estimate.

    Picks the shift d whose induced reading -2*m*d is closest (in centered
    residue) to the observed reading; ties prefer the smaller |d| and then
    the positive representative.  For odd n this is exactly the modular
    bijection u -> -(2m)^{-1} u.
    """
    n = int(n)
    m = _require_unit_quantum(n, lam_index, "Ozawa lattice")
    table = {}
    for u in range(n):
        best = min(
            range(n),
            key=lambda d: (
                abs(_centered(u + 2 * m * d, n)),
                abs(_centered(d, n)),
                0 if _centered(d, n) >= 0 else 1,
            ),
        )
        table[u] = best
    return table


def ozawa_apparatus_state(
    n: int,
    lam_index: int,
    xi_a: np.ndarray | None = None,
    xi_b: np.ndarray | None = None,
) -> StateVector:
    """Probe-pair state from momentum-space profiles.

    xi_a is the amplitude profile of the momentum difference k_B - k_A (the
    pointer variable), xi_b that of k_A itself; the joint momentum amplitude
    is xi_b(k_A) * xi_a(k_B - k_A).  xi_b drops out of the measured
    observable entirely.  Defaults: xi_a a delta at 0 (sharp relative
    measurement), xi_b uniform.
    """
    n = int(n)
    _require_unit_quantum(n, lam_index, "Ozawa lattice")
    if xi_a is None:
        xi_a = np.zeros(n, dtype=complex)
        xi_a[0] = 1.0
    if xi_b is None:
        xi_b = np.full(n, 1.0 / math.sqrt(n), dtype=complex)
    xi_a = np.asarray(xi_a, dtype=complex)
    xi_b = np.asarray(xi_b, dtype=complex)
    if xi_a.shape != (n,) or xi_b.shape != (n,):
        raise ValidationError(f"momentum profiles must have length {n}")
    hat = np.empty((n, n), dtype=complex)
    for ka in range(n):
        for kb in range(n):
            hat[ka, kb] = xi_b[ka] * xi_a[(kb - ka) % n]
    f = fourier_matrix(n)
    pos = tensor(f, f) @ hat.reshape(-1)
    return StateVector.normalized(pos)


def ozawa_xi_for_profile(n: int, lam_index: int, profile) -> np.ndarray:
    """Momentum-difference amplitudes realizing a target shift kernel.

    ``profile[t]`` is the desired kernel weight at relative-shift label t.
    Placement inverts the reading map: amplitude sqrt(profile[t]) goes to
    momentum-difference index (-2*m*t) mod n.  For even n that map collides
    on pairs t, t+n/2, so the profile must stay inside |centered(t)| < n/4.
    """
    n = int(n)
    m = _require_unit_quantum(n, lam_index, "Ozawa lattice")
    w = np.asarray(profile, dtype=float)
    if w.shape != (n,) or w.min() < 0 or w.sum() <= 0:
        raise ValidationError("profile must be a nonnegative length-n weight vector")
    w = w / w.sum()
    xi = np.zeros(n, dtype=complex)
    for t in range(n):
        if w[t] == 0.0:
            continue
        if abs(_centered(t, n)) >= n / 4 and n % 2 == 0:
            raise ValidationError(
                f"profile weight at shift {t} lies outside the alias-free window |t| < n/4"
            )
        slot = (-2 * m * t) % n
        if xi[slot] != 0.0:
            raise ValidationError(f"profile placement collides at momentum-difference index {slot}")
        xi[slot] = math.sqrt(w[t])
    return xi


def _ozawa_phase_diag(n: int, m: int) -> np.ndarray:
    roots = np.exp(2j * np.pi * np.arange(n) / n)
    diag = np.empty(n ** 4, dtype=complex)
    idx = 0
    for qs in range(n):
        for qr in range(n):
            d = qs - qr
            for qa in range(n):
                for qb in range(n):
                    diag[idx] = roots[(m * d * (qa - qb)) % n]
                    idx += 1
    return diag


def _ozawa_pointer(n: int, include_reference: bool) -> DiscreteObservable:
    f = fourier_matrix(n)
    basis = tensor(f, f)
    groups = {u: [] for u in range(n)}
    for ka in range(n):
        for kb in range(n):
            groups[(kb - ka) % n].append(ka * n + kb)
    if include_reference:
        basis = tensor(np.eye(n), basis)
        groups = {
            u: [r * n * n + c for r in range(n) for c in cols]
            for u, cols in groups.items()
        }
    partition = tuple(tuple(groups[u]) for u in range(n))
    return pvm_from_basis(basis, partition, cyclic_lattice(n))


def make_ozawa_lattice(
    n: int,
    lam_index: int,
    reading: str = "relative",
    phi: StateVector | None = None,
    xi_a: np.ndarray | None = None,
    xi_b: np.ndarray | None = None,
) -> MeasurementScheme:
    """Conserving position measurement on four cyclic registers.

    The coupling is diagonal in the joint position basis with phase
    omega^{m (q_S - q_R)(q_A - q_B)} where m = lam_index; it commutes exactly
    with the total cyclic shift of (S, R) and of (A, B).  The pointer is the
    momentum difference of the probe pair, relabelled by the reading map.

    reading="relative": system is S x R, apparatus A x B; the measured
    observable is the relative-position PVM smeared by the kernel
    |xi_a((-2mt) mod n)|^2 (exact for odd n).

    reading="absolute": system is S alone, apparatus R x A x B with the
    reference register prepared in ``phi``; the smearing kernel picks up an
    extra factor, the reflection of |phi|^2, by cyclic convolution.  The
    reflection is invisible for symmetric phi.
    """
    n = int(n)
    if not 3 <= n <= 8:
        raise ValidationError(f"need 3 <= n <= 8 (total dimension n^4 <= 4096), got {n}")
    m = _require_unit_quantum(n, lam_index, "Ozawa lattice")
    if reading not in ("relative", "absolute"):
        raise ValidationError(f"reading must be 'relative' or 'absolute', got {reading!r}")
    coupling = np.diag(_ozawa_phase_diag(n, m))
    probe = ozawa_apparatus_state(n, lam_index, xi_a, xi_b)
    relabel = ozawa_relabel(n, lam_index)
    if reading == "relative":
        pointer = _ozawa_pointer(n, include_reference=False)
        return MeasurementScheme(n * n, n * n, coupling, pointer, probe, relabel=relabel)
    ref = StateVector.coerce(phi) if phi is not None else StateVector.basis(n, 0)
    if ref.dim != n:
        raise ValidationError(f"reference state dimension {ref.dim}, expected {n}")
    pointer = _ozawa_pointer(n, include_reference=True)
    app_state = StateVector(np.kron(ref.amplitudes, probe.amplitudes))
    return MeasurementScheme(n, n ** 3, coupling, pointer, app_state, relabel=relabel)


def _momentum_sum_operator(n: int) -> np.ndarray:
    f2 = tensor(fourier_matrix(n), fourier_matrix(n))
    vals = np.array([float((ka + kb) % n) for ka in range(n) for kb in range(n)])
    return f2 @ np.diag(vals) @ dagger(f2)


def ozawa_conserved_pair(n: int) -> ConservedPair:
    """Exactly conserved pair for the relative reading: joint cyclic momenta.

    The system part is the mod-n momentum sum of (S, R), the apparatus part
    that of (A, B).  No additive pair exists for the absolute S | R,A,B
    split, which is the point of the relative reading.
    """
    g = _momentum_sum_operator(int(n))
    return ConservedPair(g, g)


def ozawa_measured_kernel(
    n: int,
    lam_index: int,
    reading: str = "relative",
    phi: StateVector | None = None,
    xi_a: np.ndarray | None = None,
    xi_b: np.ndarray | None = None,
) -> ProbDist:
    """Reading distribution at zero true shift, from the actual dynamics.

    Prepares position-zero system registers, applies the diagonal coupling
    to the n^4 state vector, Fourier-transforms the probe legs, accumulates
    pointer probabilities, and pushes them through the reading map.  Never
    materializes an n^4 x n^4 operator, so it is cheap even at n = 8.  The
    result is the smearing kernel of the measured observable.
    """
    n = int(n)
    m = _require_unit_quantum(n, lam_index, "Ozawa lattice")
    if reading not in ("relative", "absolute"):
        raise ValidationError(f"reading must be 'relative' or 'absolute', got {reading!r}")
    probe = ozawa_apparatus_state(n, lam_index, xi_a, xi_b)
    if reading == "relative":
        ref_amp = np.zeros(n, dtype=complex)
        ref_amp[0] = 1.0
    else:
        ref = StateVector.coerce(phi) if phi is not None else StateVector.basis(n, 0)
        if ref.dim != n:
            raise ValidationError(f"reference state dimension {ref.dim}, expected {n}")
        ref_amp = ref.amplitudes
    sys_amp = np.zeros(n, dtype=complex)
    sys_amp[0] = 1.0
    state = np.kron(sys_amp, np.kron(ref_amp, probe.amplitudes))
    state = state * _ozawa_phase_diag(n, m)
    tens = state.reshape(n, n, n, n)
    f_dag = np.conj(fourier_matrix(n)).T
    tens = np.einsum("xa,yb,srab->srxy", f_dag, f_dag, tens)
    probs = np.abs(tens) ** 2
    pointer_weight = np.zeros(n)
    for ka in range(n):
        for kb in range(n):
            pointer_weight[(kb - ka) % n] += probs[:, :, ka, kb].sum()
    relabel = ozawa_relabel(n, lam_index)
    w = np.zeros(n)
    for u in range(n):
        w[relabel[u]] += pointer_weight[u]
    return ProbDist(cyclic_lattice(n), w / w.sum())


def ozawa_expected_kernel(
    n: int,
    lam_index: int,
    reading: str = "relative",
    phi: StateVector | None = None,
    xi_a: np.ndarray | None = None,
) -> ProbDist:
    """Closed-form kernel: relabelled |xi_a|^2, convolved with the reflected
    |phi|^2 for the absolute reading."""
    n = int(n)
    _require_unit_quantum(n, lam_index, "Ozawa lattice")
    if xi_a is None:
        xi_a = np.zeros(n, dtype=complex)
        xi_a[0] = 1.0
    xi_a = np.asarray(xi_a, dtype=complex)
    relabel = ozawa_relabel(n, lam_index)
    base = np.zeros(n)
    for u in range(n):
        base[relabel[u]] += abs(xi_a[u]) ** 2
    base = base / base.sum()
    if reading == "relative":
        return ProbDist(cyclic_lattice(n), base)
    ref = StateVector.coerce(phi) if phi is not None else StateVector.basis(n, 0)
    rho = np.abs(ref.amplitudes) ** 2
    reflected = np.array([rho[(-t) % n] for t in range(n)])
    out = np.zeros(n)
    for s in range(n):
        for t in range(n):
            out[s] += base[t] * reflected[(s - t) % n]
    return ProbDist(cyclic_lattice(n), out / out.sum())


class QubitRotorFamily(NamedTuple):
    """System representation, covariant reference, and target observable."""

    rep_s: Representation
    reference: CovariantObservable
    target: DiscreteObservable


def make_qubit_rotor(n: int) -> QubitRotorFamily:
    """Spin-x measurement relativised against an n-level rotor.

    System C^2 with number generator diag(0, 1) (the half-integer spin shift
    already applied), reference C^n with generator diag(0..n-1), and the
    Fourier (angle) basis PVM as covariant reference observable.  The target
    is the x-spin PVM, noncommuting with the generator, so accuracy requires
    reference spread.
    """
    n = int(n)
    if n < 2:
        raise ValidationError(f"need n >= 2, got {n}")
    group = CyclicGroup(n)
    rep_s = Representation(group, np.diag([0.0, 1.0]))
    rep_r = Representation(group, np.diag(np.arange(n, dtype=float)))
    reference = CovariantObservable(
        rep_r,
        pvm_from_basis(fourier_matrix(n), tuple((i,) for i in range(n)), cyclic_lattice(n)),
    )
    sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]])
    return QubitRotorFamily(rep_s, reference, spectral_pvm(sigma_x))

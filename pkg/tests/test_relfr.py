import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from waylab.models import fourier_matrix, make_qubit_rotor, position_pvm, relative_position_pvm
from waylab.obs import (
    DiscreteObservable,
    OutcomeSet,
    cyclic_lattice,
    observable_distance,
    pvm_from_basis,
    spectral_pvm,
    validate_povm,
)
from waylab.qcore import StateVector, ValidationError, dagger, op_norm, projector, tensor
from waylab.relfr import (
    CovariantObservable,
    CyclicGroup,
    Representation,
    high_localisation_audit,
    homomorphism_defect,
    invariance_defect,
    localised_state,
    relational_scheme,
    restricted_yen,
    unsharp_reference,
    yen,
    yen_povm,
)
from waylab.scheme import prc_defect, repeatability_defect
from conftest import random_hermitian

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.diag([1.0, -1.0])
I2 = np.eye(2)


def z2_setup():
    group = CyclicGroup(2)
    rep_s = Representation(group, np.diag([0.0, 1.0]))
    rep_r = Representation(group, (np.eye(2) - SX) / 2)
    ref = CovariantObservable(
        rep_r,
        pvm_from_basis(np.eye(2), ((0,), (1,)), cyclic_lattice(2)),
    )
    return rep_s, rep_r, ref


def shift_rep(n):
    """Representation with U(k)|q> = |q+k mod n> on the position basis."""
    f = fourier_matrix(n)
    gen = f @ np.diag([(n - j) % n for j in range(n)]).astype(complex) @ dagger(f)
    return Representation(CyclicGroup(n), gen)


def test_cyclic_group():
    g = CyclicGroup(4)
    assert g.identity == 0
    assert list(g.elements) == [0, 1, 2, 3]
    with pytest.raises(ValidationError):
        CyclicGroup(0)


def test_representation_unitaries():
    rep = Representation(CyclicGroup(2), np.diag([0.0, 1.0]))
    assert np.allclose(rep.unitary(0), I2)
    assert np.allclose(rep.unitary(1), SZ)
    assert np.allclose(rep.unitary(2), I2)
    # half-integer spectra are accepted through the global shift; the
    # resulting unitary matches SZ up to an overall phase
    spin = Representation(CyclicGroup(2), np.diag([0.5, -0.5]))
    assert np.allclose(spin.unitary(1), np.diag([-1.0, 1.0]), atol=1e-12)
    assert np.allclose(
        spin.unitary(1) @ SX @ dagger(spin.unitary(1)),
        SZ @ SX @ dagger(SZ),
        atol=1e-12,
    )
    with pytest.raises(ValidationError, match="integer"):
        Representation(CyclicGroup(2), np.diag([0.0, 0.3]))


def test_shift_rep_moves_position():
    n = 4
    rep = shift_rep(n)
    u = rep.unitary(1)
    for q in range(n):
        moved = u @ np.eye(n)[:, q]
        assert np.allclose(moved, np.eye(n)[:, (q + 1) % n], atol=1e-12)


def test_covariant_observable_validation():
    n = 4
    rep = shift_rep(n)
    CovariantObservable(rep, position_pvm(n))
    # momentum projectors are fixed points of the shift, not covariant
    f = fourier_matrix(n)
    mom = pvm_from_basis(f, tuple((i,) for i in range(n)), cyclic_lattice(n))
    with pytest.raises(ValidationError, match="covariant"):
        CovariantObservable(rep, mom)


def test_yen_qubit_frozen():
    rep_s, _, ref = z2_setup()
    assert np.allclose(yen(SX, rep_s, ref), tensor(SX, SZ), atol=1e-12)
    assert np.allclose(yen(I2, rep_s, ref), np.eye(4), atol=1e-14)


def test_yen_linearity_and_positivity(rng):
    rep_s, _, ref = z2_setup()
    a = random_hermitian(rng, 2)
    b = random_hermitian(rng, 2)
    lhs = yen(2.0 * a - 1.5 * b, rep_s, ref)
    assert np.allclose(lhs, 2.0 * yen(a, rep_s, ref) - 1.5 * yen(b, rep_s, ref), atol=1e-12)
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    psd = z @ dagger(z)
    assert np.linalg.eigvalsh(yen(psd, rep_s, ref)).min() >= -1e-10


def test_yen_cyclic_position_gives_relative_position():
    n = 4
    rep = shift_rep(n)
    ref = CovariantObservable(rep, position_pvm(n))
    rel = yen_povm(position_pvm(n), rep, ref)
    assert observable_distance(rel, relative_position_pvm(n)) <= 1e-12


def test_invariance_of_yen_range(rng):
    for n in (2, 3, 6):
        rep = shift_rep(n)
        ref = CovariantObservable(rep, position_pvm(n))
        for _ in range(20):
            z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            out = yen(z, rep, ref)
            assert invariance_defect(out, rep, ref.rep) <= 1e-9


def test_invariance_detects_noninvariant():
    rep_s, rep_r, _ = z2_setup()
    assert invariance_defect(tensor(SX, I2), rep_s, rep_r) == pytest.approx(2.0, abs=1e-12)
    # the generator itself is invariant
    assert invariance_defect(tensor(rep_s.generator, I2), rep_s, rep_r) <= 1e-12


def test_homomorphism_defect_sharp_and_unsharp(rng):
    rep_s, _, ref = z2_setup()
    assert homomorphism_defect(I2, I2, rep_s, ref) <= 1e-14
    for _ in range(20):
        a = random_hermitian(rng, 2)
        b = random_hermitian(rng, 2)
        assert homomorphism_defect(a, b, rep_s, ref) <= 1e-10
    mu = 0.3
    blurred = unsharp_reference(ref, mu)
    got = homomorphism_defect(SX, SX, rep_s, blurred)
    assert got == pytest.approx(1.0 - (1.0 - mu) ** 2, abs=1e-12)
    assert got > 0.5


def test_unsharp_reference_stays_covariant_povm():
    _, _, ref = z2_setup()
    blurred = unsharp_reference(ref, 0.25)
    assert validate_povm(blurred.obs).ok
    with pytest.raises(ValidationError):
        unsharp_reference(ref, 1.5)


def test_localised_state_probabilities():
    n = 8
    fam = make_qubit_rotor(n)
    probs = []
    for budget in range(1, n + 1):
        eta = localised_state(fam.reference, 0, budget)
        p = np.vdot(eta.amplitudes, fam.reference.effect(0) @ eta.amplitudes).real
        probs.append(p)
        assert p == pytest.approx(budget / n, abs=1e-10)
        # deterministic phase: the dominant amplitude is real positive
        lead = eta.amplitudes[np.argmax(np.abs(eta.amplitudes))]
        assert abs(lead.imag) <= 1e-12
        assert lead.real > 0
    assert all(b >= a - 1e-12 for a, b in zip(probs, probs[1:]))
    with pytest.raises(ValidationError):
        localised_state(fam.reference, 0, 0)
    with pytest.raises(ValidationError):
        localised_state(fam.reference, 0, n + 1)


def test_localised_state_sharp_reference_hits_one():
    n = 4
    rep = shift_rep(n)
    ref = CovariantObservable(rep, position_pvm(n))
    eta = localised_state(ref, 2)
    p = np.vdot(eta.amplitudes, ref.effect(2) @ eta.amplitudes).real
    assert p == pytest.approx(1.0, abs=1e-12)


def test_restricted_yen_matches_restriction(rng):
    from waylab.scheme import restrict

    n = 8
    fam = make_qubit_rotor(n)
    a = random_hermitian(rng, 2)
    for budget in (1, 3, 8):
        eta = localised_state(fam.reference, 0, budget)
        direct = restricted_yen(a, fam.rep_s, fam.reference, eta)
        via_restrict = restrict(yen(a, fam.rep_s, fam.reference), eta.density())
        assert np.abs(direct - via_restrict).max() <= 1e-10


def test_restricted_yen_delta_and_uniform(rng):
    n = 4
    rep = shift_rep(n)
    ref = CovariantObservable(rep, position_pvm(n))
    a = random_hermitian(rng, n)
    # reference pinned at the identity element reproduces the operator
    delta = StateVector.basis(n, 0)
    assert np.abs(restricted_yen(a, rep, ref, delta) - a).max() <= 1e-12
    # totally delocalised reference returns the group average
    uniform = StateVector.normalized(np.ones(n))
    avg = sum(rep.unitary(k) @ a @ dagger(rep.unitary(k)) for k in range(n)) / n
    assert np.abs(restricted_yen(a, rep, ref, uniform) - avg).max() <= 1e-12


def test_restricted_yen_three_point_weights(rng):
    n = 8
    fam = make_qubit_rotor(n)
    rep = shift_rep(n)
    ref = CovariantObservable(rep, position_pvm(n))
    amp = np.zeros(n, dtype=complex)
    amp[0], amp[1], amp[n - 1] = np.sqrt(0.5), np.sqrt(0.25), np.sqrt(0.25)
    eta = StateVector(amp)
    a = random_hermitian(rng, n)
    u = rep.unitary(1)
    want = 0.5 * a + 0.25 * (u @ a @ dagger(u)) + 0.25 * (dagger(u) @ a @ u)
    assert np.abs(restricted_yen(a, rep, ref, eta) - want).max() <= 1e-10


def test_relational_scheme_trivial_and_pvm():
    # single-outcome observable: the scheme exists and is exact
    triv = DiscreteObservable(OutcomeSet(("all",), (0.0,)), (I2,))
    m = relational_scheme(triv)
    assert prc_defect(m, triv) <= 1e-12
    pz = spectral_pvm(SZ)
    m = relational_scheme(pz)
    assert prc_defect(m, pz) <= 1e-10
    assert repeatability_defect(m, pz.outcomes) <= 1e-10


def test_relational_scheme_relativised_sigma_x():
    n = 4
    group = CyclicGroup(n)
    rep_s = Representation(group, np.diag([0.0, 1.0]))
    rep_r = Representation(group, np.diag(np.arange(n, dtype=float)))
    ref = CovariantObservable(
        rep_r, pvm_from_basis(fourier_matrix(n), tuple((i,) for i in range(n)), cyclic_lattice(n))
    )
    rel = yen_povm(spectral_pvm(SX), rep_s, ref)
    assert rel.is_sharp(tol=1e-10)
    m = relational_scheme(rel)
    assert prc_defect(m, rel) <= 1e-10
    assert repeatability_defect(m, rel.outcomes) <= 1e-10


def test_high_localisation_audit_rotor():
    n = 8
    fam = make_qubit_rotor(n)
    rows = high_localisation_audit(fam.target, fam.rep_s, fam.reference, range(1, n + 1))
    assert [r.budget for r in rows] == list(range(1, n + 1))
    assert rows[0].residual == pytest.approx(0.5, abs=1e-10)
    for r in rows[:-1]:
        assert r.residual == pytest.approx(1.0 / (2.0 * r.budget), abs=1e-9)
        assert r.probability == pytest.approx(r.budget / n, abs=1e-10)
    assert rows[-1].residual <= 1e-12
    residuals = [r.residual for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(residuals, residuals[1:]))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10 ** 6))
def test_yen_povm_property(n, seed):
    rng = np.random.default_rng(seed)
    rep = shift_rep(n)
    ref = CovariantObservable(rep, position_pvm(n))
    h = random_hermitian(rng, n)
    rel = yen_povm(spectral_pvm(h), rep, ref)
    assert validate_povm(rel).ok
    for eff in rel.effects:
        assert invariance_defect(eff, rep, ref.rep) <= 1e-9

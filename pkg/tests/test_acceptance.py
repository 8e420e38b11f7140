"""End-to-end acceptance checks.

Each test prints one line, ``criterion NN <name>: PASS/FAIL (<detail>)``,
and asserts the stated bound.  Run with ``pytest tests/test_acceptance.py -s``
to see the lines for passing criteria too.
"""

import time

import numpy as np

import waylab.cli as cli
from waylab.models import (
    make_ozawa_lattice,
    make_qubit_rotor,
    make_swap,
    ozawa_conserved_pair,
    ozawa_expected_kernel,
    ozawa_measured_kernel,
    ozawa_xi_for_profile,
    position_pvm,
    relative_position_pvm,
)
from waylab.obs import (
    OutcomeSet,
    ProbDist,
    cyclic_lattice,
    observable_distance,
    overall_width,
    pvm_from_basis,
    smear_cyclic,
    spectral_pvm,
    variance,
)
from waylab.qcore import StateVector, commutator, dagger, mat_exp_i, op_norm, tensor
from waylab.relfr import (
    CovariantObservable,
    CyclicGroup,
    Representation,
    high_localisation_audit,
    homomorphism_defect,
    relational_scheme,
    unsharp_reference,
    yen,
    yen_povm,
)
from waylab.scheme import (
    ConservedPair,
    MeasurementScheme,
    conservation_defect,
    measured_observable,
    prc_defect,
    repeatability_defect,
    yanase_defect,
)
from waylab.io import parse_scheme_file, save_scheme_file, serialize_scheme
from waylab.way import (
    charge_block_unitary,
    noise_report,
    random_conserving_scheme,
    way_audit,
)
from conftest import random_hermitian, random_state

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.diag([1.0, -1.0])


def _report(num, name, ok, detail):
    line = f"criterion {num:02d} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


def test_criterion_01_way_impossibility():
    start = time.monotonic()
    qualified = 0
    violations = 0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        ds = int(rng.integers(2, 5))
        da = int(rng.integers(2, 5))
        m, pair, target = random_conserving_scheme(rng, system_dim=ds, apparatus_dim=da)
        if conservation_defect(m, pair) >= 1e-10 or yanase_defect(m, pair) >= 1e-10:
            continue
        comm = op_norm(commutator(target.operator(), pair.l_sys))
        if comm <= 1e-6:
            continue
        qualified += 1
        if prc_defect(m, target) < 1e-8:
            violations += 1
    elapsed = time.monotonic() - start
    _report(
        1,
        "WAY impossibility search",
        violations == 0 and qualified >= 100 and elapsed <= 60.0,
        f"{violations} exact measurements in {qualified} qualifying schemes, {elapsed:.1f}s",
    )


def test_criterion_02_swap_counterexample():
    px = spectral_pvm(SX)
    m = make_swap(2, px)
    pair = ConservedPair(SZ, SZ)
    prc = prc_defect(m, px)
    cons = conservation_defect(m, pair)
    yan = yanase_defect(m, pair)
    ok = prc <= 1e-12 and cons <= 1e-12 and abs(yan - 2.0) <= 1e-12
    _report(2, "swap counterexample", ok, f"prc {prc:.2e}, conservation {cons:.2e}, yanase {yan:.15g}")


def test_criterion_03_strong_way_invariance():
    rng = np.random.default_rng(31)
    worst = 0.0
    for _ in range(100):
        ds = int(rng.integers(2, 5))
        da = int(rng.integers(2, 5))
        l_sys = np.diag(rng.integers(0, 3, size=ds).astype(float))
        u = charge_block_unitary(np.repeat(np.diagonal(l_sys), da), rng)
        pointer = pvm_from_basis(
            np.eye(da), tuple((i,) for i in range(da)), cyclic_lattice(da, centered=False)
        )
        m = MeasurementScheme(ds, da, u, pointer, StateVector.normalized(random_state(rng, da)))
        meas = measured_observable(m, pointer.outcomes)
        for ell in (0.1, 0.7, 2.3):
            rot = mat_exp_i(l_sys, ell)
            for e in meas.effects:
                worst = max(worst, op_norm(rot @ e @ dagger(rot) - e))
    _report(3, "strong-WAY invariance", worst <= 1e-9, f"max defect {worst:.2e} over 100 couplings x 3 angles")


def test_criterion_04_noise_bound():
    rng = np.random.default_rng(47)
    violations = 0
    margin = np.inf
    for _ in range(500):
        m, pair, target = random_conserving_scheme(rng)
        phi = StateVector.normalized(random_state(rng, m.system_dim))
        rep = noise_report(m, pair, target.operator(), phi, targets=target.outcomes)
        if rep.epsilon_sq + 1e-9 < rep.bound_rhs:
            violations += 1
        margin = min(margin, rep.epsilon_sq - rep.bound_rhs)
    _report(4, "Robertson noise bound", violations == 0, f"{violations} violations in 500, worst margin {margin:.2e}")


def test_criterion_05_ozawa_lattice():
    n = 5
    profile = np.array([0.6, 0.4, 0, 0, 0])
    xi_a = ozawa_xi_for_profile(n, 1, profile)
    scheme = make_ozawa_lattice(n, 1, xi_a=xi_a)
    kern = ozawa_expected_kernel(n, 1, xi_a=xi_a)
    meas = measured_observable(scheme, cyclic_lattice(n))
    smear_dist = observable_distance(meas, smear_cyclic(relative_position_pvm(n), kern))
    cons = conservation_defect(scheme, ozawa_conserved_pair(n))

    n8 = 8
    prof8 = np.zeros(n8)
    prof8[0], prof8[1] = 0.7, 0.3
    xi8 = ozawa_xi_for_profile(n8, 1, prof8)
    phi8 = StateVector(np.array([np.sqrt(0.8), np.sqrt(0.2)] + [0.0] * (n8 - 2), dtype=complex))
    kern8 = ozawa_measured_kernel(n8, 1, reading="absolute", phi=phi8, xi_a=xi8)
    base8 = ozawa_expected_kernel(n8, 1, xi_a=xi8)
    rho = np.abs(phi8.amplitudes) ** 2
    reflected = ProbDist(cyclic_lattice(n8), np.array([rho[(-t) % n8] for t in range(n8)]))
    parts = variance(base8) + variance(reflected)
    rel_err = abs(variance(kern8) - parts) / parts
    ok = smear_dist <= 1e-9 and cons <= 1e-10 and rel_err <= 0.02
    _report(
        5,
        "Ozawa lattice",
        ok,
        f"n=5 smear distance {smear_dist:.2e}, conservation {cons:.2e}, n=8 variance split off by {rel_err:.2%}",
    )


def test_criterion_06_width_convolution_bound():
    rng = np.random.default_rng(61)
    violations = 0
    for _ in range(1000):
        n = int(rng.integers(8, 17))
        lat = cyclic_lattice(n, centered=False)
        span = max(n // 4, 2)

        def confined():
            w = np.zeros(n)
            w[:span] = rng.random(span)
            return ProbDist(lat, w / w.sum())

        d1, d2 = confined(), confined()
        e1 = float(rng.uniform(0.02, 0.2))
        e2 = float(rng.uniform(0.02, 0.2))
        conv = np.zeros(n)
        for k in range(n):
            conv[k] = sum(d1.weights[j] * d2.weights[(k - j) % n] for j in range(n))
        dconv = ProbDist(lat, conv / conv.sum())
        if overall_width(dconv, e1 + e2) > overall_width(d1, e1) + overall_width(d2, e2) - 1:
            violations += 1
    _report(6, "width convolution bound", violations == 0, f"{violations} violations in 1000 wraparound-free pairs")


def test_criterion_07_relativisation_algebra():
    from waylab.models import fourier_matrix

    rng = np.random.default_rng(71)
    worst_unital = 0.0
    worst_negative = 0.0
    worst_hom = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        f_mat = fourier_matrix(n)
        gen = f_mat @ np.diag([(n - j) % n for j in range(n)]).astype(complex) @ dagger(f_mat)
        rep = Representation(CyclicGroup(n), gen)
        ref = CovariantObservable(rep, position_pvm(n))
        worst_unital = max(worst_unital, np.abs(yen(np.eye(n), rep, ref) - np.eye(n * n)).max())
        z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        psd = z @ dagger(z)
        worst_negative = max(worst_negative, -float(np.linalg.eigvalsh(yen(psd, rep, ref)).min()))
        a = random_hermitian(rng, n)
        b = random_hermitian(rng, n)
        worst_hom = max(worst_hom, homomorphism_defect(a, b, rep, ref))
    group = CyclicGroup(2)
    rep_s = Representation(group, np.diag([0.0, 1.0]))
    rep_r = Representation(group, (np.eye(2) - SX) / 2)
    ref2 = CovariantObservable(rep_r, pvm_from_basis(np.eye(2), ((0,), (1,)), cyclic_lattice(2)))
    unsharp = homomorphism_defect(SX, SX, rep_s, unsharp_reference(ref2, 0.3))
    ok = worst_unital <= 1e-12 and worst_negative <= 1e-10 and worst_hom <= 1e-9 and unsharp > 1e-3
    _report(
        7,
        "relativisation algebra",
        ok,
        f"unitality {worst_unital:.2e}, positivity floor {worst_negative:.2e}, "
        f"homomorphism {worst_hom:.2e} over 200 pairs, unsharp defect {unsharp:.3f}",
    )


def test_criterion_08_localisation_limit():
    start = time.monotonic()
    n = 8
    fam = make_qubit_rotor(n)
    rows = high_localisation_audit(fam.target, fam.rep_s, fam.reference, range(1, n + 1))
    elapsed = time.monotonic() - start
    residuals = [r.residual for r in rows]
    ok = (
        residuals[-1] <= 1e-12
        and abs(residuals[0] - 0.5) <= 1e-10
        and all(b <= a + 1e-12 for a, b in zip(residuals, residuals[1:]))
        and elapsed <= 10.0
    )
    _report(
        8,
        "localisation limit",
        ok,
        f"residuals {residuals[0]:.3f} -> {residuals[-1]:.1e}, nonincreasing, {elapsed:.2f}s",
    )


def test_criterion_09_relational_scheme():
    n = 4
    group = CyclicGroup(n)
    rep_s = Representation(group, np.diag([0.0, 1.0]))
    rep_r = Representation(group, np.diag(np.arange(n, dtype=float)))
    from waylab.models import fourier_matrix

    ref = CovariantObservable(
        rep_r, pvm_from_basis(fourier_matrix(n), tuple((i,) for i in range(n)), cyclic_lattice(n))
    )
    rel = yen_povm(spectral_pvm(SX), rep_s, ref)
    m = relational_scheme(rel)
    prc = prc_defect(m, rel)
    rep_def = repeatability_defect(m, rel.outcomes)
    ok = prc <= 1e-10 and rep_def <= 1e-10
    _report(9, "relational scheme", ok, f"prc {prc:.2e}, repeatability {rep_def:.2e}")


def test_criterion_10_cli_determinism(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    args = ["sweep", "--n", "6", "--budgets", "1..6", "--seed", "11"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    identical = a.read_bytes() == b.read_bytes()

    px = spectral_pvm(SX)
    scheme = make_swap(2, px)
    pair = ConservedPair(SZ, SZ)
    path = tmp_path / "scheme.json"
    save_scheme_file(path, scheme, conserved=pair, target=px)
    parsed = parse_scheme_file(path)
    exact = (
        np.array_equal(parsed.scheme.coupling, scheme.coupling)
        and np.array_equal(parsed.scheme.apparatus_state.amplitudes, scheme.apparatus_state.amplitudes)
        and all(np.array_equal(x, y) for x, y in zip(parsed.scheme.pointer.effects, scheme.pointer.effects))
        and np.array_equal(parsed.conserved.l_sys, pair.l_sys)
        and all(np.array_equal(x, y) for x, y in zip(parsed.target.effects, px.effects))
        and serialize_scheme(parsed.scheme, conserved=parsed.conserved, target=parsed.target)
        == serialize_scheme(scheme, conserved=pair, target=px)
    )
    ok = identical and exact
    _report(10, "CLI determinism", ok, f"csv byte-identical: {identical}, round trip bit-exact: {exact}")

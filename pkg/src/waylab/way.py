"""WAY-theorem analysis.

The impossibility side: under additive conservation plus the Yanase
condition or repeatability, a sharp target noncommuting with the system
charge cannot be measured exactly.  `way_audit` classifies a concrete
scheme against that statement, and `noise_report` evaluates the Robertson
error bound that quantifies it.  The positive side: accuracy can be bought
with apparatus/reference spread, quantified by `error_vs_spread_sweep`.

Random conserving schemes for searches are built block-Haar per eigenspace
of the total charge, so conservation holds exactly by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .qcore import (
    InvariantViolation,
    StateVector,
    ValidationError,
    commutator,
    dagger,
    op_norm,
    require_hermitian,
    tensor,
)
from .obs import (
    DiscreteObservable,
    OutcomeSet,
    ProbDist,
    cyclic_lattice,
    overall_width,
    pvm_from_basis,
    variance,
)
from .scheme import (
    ConservedPair,
    MeasurementScheme,
    conservation_defect,
    prc_defect,
    repeatability_defect,
    yanase_defect,
)

__all__ = [
    "NoiseReport",
    "noise_report",
    "WayAudit",
    "way_audit",
    "SweepRow",
    "error_vs_spread_sweep",
    "haar_unitary",
    "charge_block_unitary",
    "random_conserving_scheme",
]

_OK_TOL = 1e-10


@dataclass(frozen=True)
class NoiseReport:
    """State-wise noise second moment against its Robertson lower bound.

    ``epsilon_sq`` is <N^2> for the noise operator N = Zhat(tau) - A x 1,
    ``delta_l_sq`` the summed charge variance of the product state, and
    ``bound_rhs`` = |<[N, L]>|^2 / (4 delta_l_sq).  When the charge variance
    vanishes the bound degenerates; ``degenerate`` flags that and the bound
    is reported as 0.
    """

    epsilon_sq: float
    bound_rhs: float
    delta_l_sq: float
    commutator_expect: complex
    degenerate: bool = False

    def __post_init__(self):
        if self.delta_l_sq > 1e-14 and self.epsilon_sq < self.bound_rhs - 1e-9:
            raise InvariantViolation(
                f"noise bound inverted: epsilon_sq {self.epsilon_sq:.6e} < rhs {self.bound_rhs:.6e}"
            )


def _variance(op: np.ndarray, vec: np.ndarray) -> float:
    mean = float(np.real(np.vdot(vec, op @ vec)))
    second = float(np.real(np.vdot(op @ vec, op @ vec)))
    return max(second - mean * mean, 0.0)


def noise_report(
    m: MeasurementScheme,
    c: ConservedPair,
    a,
    phi: StateVector,
    targets: OutcomeSet | None = None,
) -> NoiseReport:
    """Robertson bound data for one scheme, charge, target operator, and state.

    The time-evolved pointer is made numeric by assigning each pointer
    outcome the value of its relabelled target outcome; pass ``targets``
    when the relabel leaves the pointer's own value scale.  All expectations
    are taken in phi x apparatus_state.
    """
    a = require_hermitian(a, what="target operator")
    if a.shape[0] != m.system_dim:
        raise ValidationError(f"target operator dimension {a.shape[0]}, system is {m.system_dim}")
    if phi.dim != m.system_dim:
        raise ValidationError(f"system state dimension {phi.dim}, expected {m.system_dim}")
    scale = targets if targets is not None else m.pointer.outcomes
    zhat_app = np.zeros((m.apparatus_dim, m.apparatus_dim), dtype=complex)
    for x, eff in zip(m.pointer.outcomes.labels, m.pointer.effects):
        zhat_app += scale.value(m.relabel[x]) * eff
    u = m.coupling
    zhat_tau = dagger(u) @ tensor(np.eye(m.system_dim), zhat_app) @ u
    noise = zhat_tau - tensor(a, np.eye(m.apparatus_dim))
    joint = np.kron(phi.amplitudes, m.apparatus_state.amplitudes)
    epsilon_sq = float(np.real(np.vdot(noise @ joint, noise @ joint)))
    delta_l_sq = _variance(c.l_sys, phi.amplitudes) + _variance(c.l_app, m.apparatus_state.amplitudes)
    comm = commutator(noise, c.total())
    expect = complex(np.vdot(joint, comm @ joint))
    degenerate = delta_l_sq <= 1e-14
    rhs = 0.0 if degenerate else (abs(expect) ** 2) / (4.0 * delta_l_sq)
    return NoiseReport(epsilon_sq, rhs, delta_l_sq, expect, degenerate)


@dataclass(frozen=True)
class WayAudit:
    """Classification of a scheme against the impossibility statement.

    verdict is one of:
      consistent -- the theorem's hypotheses all hold and nothing forbidden
        happened (inexact measurement, or a commuting target);
      hypothesis_violated -- conservation or both disjuncts (Yanase,
        repeatability) fail; ``violated`` names the failing ones;
      exact_measurement_of_noninvariant -- hypotheses hold, the target does
        not commute with the system charge, yet the measurement is exact.
        That contradicts the theorem and signals a bug.
    """

    conservation_ok: bool
    yanase_ok: bool
    repeatability_ok: bool
    conservation_defect: float
    yanase_defect: float
    repeatability_defect: float
    prc_defect_vs_target: float
    commutator_norm: float
    verdict: str
    violated: tuple = ()


def way_audit(
    m: MeasurementScheme, c: ConservedPair, target: DiscreteObservable, tol: float = _OK_TOL
) -> WayAudit:
    """Audit one scheme against the WAY impossibility statement.

    ``tol`` decides when a defect counts as zero (hypothesis satisfied /
    measurement exact); the noncommutativity threshold stays at 1e-8.
    """
    if not target.is_sharp():
        raise ValidationError("way_audit target must be sharp")
    if not tol > 0:
        raise ValidationError(f"tolerance must be positive, got {tol}")
    cons = conservation_defect(m, c)
    yan = yanase_defect(m, c)
    rep = repeatability_defect(m, target.outcomes)
    prc = prc_defect(m, target)
    comm = op_norm(commutator(target.operator(), c.l_sys))
    cons_ok = cons <= tol
    yan_ok = yan <= tol
    rep_ok = rep <= tol
    engaged = cons_ok and (yan_ok or rep_ok)
    if engaged and prc <= tol and comm > 1e-8:
        verdict, violated = "exact_measurement_of_noninvariant", ()
    elif engaged:
        verdict, violated = "consistent", ()
    else:
        names = []
        if not cons_ok:
            names.append("conservation")
        if not yan_ok:
            names.append("yanase")
        if not rep_ok:
            names.append("repeatability")
        verdict, violated = "hypothesis_violated", tuple(names)
    return WayAudit(
        conservation_ok=cons_ok,
        yanase_ok=yan_ok,
        repeatability_ok=rep_ok,
        conservation_defect=cons,
        yanase_defect=yan,
        repeatability_defect=rep,
        prc_defect_vs_target=prc,
        commutator_norm=comm,
        verdict=verdict,
        violated=violated,
    )


@dataclass(frozen=True)
class SweepRow:
    budget: int
    spread_variance: float
    spread_width: int
    min_error: float


def _rotor_error(amps: np.ndarray) -> float:
    """Induced error of the qubit-rotor family for a unit reference vector.

    Equals the observable distance between the sigma_x target and its
    restricted relativisation: both effects shift by the same off-diagonal
    deficit, giving |1 - <eta|V eta>|/2 with V the cyclic index shift.
    """
    c = complex(np.vdot(amps, np.roll(amps, -1)))
    return abs(1.0 - c) / 2.0


def _embed(support, params, n):
    k = len(support)
    amps = params[:k] + 1j * params[k:]
    norm = np.linalg.norm(amps)
    if norm < 1e-9:
        return None
    vec = np.zeros(n, dtype=complex)
    vec[list(support)] = amps / norm
    return vec


def _window_eigenstate(window, n):
    """Top eigenvector of the symmetrized shift compressed to the window."""
    k = len(window)
    shift = np.zeros((n, n))
    for m in range(n):
        shift[m, (m + 1) % n] = 1.0
    block = shift[np.ix_(window, window)]
    sym = (block + block.T) / 2.0
    _, vecs = np.linalg.eigh(sym)
    vec = np.zeros(n, dtype=complex)
    vec[list(window)] = vecs[:, -1]
    return vec


def error_vs_spread_sweep(family: str, n: int, budgets, eps: float = 0.05, seed: int = 0) -> list:
    """Best achievable error per reference spread budget.

    For each budget M, minimizes the induced-observable distance to the
    family target over reference states supported on at most M generator
    eigenstates.  Candidates are exhaustive cyclic windows seeded with
    phase-uniform profiles and a per-window eigenvector profile, plus a
    seeded random start and the previous budget's optimum (which makes the
    minimum nonincreasing by construction); the best candidate gets a
    Powell polish.  Deterministic for a fixed seed.  Rows come back in
    ascending budget order with the chosen state's generator-distribution
    variance and overall width.
    """
    if family.replace("-", "_") != "qubit_rotor":
        raise ValidationError(f"unknown sweep family {family!r}; available: qubit-rotor")
    n = int(n)
    if n < 2:
        raise ValidationError(f"need n >= 2, got {n}")
    budgets = sorted({int(b) for b in budgets})
    if not budgets or budgets[0] < 1 or budgets[-1] > n:
        raise ValidationError(f"budgets must lie in 1..{n}, got {budgets}")
    rng = np.random.default_rng(seed)
    spread_outcomes = cyclic_lattice(n, centered=False)
    rows = []
    prev = None
    for budget in budgets:
        windows = [tuple((s + i) % n for i in range(budget)) for s in range(n)]
        candidates = []
        for window in windows:
            uniform = np.zeros(n, dtype=complex)
            uniform[list(window)] = 1.0 / np.sqrt(budget)
            candidates.append((window, uniform))
            candidates.append((window, _window_eigenstate(window, n)))
        noise = rng.normal(size=2 * budget)
        rand = _embed(windows[0], noise, n)
        if rand is not None:
            candidates.append((windows[0], rand))
        if prev is not None:
            candidates.append(prev)
        best_support, best_vec = candidates[0]
        best_error = _rotor_error(best_vec)
        for support, vec in candidates[1:]:
            err = _rotor_error(vec)
            if err < best_error - 1e-12:
                best_support, best_vec, best_error = support, vec, err
        x0 = np.concatenate([best_vec[list(best_support)].real, best_vec[list(best_support)].imag])
        res = minimize(
            lambda p: (lambda v: _rotor_error(v / np.linalg.norm(v)) if v is not None else 1.0)(
                _embed(best_support, p, n)
            ),
            x0,
            method="Powell",
            options={"xtol": 1e-10, "ftol": 1e-14, "maxiter": 40},
        )
        polished = _embed(best_support, res.x, n)
        if polished is not None and _rotor_error(polished) < best_error:
            best_vec, best_error = polished, _rotor_error(polished)
        weights = np.abs(best_vec) ** 2
        dist = ProbDist(spread_outcomes, weights / weights.sum())
        rows.append(
            SweepRow(
                budget=budget,
                spread_variance=variance(dist),
                spread_width=overall_width(dist, eps),
                min_error=float(best_error),
            )
        )
        prev = (best_support, best_vec)
    for earlier, later in zip(rows, rows[1:]):
        if later.min_error > earlier.min_error + 1e-12:
            raise InvariantViolation("sweep minimum increased with budget; optimizer invariant broken")
    return rows


def haar_unitary(dim: int, rng) -> np.ndarray:
    """Haar-distributed unitary via QR with the standard phase fix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def charge_block_unitary(levels, rng) -> np.ndarray:
    """Random unitary commuting exactly with diag(levels).

    Haar blocks act within each group of equal entries of ``levels``, so the
    commutant membership is structural, not numerical.
    """
    levels = np.asarray(levels)
    dim = levels.shape[0]
    u = np.zeros((dim, dim), dtype=complex)
    for value in np.unique(levels):
        idx = np.flatnonzero(levels == value)
        u[np.ix_(idx, idx)] = haar_unitary(len(idx), rng)
    return u


def random_conserving_scheme(rng, system_dim: int = 3, apparatus_dim: int = 3):
    """Random scheme satisfying conservation and Yanase exactly.

    Integer diagonal charges on both sides (drawn from a small range so
    eigenvalue sums collide and the commutant is rich), a block-Haar
    coupling, and the computational pointer with a random relabel onto a
    two-outcome Haar target PVM.  Returns (scheme, conserved_pair, target).
    """
    ds, da = int(system_dim), int(apparatus_dim)
    l_sys = np.diag(rng.integers(0, 3, size=ds).astype(float))
    l_app = np.diag(rng.integers(0, 3, size=da).astype(float))
    joint = np.add.outer(np.diagonal(l_sys), np.diagonal(l_app)).reshape(-1)
    u = charge_block_unitary(joint, rng)
    pointer = pvm_from_basis(
        np.eye(da), tuple((i,) for i in range(da)), cyclic_lattice(da, centered=False)
    )
    target_labels = OutcomeSet(("0", "1"), (0.0, 1.0))
    basis = haar_unitary(ds, rng)
    rank = int(rng.integers(1, ds))
    target = pvm_from_basis(basis, (tuple(range(rank)), tuple(range(rank, ds))), target_labels)
    relabel = {x: str(int(rng.integers(0, 2))) for x in pointer.outcomes.labels}
    phi_raw = rng.normal(size=da) + 1j * rng.normal(size=da)
    scheme = MeasurementScheme(
        ds, da, u, pointer, StateVector.normalized(phi_raw), relabel=relabel
    )
    return scheme, ConservedPair(l_sys, l_app), target

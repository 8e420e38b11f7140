"""Batch experiment runner.

Four commands:

* ``audit``       -- defects and WAY verdict for a scheme, as a JSON report
* ``sweep``       -- best error vs reference spread budget, as CSV
* ``bound``       -- noise second moments against the Robertson bound, as CSV
* ``relativise``  -- relativisation demos: a worked two-element example, or a
                     localisation audit CSV for the qubit-rotor family

Exit codes: 0 completed, 1 invalid input, 2 an invariant-violation finding
(an exact measurement of a noninvariant target, an inverted noise bound, a
non-monotone sweep).  Findings signal bugs, not bad input.  CSV output is
byte-identical across reruns with the same flags and seed.
"""

import argparse
import json
import os
import re
import sys

import numpy as np

from . import models
from .io import parse_scheme_file, write_csv
from .obs import spectral_pvm
from .qcore import InvariantViolation, StateVector, ValidationError
from .relfr import (
    CovariantObservable,
    CyclicGroup,
    Representation,
    high_localisation_audit,
    homomorphism_defect,
    invariance_defect,
    unsharp_reference,
    yen,
)
from .obs import cyclic_lattice, pvm_from_basis
from .scheme import (
    ConservedPair,
    conservation_defect,
    prc_defect,
    repeatability_defect,
    weak_yanase_defect,
    yanase_defect,
)
from .way import error_vs_spread_sweep, noise_report, way_audit

__all__ = ["main"]

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FINDING = 2

_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_PAULI_Z = np.diag([1.0, -1.0])


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags by default; 2 is reserved for findings here.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _normalize_family(name: str) -> str:
    return name.strip().replace("-", "_")


def _parse_budgets(spec: str | None, n: int):
    if spec is None:
        return list(range(1, n + 1))
    spec = spec.strip()
    m = re.fullmatch(r"(\d+)\.\.(\d+)", spec)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if lo > hi:
            raise ValidationError(f"empty budget range {spec!r}")
        return list(range(lo, hi + 1))
    try:
        return [int(tok) for tok in spec.split(",") if tok.strip()]
    except ValueError:
        raise ValidationError(f"cannot parse budgets {spec!r}; use '1..8' or '1,2,4'") from None


def _state_grid(count: int, dim: int, seed: int):
    """Deterministic family of unit vectors; a Fibonacci Bloch grid for qubits."""
    if dim == 2:
        golden = np.pi * (3.0 - np.sqrt(5.0))
        states = []
        for i in range(count):
            z = 1.0 - 2.0 * (i + 0.5) / count
            theta = float(np.arccos(np.clip(z, -1.0, 1.0)))
            ang = golden * i
            states.append(
                StateVector(np.array([np.cos(theta / 2), np.exp(1j * ang) * np.sin(theta / 2)]))
            )
        return states
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        out.append(StateVector.normalized(z))
    return out


def _demo_setup(family: str, n, lam_index, reading: str):
    """Scheme, conserved pair (or None), and sharp target for a model family."""
    family = _normalize_family(family)
    if family not in models.MODEL_FAMILIES:
        raise ValidationError(f"unknown model family {family!r}; known: {models.MODEL_FAMILIES}")
    if family == "swap":
        dim = 2 if n is None else int(n)
        if dim == 2:
            pointer = spectral_pvm(_PAULI_X)
            return models.make_swap(2, pointer), ConservedPair(_PAULI_Z, _PAULI_Z), pointer
        pointer = models.momentum_pvm(dim)
        charge = np.diag(np.arange(dim, dtype=float))
        return models.make_swap(dim, pointer), ConservedPair(charge, charge), pointer
    if family == "lueders":
        dim = 2 if n is None else int(n)
        pvm = spectral_pvm(_PAULI_Z) if dim == 2 else models.position_pvm(dim)
        charge = np.diag(np.arange(dim, dtype=float))
        scheme = models.make_lueders(pvm)
        return scheme, ConservedPair(charge, np.zeros((dim, dim))), pvm
    if family == "von_neumann_lattice":
        nn = 5 if n is None else int(n)
        m = 1 if lam_index is None else int(lam_index)
        scheme = models.make_von_neumann_lattice(nn, m)
        return scheme, models.von_neumann_conserved_pair(nn), models.position_pvm(nn)
    if family == "ozawa_lattice":
        nn = 5 if n is None else int(n)
        m = 1 if lam_index is None else int(lam_index)
        scheme = models.make_ozawa_lattice(nn, m, reading=reading)
        if reading == "relative":
            return scheme, models.ozawa_conserved_pair(nn), models.relative_position_pvm(nn)
        # no additive conserved pair exists across the absolute system/apparatus split
        return scheme, None, models.position_pvm(nn)
    raise ValidationError("qubit-rotor names a reference family, not a scheme; use sweep or relativise")


def _load_inputs(args, default_model=None):
    if getattr(args, "scheme", None) and getattr(args, "model", None):
        raise ValidationError("pass either --scheme or --model, not both")
    if getattr(args, "scheme", None):
        parsed = parse_scheme_file(args.scheme)
        return parsed.scheme, parsed.conserved, parsed.target
    model = getattr(args, "model", None) or default_model
    if model is None:
        raise ValidationError("pass --scheme FILE or --model FAMILY")
    return _demo_setup(model, args.n, args.lam_index, getattr(args, "reading", "relative"))


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _png_path(args):
    if not getattr(args, "plot", False):
        return None
    if not args.out:
        raise ValidationError("--plot needs --out to name the image file")
    return os.path.splitext(args.out)[0] + ".png"


def _cmd_audit(args) -> int:
    scheme, conserved, target = _load_inputs(args)
    report = {
        "command": "audit",
        "system_dim": scheme.system_dim,
        "apparatus_dim": scheme.apparatus_dim,
    }
    tol = 1e-10 if args.tol is None else float(args.tol)
    exit_code = EXIT_OK
    if conserved is not None:
        report["conservation_defect"] = float(conservation_defect(scheme, conserved))
        report["yanase_defect"] = float(yanase_defect(scheme, conserved))
        report["weak_yanase_defect"] = float(weak_yanase_defect(scheme, conserved))
    if target is not None:
        report["prc_defect"] = float(prc_defect(scheme, target))
        report["repeatability_defect"] = float(repeatability_defect(scheme, target.outcomes))
    if conserved is not None and target is not None:
        audit = way_audit(scheme, conserved, target, tol=tol)
        report["commutator_norm"] = float(audit.commutator_norm)
        report["conservation_ok"] = audit.conservation_ok
        report["yanase_ok"] = audit.yanase_ok
        report["repeatability_ok"] = audit.repeatability_ok
        report["verdict"] = audit.verdict
        report["violated"] = list(audit.violated)
        if audit.verdict == "exact_measurement_of_noninvariant":
            exit_code = EXIT_FINDING
    elif conserved is None and target is None:
        raise ValidationError("nothing to audit: the file carries neither a conserved pair nor a target")
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return exit_code


def _cmd_sweep(args) -> int:
    family = _normalize_family(args.model or "qubit_rotor")
    n = 8 if args.n is None else int(args.n)
    budgets = _parse_budgets(args.budgets, n)
    png = _png_path(args)
    rows = error_vs_spread_sweep(family, n, budgets, eps=args.eps, seed=args.seed)
    text = write_csv(
        args.out,
        ["budget", "spread_variance", "spread_width", "min_error"],
        [(r.budget, r.spread_variance, r.spread_width, r.min_error) for r in rows],
    )
    if not args.out:
        sys.stdout.write(text)
    if png:
        from . import plots

        plots.sweep_figure(rows, png)
    return EXIT_OK


def _cmd_bound(args) -> int:
    scheme, conserved, target = _load_inputs(args, default_model="swap")
    if conserved is None or target is None:
        raise ValidationError("bound needs both a conserved pair and a target observable")
    m = re.fullmatch(r"grid(\d+)", args.states.strip())
    if not m or int(m.group(1)) < 1:
        raise ValidationError(f"cannot parse --states {args.states!r}; use e.g. grid16")
    count = int(m.group(1))
    png = _png_path(args)
    a = target.operator()
    reports = []
    for phi in _state_grid(count, scheme.system_dim, args.seed):
        reports.append(noise_report(scheme, conserved, a, phi, targets=target.outcomes))
    rows = [
        (i, r.epsilon_sq, r.bound_rhs, r.delta_l_sq, abs(r.commutator_expect), r.degenerate)
        for i, r in enumerate(reports)
    ]
    text = write_csv(
        args.out,
        ["state_index", "epsilon_sq", "bound_rhs", "delta_l_sq", "commutator_abs", "degenerate"],
        rows,
    )
    if not args.out:
        sys.stdout.write(text)
    if png:
        from . import plots

        plots.bound_figure(reports, png)
    return EXIT_OK


def _fmt_matrix(a: np.ndarray) -> str:
    if np.abs(a.imag).max() < 1e-12:
        a = a.real
    return np.array2string(a, precision=6, suppress_small=True)


def _cmd_relativise(args) -> int:
    if args.demo is not None:
        # two-element frame: system acted on by sigma_z, reference flipped by sigma_x
        group = CyclicGroup(2)
        rep_s = Representation(group, np.diag([0.0, 1.0]))
        rep_r = Representation(group, (np.eye(2) - _PAULI_X) / 2)
        f = CovariantObservable(
            rep_r, pvm_from_basis(np.eye(2), ((0,), (1,)), cyclic_lattice(2))
        )
        relativised = yen(_PAULI_X, rep_s, f)
        expected = np.kron(_PAULI_X, _PAULI_Z)
        lines = [
            "relativising sigma_x against a two-element reference frame",
            "",
            "yen(sigma_x) =",
            _fmt_matrix(relativised),
            "",
            f"deviation from sigma_x (x) sigma_z: {np.abs(relativised - expected).max():.3e}",
            f"invariance defect under the joint group action: {invariance_defect(relativised, rep_s, rep_r):.3e}",
            f"homomorphism defect on (sigma_x, sigma_x), sharp reference: {homomorphism_defect(_PAULI_X, _PAULI_X, rep_s, f):.3e}",
        ]
        blurred = unsharp_reference(f, 0.3)
        lines.append(
            "homomorphism defect on (sigma_x, sigma_x), reference mixed with 30% noise: "
            f"{homomorphism_defect(_PAULI_X, _PAULI_X, rep_s, blurred):.6f}"
        )
        _emit("\n".join(lines) + "\n", args.out)
        return EXIT_OK
    n = 8 if args.n is None else int(args.n)
    budgets = _parse_budgets(args.budgets, n)
    family = models.make_qubit_rotor(n)
    rows = high_localisation_audit(family.target, family.rep_s, family.reference, budgets)
    text = write_csv(
        args.out,
        ["budget", "probability", "residual"],
        [(r.budget, r.probability, r.residual) for r in rows],
    )
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="waylab", description="measurement schemes under conservation laws")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pa = sub.add_parser("audit", help="defects and WAY verdict, JSON report")
    pa.add_argument("--scheme", metavar="PATH", help="scheme file (waylab-scheme-v1 JSON)")
    pa.add_argument("--model", metavar="FAMILY", help="built-in family, e.g. swap, ozawa-lattice")
    pa.add_argument("--n", type=int, help="model dimension parameter")
    pa.add_argument("--lam-index", type=int, dest="lam_index", help="coupling strength quantum")
    pa.add_argument("--reading", choices=["relative", "absolute"], default="relative")
    pa.add_argument("--tol", type=float, help="defect size that still counts as zero")
    pa.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")

    ps = sub.add_parser("sweep", help="best error vs spread budget, CSV")
    ps.add_argument("--model", metavar="FAMILY", help="sweep family (qubit-rotor)")
    ps.add_argument("--n", type=int, help="rotor dimension (default 8)")
    ps.add_argument("--budgets", metavar="SPEC", help="'1..8' or '1,2,4' (default 1..n)")
    ps.add_argument("--eps", type=float, default=0.05, help="width confidence parameter")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out", metavar="PATH")
    ps.add_argument("--plot", action="store_true", help="also render a PNG next to --out")

    pb = sub.add_parser("bound", help="noise moments vs the Robertson bound, CSV")
    pb.add_argument("--scheme", metavar="PATH")
    pb.add_argument("--model", metavar="FAMILY", help="built-in family (default swap)")
    pb.add_argument("--n", type=int)
    pb.add_argument("--lam-index", type=int, dest="lam_index")
    pb.add_argument("--reading", choices=["relative", "absolute"], default="relative")
    pb.add_argument("--states", default="grid16", metavar="gridK", help="probe-state grid size")
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--out", metavar="PATH")
    pb.add_argument("--plot", action="store_true", help="also render a PNG next to --out")

    pr = sub.add_parser("relativise", help="relativisation demos and localisation audits")
    pr.add_argument("--demo", choices=["z2"], help="print the two-element worked example")
    pr.add_argument("--n", type=int, help="rotor dimension for the localisation audit CSV")
    pr.add_argument("--budgets", metavar="SPEC", help="'1..8' or '1,2,4' (default 1..n)")
    pr.add_argument("--out", metavar="PATH")

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "audit": _cmd_audit,
        "sweep": _cmd_sweep,
        "bound": _cmd_bound,
        "relativise": _cmd_relativise,
    }[args.command]
    try:
        return handler(args)
    except InvariantViolation as exc:
        print(f"waylab: finding: {exc}", file=sys.stderr)
        return EXIT_FINDING
    except ValidationError as exc:
        print(f"waylab: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

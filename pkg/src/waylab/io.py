"""Scheme files and delimited output.

The scheme file format ("waylab-scheme-v1") is JSON.  Complex matrices are
stored as {"rows", "cols", "data"} with data a row-major list of [re, im]
pairs, so a serialize/parse round trip is bit exact.  Sharp observables are
stored as a basis unitary plus an outcome partition rather than as raw effect
matrices; projectivity is then exact by construction instead of a 1e-10
validation gamble.  Optional blocks carry an additive conserved pair and a
sharp target observable.

CSV output prints floats with 17 significant digits and uses newline-only
line endings, so identical runs produce byte-identical files.
"""

import json
from dataclasses import dataclass

import numpy as np

from .qcore import StateVector, ValidationError
from .obs import DiscreteObservable, OutcomeSet, pvm_from_basis
from .scheme import ConservedPair, MeasurementScheme

__all__ = [
    "FORMAT_NAME",
    "ParsedScheme",
    "parse_scheme_file",
    "parse_scheme_dict",
    "serialize_scheme",
    "save_scheme_file",
    "write_csv",
]

FORMAT_NAME = "waylab-scheme-v1"


@dataclass(frozen=True)
class ParsedScheme:
    """Validated contents of a scheme file."""

    scheme: MeasurementScheme
    conserved: ConservedPair | None = None
    target: DiscreteObservable | None = None


def _bad(field, msg):
    return ValidationError(f"{field}: {msg}")


def _get(doc, key, field, required=True, default=None):
    if not isinstance(doc, dict):
        raise _bad(field, "expected a JSON object")
    if key not in doc:
        if required:
            raise _bad(f"{field}.{key}" if field else key, "missing")
        return default
    return doc[key]


def _node_to_matrix(node, field):
    rows = _get(node, "rows", field)
    cols = _get(node, "cols", field)
    data = _get(node, "data", field)
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 1 or cols < 1:
        raise _bad(field, f"rows/cols must be positive integers, got {rows!r} x {cols!r}")
    if not isinstance(data, list) or len(data) != rows * cols:
        n = len(data) if isinstance(data, list) else "non-list"
        raise _bad(f"{field}.data", f"expected {rows * cols} [re, im] pairs, got {n}")
    out = np.empty(rows * cols, dtype=complex)
    for i, pair in enumerate(data):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
        ):
            raise _bad(f"{field}.data[{i}]", f"expected an [re, im] number pair, got {pair!r}")
        out[i] = complex(pair[0], pair[1])
    return out.reshape(rows, cols)


def _matrix_to_node(a):
    a = np.asarray(a, dtype=complex)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in a.reshape(-1)],
    }


def _node_to_vector(node, field):
    if not isinstance(node, list) or not node:
        raise _bad(field, "expected a nonempty list of [re, im] pairs")
    out = np.empty(len(node), dtype=complex)
    for i, pair in enumerate(node):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
        ):
            raise _bad(f"{field}[{i}]", f"expected an [re, im] number pair, got {pair!r}")
        out[i] = complex(pair[0], pair[1])
    return out


def _vector_to_node(v):
    v = np.asarray(v, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in v]


def _check_label(x, field):
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise _bad(field, f"labels must be integers or strings, got {x!r}")
    return x


def _node_to_pvm(node, field):
    basis = _node_to_matrix(_get(node, "basis", field), f"{field}.basis")
    partition = _get(node, "partition", field)
    labels = _get(node, "labels", field)
    values = _get(node, "values", field)
    cyclic = _get(node, "cyclic", field, required=False, default=False)
    if not isinstance(partition, list) or not all(
        isinstance(g, list) and all(isinstance(i, int) and not isinstance(i, bool) for i in g)
        for g in partition
    ):
        raise _bad(f"{field}.partition", "expected a list of lists of column indices")
    if not isinstance(labels, list) or not isinstance(values, list):
        raise _bad(field, "labels and values must be lists")
    if not (len(labels) == len(values) == len(partition)):
        raise _bad(
            field,
            f"labels ({len(labels)}), values ({len(values)}) and partition "
            f"({len(partition)}) must have equal length",
        )
    labels = tuple(_check_label(x, f"{field}.labels") for x in labels)
    try:
        vals = tuple(float(v) for v in values)
    except (TypeError, ValueError):
        raise _bad(f"{field}.values", "values must be numbers") from None
    outcomes = OutcomeSet(labels, vals, cyclic=bool(cyclic))
    try:
        return pvm_from_basis(basis, tuple(tuple(g) for g in partition), outcomes)
    except ValidationError as exc:
        raise _bad(field, str(exc)) from None


def _pvm_to_node(obs, field):
    if obs.basis is None or obs.basis_partition is None:
        raise _bad(field, "only observables carrying an explicit basis and partition serialize")
    return {
        "basis": _matrix_to_node(obs.basis),
        "partition": [[int(i) for i in g] for g in obs.basis_partition],
        "labels": [_check_label(x, f"{field}.labels") for x in obs.outcomes.labels],
        "values": [float(v) for v in obs.outcomes.values],
        "cyclic": bool(obs.outcomes.cyclic),
    }


def parse_scheme_dict(doc) -> ParsedScheme:
    """Validate an in-memory scheme document; see parse_scheme_file."""
    fmt = _get(doc, "format", "")
    if fmt != FORMAT_NAME:
        raise _bad("format", f"expected {FORMAT_NAME!r}, got {fmt!r}")
    ds = _get(doc, "system_dim", "")
    da = _get(doc, "apparatus_dim", "")
    for name, d in (("system_dim", ds), ("apparatus_dim", da)):
        if not isinstance(d, int) or isinstance(d, bool) or d < 1:
            raise _bad(name, f"must be a positive integer, got {d!r}")
    coupling = _node_to_matrix(_get(doc, "coupling", ""), "coupling")
    state = _node_to_vector(_get(doc, "apparatus_state", ""), "apparatus_state")
    pointer = _node_to_pvm(_get(doc, "pointer", ""), "pointer")
    relabel_node = _get(doc, "relabel", "", required=False)
    relabel = None
    if relabel_node is not None:
        if not isinstance(relabel_node, list):
            raise _bad("relabel", "expected a list of [pointer_label, target_label] pairs")
        relabel = {}
        for i, pair in enumerate(relabel_node):
            if not isinstance(pair, list) or len(pair) != 2:
                raise _bad(f"relabel[{i}]", f"expected a two-element pair, got {pair!r}")
            key = _check_label(pair[0], f"relabel[{i}]")
            if key in relabel:
                raise _bad(f"relabel[{i}]", f"duplicate pointer label {key!r}")
            relabel[key] = _check_label(pair[1], f"relabel[{i}]")
    try:
        phi = StateVector(state)
    except ValidationError as exc:
        raise _bad("apparatus_state", str(exc)) from None
    scheme = MeasurementScheme(ds, da, coupling, pointer, phi, relabel=relabel)
    conserved = None
    node = _get(doc, "conserved", "", required=False)
    if node is not None:
        conserved = ConservedPair(
            _node_to_matrix(_get(node, "l_sys", "conserved"), "conserved.l_sys"),
            _node_to_matrix(_get(node, "l_app", "conserved"), "conserved.l_app"),
        )
        if conserved.l_sys.shape[0] != scheme.system_dim:
            raise _bad(
                "conserved.l_sys",
                f"dimension {conserved.l_sys.shape[0]} does not match system_dim {scheme.system_dim}",
            )
        if conserved.l_app.shape[0] != scheme.apparatus_dim:
            raise _bad(
                "conserved.l_app",
                f"dimension {conserved.l_app.shape[0]} does not match apparatus_dim {scheme.apparatus_dim}",
            )
    target = None
    node = _get(doc, "target", "", required=False)
    if node is not None:
        target = _node_to_pvm(node, "target")
        if target.dim != scheme.system_dim:
            raise _bad("target", f"dimension {target.dim} does not match system_dim {scheme.system_dim}")
    return ParsedScheme(scheme, conserved, target)


def parse_scheme_file(path) -> ParsedScheme:
    """Read and fully validate a scheme file.

    Errors name the offending field; a non-unitary coupling is reported with
    its unitarity residual.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON: {exc}") from None
    return parse_scheme_dict(doc)


def serialize_scheme(scheme, conserved=None, target=None) -> dict:
    """Scheme (plus optional conserved pair and target) as a JSON-ready dict.

    The pointer must carry an explicit basis and partition.  Floats survive
    the JSON round trip exactly, so parse(serialize(s)) reproduces every
    matrix bit for bit.
    """
    doc = {
        "format": FORMAT_NAME,
        "system_dim": int(scheme.system_dim),
        "apparatus_dim": int(scheme.apparatus_dim),
        "coupling": _matrix_to_node(scheme.coupling),
        "apparatus_state": _vector_to_node(scheme.apparatus_state.amplitudes),
        "pointer": _pvm_to_node(scheme.pointer, "pointer"),
        "relabel": [
            [_check_label(x, "relabel"), _check_label(scheme.relabel[x], "relabel")]
            for x in scheme.pointer.outcomes.labels
        ],
    }
    if conserved is not None:
        doc["conserved"] = {
            "l_sys": _matrix_to_node(conserved.l_sys),
            "l_app": _matrix_to_node(conserved.l_app),
        }
    if target is not None:
        doc["target"] = _pvm_to_node(target, "target")
    return doc


def save_scheme_file(path, scheme, conserved=None, target=None):
    doc = serialize_scheme(scheme, conserved=conserved, target=target)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _fmt_cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def write_csv(path, header, rows) -> str:
    """Render rows to CSV text and, when path is given, write it.

    Floats print as %.17g and lines end with a bare newline regardless of
    platform, so reruns with identical inputs are byte identical.
    """
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt_cell(x) for x in row))
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text

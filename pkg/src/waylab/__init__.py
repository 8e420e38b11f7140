"""waylab: a numerical laboratory for quantum measurement under conservation laws.

Builds discrete measurement schemes, extracts the observable a scheme
measures, audits the Wigner-Araki-Yanase obstruction quantitatively, and
relativises observables against a quantum reference frame.
"""

from .qcore import (
    CompositeSpace,
    DensityOperator,
    DimensionMismatch,
    InvariantViolation,
    StateVector,
    Tolerances,
    ValidationError,
    commutator,
    dagger,
    mat_exp_i,
    op_norm,
    partial_trace,
    tensor,
    tolerances,
)
from .obs import (
    DiscreteObservable,
    OutcomeSet,
    ProbDist,
    born,
    cyclic_lattice,
    observable_distance,
    overall_width,
    pvm_from_basis,
    smear_cyclic,
    spectral_pvm,
    validate_povm,
    variance,
)
from .scheme import (
    ConservedPair,
    MeasurementScheme,
    conservation_defect,
    measured_observable,
    pointer_operator,
    prc_defect,
    repeatability_defect,
    restrict,
    sqrt_coupling_scheme,
    weak_yanase_defect,
    yanase_defect,
)
from .way import (
    NoiseReport,
    SweepRow,
    WayAudit,
    error_vs_spread_sweep,
    noise_report,
    way_audit,
)
from .relfr import (
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
from .io import (
    ParsedScheme,
    parse_scheme_file,
    save_scheme_file,
    serialize_scheme,
    write_csv,
)
from . import models

__version__ = "0.1.0"

__all__ = [
    "CompositeSpace",
    "ConservedPair",
    "CovariantObservable",
    "CyclicGroup",
    "DensityOperator",
    "DimensionMismatch",
    "DiscreteObservable",
    "InvariantViolation",
    "MeasurementScheme",
    "NoiseReport",
    "OutcomeSet",
    "ParsedScheme",
    "ProbDist",
    "Representation",
    "StateVector",
    "SweepRow",
    "Tolerances",
    "ValidationError",
    "WayAudit",
    "born",
    "commutator",
    "conservation_defect",
    "cyclic_lattice",
    "dagger",
    "error_vs_spread_sweep",
    "high_localisation_audit",
    "homomorphism_defect",
    "invariance_defect",
    "localised_state",
    "mat_exp_i",
    "measured_observable",
    "models",
    "noise_report",
    "observable_distance",
    "op_norm",
    "overall_width",
    "parse_scheme_file",
    "partial_trace",
    "pointer_operator",
    "prc_defect",
    "pvm_from_basis",
    "relational_scheme",
    "repeatability_defect",
    "restrict",
    "restricted_yen",
    "save_scheme_file",
    "serialize_scheme",
    "smear_cyclic",
    "spectral_pvm",
    "sqrt_coupling_scheme",
    "tensor",
    "tolerances",
    "unsharp_reference",
    "validate_povm",
    "variance",
    "way_audit",
    "weak_yanase_defect",
    "write_csv",
    "yanase_defect",
    "yen",
    "yen_povm",
]

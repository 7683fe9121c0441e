"""Two-sided matching with contracts under path-independent choice functions."""

from .choice import (
    Aggregate,
    ChoiceFunction,
    ContractSet,
    ExplicitTable,
    LinearOrderMax,
    PlottReport,
    QuotaByOrder,
    UnionChoice,
    UtilityThreshold,
    choice_table,
    closure_star,
    decompose_into_orders,
    format_set,
    invert_closure,
    is_plott,
    nil_set,
    parse_set,
    union,
)
from .errors import (
    AxiomsFail,
    CapExceeded,
    ContractOutsideBlock,
    EmptyList,
    InternalError,
    NotCertified,
    NotDominated,
    NotPlott,
    NotSemiStable,
    NotStable,
    ParseError,
    PartialTable,
    PlottmatchError,
    S1Violated,
    TableIncomplete,
    UniverseMismatch,
    UnknownAgent,
)
from .hyperorders import (
    AxiomCheck,
    AxiomReport,
    BlairRelation,
    DerivedLehmann,
    ExtensionalLehmann,
    audit_lehmann_axioms,
    blair_leq,
    format_relation,
    l_operator,
    lehmann_prec,
    parse_relation,
    reconstruct_choice,
)
from .market import (
    ChoiceSpec,
    Contract,
    MarketInstance,
    aggregate_sides,
    format_instance,
    parse_instance,
)
from .oracle import (
    LatticeReport,
    StableSetCatalog,
    enumerate_stable_sets,
    format_catalog,
    generate_instance,
    semi_stable_masks,
    verify_lattice,
)
from .stability import (
    ProcessTrace,
    SemiStablePair,
    SidePair,
    StabilityCheck,
    StablePair,
    blair_compare_stable,
    comparative_statics,
    format_trace,
    is_stable_set,
    is_stable_set_via_closure,
    lattice_join,
    lattice_meet,
    pair_to_set,
    phi_step,
    run_to_fixpoint,
    semi_stable_pair,
    set_to_pair,
    side_optimal,
    side_pair,
)

__version__ = "0.1.0"

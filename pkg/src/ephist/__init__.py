"""Extended probabilities for histories of finite closed quantum systems.

Core objects: states, projector sets, history sets built from
Heisenberg-picture alternatives, the decoherence functional, records,
coarse grainings, tensor-product composites, and the fine-grained
fundamental distribution. Worked examples (two-slit, three-box, bet
gains) live in their own modules, and a line-oriented model-file format
plus CLI drive everything from text files.
"""

__version__ = "0.1.0"

from .errors import (
    AllBranchesZero,
    CapExceeded,
    DimensionMismatch,
    EngineError,
    InvariantViolation,
    NotDecoherent,
    ParseError,
)
from .hilbert import (
    TOL_HERM,
    TOL_NORM,
    TOL_OP,
    EvolutionSpec,
    HermitianOperator,
    Projector,
    ProjectorSet,
    ProjectorSetReport,
    StateVector,
    heisenberg_projector,
    hermitian_exponential,
    projector_set_from_basis,
    rank_one_projector,
    validate_projector_set,
)
from .histories import (
    DEFAULT_DEC_TOL,
    M_CAP,
    BranchVector,
    DecoherenceReport,
    HistoryIndex,
    HistorySet,
    all_extended_probabilities,
    branch_matrix,
    branch_vector,
    chain_amplitude,
    class_operator,
    dec_measure,
    decoherence_functional,
    dh_ep_difference,
    dh_probability,
    extended_probability,
    flatten_index,
    offdiagonal_offenders,
    total_negative,
    unflatten_index,
)
from .records import (
    CorrelationReport,
    RecordCheckReport,
    RecordSet,
    construct_records,
    record_correlation_report,
    verify_strong_records,
    verify_weak_records,
)
from .coarsegrain import (
    ENUMERATION_CAP,
    GreedySearchResult,
    Partition,
    class_sums,
    coarse_class_operator,
    coarse_decoherence_functional,
    coarse_extended_probabilities,
    enumerate_partitions,
    greedy_decohering_search,
    greedy_merge_functional,
    identity_partition,
    merge_slot_alternatives,
    partition_from_literal,
    slot_partition,
    total_partition,
)
from .composite import (
    JOINT_DIM_CAP,
    CompositeSystem,
    ProductRuleReport,
    factor_amplitudes,
    joint_class_operator,
    joint_extended_probability,
    joint_functional,
    product_records,
    product_rule_report,
)
from .finegrained import (
    FINE_CAP,
    FineGrainedDistribution,
    FineGrainedSpec,
    class_sum,
    cylinder_history_set,
    cylinder_partition,
    fundamental_distribution,
)
from .twoslit import (
    SWEEP_K_DELTAS,
    SweepRow,
    TwoSlitConfig,
    amplitude_lower,
    amplitude_upper,
    arrival_density,
    binned_extended_probabilities,
    deepest_fringe_location,
    default_config,
    delta_sweep,
    extended_density,
    extended_density_from_amplitudes,
    integrate_density,
    interference_integral,
    path_length_lower,
    path_length_upper,
    self_convergence,
    with_bins,
)
from .threebox import (
    SECTOR_FLATS,
    BoxSetReport,
    ThreeBoxModel,
    ThreeBoxReport,
    box_coarse_set,
    greedy_sector_search,
    phi_sector_extended_probabilities,
    phi_sector_functional,
    three_box_model,
    three_box_report,
)
from .dutchbook import BetSpec, GainReport, dutch_book_gains, exploit_negative_price, gain_report
from .modelfile import (
    BuiltModel,
    ModelDocument,
    build_evolution,
    build_finegrained,
    build_history_set,
    build_state,
    format_complex,
    load_model,
    parse_complex,
    parse_model,
    serialize_model,
)

__all__ = [name for name in dir() if not name.startswith("_")]

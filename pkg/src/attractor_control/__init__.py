"""Minimum input selection for Boolean regulatory networks.

Control problems are reduced to target set selection on threshold
cascades; solutions are sets of genes whose pinning steers the network to
a chosen attractor.
"""
from .errors import ControlError, ParseError
from .formats import (
    parse_boolean_rules,
    parse_network,
    parse_network_document,
    parse_tss,
    serialize_network,
    serialize_tss,
)
from .network import (
    Attractor,
    InputSet,
    NestedCanalyzing,
    RegulatoryNetwork,
    RuleSet,
    Threshold,
    TruthTable,
    all_attractors,
    find_attractor_from,
    find_fixed_points,
    simulate_pinned,
    step_asynchronous,
    step_stochastic,
    step_synchronous,
)
from .reduction import (
    CnfForm,
    SignedThresholdNet,
    baseline_implies_target,
    build_augmented,
    build_cyclic,
    build_nc_full,
    build_nc_unanimous,
    build_threshold_tss,
    merge_probabilistic,
    rule_to_cnf,
)
from .structured import (
    CliquePartition,
    HierarchySpec,
    cactusify,
    solve_block_cactus,
    solve_clique,
    solve_cycle_baseline,
    solve_hierarchical,
    solve_unanimous_fvs,
)
from .tss import (
    CascadeTrace,
    TargetSet,
    TssInstance,
    cascade,
    export_ilp,
    is_target_set,
    mandatory_seeds,
    minimal_certificate,
    solve_exact,
    solve_greedy,
)
from .verify import VerificationReport, verify_cyclic, verify_exhaustive, verify_monte_carlo

__version__ = "0.1.0"

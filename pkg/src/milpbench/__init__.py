"""milpbench: a self-contained MILP benchmarking harness.

Parses MPS instances, adapts solver configurations per instance, runs
timed benchmark suites against a built-in deterministic reference solver
(or external solvers via a subprocess contract), validates incumbents, and
aggregates shifted-geometric-mean scores into tables and plots.
"""

__version__ = "0.1.0"

from .instance import (
    FeatureVector,
    Instance,
    LinearRow,
    Relation,
    Sense,
    Variable,
    VarKind,
    extract_features,
    validate_instance,
)
from .mps import MpsParseError, load_instance, parse_mps, write_mps
from .config import (
    PARAMETER_REGISTRY,
    ConfigError,
    ConfigRule,
    ConfigStore,
    Configuration,
    ParamDef,
    adapt,
    load_store,
    map_to_reference,
    merge,
    param_by_index,
)
from .solver import (
    BranchRule,
    LpResult,
    NodeStrategy,
    ReferenceSolverOptions,
    SimplexBreakdown,
    Solution,
    SolveOutcome,
    SolveStatus,
    branch_and_bound,
    compute_gap,
    presolve,
    solve_lp,
)
from .runner import (
    BackendKind,
    BackendSpec,
    DatasetSpec,
    ObjectiveKind,
    RunLog,
    RunRecord,
    RunStatus,
    read_log,
    resume_suite,
    run_job,
    run_suite,
)
from .validate import (
    BestKnownRegistry,
    FeasibilityReport,
    Verdict,
    audit_log_incumbents,
    check_feasibility,
    compare_incumbent,
    load_registry,
)
from .scores import (
    BenchmarkSummary,
    DistributionSeries,
    distribution,
    scale,
    shifted_geomean,
    summarize,
)
from .report import emit_distribution_svg, render_table

__all__ = [
    "__version__",
    "FeatureVector",
    "Instance",
    "LinearRow",
    "Relation",
    "Sense",
    "Variable",
    "VarKind",
    "extract_features",
    "validate_instance",
    "MpsParseError",
    "load_instance",
    "parse_mps",
    "write_mps",
    "PARAMETER_REGISTRY",
    "ConfigError",
    "ConfigRule",
    "ConfigStore",
    "Configuration",
    "ParamDef",
    "adapt",
    "load_store",
    "map_to_reference",
    "merge",
    "param_by_index",
    "BranchRule",
    "LpResult",
    "NodeStrategy",
    "ReferenceSolverOptions",
    "SimplexBreakdown",
    "Solution",
    "SolveOutcome",
    "SolveStatus",
    "branch_and_bound",
    "compute_gap",
    "presolve",
    "solve_lp",
    "BackendKind",
    "BackendSpec",
    "DatasetSpec",
    "ObjectiveKind",
    "RunLog",
    "RunRecord",
    "RunStatus",
    "read_log",
    "resume_suite",
    "run_job",
    "run_suite",
    "BestKnownRegistry",
    "FeasibilityReport",
    "Verdict",
    "audit_log_incumbents",
    "check_feasibility",
    "compare_incumbent",
    "load_registry",
    "BenchmarkSummary",
    "DistributionSeries",
    "distribution",
    "scale",
    "shifted_geomean",
    "summarize",
    "emit_distribution_svg",
    "render_table",
]

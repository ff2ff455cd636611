"""Robust graphical game for distributed spectrum access in cognitive small-cell networks."""

from .baselines import (
    BaselineConfig,
    GenieGame,
    run_baseline,
    s_logit_step,
    sap_nc_step,
)
from .channel import ChannelModel, expected_rate, preset_hiperlan2, sample_slot
from .game import (
    GameInstance,
    NeReport,
    aggregate_throughput,
    enumerate_equilibria,
    interference_count,
    is_nash,
    potential,
    sample_instant_rate,
    throughput_lower_bound,
    utility,
    verify_ordinal_potential,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    emit_tables,
    run_experiment,
    sweep,
)
from .learning import (
    LearningConfig,
    TrialRecord,
    detect_convergence,
    normalize_payoff,
    run_trial,
    sla_update,
)
from .topology import (
    Deployment,
    InterferenceGraph,
    build_graph,
    generate_deployment,
    load_graph,
)

__all__ = [
    "BaselineConfig",
    "ChannelModel",
    "Deployment",
    "ExperimentConfig",
    "ExperimentResult",
    "GameInstance",
    "GenieGame",
    "InterferenceGraph",
    "LearningConfig",
    "NeReport",
    "TrialRecord",
    "aggregate_throughput",
    "build_graph",
    "detect_convergence",
    "emit_tables",
    "enumerate_equilibria",
    "expected_rate",
    "generate_deployment",
    "interference_count",
    "is_nash",
    "load_graph",
    "normalize_payoff",
    "potential",
    "preset_hiperlan2",
    "run_baseline",
    "run_experiment",
    "run_trial",
    "s_logit_step",
    "sample_instant_rate",
    "sample_slot",
    "sap_nc_step",
    "sla_update",
    "sweep",
    "throughput_lower_bound",
    "utility",
    "verify_ordinal_potential",
]

__version__ = "0.1.0"

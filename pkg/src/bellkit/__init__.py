"""Toolkit for local-realistic (factorizable) probability models and the
Bell-inequality family: genuine tests, auxiliary-assumption tests, quantum
predictions for photon-pair experiments, and detection-loophole search."""

from .inequalities import (
    ChannelProbabilities,
    InequalityReport,
    NormalizationError,
    ProbabilitySet,
    TwoChannelCounts,
    ch_report,
    channel_conversion,
    correlation,
    fc_report,
    renormalized_correlation,
    s_statistic,
)
from .models import (
    FactorizableModel,
    Feasible,
    FourOutcomeJoint,
    HiddenVariableSpace,
    Infeasible,
    ResponseTable,
    ValidationReport,
    formal_joint_distribution,
    joint_feasibility,
    joint_probability,
    marginal_probability,
    probability_set_from_model,
    validate_model,
)
from .experiments import (
    AngleSet,
    CascadeConfig,
    KinematicsInput,
    PdcConfig,
    bi1_min_efficiency,
    bi_margin,
    cascade_bi_maximum,
    cascade_optics,
    cascade_rates,
    optimal_angles,
    spacelike_constraints,
    two_channel_rates,
    visibility_estimators,
)
from .search import (
    DeterministicStrategy,
    SearchResult,
    StrategyMixture,
    enumerate_local_strategies,
    maximize_s_star,
    mixture_statistics,
    mixture_to_model,
    sample_counts,
)
from .harness import (
    AnalysisConfig,
    AnalysisReport,
    CountDataset,
    CountRow,
    DatasetError,
    emit_report,
    ingest_counts,
    run_analysis,
)

__version__ = "0.1.0"

"""QUBO-driven feature selection with benchmark tooling.

Encode feature relevancy and redundancy into a quadratic binary model,
sample low-energy column subsets (exhaustively, by simulated annealing, or
through a remote annealer-style service), and score the subsets with linear
and boosted-tree regressors against greedy, recursive-elimination, and
keep-everything baselines.
"""
from .dataset import (
    AUTO_COLUMN_NAMES,
    MISSING_POLICY_DROP_ANY,
    MISSING_POLICY_IMPUTE,
    DataLoadError,
    Dataset,
    FeatureMask,
    SplitPlan,
    filter_columns,
    generate_friedman1,
    load_auto_csv,
    ordinal_encode,
    split,
)
from .evaluation import (
    AutoSource,
    ExperimentConfig,
    ExperimentReport,
    FriedmanSource,
    RepeatRecord,
    ReportRow,
    render_report,
    run_experiment,
    subset_accuracy,
)
from .metrics import (
    METRIC_VARIANTS,
    CharacteristicMatrix,
    MetricKind,
    characteristic_matrix,
    distance,
    generalized_p_mean,
    gmic,
    maximal_characteristic_matrix,
    mi_knn,
    mic,
    pcc,
)
from .models import (
    GbrModel,
    GbrParams,
    LinearModel,
    fit_gbr,
    fit_linear,
    importance,
    mae,
    predict_gbr,
    predict_linear,
)
from .qubo import (
    QuboMatrix,
    QuboProblem,
    build_q,
    energy,
    expand_penalized,
    raw_objective,
)
from .samplers import (
    EXHAUSTIVE_MAX_BITS,
    AnnealSchedule,
    EnergyMismatchError,
    MalformedResponseError,
    RemoteNetworkError,
    RemoteSamplerError,
    RemoteTimeoutError,
    Sample,
    SampleSet,
    best_mask,
    exhaustive_solve,
    remote_sample,
    simulated_anneal,
)
from .selection import (
    SamplerChoice,
    SelectionResult,
    all_features,
    greedy_ranked_select,
    qafs_select,
    rfe_select,
)

__all__ = [
    "AUTO_COLUMN_NAMES",
    "EXHAUSTIVE_MAX_BITS",
    "AnnealSchedule",
    "AutoSource",
    "CharacteristicMatrix",
    "DataLoadError",
    "Dataset",
    "EnergyMismatchError",
    "ExperimentConfig",
    "ExperimentReport",
    "FeatureMask",
    "FriedmanSource",
    "GbrModel",
    "GbrParams",
    "LinearModel",
    "METRIC_VARIANTS",
    "MISSING_POLICY_DROP_ANY",
    "MISSING_POLICY_IMPUTE",
    "MalformedResponseError",
    "MetricKind",
    "QuboMatrix",
    "QuboProblem",
    "RemoteNetworkError",
    "RemoteSamplerError",
    "RemoteTimeoutError",
    "RepeatRecord",
    "ReportRow",
    "Sample",
    "SampleSet",
    "SamplerChoice",
    "SelectionResult",
    "SplitPlan",
    "all_features",
    "best_mask",
    "build_q",
    "characteristic_matrix",
    "distance",
    "energy",
    "exhaustive_solve",
    "expand_penalized",
    "filter_columns",
    "fit_gbr",
    "fit_linear",
    "generalized_p_mean",
    "generate_friedman1",
    "gmic",
    "greedy_ranked_select",
    "importance",
    "load_auto_csv",
    "mae",
    "maximal_characteristic_matrix",
    "mi_knn",
    "mic",
    "ordinal_encode",
    "pcc",
    "predict_gbr",
    "predict_linear",
    "qafs_select",
    "raw_objective",
    "remote_sample",
    "render_report",
    "rfe_select",
    "run_experiment",
    "simulated_anneal",
    "split",
    "subset_accuracy",
]

"""Uncertainty-gated online learning for streaming regression.

Models arrive at a fixed-capacity sample buffer one observation at a time;
buffer strategies decide what to keep, uncertainty estimators decide what is
worth learning, and the learner retrains incrementally after every accepted
point.
"""

__version__ = "0.1.0"

from .data import (  # noqa: E402
    AUV_SCHEMA,
    SINE_SCHEMA,
    Dataset,
    SplitDataset,
    load_csv,
    normalize,
    split,
    synth_auv,
    synth_sine,
    write_csv,
)
from .metrics import EvalSummary, cumulative_mse, mean_r2, mse, summarize  # noqa: E402
from .nn import (  # noqa: E402
    NetworkArchitecture,
    TrainConfig,
    TrainingFault,
    TrainReport,
    fit,
    init_network,
)
from .online import RunConfig, RunFault, TraceRecord, dataset_use, run_online  # noqa: E402
from .strategies import (  # noqa: E402
    STRATEGY_KINDS,
    Buffer,
    Decision,
    Sample,
    StrategyConfig,
    apply_decision,
    decide,
)
from .tuning import (  # noqa: E402
    Candidate,
    SearchSpace,
    SweepCell,
    SweepSpec,
    build_online_objective,
    random_search,
    sweep,
    threshold_candidates,
)
from .uncertainty import (  # noqa: E402
    ESTIMATOR_KINDS,
    Estimator,
    EstimatorConfig,
    UncertaintyEstimate,
    build_estimator,
    fit_estimator,
    predict_many,
    predict_with_uncertainty,
)

__all__ = [
    "AUV_SCHEMA", "SINE_SCHEMA", "Dataset", "SplitDataset", "load_csv",
    "normalize", "split", "synth_auv", "synth_sine", "write_csv",
    "EvalSummary", "cumulative_mse", "mean_r2", "mse", "summarize",
    "NetworkArchitecture", "TrainConfig", "TrainingFault", "TrainReport",
    "fit", "init_network",
    "RunConfig", "RunFault", "TraceRecord", "dataset_use", "run_online",
    "STRATEGY_KINDS", "Buffer", "Decision", "Sample", "StrategyConfig",
    "apply_decision", "decide",
    "Candidate", "SearchSpace", "SweepCell", "SweepSpec",
    "build_online_objective", "random_search", "sweep", "threshold_candidates",
    "ESTIMATOR_KINDS", "Estimator", "EstimatorConfig", "UncertaintyEstimate",
    "build_estimator", "fit_estimator", "predict_many", "predict_with_uncertainty",
    "__version__",
]

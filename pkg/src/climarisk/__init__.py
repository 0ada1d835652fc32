"""Climate-risk decision toolkit: insurability, development siting and
landmark preservation scoring over indicator panels."""
from ._jit import backend_name
from .classifier import (
    Calibration,
    CvReport,
    SvmModel,
    cross_validate,
    decision_value,
    fit_calibration,
    predict_probability,
    roc_curve,
    train_svm,
)
from .clustering import Clustering, kmeans, label_clusters, reweight_population
from .dataset import (
    DeviationTable,
    IndicatorPanel,
    NormalizedPanel,
    indicator_deviation,
    load_panel,
    net_premium_margin,
    normalize,
)
from .elasticity import (
    ElasticityModel,
    InsurancePipeline,
    ProbabilityCurve,
    fit_cdc,
    predict_scenario,
    sweep,
)
from .mcdm import (
    AhpResult,
    ScoreReport,
    WeightVector,
    ahp_weights,
    combine_weights,
    indicator_importance,
    interaction_matrix,
    orm_weights,
    robustness,
    score,
)
from .sampling import LabeledDataset, SmoteConfig, balance, smote

__version__ = "0.1.0"

__all__ = [
    "AhpResult",
    "Calibration",
    "Clustering",
    "CvReport",
    "DeviationTable",
    "ElasticityModel",
    "IndicatorPanel",
    "InsurancePipeline",
    "LabeledDataset",
    "NormalizedPanel",
    "ProbabilityCurve",
    "ScoreReport",
    "SmoteConfig",
    "SvmModel",
    "WeightVector",
    "ahp_weights",
    "backend_name",
    "balance",
    "combine_weights",
    "cross_validate",
    "decision_value",
    "fit_calibration",
    "fit_cdc",
    "indicator_deviation",
    "indicator_importance",
    "interaction_matrix",
    "kmeans",
    "label_clusters",
    "load_panel",
    "net_premium_margin",
    "normalize",
    "orm_weights",
    "predict_probability",
    "predict_scenario",
    "reweight_population",
    "robustness",
    "roc_curve",
    "score",
    "smote",
    "sweep",
    "train_svm",
]

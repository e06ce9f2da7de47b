"""Hard-to-learn one-hidden-layer wave functions and the tooling around
them: bump units built from activation gates, truncated periodic waves,
subset-sum hard families, logconcave input sampling, statistical-query
oracles, Monte Carlo correlation-scaling evidence, a from-scratch MLP
trainer, and the sweep/demo harness."""

from ._kernels import BACKEND
from .activation import ActivationKind, BumpUnit, make_bump
from .dist import (InputDist1D, L1BallDist, LabeledSampleSet, ProductDist,
                   load_binary, load_csv, make_dataset, round_labels,
                   sample_input, save_binary, save_csv)
from .errors import (ConfigError, InvalidParameterError, NumericFailureError,
                     QueryBudgetError, ResourceLimitError, SwaveError)
from .hardfam import (HardFunction, NetworkRep, SubsetFamily,
                      build_subset_family, condition_number, eval_hard,
                      eval_hard_batch, load_network, network_forward,
                      network_forward_batch, perturb_network, save_network,
                      to_network)
from .mlp import (MLPSpec, Params, TrainConfig, TrainData, TrainReport,
                  grad_check, init_params, sgd_train)
from .seeding import derive_seed
from .sqoracle import (HardExampleSource, JsonlTranscript, OracleConfig,
                       QuerySpec, SoftIndicator, indicator_decomposition_defect,
                       soft_indicator_eval, sq_sgd_train, tolerance,
                       vstat_answer)
from .statdim import (CovEstimate, ScalingConfig, avg_correlation,
                      indicator_covariance, mc_covariance, scaling_report)
from .wave import (WaveSpec, choose_truncation, default_theta, eval_wave,
                   eval_wave_batch, lattice_theta, make_wave,
                   quasiperiodicity_defect, shift_effect, wave_variance)

__version__ = "0.1.0"

__all__ = [
    "ActivationKind", "BumpUnit", "make_bump", "BACKEND",
    "WaveSpec", "make_wave", "eval_wave", "eval_wave_batch", "default_theta",
    "lattice_theta", "choose_truncation", "wave_variance",
    "quasiperiodicity_defect", "shift_effect",
    "SubsetFamily", "build_subset_family", "HardFunction", "eval_hard",
    "eval_hard_batch", "NetworkRep", "to_network", "network_forward",
    "network_forward_batch", "condition_number", "perturb_network",
    "save_network", "load_network",
    "InputDist1D", "ProductDist", "L1BallDist", "sample_input",
    "LabeledSampleSet", "make_dataset", "round_labels", "save_csv", "load_csv",
    "save_binary", "load_binary",
    "tolerance", "QuerySpec", "OracleConfig", "SoftIndicator",
    "soft_indicator_eval", "vstat_answer", "HardExampleSource",
    "JsonlTranscript", "indicator_decomposition_defect", "sq_sgd_train",
    "CovEstimate", "mc_covariance", "avg_correlation", "indicator_covariance",
    "ScalingConfig", "scaling_report",
    "MLPSpec", "Params", "init_params", "TrainConfig", "TrainData",
    "TrainReport", "sgd_train", "grad_check",
    "derive_seed",
    "SwaveError", "InvalidParameterError", "NumericFailureError",
    "ResourceLimitError", "QueryBudgetError", "ConfigError",
    "__version__",
]

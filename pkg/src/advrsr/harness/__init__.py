from .config import ExperimentConfig, load_config, loads_config
from .report import half_crossing, report_phase_transition
from .sweep import TrialResult, fit_estimator, make_dataset, mix_seed, run_sweep, run_trial, splitmix64, sweep

__all__ = [
    "ExperimentConfig",
    "TrialResult",
    "fit_estimator",
    "half_crossing",
    "load_config",
    "loads_config",
    "make_dataset",
    "mix_seed",
    "report_phase_transition",
    "run_sweep",
    "run_trial",
    "splitmix64",
    "sweep",
]

from .affine import affine_sggd_pipeline, geometric_median
from .ransac import RansacConfig, consensus_count, ransac_affine, ransac_rsr
from .sggd import SggdConfig, SpcaResult, lad_energy, lad_gradient, sggd, spca
from .trace import FitTrace, TraceRecord

__all__ = [
    "FitTrace",
    "RansacConfig",
    "SggdConfig",
    "SpcaResult",
    "TraceRecord",
    "affine_sggd_pipeline",
    "consensus_count",
    "geometric_median",
    "lad_energy",
    "lad_gradient",
    "ransac_affine",
    "ransac_rsr",
    "sggd",
    "spca",
]

"""Robust subspace recovery with adversarial outliers: exact small-instance
oracles, RANSAC, spherized geodesic gradient descent and their diagnostics."""

from .dataset import (
    AffineSubspace,
    LabeledDataset,
    NoiseSpec,
    add_noise,
    gen_adversarial_line,
    gen_affine_line_dataset,
    gen_general_position,
    gen_haystack,
    gen_line_outlier_dataset,
    load_dataset,
    save_dataset,
    spherize,
    symmetrize,
)
from .estimators import RansacConfig, SggdConfig, affine_sggd_pipeline, ransac_affine, ransac_rsr, sggd, spca
from .grassmann import Subspace, TangentDirection, largest_angle, principal_angles

__all__ = [
    "AffineSubspace",
    "LabeledDataset",
    "NoiseSpec",
    "RansacConfig",
    "SggdConfig",
    "Subspace",
    "TangentDirection",
    "add_noise",
    "affine_sggd_pipeline",
    "gen_adversarial_line",
    "gen_affine_line_dataset",
    "gen_general_position",
    "gen_haystack",
    "gen_line_outlier_dataset",
    "largest_angle",
    "load_dataset",
    "principal_angles",
    "ransac_affine",
    "ransac_rsr",
    "save_dataset",
    "sggd",
    "spca",
    "spherize",
    "symmetrize",
]

__version__ = "0.1.0"

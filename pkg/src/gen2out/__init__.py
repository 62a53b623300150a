"""Point- and group-anomaly detection with depth-limited randomized tree ensembles."""

from .data import DataMatrix, IfsSpec, gen_gaussian_blobs, gen_ifs, load_csv
from .depth import DepthModel, estimate_depth, fit_depth_model, fixed_cut_expected_depth, if_coefficients
from .detector import Gen2Out0, load_model, save_model
from .generalized import GeneralizedAnomalyReport, Gen2Out, build_xray, detect, extract_apex, iso_score
from .metrics import average_precision, roc_auc
from .tree import AtomicTree, build_tree

__version__ = "0.1.0"

__all__ = [
    "AtomicTree",
    "DataMatrix",
    "DepthModel",
    "Gen2Out",
    "Gen2Out0",
    "GeneralizedAnomalyReport",
    "IfsSpec",
    "average_precision",
    "build_tree",
    "build_xray",
    "detect",
    "estimate_depth",
    "extract_apex",
    "fit_depth_model",
    "fixed_cut_expected_depth",
    "gen_gaussian_blobs",
    "gen_ifs",
    "if_coefficients",
    "iso_score",
    "load_csv",
    "load_model",
    "roc_auc",
    "save_model",
]

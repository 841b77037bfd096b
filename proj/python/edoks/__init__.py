"""EDOKS: full-reference image similarity from texture signatures and Oklab color."""

from ._edoks import (
    ConfigError,
    DecodeError,
    DimensionMismatch,
    InvalidInput,
    alpha_grid,
    combine_edok,
    compare,
    delta_e_map,
    edoks_from_edok,
    emd,
    extract_signature,
    fit_logistic,
    kendall_tau_b,
    load_image,
    ok_term,
    patch_energy,
    pearson,
    rgb_to_oklab,
    spearman,
    term_scores,
    twoafc_accuracy,
)

__all__ = [
    "ConfigError",
    "DecodeError",
    "DimensionMismatch",
    "InvalidInput",
    "alpha_grid",
    "combine_edok",
    "compare",
    "delta_e_map",
    "edoks_from_edok",
    "emd",
    "extract_signature",
    "fit_logistic",
    "kendall_tau_b",
    "load_image",
    "ok_term",
    "patch_energy",
    "pearson",
    "rgb_to_oklab",
    "spearman",
    "term_scores",
    "twoafc_accuracy",
]

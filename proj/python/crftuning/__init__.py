"""Contrast response function tuning.

Thin python surface over the compiled core: model evaluation and fitting,
LOOCV metrics, monotonicity classification, gamma-band preprocessing and the
synthetic corpus generators.
"""

try:
    from ._crfcore import (  # noqa: F401
        CrfError,
        KernelModel,
        band_power,
        butterworth_lowpass,
        default_contrast_grid,
        default_corpus,
        default_corpus_seed,
        fit_points,
        loocv,
        make_model,
        monotonicity_index,
        nmse,
        normalize_input,
        r_squared,
        split_dataset,
    )
except ImportError:  # extension built in-tree, not packaged
    from _crfcore import (  # noqa: F401
        CrfError,
        KernelModel,
        band_power,
        butterworth_lowpass,
        default_contrast_grid,
        default_corpus,
        default_corpus_seed,
        fit_points,
        loocv,
        make_model,
        monotonicity_index,
        nmse,
        normalize_input,
        r_squared,
        split_dataset,
    )

__all__ = [
    "CrfError",
    "KernelModel",
    "band_power",
    "butterworth_lowpass",
    "default_contrast_grid",
    "default_corpus",
    "default_corpus_seed",
    "fit_points",
    "loocv",
    "make_model",
    "monotonicity_index",
    "nmse",
    "normalize_input",
    "r_squared",
    "split_dataset",
]

"""Power theory and Monte Carlo experiments for curved exponential families."""

from ._core import (
    CurvedFamily,
    PowerCoefficients,
    __version__,
    bessel_i,
    bessel_k,
    chi2_cdf,
    chi2_quantile,
    coefficients,
    config_json,
    conformal_coords,
    delta_p,
    direction,
    envelope_power,
    gauge_nu,
    mean_curvature,
    metric,
    run_experiment,
    sample,
)

__all__ = [
    "CurvedFamily",
    "PowerCoefficients",
    "__version__",
    "bessel_i",
    "bessel_k",
    "chi2_cdf",
    "chi2_quantile",
    "coefficients",
    "config_json",
    "conformal_coords",
    "delta_p",
    "direction",
    "envelope_power",
    "gauge_nu",
    "mean_curvature",
    "metric",
    "run_experiment",
    "sample",
]

"""Counterfactual imputation for panel data.

Three imputers for a single hidden outcome cell (vertical elastic-net
regression, horizontal elastic-net regression, nuclear-norm matrix completion
with two-way fixed effects), simplex-stacked ensembles on top of them, and a
pseudo-treatment benchmark harness.
"""

from ._core import (
    ElasticNetFit,
    ImputationResult,
    MaskedPanel,
    MCFit,
    Panel,
    PanelcfError,
    ensemble_hc,
    ensemble_vc,
    estimate_effect,
    fit_elastic_net,
    fit_mc,
    generate_synthetic_panel,
    impute_horizontal,
    impute_mc,
    impute_vertical,
    kkt_residual,
    lambda_max,
    load_panel,
    load_panel_csv,
    pseudo_treatment_eval,
    restrict,
    solve_simplex_ls,
    svt,
    transform,
)

__all__ = [
    "ElasticNetFit",
    "ImputationResult",
    "MaskedPanel",
    "MCFit",
    "Panel",
    "PanelcfError",
    "ensemble_hc",
    "ensemble_vc",
    "estimate_effect",
    "fit_elastic_net",
    "fit_mc",
    "generate_synthetic_panel",
    "impute_horizontal",
    "impute_mc",
    "impute_vertical",
    "kkt_residual",
    "lambda_max",
    "load_panel",
    "load_panel_csv",
    "pseudo_treatment_eval",
    "restrict",
    "solve_simplex_ls",
    "svt",
    "transform",
]

__version__ = "0.1.0"

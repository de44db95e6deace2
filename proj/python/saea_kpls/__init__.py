"""Kriging and KPLS surrogates for CGP-ANN neuroevolution."""

from ._core import (
    ConfigError,
    DegenerateComponentError,
    DimensionError,
    EvaluationError,
    FitTimeout,
    IndefiniteMatrixError,
    KrigingModel,
    ParseError,
    SchemaError,
    build_correlation,
    curated_datasets,
    evolve,
    extract_phenotype,
    fit_kpls,
    fit_kriging,
    fit_pls,
    kpls_kernel,
    prepare,
    random_genotype,
    spearman,
)

__all__ = [name for name in dir() if not name.startswith("_")]

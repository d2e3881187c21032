"""Dyadic-grid operators and variable-exponent Lebesgue norms."""

from .banks import Lcg, build_bank
from .cubes import CubeRelation, DyadicCube, cube_at, descendants, relation
from .epsilon import (ConstantEpsilon, EpsilonCollection, LevelRuleEpsilon,
                      OriginDecayEpsilon, PowerEpsilon, TableEpsilon,
                      decay_profile, epsilon_from_descriptor,
                      validate_domination)
from .exponents import (ConjugateExponent, ConstantExponent, ExponentFunction,
                        GridSampledExponent, LogRampExponent, TableExponent,
                        check_diening, check_eps_diening,
                        check_eps_diening_pointwise, check_lh_infty,
                        conjugate_value, exponent_from_descriptor,
                        holder_pairing, luxemburg_norm, modular)
from .grid import (DomainError, GridFunction, coarsen_sum, read_function_csv,
                   upsample, write_function_csv)
from .operators import (CZResult, NonfiniteInputError, NotLocalizableError,
                        SparseCollection, build_sparse_stopping,
                        compactness_probe, corner_chain, cz_decompose,
                        domination_ratio, dyadic_maximal, eps_maximal,
                        haar_coefficient, haar_function, haar_multiplier,
                        opnorm_estimate, scale_ladder, sparse_operator,
                        truncated_sparse, verify_sparse)

__version__ = "0.1.0"

__all__ = [
    "CZResult", "ConjugateExponent", "ConstantEpsilon", "ConstantExponent",
    "CubeRelation", "DomainError", "DyadicCube", "EpsilonCollection",
    "ExponentFunction", "GridFunction", "GridSampledExponent", "Lcg",
    "LevelRuleEpsilon", "LogRampExponent", "NonfiniteInputError",
    "NotLocalizableError", "OriginDecayEpsilon", "PowerEpsilon",
    "SparseCollection", "TableEpsilon", "TableExponent",
    "build_bank", "build_sparse_stopping", "check_diening",
    "check_eps_diening", "check_eps_diening_pointwise", "check_lh_infty",
    "coarsen_sum", "compactness_probe", "conjugate_value", "corner_chain",
    "cube_at", "cz_decompose", "decay_profile", "descendants",
    "domination_ratio", "dyadic_maximal", "eps_maximal",
    "epsilon_from_descriptor", "exponent_from_descriptor", "haar_coefficient",
    "haar_function", "haar_multiplier", "holder_pairing", "luxemburg_norm",
    "modular", "opnorm_estimate", "read_function_csv", "relation",
    "scale_ladder", "sparse_operator", "truncated_sparse", "upsample",
    "validate_domination", "verify_sparse", "write_function_csv",
]

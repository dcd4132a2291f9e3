"""sphlab: exact computations in the spherical Hecke algebra of
(SL_n(Q_p), SL_n(Z_p)) and certificates about its spherical functions."""

from .errors import (
    BadCoweightSum,
    ContextMismatch,
    DimensionMismatch,
    InexactCoefficient,
    InvalidCoweight,
    NonHermitian,
    NonUnimodular,
    NotFound,
    RankTooSmall,
    ResourceLimit,
    SphlabError,
)
from .padic import GroupElement, PrimeContext, cartan_decompose, cartan_label, iwasawa_decompose
from .cosets import left_coset_reps, quotient_oracle_count
from .hecke import HeckeElement, convolve, l1_norm, structure_constants
from .spherical import (
    SatakeParameter,
    omega_eval,
    satake_transform,
    sequence_param,
    tau_eval,
    trivial_param,
)

__version__ = "0.1.0"

__all__ = [
    "BadCoweightSum",
    "ContextMismatch",
    "DimensionMismatch",
    "GroupElement",
    "HeckeElement",
    "InexactCoefficient",
    "InvalidCoweight",
    "NonHermitian",
    "NonUnimodular",
    "NotFound",
    "PrimeContext",
    "RankTooSmall",
    "ResourceLimit",
    "SatakeParameter",
    "SphlabError",
    "cartan_decompose",
    "cartan_label",
    "convolve",
    "iwasawa_decompose",
    "l1_norm",
    "left_coset_reps",
    "omega_eval",
    "quotient_oracle_count",
    "satake_transform",
    "sequence_param",
    "structure_constants",
    "tau_eval",
    "trivial_param",
]

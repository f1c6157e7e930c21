"""Coalgebras, their modal logics and finite Stone duality."""

from ._coalg import (
    CapExceeded,
    Coalgebra,
    CoalgError,
    ParseError,
    behavioural_equivalence,
    bisimilar,
    cardinality,
    check_functor_laws,
    distinguishing_formula,
    extension,
    kvalid,
    lindenbaum_atoms,
    minimize,
    normalize_formula,
    normalize_functor,
    selftest,
    selftest_properties,
    stone,
)

__all__ = [
    "CapExceeded",
    "Coalgebra",
    "CoalgError",
    "ParseError",
    "behavioural_equivalence",
    "bisimilar",
    "cardinality",
    "check_functor_laws",
    "distinguishing_formula",
    "extension",
    "kvalid",
    "lindenbaum_atoms",
    "minimize",
    "normalize_formula",
    "normalize_functor",
    "selftest",
    "selftest_properties",
    "stone",
]

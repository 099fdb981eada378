"""Exact-arithmetic engine for formal group laws, divisor strata
decompositions, correction series with rewrite witnesses, and corrected
quantum products over truncated Novikov rings."""

from .correction import (
    FORMAL_INVERSE,
    LITERAL,
    CorrectionSeries,
    DivisorPresentation,
    RewriteWitness,
    assemble_corrected_class,
    compute_correction,
    expand_F_in_S,
    verify_correction,
    verify_identity,
)
from .divisor import (
    ConeComplexModel,
    JDecomposition,
    barycentric_subdivide,
    inclusion_exclusion_check,
    j_decompose,
    two_component_expansion,
)
from .fgl import (
    FormalGroupLaw,
    additive_law,
    construct_law,
    formal_inverse,
    formal_sum,
    generic_log_law,
    honda_law,
    multi_sum,
    multiplicative_law,
    n_series,
    parse_law_selector,
    two_var_sum,
)
from .gw import (
    AssociativityReport,
    ClassDatum,
    GWDatum,
    NovikovSeries,
    associativity_check,
    corrected_product,
    load_datum,
    naive_product,
    star_product,
)
from .rings import (
    GradedCoefficient,
    IntegerRing,
    LaurentRing,
    PolynomialRing,
    PrimeFieldRing,
    RationalRing,
    is_p_integral,
    reduce_mod_p,
    ring_from_json,
)
from .series import Monomial, TruncatedSeries, VariableContext

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

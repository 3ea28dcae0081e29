"""Calculus for regulated (jump-discontinuous) real functions.

The package is organised bottom-up:

``expr``        closed-form expressions: parse, print, evaluate, differentiate
``limits``      numeric one-sided/endpoint limit engine
``regulated``   piecewise regulated functions and their one-sided limits
``stieltjes``   the derivative D_alpha f with respect to an increasing alpha
``mvt``         Rolle / Cauchy mean value witnesses
``lhospital``   L'Hospital limit and monotone rules, Stolz-Cesaro bridge
``lsmeasure``   Lebesgue-Stieltjes measures, integrals and integral rules
``fnfile``      the function-definition file format
``cli``         the ``regcalc`` batch front-end
"""

__version__ = "0.1.0"

from regcalc.expr import diff, evaluate, parse, to_text  # noqa: E402
from regcalc.limits import LimitEstimate  # noqa: E402
from regcalc.regulated import Family, Piece, PiecewiseFn, breakpoints, constant, end_behavior, identity, locate, one_sided  # noqa: E402
from regcalc.stieltjes import d_alpha, product_rule, quotient_rule  # noqa: E402
from regcalc.mvt import cauchy_witness, rolle_witness, sandwich_check  # noqa: E402
from regcalc.lhospital import RuleReport, Seq, lhospital_limit, monotone_certify, stolz_limit  # noqa: E402
from regcalc.lsmeasure import LSMeasure, ftc_check, integrate, lhospital_integral, measure_interval, monotone_integral  # noqa: E402
from regcalc.fnfile import load, parse_text  # noqa: E402

__all__ = [
    "Family",
    "LSMeasure",
    "LimitEstimate",
    "Piece",
    "PiecewiseFn",
    "RuleReport",
    "Seq",
    "breakpoints",
    "cauchy_witness",
    "constant",
    "d_alpha",
    "diff",
    "end_behavior",
    "evaluate",
    "ftc_check",
    "identity",
    "integrate",
    "lhospital_integral",
    "lhospital_limit",
    "load",
    "locate",
    "measure_interval",
    "monotone_certify",
    "monotone_integral",
    "one_sided",
    "parse",
    "parse_text",
    "product_rule",
    "quotient_rule",
    "rolle_witness",
    "sandwich_check",
    "stolz_limit",
    "to_text",
]

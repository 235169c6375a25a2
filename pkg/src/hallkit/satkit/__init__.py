"""CNF tooling: parsing, tractable-family recognition and solving."""

from .classify import ClassificationReport, classify, horn_renaming, is_2sat, is_horn, xor_grouping
from .cmpsat import (
    BridgeChain,
    CmpSatForm,
    CmpSatResult,
    NotRecognized,
    form_to_cmp,
    recognize_cmp_sat,
    recognize_smp_sat,
    solve_cmp_sat,
)
from .cnf import (
    Cnf,
    HeaderMismatch,
    Literal,
    ParseError,
    TautologyPresent,
    XorConstraint,
    emit_dimacs,
    emit_xor_dimacs,
    evaluate,
    expand_at_most_one,
    expand_xor,
    parse_dimacs,
    parse_xor_dimacs,
)
from .solvers import SatResult, solve_2sat, solve_horn, solve_renamed_horn, solve_xorsat

SmpSatForm = CmpSatForm

__all__ = [
    "BridgeChain",
    "ClassificationReport",
    "CmpSatForm",
    "CmpSatResult",
    "Cnf",
    "HeaderMismatch",
    "Literal",
    "NotRecognized",
    "ParseError",
    "SatResult",
    "SmpSatForm",
    "TautologyPresent",
    "XorConstraint",
    "classify",
    "emit_dimacs",
    "emit_xor_dimacs",
    "evaluate",
    "expand_at_most_one",
    "expand_xor",
    "form_to_cmp",
    "horn_renaming",
    "is_2sat",
    "is_horn",
    "parse_dimacs",
    "parse_xor_dimacs",
    "recognize_cmp_sat",
    "recognize_smp_sat",
    "solve_2sat",
    "solve_cmp_sat",
    "solve_horn",
    "solve_renamed_horn",
    "solve_xorsat",
    "xor_grouping",
]

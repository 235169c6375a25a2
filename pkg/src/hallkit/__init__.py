"""Exact toolkit for fractional and classical marriage problems."""

from importlib.resources import files
from pathlib import Path

from .core import (
    CmpView,
    FmpInstance,
    FmpSolution,
    Fragment,
    HallViolator,
    Tradeoff,
    TradeoffSet,
    as_cmp,
    check_solution,
    cmp_instance,
    fmp,
    free_elements,
    validate_instance,
)
from .formats import FormatMismatch, ParseError, emit_instance, parse_instance, read_instance
from .fragmentlogic import (
    DRIVER_ORDER,
    RULES,
    ReductionOutcome,
    RewriteSite,
    RewriteTrace,
    apply_rule,
    find_applicable_sites,
    fragment_reduce,
    replay_trace,
)
from .matching import SmpInstance, solve_cmp, solve_smp
from .oracle import BudgetExceeded, OracleBudget, solve_fmp_bruteforce
from .reductions import (
    TripartiteInstance,
    cmp_to_sat,
    first_normal_form,
    pull_back_assignment,
    sat_to_fmp,
    second_normal_form,
    to_3cnf,
    tripartite_to_fmp,
)
from .satkit import Cnf, classify, recognize_cmp_sat, recognize_smp_sat, solve_cmp_sat

__version__ = "0.1.0"


def fixture_path(name: str) -> Path:
    """Path of a bundled example instance."""
    return Path(str(files("hallkit") / "fixtures" / name))


__all__ = [
    "BudgetExceeded",
    "CmpView",
    "Cnf",
    "DRIVER_ORDER",
    "FmpInstance",
    "FmpSolution",
    "FormatMismatch",
    "Fragment",
    "HallViolator",
    "OracleBudget",
    "ParseError",
    "RULES",
    "ReductionOutcome",
    "RewriteSite",
    "RewriteTrace",
    "SmpInstance",
    "Tradeoff",
    "TradeoffSet",
    "TripartiteInstance",
    "apply_rule",
    "as_cmp",
    "check_solution",
    "classify",
    "cmp_instance",
    "cmp_to_sat",
    "emit_instance",
    "find_applicable_sites",
    "first_normal_form",
    "fixture_path",
    "fmp",
    "fragment_reduce",
    "free_elements",
    "parse_instance",
    "pull_back_assignment",
    "read_instance",
    "recognize_cmp_sat",
    "recognize_smp_sat",
    "replay_trace",
    "sat_to_fmp",
    "second_normal_form",
    "solve_cmp",
    "solve_cmp_sat",
    "solve_fmp_bruteforce",
    "solve_smp",
    "to_3cnf",
    "tripartite_to_fmp",
    "validate_instance",
]

"""``hallkit`` command-line front end.

Exit codes: 0 sat or success, 1 unsat or not recognized, 2 usage or parse
error, 3 oracle budget exceeded.  ``--json`` prints one object with keys
``status``, ``witness`` or ``certificate``, and ``stats``; transforming
subcommands add ``output`` holding the emitted text.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

from .core import FmpInstance, as_cmp, cmp_instance
from .formats import FORMATS, ParseError, emit_fmp, emit_instance, parse_instance
from .fragmentlogic import fragment_reduce
from .generators import random_cmp, random_cnf, random_fmp, random_smp, random_tripartite
from .matching import SmpInstance, solve_cmp, solve_smp
from .oracle import (
    BudgetExceeded,
    OracleBudget,
    perfect_tripartite_matching,
    solve_fmp_bruteforce,
    solve_sat_bruteforce,
    solve_smp_bruteforce,
)
from .reductions import (
    TripartiteInstance,
    cmp_to_sat,
    first_normal_form,
    sat_to_fmp,
    second_normal_form,
    to_3cnf,
    tripartite_to_fmp,
)
from .satkit.classify import classify
from .satkit.cmpsat import CmpSatForm, named, recognize_cmp_sat, recognize_smp_sat, solve_cmp_sat
from .satkit.cnf import Cnf

__all__ = ["CommandConfig", "Outcome", "UsageError", "run", "main", "build_parser"]

EXIT_OK, EXIT_UNSAT, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(ValueError):
    """Input is well-formed but unsuitable for the subcommand."""


@dataclass(frozen=True)
class CommandConfig:
    subcommand: str
    inputs: tuple[str, ...] = ()
    output: str | None = None
    json: bool = False
    trace: str | None = None
    seed: int = 0
    budget: int | None = None
    format: str | None = None
    kind: str | None = None
    family: str = "cmp"


@dataclass
class Outcome:
    status: str
    witness: Any = None
    certificate: Any = None
    stats: dict[str, Any] = field(default_factory=dict)
    output: str | None = None
    text: str = ""

    @property
    def exit_code(self) -> int:
        return EXIT_UNSAT if self.status in ("unsat", "not-recognized") else EXIT_OK

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {"status": self.status}
        if self.certificate is not None:
            d["certificate"] = self.certificate
        else:
            d["witness"] = self.witness
        d["stats"] = self.stats
        if self.output is not None:
            d["output"] = self.output
        return d


# --------------------------------------------------------------------------
# helpers


def _read(cfg: CommandConfig) -> Any:
    if cfg.inputs and cfg.inputs[0] != "-":
        try:
            text = Path(cfg.inputs[0]).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {cfg.inputs[0]}: {exc.strerror}") from None
    else:
        text = sys.stdin.read()
    return parse_instance(text, cfg.format)


def _expect(obj: Any, kind: type, what: str) -> Any:
    if not isinstance(obj, kind):
        raise UsageError(f"expected {what} input, got {type(obj).__name__}")
    return obj


def _budget(cfg: CommandConfig) -> OracleBudget:
    if cfg.budget is None:
        return OracleBudget()
    return OracleBudget(max_choice_tuples=cfg.budget, max_assignments=cfg.budget)


def _cmp_of(inst: FmpInstance) -> dict[str, tuple[str, ...]]:
    cmp = as_cmp(inst)
    if cmp is None:
        raise UsageError("instance has fractional tradeoffs; use solve-fmp")
    return cmp


def _violator_json(v) -> dict[str, list[str]]:
    return {"girls": sorted(v.girls), "elements": sorted(v.elements)}


def _lines(d: dict[str, Any]) -> str:
    return "\n".join(f"{k} {v}" for k, v in d.items())


def _transform(out: Any, stats: dict[str, Any] | None = None) -> Outcome:
    text = emit_instance(out)
    return Outcome("success", stats=stats or {}, output=text, text=text.rstrip("\n"))


# --------------------------------------------------------------------------
# subcommands


def _solve_fmp(cfg: CommandConfig) -> Outcome:
    inst = _expect(_read(cfg), FmpInstance, "fmp")
    cmp = as_cmp(inst)
    if cmp is not None:
        return _solve_cmp_view(cmp, solver="hopcroft-karp")
    sol = solve_fmp_bruteforce(inst, _budget(cfg))
    stats = {"solver": "oracle", "girls": len(inst.sets)}
    if sol is None:
        return Outcome("unsat", stats=stats, text="unsat")
    chosen = {g: str(t) for g, t in sol.chosen(inst).items()}
    return Outcome("sat", witness=chosen, stats=stats, text="sat\n" + _lines(chosen))


def _solve_cmp_view(cmp: dict[str, tuple[str, ...]], solver: str) -> Outcome:
    r = solve_cmp(cmp)
    stats = {"solver": solver, "girls": len(cmp)}
    if r.sat:
        return Outcome("sat", witness=r.transversal, stats=stats,
                       text="sat\n" + _lines(r.transversal))
    cert = _violator_json(r.violator)
    text = f"unsat\nhall-violator girls {' '.join(cert['girls'])}\n" \
           f"hall-violator elements {' '.join(cert['elements'])}"
    return Outcome("unsat", certificate=cert, stats=stats, text=text)


def _solve_cmp(cfg: CommandConfig) -> Outcome:
    inst = _expect(_read(cfg), FmpInstance, "fmp")
    return _solve_cmp_view(_cmp_of(inst), solver="hopcroft-karp")


def _solve_smp(cfg: CommandConfig) -> Outcome:
    smp = _expect(_read(cfg), SmpInstance, "smp")
    r = solve_smp(smp)
    stats = {"matching_size": r.matching_size, "target": r.target, "repairs": len(r.repairs)}
    if r.sat:
        return Outcome("sat", witness=r.pairing, stats=stats, text="sat\n" + _lines(r.pairing))
    return Outcome("unsat", stats=stats, text="unsat")


def _oracle(cfg: CommandConfig) -> Outcome:
    inst = _read(cfg)
    budget = _budget(cfg)
    stats = {"solver": "oracle"}
    if isinstance(inst, FmpInstance):
        sol = solve_fmp_bruteforce(inst, budget)
        witness = None if sol is None else {g: str(t) for g, t in sol.chosen(inst).items()}
    elif isinstance(inst, Cnf):
        a = solve_sat_bruteforce(inst, budget)
        witness = None if a is None else inst.named_assignment(a)
    elif isinstance(inst, SmpInstance):
        witness = solve_smp_bruteforce(inst)
    else:
        m = perfect_tripartite_matching(inst.triples)
        witness = None if m is None else {g: [x, y] for g, x, y in m}
    if witness is None:
        return Outcome("unsat", stats=stats, text="unsat")
    return Outcome("sat", witness=witness, stats=stats, text="sat\n" + _lines(witness))


def _sat2fmp(cfg: CommandConfig) -> Outcome:
    cnf = _expect(_read(cfg), Cnf, "dimacs")
    inst, _ = sat_to_fmp(cnf)
    return _transform(inst, {"girls": len(inst.sets), "elements": len(inst.elements)})


def _cmp2sat(cfg: CommandConfig) -> Outcome:
    inst = _expect(_read(cfg), FmpInstance, "fmp")
    cnf, _, _ = cmp_to_sat(_cmp_of(inst))
    return _transform(cnf, {"variables": cnf.num_vars, "clauses": len(cnf.clauses)})


def _to3cnf(cfg: CommandConfig) -> Outcome:
    cnf = _expect(_read(cfg), Cnf, "dimacs")
    out, bridges = to_3cnf(cnf)
    return _transform(out, {"clauses": len(out.clauses), "bridges": len(bridges)})


def _nf(which: Callable) -> Callable[[CommandConfig], Outcome]:
    def run_nf(cfg: CommandConfig) -> Outcome:
        inst = _expect(_read(cfg), FmpInstance, "fmp")
        out, tr = which(inst)
        return _transform(out, {"sets": len(out.sets), "fresh_elements": len(tr.fresh_elements)})

    return run_nf


def _tri2fmp(cfg: CommandConfig) -> Outcome:
    tri = _expect(_read(cfg), TripartiteInstance, "tri")
    inst = tripartite_to_fmp(tri)
    return _transform(inst, {"girls": len(inst.sets)})


def _classify(cfg: CommandConfig) -> Outcome:
    cnf = _expect(_read(cfg), Cnf, "dimacs")
    flags = classify(cnf).flags()
    return Outcome("success", witness=flags, stats={"clauses": len(cnf.clauses)},
                   text=_lines({k: str(v).lower() for k, v in flags.items()}))


def _form_json(cnf: Cnf, form: CmpSatForm) -> dict[str, Any]:
    def names(vs):
        return [cnf.name(v) for v in vs]

    return {
        "positive_clauses": [names(c) for c in form.positive_clauses],
        "groups": [names(g) for g in form.groups],
        "optional_clauses": [[j, names(c)] for j, c in form.optional_clauses],
        "flipped": names(form.flipped),
        "dropped": list(form.dropped),
    }


def _recognize(cfg: CommandConfig) -> Outcome:
    cnf = _expect(_read(cfg), Cnf, "dimacs")
    recognizer = recognize_smp_sat if cfg.family == "smp" else recognize_cmp_sat
    form = recognizer(cnf)
    if not isinstance(form, CmpSatForm):
        cert = {"step": form.step, "reason": form.reason}
        return Outcome("not-recognized", certificate=cert, stats={"family": cfg.family},
                       text=f"not-recognized\n{form.step}: {form.reason}")
    r = solve_cmp_sat(form)
    info = _form_json(cnf, form)
    stats = {"family": cfg.family, "solvable": r.sat}
    text = ["recognized"]
    text += [f"clause {' '.join(c)}" for c in info["positive_clauses"]]
    text += [f"group {' '.join(g)}" for g in info["groups"]]
    if r.sat:
        info["assignment"] = named(form, r.assignment)
        text.append("true " + " ".join(k for k, v in info["assignment"].items() if v))
    else:
        info["hall_violator"] = _violator_json(r.violator) if r.violator else None
        text.append("unsolvable")
    return Outcome("recognized", witness=info, stats=stats, text="\n".join(text))


def _reduce(cfg: CommandConfig) -> Outcome:
    inst = _expect(_read(cfg), FmpInstance, "fmp")
    if not inst.canonical:
        raise UsageError("reduce expects a canonical instance")
    out, trace, oc = fragment_reduce(inst)
    if cfg.trace:
        Path(cfg.trace).write_text(trace.dumps())
    text = emit_fmp(out)
    stats = {"steps": len(trace.steps), "sets": len(out.sets), "rules": list(trace.rules)}
    witness = {"cmp": oc.cmp, "merges": trace.merges}
    return Outcome(oc.kind, witness=witness, stats=stats, output=text,
                   text=f"{oc.kind}\n{text.rstrip()}")


def _gen(cfg: CommandConfig) -> Outcome:
    rng = random.Random(cfg.seed)
    kind = cfg.kind or "cnf"
    inst: Any
    if kind == "cnf":
        inst = random_cnf(rng)
    elif kind == "cmp":
        inst = cmp_instance(random_cmp(rng))
    elif kind == "smp":
        inst = random_smp(rng)
    elif kind == "tri":
        inst = random_tripartite(rng)
    else:
        inst = random_fmp(rng)
    return _transform(inst, {"kind": kind, "seed": cfg.seed})


COMMANDS: dict[str, tuple[Callable[[CommandConfig], Outcome], str]] = {
    "solve-fmp": (_solve_fmp, "solve an FMP (matching when integral, oracle otherwise)"),
    "solve-cmp": (_solve_cmp, "solve an integral FMP by bipartite matching"),
    "solve-smp": (_solve_smp, "solve a symmetric marriage instance"),
    "oracle": (_oracle, "brute-force any supported instance"),
    "sat2fmp": (_sat2fmp, "encode a CNF as an FMP"),
    "cmp2sat": (_cmp2sat, "encode an integral FMP as a CNF"),
    "to3cnf": (_to3cnf, "split long clauses with bridge variables"),
    "nf1": (_nf(first_normal_form), "first normal form"),
    "nf2": (_nf(lambda i: second_normal_form(first_normal_form(i)[0])),
            "second normal form (first normal form is applied first)"),
    "tri2fmp": (_tri2fmp, "encode a tripartite matching instance as an FMP"),
    "classify": (_classify, "report tractable CNF families"),
    "recognize": (_recognize, "recognize and solve a CMP-SAT or SMP-SAT formula"),
    "reduce": (_reduce, "apply fragment-logic rewrites"),
    "gen": (_gen, "generate a seeded random instance"),
}


def run(cfg: CommandConfig) -> tuple[int, str]:
    """Execute ``cfg``; return the exit code and the text to print."""
    try:
        outcome = COMMANDS[cfg.subcommand][0](cfg)
    except ParseError as exc:
        return EXIT_USAGE, f"parse error: {exc}"
    except (UsageError, ValueError) as exc:
        return EXIT_USAGE, f"error: {exc}"
    except BudgetExceeded as exc:
        if cfg.json:
            return EXIT_BUDGET, json.dumps({"status": "budget-exceeded", "witness": None,
                                            "stats": {"reason": str(exc)}}, sort_keys=True)
        return EXIT_BUDGET, f"budget exceeded: {exc}"
    if cfg.json:
        return outcome.exit_code, json.dumps(outcome.to_json(), sort_keys=True, default=str)
    if outcome.output is not None and cfg.output:
        return outcome.exit_code, outcome.output
    return outcome.exit_code, _colorize(outcome.text, outcome.status)


def _colorize(text: str, status: str) -> str:
    if os.environ.get("HALLKIT_COLOR", "").lower() not in ("1", "always", "true", "yes"):
        return text
    code = {"sat": 32, "success": 32, "recognized": 32, "all-integral": 32}.get(status, 31)
    head, sep, rest = text.partition("\n")
    if head == status:
        return f"\x1b[{code}m{head}\x1b[0m{sep}{rest}"
    return text


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hallkit", description="Fractional and classical marriage toolkit.")
    sub = p.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        if name == "gen":
            sp.add_argument("kind", choices=("cnf", "cmp", "smp", "tri", "fmp"))
            sp.add_argument("--seed", type=int, default=0)
        else:
            sp.add_argument("input", nargs="?", default="-", help="input file (default stdin)")
            sp.add_argument("--format", choices=FORMATS)
        if name in ("solve-fmp", "oracle"):
            sp.add_argument("--budget", type=int, help="oracle search limit")
        if name == "reduce":
            sp.add_argument("--trace", help="write the rewrite trace as JSON")
        if name == "recognize":
            sp.add_argument("--family", choices=("cmp", "smp"), default="cmp")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("-o", "--output", help="write the result here instead of stdout")
    return p


def _config(ns: argparse.Namespace) -> CommandConfig:
    return CommandConfig(
        subcommand=ns.subcommand,
        inputs=(ns.input,) if getattr(ns, "input", None) else (),
        output=ns.output,
        json=ns.json,
        trace=getattr(ns, "trace", None),
        seed=getattr(ns, "seed", 0),
        budget=getattr(ns, "budget", None),
        format=getattr(ns, "format", None),
        kind=getattr(ns, "kind", None),
        family=getattr(ns, "family", "cmp"),
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(ns, "budget", None) is not None and ns.budget <= 0:
        print("error: --budget must be positive", file=sys.stderr)
        return EXIT_USAGE
    cfg = _config(ns)
    code, text = run(cfg)
    stream = sys.stderr if code == EXIT_USAGE else sys.stdout
    if cfg.output and code != EXIT_USAGE:
        Path(cfg.output).write_text(text if text.endswith("\n") else text + "\n")
    elif text:
        print(text, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())

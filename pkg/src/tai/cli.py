"""``tai`` command line: eval, translate, check and fuzz.

Exit codes: 0 success, 1 parse or input error, 2 semantic error (arity,
polarity, unsupported fragment), 3 step limit, 4 failed check.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path
from typing import Sequence

from .engine import DEFAULT_MAX_STEPS, StepLimitExceeded
from .fo_eval import Evaluator
from .formula import Formula, FormulaError, Kind, ordered_free_variables
from .generators import FULL_FRAGMENT, random_derived, random_iteration, random_structure
from .laws import LAWS, run_law
from .rewrites import expand
from .structure import FiniteStructure, Relation, StructureError, parse_structure, print_structure
from .syntax import ParseError, parse_formula, print_formula
from .translations import augment, eval_with_aux, translate_monotone_to_lfp, translate_to_pfp

EXIT_OK, EXIT_PARSE, EXIT_SEMANTIC, EXIT_STEPS, EXIT_CHECK = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def _vars_directive(text: str) -> list[str] | None:
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("#") and line[1:].strip().startswith("vars:"):
            return _split_vars(line[1:].strip()[len("vars:"):])
    return None


def _split_vars(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def load_structure(args) -> FiniteStructure | None:
    if not args.structure:
        return None
    return parse_structure(_read(args.structure))


def load_query(args, s: FiniteStructure | None) -> tuple[Formula, list[str]]:
    if args.query is not None:
        text = args.query
    elif args.query_file:
        text = _read(args.query_file)
    else:
        raise InputError("one of --query or --query-file is required")
    f = parse_formula(text, s.signature if s else None, allow_reserved=True)
    if args.vars is not None:
        vars = _split_vars(args.vars)
    else:
        vars = _vars_directive(text) or ordered_free_variables(f)
    missing = set(ordered_free_variables(f)) - set(vars)
    if missing:
        raise FormulaError(f"free variables {sorted(missing)} are not listed in --vars")
    return f, vars


def format_relation(r: Relation, fmt: str) -> str:
    if fmt == "counts":
        return f"{len(r.tuples)}\n"
    return "".join(f"({','.join(map(str, t))})\n" for t in r.sorted())


def _require_structure(s):
    if s is None:
        raise InputError("--structure is required")
    return s


def cmd_eval(args, out) -> int:
    s = _require_structure(load_structure(args))
    f, vars = load_query(args, s)
    out.write(format_relation(Evaluator(s, args.max_steps).sat_set(f, {}, vars), args.format))
    return EXIT_OK


def cmd_translate(args, out) -> int:
    s = load_structure(args)
    f, vars = load_query(args, s)
    aux = None
    match args.to:
        case "pfp":
            g = translate_to_pfp(f, reading=args.reading)
        case "lfp":
            g, aux = translate_monotone_to_lfp(f)
        case _:
            g = expand(f)
    out.write(print_formula(g) + "\n")
    if aux is not None and args.aux_out:
        Path(args.aux_out).write_text(print_structure(augment(_require_structure(s), aux)), encoding="utf-8")
    if not args.check:
        return EXIT_OK
    s = _require_structure(s)
    ev = Evaluator(s, args.max_steps)
    expected = ev.sat_set(f, {}, vars)
    got = eval_with_aux(s, g, aux, vars, max_steps=args.max_steps) if aux is not None else ev.sat_set(g, {}, vars)
    if expected == got:
        out.write("MATCH\n")
        return EXIT_OK
    out.write("MISMATCH\n")
    out.write("# expected\n" + format_relation(expected, "tuples") + "# got\n" + format_relation(got, "tuples"))
    return EXIT_CHECK


def cmd_check(args, out) -> int:
    names = list(LAWS) if args.law == "all" else [args.law]
    status = EXIT_OK
    for name in names:
        report = run_law(
            name, args.count, args.seed, max_domain=args.max_domain, mutate=args.mutant == "swap-fg",
            max_steps=args.max_steps,
        )
        out.write(report.summary() + "\n")
        if not report.ok:
            status = EXIT_CHECK
            out.write("first counterexample:\n" + report.counterexample.render() + "\n")
    return status


_FUZZ_KINDS = list(Kind)


def fuzz_instance(rng: random.Random, max_domain: int) -> tuple[FiniteStructure, Formula, tuple[str, ...]]:
    s = random_structure(rng, max_domain)
    if rng.random() < 0.5:
        f, vars = random_iteration(rng, ops=FULL_FRAGMENT)
    else:
        kind = rng.choice(_FUZZ_KINDS)
        mode = {Kind.LFP: "positive", Kind.ID: "positive", Kind.OPMU: "negative", Kind.OPNU: "negative"}.get(kind, "any")
        f, vars = random_derived(rng, kind, mode)
    return s, f, tuple(vars)


def cmd_fuzz(args, out) -> int:
    rng = random.Random(args.seed)
    target = Path(args.out)
    target.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        s, f, vars = fuzz_instance(rng, args.max_domain)
        stem = target / f"case_{i:03d}"
        stem.with_suffix(".struct").write_text(print_structure(s), encoding="utf-8")
        stem.with_suffix(".tai").write_text(f"# vars: {','.join(vars)}\n{print_formula(f)}\n", encoding="utf-8")
        out.write(f"{stem}.struct {stem}.tai\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tai", description="First-order logic with temporally accessed iteration.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, query=True):
        sp.add_argument("--structure", help="structure file")
        sp.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
        if query:
            sp.add_argument("--query", help="formula text")
            sp.add_argument("--query-file", help="formula file; may carry a '# vars: a,b' line")
            sp.add_argument("--vars", help="comma-separated free variables, fixing column order")

    e = sub.add_parser("eval", help="print the relation defined by a query")
    common(e)
    e.add_argument("--format", choices=("tuples", "counts"), default="tuples")
    e.set_defaults(func=cmd_eval)

    t = sub.add_parser("translate", help="print a translated or expanded query")
    common(t)
    t.add_argument("--to", choices=("pfp", "lfp", "core"), default="pfp")
    t.add_argument("--reading", choices=("lasso", "direct"), default="lasso", help="reading of the pfp translation")
    t.add_argument("--check", action="store_true", help="cross-evaluate against the input on --structure")
    t.add_argument("--aux-out", help="write the structure extended with stage-comparison relations (--to lfp)")
    t.set_defaults(func=cmd_translate)

    c = sub.add_parser("check", help="run a seeded property suite")
    c.add_argument("--law", choices=sorted(LAWS) + ["all"], required=True)
    c.add_argument("--count", type=int, default=100)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--max-domain", type=int, default=4)
    c.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    c.add_argument("--mutant", choices=("none", "swap-fg"), default="none", help="inject a known-wrong encoding")
    c.set_defaults(func=cmd_check)

    z = sub.add_parser("fuzz", help="write seeded structure/query pairs")
    z.add_argument("--count", type=int, default=10)
    z.add_argument("--seed", type=int, default=0)
    z.add_argument("--max-domain", type=int, default=4)
    z.add_argument("--out", default="fuzz-out")
    z.set_defaults(func=cmd_fuzz)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (ParseError, StructureError, InputError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except StepLimitExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_STEPS
    except FormulaError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())

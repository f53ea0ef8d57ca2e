"""Command-line entry point.

Exit codes: 0 success (SAT / true / witness found), 1 UNSAT or false,
2 bad input, 3 oracle bounds exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys

from .corpus import generate_corpus
from .fo import FOParseError, TARGETS, parse_fo, translate
from .formula import classify, make_clean, modal_depth, to_pnf
from .kripke import DomainPolicy, EvaluationError, KripkeModel, evaluate, validate
from .oracle import bounded_sat
from .syntax import ParseError, parse, render
from .tableau import FragmentError, solve

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_EXHAUSTED = 0, 1, 2, 3


class InputError(Exception):
    pass


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _formula(text: str):
    try:
        return parse(text)
    except ParseError as exc:
        raise InputError(f"parse error: {exc}") from exc


def cmd_sat(args) -> int:
    f = _formula(args.formula)
    lines: list[str] = []
    try:
        result = solve(f, trace=lines.append if args.trace else None)
    except FragmentError as exc:
        raise InputError(f"fragment error: {exc}") from exc
    payload: dict = {"result": "SAT" if result else "UNSAT"}
    if args.trace:
        payload["trace"] = lines
    if not result:
        _emit(args, payload, "\n".join(lines + ["UNSAT"]))
        return EXIT_NO
    # same check the mc subcommand would make
    assert validate(result.model, DomainPolicy.INCREASING) is None
    assert evaluate(result.model, result.root, result.valuation, f)
    payload.update(model=result.model.to_json(), root=result.root, valuation=result.valuation)
    text = "\n".join(lines + ["SAT", result.model.dumps(), json.dumps({"root": result.root, "valuation": result.valuation}, sort_keys=True)])
    _emit(args, payload, text)
    return EXIT_OK


def _assignments(pairs: list[str]) -> dict[str, str]:
    out = {}
    for pair in pairs:
        for item in filter(None, pair.split(",")):
            var, sep, value = item.partition("=")
            if not sep or not var or not value:
                raise InputError(f"bad assignment {item!r}; expected var=element")
            out[var.strip()] = value.strip()
    return out


def cmd_mc(args) -> int:
    try:
        with open(args.model) as fh:
            model = KripkeModel.from_json(json.load(fh))
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read model: {exc}") from exc
    problem = validate(model)
    if problem is not None:
        raise InputError(f"invalid model: {problem}")
    f = _formula(args.formula)
    try:
        value = evaluate(model, args.world, _assignments(args.assign), f)
    except EvaluationError as exc:
        raise InputError(str(exc)) from exc
    _emit(args, {"result": value}, "true" if value else "false")
    return EXIT_OK if value else EXIT_NO


def cmd_oracle(args) -> int:
    if args.max_worlds < 1 or args.max_domain < 1:
        raise InputError("bounds must be at least 1")
    f = _formula(args.formula)
    policy = DomainPolicy(args.policy)
    found = bounded_sat(to_pnf(f), args.max_worlds, args.max_domain, policy)
    bounds = {"max_worlds": args.max_worlds, "max_domain": args.max_domain, "policy": policy.value}
    if found is None:
        _emit(args, {"result": "no model within bounds", **bounds}, "no model within bounds")
        return EXIT_EXHAUSTED
    payload = {"result": "witness", "model": found.model.to_json(), "world": found.world, "valuation": found.sigma}
    text = "\n".join(["witness", found.model.dumps(), json.dumps({"world": found.world, "valuation": found.sigma}, sort_keys=True)])
    _emit(args, payload, text)
    return EXIT_OK


def cmd_translate(args) -> int:
    try:
        alpha = parse_fo(args.sentence)
    except FOParseError as exc:
        raise InputError(f"parse error: {exc}") from exc
    f = translate(alpha, args.target)
    meta = {"modal_depth": modal_depth(f), "fragment": str(classify(f)), "quantifiers": len(alpha.prefix)}
    _emit(args, {"formula": render(f), **meta}, render(f) + "\n" + json.dumps(meta, sort_keys=True))
    return EXIT_OK


def cmd_pnf(args) -> int:
    out = render(to_pnf(_formula(args.formula)))
    _emit(args, {"formula": out}, out)
    return EXIT_OK


def cmd_clean(args) -> int:
    out = render(make_clean(_formula(args.formula)))
    _emit(args, {"formula": out}, out)
    return EXIT_OK


def cmd_classify(args) -> int:
    tag = str(classify(to_pnf(_formula(args.formula))))
    _emit(args, {"fragment": tag}, tag)
    return EXIT_OK


def cmd_corpus(args) -> int:
    formulas = [render(f) for f in generate_corpus(args.seed, args.count)]
    _emit(args, {"seed": args.seed, "formulas": formulas}, "\n".join(formulas))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    json_errors = False

    def error(self, message):
        if _Parser.json_errors:
            print(json.dumps({"error": message}, sort_keys=True))
            sys.exit(EXIT_INPUT)
        super().error(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="text")

    parser = _Parser(prog="bundlefoml", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sat", parents=[common], help="decide satisfiability with the tableau")
    p.add_argument("formula")
    p.add_argument("--trace", action="store_true", help="print one line per rule application")
    p.set_defaults(func=cmd_sat)

    p = sub.add_parser("mc", parents=[common], help="evaluate a formula in a model file")
    p.add_argument("model", help="model in JSON format")
    p.add_argument("world")
    p.add_argument("formula")
    p.add_argument("--assign", action="append", default=[], metavar="VAR=ELEM[,...]")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("oracle", parents=[common], help="search all models within bounds")
    p.add_argument("formula")
    p.add_argument("--max-worlds", type=int, default=3)
    p.add_argument("--max-domain", type=int, default=3)
    p.add_argument("--policy", choices=[d.value for d in DomainPolicy], default="increasing")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("translate", parents=[common], help="encode a prenex FO(R) sentence")
    p.add_argument("sentence")
    p.add_argument("--target", choices=TARGETS, default=TARGETS[0])
    p.set_defaults(func=cmd_translate)

    for name, func in (("pnf", cmd_pnf), ("clean", cmd_clean), ("classify", cmd_classify)):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("formula")
        p.set_defaults(func=func)

    p = sub.add_parser("corpus", parents=[common], help="print the seeded random corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=500)
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    _Parser.json_errors = any(
        a == "--format=json" or (a == "--format" and nxt == "json")
        for a, nxt in zip(argv, argv[1:] + [""])
    )
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors and --help
        return exc.code
    try:
        return args.func(args)
    except InputError as exc:
        if args.format == "json":
            print(json.dumps({"error": str(exc)}, sort_keys=True))
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

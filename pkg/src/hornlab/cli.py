"""Command line interface.

Exit codes: 0 positive verdict, 1 negative verdict (with certificate),
2 bounds or budget exhausted, 3 input or usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass, field

from . import __version__
from .core import BOTTOM, HornClause, NotHornError, SignatureError, UniversalSentence
from .finder import BudgetExceeded
from .parse import (
    ParseError,
    parse_grammar,
    parse_structure,
    parse_theory,
    print_structure,
    print_theory,
    read_text,
)

EXIT_POSITIVE = 0
EXIT_NEGATIVE = 1
EXIT_BOUNDS = 2
EXIT_INPUT = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse uses exit code 2 for usage errors, which we reserve for budgets
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


@dataclass
class Output:
    """Collects records; rendered as text blocks or one JSON object per line."""

    command: str
    fmt: str
    certificates: bool = True
    records: list[dict] = field(default_factory=list)

    def add(self, kind: str, text: str = "", **data) -> None:
        self.records.append({"kind": kind, "text": text, **data})

    def render(self) -> str:
        if self.fmt == "json-lines":
            lines = []
            for r in self.records:
                if not self.certificates and r["kind"] != "verdict":
                    continue
                lines.append(json.dumps({"command": self.command, **r}, sort_keys=True))
            return "".join(l + "\n" for l in lines)
        parts = []
        for r in self.records:
            if r["kind"] == "verdict":
                parts.append(r["text"] + "\n")
            elif self.certificates:
                parts.append(r["text"] if r["text"].endswith("\n") else r["text"] + "\n")
        return "".join(parts)


def _budget(args) -> int | None:
    if getattr(args, "budget", None) is not None:
        return args.budget
    env = os.environ.get("HORNLAB_BUDGET")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise UsageError(f"HORNLAB_BUDGET must be an integer, got {env!r}") from None
        if value < 1:
            raise UsageError("HORNLAB_BUDGET must be positive")
        return value
    return None


def _theory(path) -> UniversalSentence:
    return parse_theory(read_text(path))


def _horn_theory(path) -> UniversalSentence:
    t = _theory(path)
    if not t.is_horn:
        raise NotHornError(f"{path}: this command needs Horn clauses only")
    return t


def _clauses(path, sentence: UniversalSentence):
    q = parse_theory(read_text(path), signature=sentence.signature)
    if not q.clauses:
        raise UsageError(f"{path}: no clause to check")
    return q.clauses


def _trace_block(title: str, trace_text: str) -> str:
    return f"trace {title}\n{trace_text}end\n"


# ---------------------------------------------------------------------------
# subcommands


def cmd_saturate(args, out: Output) -> int:
    from .chase import saturate

    t = _horn_theory(args.theory)
    a = parse_structure(read_text(args.structure), t.signature)
    rng = random.Random(args.seed) if args.shuffle else None
    res = saturate(a, t, rng=rng)
    out.add("verdict", "consistent" if res.consistent else "inconsistent", consistent=res.consistent)
    out.add("trace", _trace_block("saturation", res.trace_text()))
    out.add("structure", print_structure(res.structure))
    return EXIT_POSITIVE if res.consistent else EXIT_NEGATIVE


def cmd_entails(args, out: Output) -> int:
    from .chase import entails_horn
    from .convexity import countermodel

    t = _theory(args.theory)
    code = EXIT_POSITIVE
    for i, c in enumerate(_clauses(args.clause, t)):
        if t.is_horn and isinstance(c, HornClause):
            e = entails_horn(t, c)
            out.add("verdict", f"clause {i} {'entailed' if e else 'not-entailed'}", clause=i, entailed=e.entailed)
            out.add("trace", _trace_block(f"clause {i}", e.saturation.trace_text()))
            if not e:
                out.add("countermodel", print_structure(e.saturation.structure))
                code = EXIT_NEGATIVE
        else:
            m = countermodel(t, c)
            out.add("verdict", f"clause {i} {'entailed' if m is None else 'not-entailed'}", clause=i, entailed=m is None)
            if m is not None:
                out.add("countermodel", print_structure(m))
                code = EXIT_NEGATIVE
    return code


def cmd_sld_prove(args, out: Output) -> int:
    from .chase import entails_horn
    from .sld import format_deduction, sld_deduce

    t = _horn_theory(args.theory)
    code = EXIT_POSITIVE
    for i, c in enumerate(_clauses(args.clause, t)):
        if not isinstance(c, HornClause):
            raise NotHornError("sld-prove needs a Horn clause")
        r = sld_deduce(t, c, max_depth=args.depth, node_budget=_budget(args))
        if r.found:
            out.add("verdict", f"clause {i} proven", clause=i, proven=True)
            out.add("deduction", format_deduction(r.deduction))
            continue
        e = entails_horn(t, c)
        if not e:
            out.add("verdict", f"clause {i} not-entailed", clause=i, proven=False)
            out.add("countermodel", print_structure(e.saturation.structure))
            code = max(code, EXIT_NEGATIVE)
        else:
            out.add("verdict", f"clause {i} not-found-within depth {args.depth}", clause=i, proven=False)
            code = EXIT_BOUNDS
    return code


def cmd_verify_proof(args, out: Output) -> int:
    from .sld import parse_deduction, verify_deduction

    t = _horn_theory(args.theory)
    cs = _clauses(args.clause, t)
    if len(cs) != 1:
        raise UsageError("verify-proof takes a file with exactly one clause")
    text = read_text(args.proof).replace("\r\n", "\n")
    # accept sld-prove output as is: skip anything before the certificate
    lines = text.split("\n")
    starts = [i for i, l in enumerate(lines) if l.strip().startswith("deduction ")]
    if not starts:
        raise UsageError(f"{args.proof}: no deduction certificate found")
    body = []
    for l in lines[starts[0] :]:
        body.append(l)
        if l.strip().startswith("theta") or l.strip() == "deduction tautology":
            break
    d = parse_deduction("\n".join(body), t.signature)
    ok = verify_deduction(t, cs[0], d)
    out.add("verdict", "valid" if ok else "invalid", valid=ok)
    return EXIT_POSITIVE if ok else EXIT_NEGATIVE


def cmd_check_convex(args, out: Output) -> int:
    from .convexity import Convex, check_convex, format_verdict

    t = _theory(args.theory)
    v = check_convex(t, max_size=args.max_size, budget=_budget(args))
    head, _, body = format_verdict(v).partition("\n")
    out.add("verdict", head, convex=isinstance(v, Convex))
    out.add("certificate", body)
    return EXIT_POSITIVE if isinstance(v, Convex) else EXIT_NEGATIVE


def cmd_to_horn(args, out: Output) -> int:
    from .convexity import ToHornFailure, countermodel, to_horn

    t = _theory(args.theory)
    r = to_horn(t, budget=_budget(args))
    if isinstance(r, ToHornFailure):
        out.add("verdict", f"no-horn-disjunct clause {r.clause_index}", clause=r.clause_index)
        for p in sorted(r.clause.positives):
            m = countermodel(t, HornClause(r.clause.negatives, p))
            out.add("countermodel", f"against {p}\n{print_structure(m)}", disjunct=str(p))
        return EXIT_NEGATIVE
    out.add("verdict", "horn")
    out.add("theory", print_theory(r))
    return EXIT_POSITIVE


def _read_qdimacs(text: str):
    from .convexity import EaSatInstance

    exists, forall, clauses = [], [], []
    nvars = None
    for n, raw in enumerate(text.replace("\r\n", "\n").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        try:
            if parts[0] == "p":
                if len(parts) != 4 or parts[1] != "cnf":
                    raise ValueError("expected 'p cnf <vars> <clauses>'")
                nvars = int(parts[2])
            elif parts[0] in ("e", "a"):
                vs = [int(x) for x in parts[1:]]
                if not vs or vs[-1] != 0:
                    raise ValueError("quantifier line must end with 0")
                (exists if parts[0] == "e" else forall).extend(vs[:-1])
            else:
                lits = [int(x) for x in parts]
                if not lits or lits[-1] != 0:
                    raise ValueError("clause line must end with 0")
                clauses.append(lits[:-1])
        except ValueError as e:
            raise ParseError(str(e), n, 1) from None
    if nvars is None:
        raise ParseError("missing 'p cnf' header", 1, 1)
    k = len(exists)
    if exists != list(range(1, k + 1)) or forall != list(range(k + 1, nvars + 1)):
        raise ParseError("variables 1..k must be existential and k+1..n universal", 1, 1)
    return EaSatInstance(k, nvars, clauses)


def cmd_encode_easat(args, out: Output) -> int:
    from .convexity import encode_easat

    inst = _read_qdimacs(read_text(args.instance))
    out.add("verdict", f"encoded k={inst.k} l={inst.l} clauses={len(inst.matrix)}", true=inst.is_true() if args.solve else None)
    if args.solve:
        out.add("qbf", f"qbf {'true' if inst.is_true() else 'false'}\n")
    return _emit_theory(args, out, encode_easat(inst))


def _emit_theory(args, out: Output, t: UniversalSentence) -> int:
    text = print_theory(t)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    else:
        out.add("theory", text)
    return EXIT_POSITIVE


def _witness_out(t, w, out: Output) -> None:
    from .jep import format_witness

    out.add("witness", format_witness(t, w))


def cmd_jep_refute(args, out: Output) -> int:
    from .jep import jep_refute

    t = _horn_theory(args.theory)
    r = jep_refute(t, args.max_atoms, args.max_vars, side_vars=args.side_vars, budget=_budget(args))
    if r.found:
        out.add("verdict", "fails", holds=False)
        _witness_out(t, r.witness, out)
        return EXIT_NEGATIVE
    out.add(
        "verdict",
        f"none-within max-atoms {args.max_atoms} max-vars {args.max_vars}",
        holds=None,
    )
    return EXIT_BOUNDS


def cmd_jep_check(args, out: Output) -> int:
    from .jep import all_connected

    t = _horn_theory(args.theory)
    if all_connected(t):
        out.add("verdict", "holds (every clause is connected)", holds=True)
        return EXIT_POSITIVE
    return cmd_jep_refute(args, out)


def cmd_jep_brute(args, out: Output) -> int:
    from .jep import jep_bruteforce

    t = _horn_theory(args.theory)
    r = jep_bruteforce(t, args.max_size, budget=_budget(args))
    if r.holds:
        out.add("verdict", f"holds up to size {args.max_size}", holds=True)
        return EXIT_POSITIVE
    out.add("verdict", "fails", holds=False)
    out.add("models", f"model B1\n{print_structure(r.b1)}model B2\n{print_structure(r.b2)}")
    return EXIT_NEGATIVE


def _grammar(path):
    return parse_grammar(read_text(path))


def cmd_compile_cfg(args, out: Output) -> int:
    from .cfg import compile_grammar

    c = compile_grammar(_grammar(args.grammar))
    t = {"phi1": c.phi1, "phi2": c.phi2, "both": c.phi}[args.part]
    return _emit_theory(args, out, t)


def _split_word(g, tokens: list[str]) -> list[str]:
    if len(tokens) == 1 and tokens[0] not in g.terminals and all(ch in g.terminals for ch in tokens[0]):
        return list(tokens[0])
    return [w for tok in tokens for w in tok.split(",") if w]


def cmd_cfg_member(args, out: Output) -> int:
    from .cfg import derivation, normalize_self_rules

    g = normalize_self_rules(_grammar(args.grammar))
    word = _split_word(g, args.word)
    for s in word:
        if s not in g.terminals:
            raise UsageError(f"{s!r} is not a terminal of the grammar")
    path = derivation(g, g.start, word)
    if path is None:
        out.add("verdict", "not-member", member=False)
        return EXIT_NEGATIVE
    out.add("verdict", "member", member=True)
    out.add("derivation", "".join(" ".join(f) + "\n" for f in path))
    return EXIT_POSITIVE


def cmd_check_claim1(args, out: Output) -> int:
    from .cfg import check_claim1, normalize_self_rules

    g = normalize_self_rules(_grammar(args.grammar))
    r = check_claim1(g, args.max_len)
    out.add("verdict", f"checked {r.checked} discrepancies {len(r.discrepancies)}", ok=r.ok)
    for a, w, d, e in r.discrepancies:
        out.add("discrepancy", f"{a} {' '.join(w)} derives={d} entails={e}")
    return EXIT_POSITIVE if r.ok else EXIT_NEGATIVE


def cmd_check_claim2(args, out: Output) -> int:
    from .cfg import check_claim2, normalize_self_rules, random_conjunction

    g = normalize_self_rules(_grammar(args.grammar))
    rng = random.Random(args.seed)
    bad = 0
    positive = 0
    for i in range(args.random):
        atoms = random_conjunction(g, rng)
        chase_false, word = check_claim2(g, atoms)
        positive += chase_false
        if chase_false != (word is not None):
            bad += 1
            out.add("mismatch", f"case {i}: {', '.join(map(str, atoms))} chase={chase_false} word={word}")
    out.add("verdict", f"checked {args.random} inconsistent {positive} mismatches {bad}", ok=bad == 0)
    return EXIT_POSITIVE if bad == 0 else EXIT_NEGATIVE


# ---------------------------------------------------------------------------
# argument parsing


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json-lines"), default="text")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=_positive, default=1, help="worker cap (searches run sequentially)")
    common.add_argument("--budget", type=_positive, default=None, help="overrides HORNLAB_BUDGET")
    common.add_argument("--no-certificate", action="store_true", help="print verdicts only")
    common.add_argument("--verbose", action="store_true")

    p = _Parser(prog="hornlab", description="Universal Horn sentences: chase, SLD, convexity, JEP.")
    p.add_argument("--version", action="version", version=f"hornlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("saturate", cmd_saturate, "saturate a structure under a Horn theory")
    sp.add_argument("theory")
    sp.add_argument("structure")
    sp.add_argument("--shuffle", action="store_true", help="seeded random firing order")

    sp = add("entails", cmd_entails, "decide entailment of each clause in a file")
    sp.add_argument("theory")
    sp.add_argument("clause")

    sp = add("sld-prove", cmd_sld_prove, "search for an SLD-deduction")
    sp.add_argument("theory")
    sp.add_argument("clause")
    sp.add_argument("--depth", type=_nonneg, default=16)

    sp = add("verify-proof", cmd_verify_proof, "check a deduction certificate")
    sp.add_argument("theory")
    sp.add_argument("clause")
    sp.add_argument("proof")

    sp = add("check-convex", cmd_check_convex, "decide closure under binary products")
    sp.add_argument("theory")
    sp.add_argument("--max-size", type=_positive, default=None)
    sp.add_argument(
        "--no-iso-prune", action="store_true", help="accepted for compatibility; the per-clause search does not enumerate models"
    )

    sp = add("to-horn", cmd_to_horn, "rewrite each disjunctive clause by an entailed disjunct")
    sp.add_argument("theory")

    sp = add("encode-easat", cmd_encode_easat, "encode an exists-forall QDIMACS instance")
    sp.add_argument("instance")
    sp.add_argument("-o", "--output")
    sp.add_argument("--solve", action="store_true", help="also evaluate the quantified formula")

    for name, fn, text in (
        ("jep-refute", cmd_jep_refute, "search for a JEP-failure witness"),
        ("jep-check", cmd_jep_check, "connectedness test, then bounded witness search"),
    ):
        sp = add(name, fn, text)
        sp.add_argument("theory")
        sp.add_argument("--max-atoms", type=_positive, default=6)
        sp.add_argument("--max-vars", type=_positive, default=5)
        sp.add_argument("--side-vars", type=_positive, default=None)

    sp = add("jep-brute", cmd_jep_brute, "check joint embeddings of all small model pairs")
    sp.add_argument("theory")
    sp.add_argument("--max-size", type=_positive, default=2)

    sp = add("compile-cfg", cmd_compile_cfg, "compile a grammar to a Horn theory")
    sp.add_argument("grammar")
    sp.add_argument("-o", "--output")
    sp.add_argument("--part", choices=("phi1", "phi2", "both"), default="both")

    sp = add("cfg-member", cmd_cfg_member, "decide membership of a word")
    sp.add_argument("grammar")
    sp.add_argument("word", nargs="+")

    sp = add("check-claim1", cmd_check_claim1, "derivability versus entailment for all short forms")
    sp.add_argument("grammar")
    sp.add_argument("--max-len", type=_positive, default=4)

    sp = add("check-claim2", cmd_check_claim2, "chase versus pattern search on random conjunctions")
    sp.add_argument("grammar")
    sp.add_argument("--random", type=_positive, default=100)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    out = Output(args.command, args.format, certificates=not args.no_certificate)
    try:
        code = args.fn(args, out)
    except BudgetExceeded as e:
        out.add("verdict", f"budget-exceeded: {e}", budget=True)
        code = EXIT_BOUNDS
    except (ParseError, SignatureError, NotHornError, UsageError, OSError, ValueError) as e:
        print(f"hornlab {args.command}: {e}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(out.render())
    if args.verbose:
        print(f"{args.command}: exit {code}, {len(out.records)} records", file=sys.stderr)
    return code


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

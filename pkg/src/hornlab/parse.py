"""Text formats for theories (.uhs), structures (.fst) and grammars (.cfg).

Theory::

    signature { lt/2; P/1 }
    clause lt(x,y), lt(y,z) -> lt(x,z);
    clause lt(x,x) -> false;
    clause -> P(x) | Q(x);        # disjunctive conclusions are allowed

Structure (against a known signature)::

    domain { a, b, "a#1" }
    lt(a,b);

Grammar::

    start S;
    terminals a, b;
    S -> a S b;
    S -> a b;

``#`` starts a comment running to the end of the line.  Element names that
are not plain identifiers are written as double-quoted strings.
"""

from __future__ import annotations

import json
import re
from .core import (
    BOTTOM,
    Atom,
    FinStructure,
    GeneralClause,
    HornClause,
    Signature,
    SignatureError,
    UniversalSentence,
)

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
BARE_ELEMENT = re.compile(r"[A-Za-z0-9_]+")

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow>->)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<number>[0-9]+(?![A-Za-z_]))
  | (?P<ident>[A-Za-z0-9_]+)
  | (?P<punct>[{}(),;/|=])
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class EqualityAtomError(ParseError):
    """Equality atoms ``x = y`` are not part of the language."""


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"{self.kind}:{self.text!r}@{self.line}:{self.col}"


def _tokenize(text: str) -> list[_Tok]:
    text = text.replace("\r\n", "\n")
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        col = pos - line_start + 1
        if kind not in ("ws", "comment"):
            value = json.loads(chunk) if kind == "string" else chunk
            toks.append(_Tok(kind, value, line, col))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k=1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, tok=None, cls=ParseError):
        tok = tok or self.tok
        return cls(msg, tok.line, tok.col)

    def at(self, text) -> bool:
        t = self.tok
        return t.kind in ("punct", "arrow") and t.text == text

    def at_word(self, word) -> bool:
        return self.tok.kind == "ident" and self.tok.text == word

    def expect(self, text) -> _Tok:
        if not self.at(text):
            raise self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        t = self.tok
        self.i += 1
        return t

    def accept(self, text) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def ident(self, what="identifier") -> _Tok:
        t = self.tok
        if t.kind != "ident" or not IDENT.fullmatch(t.text):
            raise self.error(f"expected {what}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def element(self) -> _Tok:
        t = self.tok
        if t.kind not in ("ident", "string", "number"):
            raise self.error(f"expected element name, found {t.text or 'end of input'!r}")
        self.i += 1
        return t


# ---------------------------------------------------------------------------
# theories


def _parse_signature_block(p: _Parser) -> Signature:
    p.i += 1  # 'signature'
    p.expect("{")
    symbols: dict[str, int] = {}
    while not p.at("}"):
        if p.at("="):
            raise p.error("equality is not a relation symbol", cls=EqualityAtomError)
        name = p.ident("relation symbol")
        p.expect("/")
        num = p.tok
        if num.kind != "number":
            raise p.error("expected arity")
        p.i += 1
        arity = int(num.text)
        if arity < 1:
            raise p.error("arity must be positive", num)
        if name.text in symbols:
            raise p.error(f"duplicate symbol {name.text!r}", name)
        if name.text == "false":
            raise p.error("'false' is reserved", name)
        symbols[name.text] = arity
        if not (p.accept(";") or p.accept(",")):
            break
    p.expect("}")
    p.accept(";")
    return Signature(symbols)


def _parse_atom(p: _Parser, sig: Signature, element_names=False) -> Atom:
    name = p.tok
    if name.kind not in ("ident",) or not IDENT.fullmatch(name.text):
        raise p.error(f"expected atom, found {name.text or 'end of input'!r}")
    if p.peek().kind == "punct" and p.peek().text == "=":
        raise p.error("equality atoms are not permitted", cls=EqualityAtomError)
    p.i += 1
    if name.text not in sig:
        raise p.error(f"unknown relation symbol {name.text!r}", name)
    p.expect("(")
    args = []
    if not p.at(")"):
        while True:
            t = p.element() if element_names else p.ident("variable")
            if not element_names and p.at("="):
                raise p.error("equality atoms are not permitted", cls=EqualityAtomError)
            args.append(t.text)
            if not p.accept(","):
                break
    p.expect(")")
    if p.at("="):
        raise p.error("equality atoms are not permitted", cls=EqualityAtomError)
    arity = sig.arity(name.text)
    if len(args) != arity:
        raise p.error(f"{name.text} has arity {arity}, got {len(args)} arguments", name)
    return Atom(name.text, tuple(args))


def _parse_clause(p: _Parser, sig: Signature):
    p.i += 1  # 'clause'
    premise = []
    if not p.at("->"):
        while True:
            premise.append(_parse_atom(p, sig))
            if not p.accept(","):
                break
    p.expect("->")
    if p.at_word("false") and not (p.peek().kind == "punct" and p.peek().text == "("):
        p.i += 1
        p.expect(";")
        return HornClause(premise, BOTTOM)
    positives = [_parse_atom(p, sig)]
    while p.accept("|"):
        positives.append(_parse_atom(p, sig))
    p.expect(";")
    if len(set(positives)) == 1:
        return HornClause(premise, positives[0])
    return GeneralClause(premise, positives)


def parse_theory(text: str, signature: Signature | None = None) -> UniversalSentence:
    """Parse a theory; ``signature`` is used when the text has no signature block
    (clause-only files such as an entailment query)."""
    p = _Parser(text)
    sig = signature
    if p.at_word("signature"):
        sig = _parse_signature_block(p)
        if signature is not None:
            sig = signature.union(sig)
    if sig is None:
        raise p.error("missing signature block")
    clauses = []
    while p.tok.kind != "eof":
        if not p.at_word("clause"):
            raise p.error(f"expected 'clause', found {p.tok.text!r}")
        try:
            clauses.append(_parse_clause(p, sig))
        except SignatureError as e:
            raise p.error(str(e)) from None
    return UniversalSentence(sig, clauses)


def print_theory(sentence: UniversalSentence, with_signature=True) -> str:
    lines = []
    if with_signature:
        body = "; ".join(f"{n}/{a}" for n, a in sentence.signature.items())
        lines.append(f"signature {{ {body} }}" if body else "signature { }")
    for c in sentence.clauses:
        lines.append(f"clause {c};")
    return "\n".join(lines) + "\n"


def format_clause(c) -> str:
    return f"clause {c};"


# ---------------------------------------------------------------------------
# structures


def format_element(e: str) -> str:
    return e if BARE_ELEMENT.fullmatch(e) else json.dumps(e)


def parse_structure(text: str, signature: Signature) -> FinStructure:
    p = _Parser(text)
    if not p.at_word("domain"):
        raise p.error("expected 'domain'")
    p.i += 1
    p.expect("{")
    domain = []
    while not p.at("}"):
        domain.append(p.element().text)
        if not p.accept(","):
            break
    p.expect("}")
    p.accept(";")
    dom = set(domain)
    rels: dict[str, set] = {}
    while p.tok.kind != "eof":
        start = p.tok
        a = _parse_atom(p, signature, element_names=True)
        for e in a.args:
            if e not in dom:
                raise ParseError(f"unknown element {e!r}", start.line, start.col)
        rels.setdefault(a.symbol, set()).add(a.args)
        if not p.accept(";") and p.tok.kind != "eof":
            raise p.error("expected ';'")
    return FinStructure(signature, domain, rels)


def print_structure(s: FinStructure) -> str:
    lines = ["domain { " + ", ".join(map(format_element, s.domain)) + " }"]
    for a in s.atoms():
        lines.append(f"{a.symbol}({','.join(map(format_element, a.args))});")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# grammars


def parse_grammar(text: str):
    from .cfg import Grammar

    p = _Parser(text)
    if not p.at_word("start"):
        raise p.error("expected 'start'")
    p.i += 1
    start = p.ident("start symbol").text
    p.expect(";")
    if not p.at_word("terminals"):
        raise p.error("expected 'terminals'")
    p.i += 1
    terminals = []
    while not p.at(";"):
        t = p.ident("terminal")
        terminals.append(t.text)
        if not p.accept(","):
            break
    p.expect(";")
    productions = []
    positions = []
    while p.tok.kind != "eof":
        lhs = p.ident("nonterminal")
        p.expect("->")
        rhs = []
        while not p.at(";"):
            rhs.append(p.ident("grammar symbol").text)
        if not rhs:
            raise p.error(
                "empty right-hand side: the empty word is never in the language", lhs
            )
        p.expect(";")
        productions.append((lhs.text, tuple(rhs)))
        positions.append(lhs)
    term_set = set(terminals)
    nonterminals = {lhs for lhs, _ in productions} | {start}
    for (lhs, rhs), tok in zip(productions, positions):
        if lhs in term_set:
            raise ParseError(f"terminal {lhs!r} used as a left-hand side", tok.line, tok.col)
        for sym in rhs:
            if sym not in term_set and sym not in nonterminals:
                raise ParseError(f"unknown grammar symbol {sym!r}", tok.line, tok.col)
    if start in term_set:
        raise ParseError("start symbol is a terminal", 1, 1)
    return Grammar(nonterminals, term_set, productions, start)


def print_grammar(g) -> str:
    lines = [f"start {g.start};", "terminals " + ", ".join(sorted(g.terminals)) + ";"]
    for lhs, rhs in sorted(g.productions):
        lines.append(f"{lhs} -> {' '.join(rhs)};")
    return "\n".join(lines) + "\n"


def read_text(path) -> str:
    with open(path, encoding="utf-8", newline="") as f:
        return f.read()


def write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


__all__ = [
    "ParseError",
    "EqualityAtomError",
    "parse_theory",
    "print_theory",
    "parse_structure",
    "print_structure",
    "parse_grammar",
    "print_grammar",
    "format_element",
]


def parse_atoms(text: str, signature: Signature) -> list[Atom]:
    """A comma-separated list of atoms over variables (may be empty)."""
    p = _Parser(text)
    out = []
    if p.tok.kind == "eof":
        return out
    while True:
        out.append(_parse_atom(p, signature))
        if not p.accept(","):
            break
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return out

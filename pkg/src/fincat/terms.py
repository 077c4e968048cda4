"""Simply typed lambda terms with products and typed constants.

This module provides the object-level term language used by the rest of
the package: parsing and printing of types and terms, type checking,
goal-directed inhabitation search, delta-rule signatures, and exhaustive
one-step reduction graphs with termination/confluence reporting.

Surface syntax (UTF-8, ASCII-friendly):

* types:  atoms ``A``, products ``A * B`` (binds tighter), arrows
  ``A -> B`` (right-associative)
* terms:  ``\\x:T. t`` abstraction, ``t u`` application, ``(t, u)`` pair,
  ``p1 t`` / ``p2 t`` projections, integer literals as constants of the
  builtin numeral atom ``N``, and infix ``+`` / ``*`` as sugar for the
  curried builtin constants.

``p1`` and ``p2`` are reserved words.  Bound-variable identity is
alpha-equivalence; the canonical printer renames binders positionally so
that alpha-equivalent terms print identically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence, Union

__all__ = [
    "Ty",
    "TyAtom",
    "TyArrow",
    "TyProd",
    "NAT",
    "Tm",
    "Var",
    "Const",
    "Lam",
    "App",
    "Pair",
    "Proj",
    "PatVar",
    "PatLit",
    "DeltaRule",
    "Signature",
    "TermError",
    "TermParseError",
    "TermTypeError",
    "SignatureError",
    "parse_type",
    "parse_term",
    "parse_context",
    "parse_signature",
    "print_type",
    "print_term",
    "canonicalize",
    "canonical_print",
    "free_vars",
    "substitute",
    "typecheck",
    "term_depth",
    "lam_count",
    "term_sort_key",
    "infer_inhabitants",
    "first_inhabitant",
    "curry_howard_translate",
    "one_step_reductions",
    "ReductionGraph",
    "GraphReport",
    "reduction_graph",
    "DEFAULT_NODE_CAP",
]

DEFAULT_NODE_CAP = 10_000

_RESERVED_WORDS = frozenset({"p1", "p2", "rule"})
_NUMERAL_RE = re.compile(r"[0-9]+\Z")


class TermError(Exception):
    """Base class for errors raised by the term language."""


class TermParseError(TermError):
    """Raised on malformed type/term/signature text, with position info."""

    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        if line is not None:
            message = f"line {line}, col {col}: {message}"
        super().__init__(message)
        self.line = line
        self.col = col


class TermTypeError(TermError):
    """Raised when a term fails to type-check."""


class SignatureError(TermError):
    """Raised when a constant signature or delta rule is ill-formed."""


# ---------------------------------------------------------------------------
# Types


class Ty:
    """Base class of simple types (atoms, arrows, binary products)."""

    __slots__ = ()


@dataclass(frozen=True)
class TyAtom(Ty):
    name: str


@dataclass(frozen=True)
class TyArrow(Ty):
    src: Ty
    dst: Ty


@dataclass(frozen=True)
class TyProd(Ty):
    left: Ty
    right: Ty


#: Builtin atom inhabited by the integer-literal constants.
NAT = TyAtom("N")


def print_type(ty: Ty) -> str:
    """Render ``ty`` with minimal parentheses (``*`` binds tighter than ``->``)."""
    return _print_ty(ty, 0)


def _print_ty(ty: Ty, level: int) -> str:
    if isinstance(ty, TyAtom):
        return ty.name
    if isinstance(ty, TyProd):
        text = f"{_print_ty(ty.left, 1)} * {_print_ty(ty.right, 2)}"
        return f"({text})" if level > 1 else text
    if isinstance(ty, TyArrow):
        text = f"{_print_ty(ty.src, 1)} -> {_print_ty(ty.dst, 0)}"
        return f"({text})" if level > 0 else text
    raise TypeError(f"not a type: {ty!r}")


# ---------------------------------------------------------------------------
# Terms


class Tm:
    """Base class of terms."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Tm):
    name: str


@dataclass(frozen=True)
class Const(Tm):
    name: str


@dataclass(frozen=True)
class Lam(Tm):
    var: str
    ty: Ty
    body: Tm


@dataclass(frozen=True)
class App(Tm):
    fn: Tm
    arg: Tm


@dataclass(frozen=True)
class Pair(Tm):
    left: Tm
    right: Tm


@dataclass(frozen=True)
class Proj(Tm):
    index: int
    body: Tm

    def __post_init__(self) -> None:
        if self.index not in (1, 2):
            raise ValueError(f"projection index must be 1 or 2, got {self.index}")


def is_numeral(name: str) -> bool:
    return bool(_NUMERAL_RE.match(name))


def _infix_view(t: Tm) -> Optional[tuple[str, Tm, Tm]]:
    """Return ``(op, lhs, rhs)`` when ``t`` is a saturated builtin ``+``/``*`` call."""
    if (
        isinstance(t, App)
        and isinstance(t.fn, App)
        and isinstance(t.fn.fn, Const)
        and t.fn.fn.name in ("+", "*")
    ):
        return (t.fn.fn.name, t.fn.arg, t.arg)
    return None


_LVL_TERM, _LVL_SUM, _LVL_PROD, _LVL_APP, _LVL_ATOM = 0, 1, 2, 3, 4


def print_term(t: Tm) -> str:
    """Render ``t`` with minimal parentheses, keeping its own binder names."""
    return _print_tm(t, _LVL_TERM)


def _print_tm(t: Tm, level: int) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        if t.name in ("+", "*"):
            return f"({t.name})"
        return t.name
    if isinstance(t, Pair):
        return f"({_print_tm(t.left, _LVL_TERM)}, {_print_tm(t.right, _LVL_TERM)})"
    if isinstance(t, Lam):
        text = f"\\{t.var}:{print_type(t.ty)}. {_print_tm(t.body, _LVL_TERM)}"
        natural = _LVL_TERM
    elif isinstance(t, Proj):
        text = f"p{t.index} {_print_tm(t.body, _LVL_ATOM)}"
        natural = _LVL_APP
    elif isinstance(t, App):
        infix = _infix_view(t)
        if infix is not None:
            op, lhs, rhs = infix
            if op == "+":
                text = f"{_print_tm(lhs, _LVL_SUM)} + {_print_tm(rhs, _LVL_PROD)}"
                natural = _LVL_SUM
            else:
                text = f"{_print_tm(lhs, _LVL_PROD)} * {_print_tm(rhs, _LVL_APP)}"
                natural = _LVL_PROD
        else:
            text = f"{_print_tm(t.fn, _LVL_APP)} {_print_tm(t.arg, _LVL_ATOM)}"
            natural = _LVL_APP
    else:
        raise TypeError(f"not a term: {t!r}")
    return f"({text})" if natural < level else text


def free_vars(t: Tm) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Const):
        return frozenset()
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.var}
    if isinstance(t, App):
        return free_vars(t.fn) | free_vars(t.arg)
    if isinstance(t, Pair):
        return free_vars(t.left) | free_vars(t.right)
    if isinstance(t, Proj):
        return free_vars(t.body)
    raise TypeError(f"not a term: {t!r}")


def canonicalize(t: Tm) -> Tm:
    """Rename binders positionally (``x1``, ``x2``, ...) for stable identity.

    The binder at nesting depth ``d`` is named ``x<d>``, primed as needed to
    avoid the free variables of the whole term, so alpha-equivalent terms
    canonicalize to equal trees.
    """
    free = free_vars(t)

    def fresh(depth: int) -> str:
        name = f"x{depth}"
        while name in free:
            name += "'"
        return name

    def go(t: Tm, env: dict[str, str], depth: int) -> Tm:
        if isinstance(t, Var):
            return Var(env.get(t.name, t.name))
        if isinstance(t, Const):
            return t
        if isinstance(t, Lam):
            name = fresh(depth + 1)
            inner = dict(env)
            inner[t.var] = name
            return Lam(name, t.ty, go(t.body, inner, depth + 1))
        if isinstance(t, App):
            return App(go(t.fn, env, depth), go(t.arg, env, depth))
        if isinstance(t, Pair):
            return Pair(go(t.left, env, depth), go(t.right, env, depth))
        if isinstance(t, Proj):
            return Proj(t.index, go(t.body, env, depth))
        raise TypeError(f"not a term: {t!r}")

    return go(t, {}, 0)


def canonical_print(t: Tm) -> str:
    """Canonical text of ``t``: print after positional binder renaming.

    Two terms are alpha-equivalent iff their canonical prints are equal;
    this string is the node key in reduction graphs.
    """
    return print_term(canonicalize(t))


def substitute(t: Tm, name: str, replacement: Tm) -> Tm:
    """Capture-avoiding substitution of ``replacement`` for ``Var(name)``."""
    return substitute_many(t, {name: replacement})


def substitute_many(t: Tm, mapping: Mapping[str, Tm]) -> Tm:
    """Simultaneous capture-avoiding substitution."""
    mapping = {k: v for k, v in mapping.items() if v != Var(k)}
    if not mapping:
        return t
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if isinstance(t, Const):
        return t
    if isinstance(t, App):
        return App(substitute_many(t.fn, mapping), substitute_many(t.arg, mapping))
    if isinstance(t, Pair):
        return Pair(substitute_many(t.left, mapping), substitute_many(t.right, mapping))
    if isinstance(t, Proj):
        return Proj(t.index, substitute_many(t.body, mapping))
    if isinstance(t, Lam):
        inner = {k: v for k, v in mapping.items() if k != t.var and k in free_vars(t.body)}
        if not inner:
            return t
        incoming = frozenset().union(*(free_vars(v) for v in inner.values()))
        var = t.var
        body = t.body
        if var in incoming:
            avoid = incoming | free_vars(body) | set(inner)
            fresh = var
            while fresh in avoid:
                fresh += "'"
            body = substitute_many(body, {var: Var(fresh)})
            var = fresh
        return Lam(var, t.ty, substitute_many(body, inner))
    raise TypeError(f"not a term: {t!r}")


def term_depth(t: Tm) -> int:
    if isinstance(t, (Var, Const)):
        return 1
    if isinstance(t, Lam):
        return 1 + term_depth(t.body)
    if isinstance(t, App):
        return 1 + max(term_depth(t.fn), term_depth(t.arg))
    if isinstance(t, Pair):
        return 1 + max(term_depth(t.left), term_depth(t.right))
    if isinstance(t, Proj):
        return 1 + term_depth(t.body)
    raise TypeError(f"not a term: {t!r}")


def lam_count(t: Tm) -> int:
    if isinstance(t, (Var, Const)):
        return 0
    if isinstance(t, Lam):
        return 1 + lam_count(t.body)
    if isinstance(t, App):
        return lam_count(t.fn) + lam_count(t.arg)
    if isinstance(t, Pair):
        return lam_count(t.left) + lam_count(t.right)
    if isinstance(t, Proj):
        return lam_count(t.body)
    raise TypeError(f"not a term: {t!r}")


def term_sort_key(t: Tm) -> tuple[int, int, str]:
    """Deterministic order: fewest lambdas, then shortest print, then text."""
    text = canonical_print(t)
    return (lam_count(t), len(text), text)


# ---------------------------------------------------------------------------
# Tokenizer and parsers

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<arrow>->)
      | (?P<mapsto>\|->)
      | (?P<int>[0-9]+)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
      | (?P<sym>[\\λ:.(),+*{}=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "arrow" | "int" | "ident" | "sym" | "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise TermParseError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup or ""
        chunk = m.group()
        if kind != "ws":
            if kind == "mapsto":
                raise TermParseError("'|->' is not valid in term syntax", line, pos - line_start + 1)
            tok_text = "\\" if chunk == "λ" else chunk
            tokens.append(_Token(kind, tok_text, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    last_line = line
    tokens.append(_Token("eof", "", last_line, len(text) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, constants: frozenset[str] = frozenset()):
        self._tokens = _tokenize(text)
        self._pos = 0
        self._constants = constants

    def peek(self) -> _Token:
        return self._tokens[self._pos]

    def next(self) -> _Token:
        tok = self._tokens[self._pos]
        self._pos += 1
        return tok

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind: str, text: Optional[str] = None) -> _Token:
        tok = self.peek()
        if not self.at(kind, text):
            want = text if text is not None else kind
            raise TermParseError(f"expected {want!r}, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        return self.next()

    def expect_end(self) -> None:
        tok = self.peek()
        if tok.kind != "eof":
            raise TermParseError(f"unexpected trailing input {tok.text!r}", tok.line, tok.col)

    # -- types --------------------------------------------------------

    def type_(self) -> Ty:
        left = self._type_prod()
        if self.at("arrow"):
            self.next()
            return TyArrow(left, self.type_())
        return left

    def _type_prod(self) -> Ty:
        ty = self._type_atom()
        while self.at("sym", "*"):
            self.next()
            ty = TyProd(ty, self._type_atom())
        return ty

    def _type_atom(self) -> Ty:
        tok = self.peek()
        if tok.kind == "ident":
            self.next()
            return TyAtom(tok.text)
        if self.at("sym", "("):
            self.next()
            ty = self.type_()
            self.expect("sym", ")")
            return ty
        raise TermParseError(f"expected a type, found {tok.text or 'end of input'!r}", tok.line, tok.col)

    # -- terms --------------------------------------------------------

    def term(self) -> Tm:
        if self.at("sym", "\\"):
            self.next()
            name_tok = self.expect("ident")
            if name_tok.text in _RESERVED_WORDS:
                raise TermParseError(
                    f"{name_tok.text!r} is reserved and cannot bind a variable",
                    name_tok.line,
                    name_tok.col,
                )
            self.expect("sym", ":")
            ty = self.type_()
            self.expect("sym", ".")
            return Lam(name_tok.text, ty, self.term())
        return self._sum()

    def _sum(self) -> Tm:
        t = self._product()
        while self.at("sym", "+"):
            self.next()
            t = App(App(Const("+"), t), self._product())
        return t

    def _product(self) -> Tm:
        t = self._application()
        while self.at("sym", "*"):
            self.next()
            t = App(App(Const("*"), t), self._application())
        return t

    def _application(self) -> Tm:
        t = self._operand()
        while self._at_operand_start():
            t = App(t, self._operand())
        return t

    def _at_operand_start(self) -> bool:
        tok = self.peek()
        return tok.kind in ("int", "ident") or (tok.kind == "sym" and tok.text == "(")

    def _operand(self) -> Tm:
        tok = self.peek()
        if tok.kind == "ident" and tok.text in ("p1", "p2"):
            self.next()
            return Proj(int(tok.text[1]), self._operand())
        return self._atom()

    def _atom(self) -> Tm:
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return Const(tok.text)
        if tok.kind == "ident":
            self.next()
            if tok.text in self._constants:
                return Const(tok.text)
            return Var(tok.text)
        if self.at("sym", "("):
            self.next()
            if self.peek().kind == "sym" and self.peek().text in ("+", "*"):
                op = self.next().text
                self.expect("sym", ")")
                return Const(op)
            t = self.term()
            if self.at("sym", ","):
                self.next()
                u = self.term()
                self.expect("sym", ")")
                return Pair(t, u)
            self.expect("sym", ")")
            return t
        raise TermParseError(f"expected a term, found {tok.text or 'end of input'!r}", tok.line, tok.col)


def parse_type(text: str) -> Ty:
    parser = _Parser(text)
    ty = parser.type_()
    parser.expect_end()
    return ty


def parse_term(text: str, sig: Optional["Signature"] = None) -> Tm:
    """Parse a term; identifiers declared in ``sig`` become constants."""
    constants = sig.constant_names if sig is not None else Signature.BUILTIN_NAMES
    parser = _Parser(text, constants)
    t = parser.term()
    parser.expect_end()
    return t


def parse_context(text: str) -> list[tuple[str, Ty]]:
    """Parse a context literal like ``{f: A' -> A, b: B}`` (``{}`` is empty)."""
    parser = _Parser(text)
    parser.expect("sym", "{")
    ctx: list[tuple[str, Ty]] = []
    seen: set[str] = set()
    if not parser.at("sym", "}"):
        while True:
            name_tok = parser.expect("ident")
            if name_tok.text in _RESERVED_WORDS:
                raise TermParseError(
                    f"{name_tok.text!r} is reserved", name_tok.line, name_tok.col
                )
            if name_tok.text in seen:
                raise TermParseError(
                    f"duplicate hypothesis {name_tok.text!r}", name_tok.line, name_tok.col
                )
            seen.add(name_tok.text)
            parser.expect("sym", ":")
            ctx.append((name_tok.text, parser.type_()))
            if parser.at("sym", ","):
                parser.next()
                continue
            break
    parser.expect("sym", "}")
    parser.expect_end()
    return ctx


# ---------------------------------------------------------------------------
# Signatures and delta rules


class Pattern:
    """Base class of delta-rule argument patterns."""

    __slots__ = ()


@dataclass(frozen=True)
class PatVar(Pattern):
    name: str


@dataclass(frozen=True)
class PatLit(Pattern):
    const: str


@dataclass(frozen=True)
class DeltaRule:
    head: str
    patterns: tuple[Pattern, ...]
    rhs: Tm

    def arity(self) -> int:
        return len(self.patterns)


class Signature:
    """Typed constants plus delta rules.

    The builtin constants are always present: every integer literal is a
    constant of the numeral atom ``N``, and ``+`` / ``*`` are binary
    operations on ``N`` whose delta steps fire only when both arguments
    are literals.  User rules, by contrast, match structurally: a variable
    pattern matches an arbitrary argument term, while a literal pattern
    matches exactly that constant.

    Rules are validated at construction time to be type-preserving.
    """

    BUILTIN_CONSTANTS: Mapping[str, Ty] = {
        "+": TyArrow(NAT, TyArrow(NAT, NAT)),
        "*": TyArrow(NAT, TyArrow(NAT, NAT)),
    }
    BUILTIN_NAMES = frozenset(BUILTIN_CONSTANTS)

    def __init__(
        self,
        constants: Optional[Mapping[str, Ty]] = None,
        rules: Sequence[DeltaRule] = (),
    ):
        merged = dict(self.BUILTIN_CONSTANTS)
        for name, ty in (constants or {}).items():
            if is_numeral(name):
                raise SignatureError(f"numeral {name!r} cannot be redeclared")
            merged[name] = ty
        self._constants = merged
        self._rules = tuple(rules)
        self._rules_by_head: dict[str, list[DeltaRule]] = {}
        for rule in self._rules:
            self._validate_rule(rule)
            self._rules_by_head.setdefault(rule.head, []).append(rule)

    @property
    def constants(self) -> Mapping[str, Ty]:
        return dict(self._constants)

    @property
    def constant_names(self) -> frozenset[str]:
        return frozenset(self._constants)

    @property
    def rules(self) -> tuple[DeltaRule, ...]:
        return self._rules

    def constant_type(self, name: str) -> Ty:
        if is_numeral(name):
            return NAT
        try:
            return self._constants[name]
        except KeyError:
            raise TermTypeError(f"undeclared constant {name!r}") from None

    def has_constant(self, name: str) -> bool:
        return is_numeral(name) or name in self._constants

    def rules_for(self, head: str) -> tuple[DeltaRule, ...]:
        return tuple(self._rules_by_head.get(head, ()))

    def _validate_rule(self, rule: DeltaRule) -> None:
        if not self.has_constant(rule.head):
            raise SignatureError(f"rule head {rule.head!r} is not a declared constant")
        result_ty = self.constant_type(rule.head)
        env: dict[str, Ty] = {}
        for i, pat in enumerate(rule.patterns, start=1):
            if not isinstance(result_ty, TyArrow):
                raise SignatureError(
                    f"rule for {rule.head!r} has more arguments than its type allows"
                )
            arg_ty = result_ty.src
            result_ty = result_ty.dst
            if isinstance(pat, PatVar):
                if pat.name in env:
                    raise SignatureError(
                        f"rule for {rule.head!r} repeats pattern variable {pat.name!r}"
                    )
                if self.has_constant(pat.name):
                    raise SignatureError(
                        f"pattern variable {pat.name!r} shadows a declared constant"
                    )
                env[pat.name] = arg_ty
            elif isinstance(pat, PatLit):
                lit_ty = self.constant_type(pat.const)
                if lit_ty != arg_ty:
                    raise SignatureError(
                        f"rule for {rule.head!r}: literal pattern {pat.const!r} has type "
                        f"{print_type(lit_ty)}, expected {print_type(arg_ty)} at position {i}"
                    )
            else:
                raise SignatureError(f"unknown pattern {pat!r}")
        rhs_ty = typecheck(rule.rhs, env, self)
        if rhs_ty != result_ty:
            raise SignatureError(
                f"rule for {rule.head!r} is not type-preserving: right side has type "
                f"{print_type(rhs_ty)}, expected {print_type(result_ty)}"
            )


def parse_signature(text: str) -> Signature:
    """Parse signature text: ``name : T`` declarations and ``rule f(...) = t`` lines.

    Blank lines and ``#`` comments are ignored.  Declarations may appear in
    any order relative to the rules that use them.
    """
    decl_lines: list[tuple[int, str]] = []
    rule_lines: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("rule ") or line == "rule":
            rule_lines.append((lineno, line))
        else:
            decl_lines.append((lineno, line))

    constants: dict[str, Ty] = {}
    for lineno, line in decl_lines:
        name_part, sep, ty_part = line.partition(":")
        if not sep:
            raise TermParseError("expected 'name : type'", lineno, 1)
        name = name_part.strip()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", name) or name in _RESERVED_WORDS:
            raise TermParseError(f"bad constant name {name!r}", lineno, 1)
        if name in constants:
            raise TermParseError(f"constant {name!r} declared twice", lineno, 1)
        try:
            constants[name] = parse_type(ty_part)
        except TermParseError as exc:
            raise TermParseError(f"in declaration of {name!r}: {exc}", lineno, 1) from None

    base = Signature(constants)
    rules: list[DeltaRule] = []
    for lineno, line in rule_lines:
        try:
            rules.append(_parse_rule(line, base))
        except (TermParseError, SignatureError) as exc:
            raise SignatureError(f"line {lineno}: {exc}") from None
    return Signature(constants, rules)


def _parse_rule(line: str, sig: Signature) -> DeltaRule:
    parser = _Parser(line, sig.constant_names)
    head_tok = parser.expect("ident")
    if head_tok.text != "rule":
        raise TermParseError("rule lines must start with 'rule'", head_tok.line, head_tok.col)
    name_tok = parser.expect("ident")
    parser.expect("sym", "(")
    patterns: list[Pattern] = []
    if not parser.at("sym", ")"):
        while True:
            tok = parser.peek()
            if tok.kind == "int":
                parser.next()
                patterns.append(PatLit(tok.text))
            elif tok.kind == "ident":
                parser.next()
                if sig.has_constant(tok.text):
                    patterns.append(PatLit(tok.text))
                else:
                    patterns.append(PatVar(tok.text))
            else:
                raise TermParseError(
                    f"expected a pattern, found {tok.text or 'end of input'!r}", tok.line, tok.col
                )
            if parser.at("sym", ","):
                parser.next()
                continue
            break
    parser.expect("sym", ")")
    parser.expect("sym", "=")
    rhs = parser.term()
    parser.expect_end()
    return DeltaRule(name_tok.text, tuple(patterns), rhs)


# ---------------------------------------------------------------------------
# Type checking


def typecheck(
    t: Tm,
    ctx: Union[Mapping[str, Ty], Sequence[tuple[str, Ty]], None] = None,
    sig: Optional[Signature] = None,
) -> Ty:
    """Return the type of ``t`` under ``ctx``, or raise :class:`TermTypeError`."""
    if sig is None:
        sig = _EMPTY_SIGNATURE
    env: dict[str, Ty] = dict(ctx or {})
    return _typecheck(t, env, sig)


def _typecheck(t: Tm, env: dict[str, Ty], sig: Signature) -> Ty:
    if isinstance(t, Var):
        try:
            return env[t.name]
        except KeyError:
            raise TermTypeError(f"unbound variable {t.name!r}") from None
    if isinstance(t, Const):
        return sig.constant_type(t.name)
    if isinstance(t, Lam):
        inner = dict(env)
        inner[t.var] = t.ty
        return TyArrow(t.ty, _typecheck(t.body, inner, sig))
    if isinstance(t, App):
        fn_ty = _typecheck(t.fn, env, sig)
        if not isinstance(fn_ty, TyArrow):
            raise TermTypeError(
                f"cannot apply {print_term(t.fn)} of non-arrow type {print_type(fn_ty)}"
            )
        arg_ty = _typecheck(t.arg, env, sig)
        if arg_ty != fn_ty.src:
            raise TermTypeError(
                f"argument {print_term(t.arg)} has type {print_type(arg_ty)}, "
                f"expected {print_type(fn_ty.src)}"
            )
        return fn_ty.dst
    if isinstance(t, Pair):
        return TyProd(_typecheck(t.left, env, sig), _typecheck(t.right, env, sig))
    if isinstance(t, Proj):
        body_ty = _typecheck(t.body, env, sig)
        if not isinstance(body_ty, TyProd):
            raise TermTypeError(
                f"cannot project from {print_term(t.body)} of non-product type "
                f"{print_type(body_ty)}"
            )
        return body_ty.left if t.index == 1 else body_ty.right
    raise TypeError(f"not a term: {t!r}")


_EMPTY_SIGNATURE = Signature()


# ---------------------------------------------------------------------------
# Inhabitation search


def infer_inhabitants(
    ctx: Sequence[tuple[str, Ty]], goal: Ty, depth: int
) -> list[Tm]:
    """All beta-normal inhabitants of ``goal`` under ``ctx`` with tree depth <= ``depth``.

    Search is goal-directed: arrow and product goals are solved by
    introduction forms and, like atomic goals, by neutral terms built from
    context hypotheses via application and projection.  Results are
    deduplicated up to alpha-equivalence and sorted by
    :func:`term_sort_key`.
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    ctx_t = tuple(ctx)
    names = [name for name, _ in ctx_t]
    if len(set(names)) != len(names):
        raise ValueError(f"context has duplicate hypothesis names: {names}")
    memo: dict[tuple, tuple[Tm, ...]] = {}
    found = _inhabitants(ctx_t, goal, depth, memo)
    return sorted(found, key=term_sort_key)


def first_inhabitant(
    ctx: Sequence[tuple[str, Ty]], goal: Ty, depth: int
) -> Optional[Tm]:
    """The canonically first inhabitant (fewest lambdas, shortest, lexicographic)."""
    found = infer_inhabitants(ctx, goal, depth)
    return found[0] if found else None


def _inhabitants(
    ctx: tuple[tuple[str, Ty], ...], goal: Ty, depth: int, memo: dict
) -> tuple[Tm, ...]:
    key = ("all", ctx, goal, depth)
    if key in memo:
        return memo[key]
    memo[key] = ()  # cycle guard; depth strictly decreases so this is never hit
    out: dict[str, Tm] = {}
    for t in _neutrals(ctx, goal, depth, memo):
        out.setdefault(canonical_print(t), t)
    if depth >= 2 and isinstance(goal, TyArrow):
        var = _fresh_binder(ctx)
        inner = ctx + ((var, goal.src),)
        for body in _inhabitants(inner, goal.dst, depth - 1, memo):
            t = Lam(var, goal.src, body)
            out.setdefault(canonical_print(t), t)
    if depth >= 2 and isinstance(goal, TyProd):
        lefts = _inhabitants(ctx, goal.left, depth - 1, memo)
        rights = _inhabitants(ctx, goal.right, depth - 1, memo)
        for a in lefts:
            for b in rights:
                t = Pair(a, b)
                out.setdefault(canonical_print(t), t)
    result = tuple(out[k] for k in sorted(out))
    memo[key] = result
    return result


def _neutrals(
    ctx: tuple[tuple[str, Ty], ...], goal: Ty, depth: int, memo: dict
) -> tuple[Tm, ...]:
    key = ("neutral", ctx, goal, depth)
    if key in memo:
        return memo[key]
    memo[key] = ()
    out: dict[str, Tm] = {}
    for name, ty in ctx:
        if ty == goal:
            out.setdefault(canonical_print(Var(name)), Var(name))
    if depth >= 2:
        for ty in _neutral_type_closure(ctx, memo):
            if isinstance(ty, TyArrow) and ty.dst == goal:
                args = _inhabitants(ctx, ty.src, depth - 1, memo)
                for fn in _neutrals(ctx, ty, depth - 1, memo):
                    for arg in args:
                        t = App(fn, arg)
                        out.setdefault(canonical_print(t), t)
            if isinstance(ty, TyProd) and ty.left == goal:
                for body in _neutrals(ctx, ty, depth - 1, memo):
                    t = Proj(1, body)
                    out.setdefault(canonical_print(t), t)
            if isinstance(ty, TyProd) and ty.right == goal:
                for body in _neutrals(ctx, ty, depth - 1, memo):
                    t = Proj(2, body)
                    out.setdefault(canonical_print(t), t)
    result = tuple(out[k] for k in sorted(out))
    memo[key] = result
    return result


def _neutral_type_closure(
    ctx: tuple[tuple[str, Ty], ...], memo: dict
) -> tuple[Ty, ...]:
    """Every type a neutral term over ``ctx`` can have, sorted for determinism."""
    key = ("closure", ctx)
    if key in memo:
        return memo[key]
    seen: set[Ty] = set()
    stack = [ty for _, ty in ctx]
    while stack:
        ty = stack.pop()
        if ty in seen:
            continue
        seen.add(ty)
        if isinstance(ty, TyArrow):
            stack.append(ty.dst)
        elif isinstance(ty, TyProd):
            stack.append(ty.left)
            stack.append(ty.right)
    result = tuple(sorted(seen, key=print_type))
    memo[key] = result
    return result


def _fresh_binder(ctx: tuple[tuple[str, Ty], ...]) -> str:
    taken = {name for name, _ in ctx}
    name = f"x{len(ctx) + 1}"
    while name in taken or name in _RESERVED_WORDS:
        name += "'"
    return name


# ---------------------------------------------------------------------------
# Propositional reading


def curry_howard_translate(
    goal: Ty, ctx: Sequence[tuple[str, Ty]] = ()
) -> str:
    """Propositional reading: arrows become →, products ∧, atoms letters.

    Letters are assigned from P, Q, R, ... in first-occurrence order,
    scanning the context hypotheses (in order) and then the goal.  The
    hypotheses, if any, are appended after ``from``.
    """
    letters = _assign_letters([ty for _, ty in ctx] + [goal])
    goal_text = _prop_text(goal, letters, top=True)
    if not ctx:
        return goal_text
    hyps = ", ".join(_prop_text(ty, letters, top=False) for _, ty in ctx)
    return f"{goal_text} from {hyps}"


def _assign_letters(types: Sequence[Ty]) -> dict[str, str]:
    def letter_stream() -> Iterator[str]:
        base = "PQRSTUVWXYZ"
        yield from base
        suffix = 1
        while True:
            for ch in base:
                yield f"{ch}{suffix}"
            suffix += 1

    stream = letter_stream()
    letters: dict[str, str] = {}

    def scan(ty: Ty) -> None:
        if isinstance(ty, TyAtom):
            if ty.name not in letters:
                letters[ty.name] = next(stream)
        elif isinstance(ty, TyArrow):
            scan(ty.src)
            scan(ty.dst)
        elif isinstance(ty, TyProd):
            scan(ty.left)
            scan(ty.right)

    for ty in types:
        scan(ty)
    return letters


def _prop_text(ty: Ty, letters: Mapping[str, str], top: bool) -> str:
    return _prop(ty, letters, 0, top)


def _prop(ty: Ty, letters: Mapping[str, str], level: int, spaced: bool) -> str:
    if isinstance(ty, TyAtom):
        return letters[ty.name]
    if isinstance(ty, TyProd):
        text = f"{_prop(ty.left, letters, 1, False)}∧{_prop(ty.right, letters, 2, False)}"
        return f"({text})" if level > 1 else text
    if isinstance(ty, TyArrow):
        arrow = " → " if spaced else "→"
        text = f"{_prop(ty.src, letters, 1, False)}{arrow}{_prop(ty.dst, letters, 0, False)}"
        return f"({text})" if level > 0 else text
    raise TypeError(f"not a type: {ty!r}")


# ---------------------------------------------------------------------------
# One-step reduction


def _spine(t: Tm) -> tuple[Tm, list[Tm]]:
    args: list[Tm] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def _contractions_at(t: Tm, sig: Signature) -> list[Tm]:
    """All single-step contractions of a redex rooted exactly at ``t``."""
    out: list[Tm] = []
    if isinstance(t, App) and isinstance(t.fn, Lam):
        out.append(substitute(t.fn.body, t.fn.var, t.arg))
    if isinstance(t, Proj) and isinstance(t.body, Pair):
        out.append(t.body.left if t.index == 1 else t.body.right)
    head, args = _spine(t)
    if isinstance(head, Const):
        if (
            head.name in ("+", "*")
            and len(args) == 2
            and all(isinstance(a, Const) and is_numeral(a.name) for a in args)
        ):
            x, y = (int(a.name) for a in args)  # type: ignore[union-attr]
            value = x + y if head.name == "+" else x * y
            out.append(Const(str(value)))
        for rule in sig.rules_for(head.name):
            if rule.arity() != len(args):
                continue
            env: dict[str, Tm] = {}
            ok = True
            for pat, arg in zip(rule.patterns, args):
                if isinstance(pat, PatVar):
                    env[pat.name] = arg
                elif arg != Const(pat.const):  # literal patterns match exactly
                    ok = False
                    break
            if ok:
                out.append(substitute_many(rule.rhs, env))
    return out


def one_step_reductions(t: Tm, sig: Optional[Signature] = None) -> list[Tm]:
    """All terms obtained by contracting exactly one redex anywhere in ``t``.

    Redexes are beta redexes, projections of pairs, and delta redexes from
    ``sig``.  The result has no alpha-duplicates and is sorted by canonical
    print.
    """
    if sig is None:
        sig = _EMPTY_SIGNATURE
    out: dict[str, Tm] = {}

    def emit(t2: Tm) -> None:
        out.setdefault(canonical_print(t2), t2)

    def walk(sub: Tm, rebuild) -> None:
        for reduct in _contractions_at(sub, sig):
            emit(rebuild(reduct))
        if isinstance(sub, Lam):
            walk(sub.body, lambda r, s=sub: rebuild(Lam(s.var, s.ty, r)))
        elif isinstance(sub, App):
            walk(sub.fn, lambda r, s=sub: rebuild(App(r, s.arg)))
            walk(sub.arg, lambda r, s=sub: rebuild(App(s.fn, r)))
        elif isinstance(sub, Pair):
            walk(sub.left, lambda r, s=sub: rebuild(Pair(r, s.right)))
            walk(sub.right, lambda r, s=sub: rebuild(Pair(s.left, r)))
        elif isinstance(sub, Proj):
            walk(sub.body, lambda r, s=sub: rebuild(Proj(s.index, r)))

    walk(t, lambda r: r)
    return [out[k] for k in sorted(out)]


# ---------------------------------------------------------------------------
# Reduction graphs


@dataclass(frozen=True)
class ReductionGraph:
    """Exhaustive one-step reduction graph rooted at a single term.

    Node keys are canonical prints.  ``edges`` lists successors for every
    expanded node; when ``truncated`` is true some discovered nodes were
    never expanded and are absent from ``edges``.
    """

    root: str
    nodes: Mapping[str, Tm]
    edges: Mapping[str, tuple[str, ...]]
    normal_forms: tuple[str, ...]
    truncated: bool
    term_type: Ty

    def successors(self, key: str) -> tuple[str, ...]:
        return self.edges.get(key, ())

    def sorted_nodes(self) -> list[str]:
        return sorted(self.nodes)

    def descendants(self, key: str) -> frozenset[str]:
        """All nodes reachable from ``key`` (including itself) along edges."""
        seen = {key}
        stack = [key]
        while stack:
            for nxt in self.edges.get(stack.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return frozenset(seen)


@dataclass(frozen=True)
class GraphReport:
    """Summary flags for a reduction graph.

    Each flag is ``None`` when the graph was truncated at the node cap and
    the property is therefore indeterminate.
    """

    terminating: Optional[bool]
    unique_nf: Optional[bool]
    locally_confluent_on_graph: Optional[bool]
    truncated: bool
    node_count: int
    normal_forms: tuple[str, ...]

    def summary(self) -> str:
        def show(flag: Optional[bool]) -> str:
            return "indeterminate" if flag is None else ("yes" if flag else "no")

        lines = [
            f"nodes: {self.node_count}",
            f"normal forms: {', '.join(self.normal_forms) if self.normal_forms else '(none)'}",
            f"terminating: {show(self.terminating)}",
            f"unique normal form: {show(self.unique_nf)}",
            f"locally confluent on graph: {show(self.locally_confluent_on_graph)}",
        ]
        if self.truncated:
            lines.append("warning: graph truncated at the node cap")
        return "\n".join(lines)


def reduction_graph(
    t: Tm,
    sig: Optional[Signature] = None,
    node_cap: int = DEFAULT_NODE_CAP,
    ctx: Union[Mapping[str, Ty], Sequence[tuple[str, Ty]], None] = None,
) -> tuple[ReductionGraph, GraphReport]:
    """Exhaustively close ``t`` under one-step reduction, up to ``node_cap`` nodes.

    Every edge is checked for type preservation.  The report flags are
    computed from the finished graph; if the cap is hit the graph is
    truncated and all three flags are indeterminate (``None``).
    """
    if node_cap < 1:
        raise ValueError(f"node_cap must be >= 1, got {node_cap}")
    if sig is None:
        sig = _EMPTY_SIGNATURE
    env = dict(ctx or {})
    root_ty = typecheck(t, env, sig)

    root_key = canonical_print(t)
    nodes: dict[str, Tm] = {root_key: t}
    edges: dict[str, tuple[str, ...]] = {}
    queue: list[str] = [root_key]
    truncated = False
    while queue:
        key = queue.pop(0)
        term = nodes[key]
        successors = one_step_reductions(term, sig)
        succ_keys: list[str] = []
        fresh: list[tuple[str, Tm]] = []
        for succ in successors:
            succ_ty = typecheck(succ, env, sig)
            assert succ_ty == root_ty, (
                f"subject reduction violated: {key} -> {canonical_print(succ)} "
                f"changed type to {print_type(succ_ty)}"
            )
            skey = canonical_print(succ)
            succ_keys.append(skey)
            if skey not in nodes and all(skey != fk for fk, _ in fresh):
                fresh.append((skey, succ))
        if len(nodes) + len(fresh) > node_cap:
            truncated = True
            break
        for skey, succ in fresh:
            nodes[skey] = succ
            queue.append(skey)
        edges[key] = tuple(sorted(set(succ_keys)))

    normal_forms = tuple(sorted(k for k, succs in edges.items() if not succs))
    graph = ReductionGraph(
        root=root_key,
        nodes=nodes,
        edges=edges,
        normal_forms=normal_forms,
        truncated=truncated,
        term_type=root_ty,
    )
    if truncated:
        report = GraphReport(None, None, None, True, len(nodes), normal_forms)
    else:
        report = GraphReport(
            terminating=_is_acyclic(edges),
            unique_nf=len(normal_forms) == 1,
            locally_confluent_on_graph=_locally_confluent(graph),
            truncated=False,
            node_count=len(nodes),
            normal_forms=normal_forms,
        )
    return graph, report


def _is_acyclic(edges: Mapping[str, tuple[str, ...]]) -> bool:
    WHITE, GREY, BLACK = 0, 1, 2
    color = {k: WHITE for k in edges}
    for start in sorted(edges):
        if color[start] != WHITE:
            continue
        stack: list[tuple[str, int]] = [(start, 0)]
        color[start] = GREY
        while stack:
            node, i = stack.pop()
            succs = edges.get(node, ())
            if i < len(succs):
                stack.append((node, i + 1))
                nxt = succs[i]
                state = color.get(nxt, BLACK)
                if state == GREY:
                    return False
                if state == WHITE:
                    color[nxt] = GREY
                    stack.append((nxt, 0))
            else:
                color[node] = BLACK
    return True


def _locally_confluent(graph: ReductionGraph) -> bool:
    """Every branching pair of one-step reducts rejoins somewhere in the graph."""
    desc_cache: dict[str, frozenset[str]] = {}

    def desc(key: str) -> frozenset[str]:
        if key not in desc_cache:
            desc_cache[key] = graph.descendants(key)
        return desc_cache[key]

    for key in sorted(graph.edges):
        succs = graph.edges[key]
        for i in range(len(succs)):
            for j in range(i + 1, len(succs)):
                if not desc(succs[i]) & desc(succs[j]):
                    return False
    return True

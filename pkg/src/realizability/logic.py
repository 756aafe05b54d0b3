"""First-order formulas of ZF_eps, their sugar, and a natural-deduction checker
that extracts c-terms from fully annotated derivations.

Relation symbols: ``neps`` (strong non-membership), ``notin`` (extensional
non-membership) and ``sub`` (inclusion).  ``t = u |-> F`` is ``EqCond``.
Quantifiers carry a *domain*: ``all`` (ordinary), ``gimel`` (over the
members of a ground set E, bounded by ``bound``) or ``ent`` (over the
integers, the value carrying the numeral on the stack).

Text syntax is S-expressions; see :func:`parse_formula` and
:func:`parse_derivation`.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping, Sequence, Union

from .compiler import LAbs, LApp, LConst, LVar, LambdaTerm, CTerm, compile_lambda
from .terms import CC

__all__ = [
    "SVar", "FunApp", "Param", "SetTerm", "SIGNATURE",
    "Top", "Bottom", "TOP", "BOT", "Rel", "Atom", "Implies", "Forall", "EqCond", "Sugar",
    "Formula", "RELATIONS", "DOMAINS",
    "chain", "neg", "conj", "disj", "exists", "exists_many", "iff", "eps", "member",
    "neq", "eq", "simeq", "strong_sub", "strong_eq", "forall_eps", "exists_eps",
    "forall_gimel", "forall_ent", "exists_ent", "int_formula",
    "expand", "expand1", "free_vars", "substitute", "alpha_eq", "is_closed",
    "parse_formula", "format_formula", "parse_setterm", "format_setterm",
    "Derivation", "Hyp", "AppD", "Lam", "Gen", "Inst", "Peirce", "Efq",
    "DerivationError", "extract", "check", "conclusion",
    "parse_derivation", "format_derivation", "parse_derivation_file",
    "SCHEMES", "axiom_scheme", "extract_and_smoke",
]


# -- individual terms ---------------------------------------------------------


@dataclass(frozen=True)
class SVar:
    name: str


@dataclass(frozen=True)
class FunApp:
    symbol: str
    args: tuple["SetTerm", ...] = ()

    def __post_init__(self) -> None:
        arity = SIGNATURE.get(self.symbol)
        if arity is None:
            raise ValueError(f"unknown function symbol {self.symbol!r}")
        if arity != len(self.args):
            raise ValueError(f"{self.symbol} takes {arity} argument(s), got {len(self.args)}")


@dataclass(frozen=True)
class Param:
    """A ground individual (typically a semantics Name) used as a closed term."""

    value: Any
    label: str | None = field(default=None, compare=False)


SetTerm = Union[SVar, FunApp, Param]

# Function symbols with their arities.  ``one`` is 1_E(x) with E as first
# argument; ``band``/``bor``/``bnot`` are the Boolean operations on {0, 1}.
SIGNATURE: dict[str, int] = {
    "0": 0, "1": 0, "s": 1, "gimel": 1, "one": 2,
    "band": 2, "bor": 2, "bnot": 1, "lt": 2, "pair": 2, "delta": 1,
}


# -- formulas -----------------------------------------------------------------

RELATIONS = ("neps", "notin", "sub")
DOMAINS = ("all", "gimel", "ent")


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


TOP = Top()
BOT = Bottom()


@dataclass(frozen=True)
class Rel:
    rel: str
    left: SetTerm
    right: SetTerm

    def __post_init__(self) -> None:
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")


@dataclass(frozen=True)
class Atom:
    """Propositional constant, valued by the semantic context."""

    name: str


@dataclass(frozen=True)
class Implies:
    hyp: "Formula"
    concl: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"
    domain: str = "all"
    bound: SetTerm | None = None

    def __post_init__(self) -> None:
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown quantifier domain {self.domain!r}")
        if (self.domain == "gimel") != (self.bound is not None):
            raise ValueError("only gimel quantifiers carry a bound")


@dataclass(frozen=True)
class EqCond:
    left: SetTerm
    right: SetTerm
    body: "Formula"


@dataclass(frozen=True)
class Sugar:
    """An unexpanded abbreviation; ``args`` mixes formulas, terms and names."""

    op: str
    args: tuple


Formula = Union[Top, Bottom, Rel, Atom, Implies, Forall, EqCond, Sugar]


# -- sugar builders -----------------------------------------------------------


def chain(*parts: Formula) -> Formula:
    """``A1, ..., An -> B``."""
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Implies(p, out)
    return out


def neg(a: Formula) -> Sugar:
    return Sugar("not", (a,))


def conj(a: Formula, b: Formula) -> Sugar:
    return Sugar("and", (a, b))


def disj(a: Formula, b: Formula) -> Sugar:
    return Sugar("or", (a, b))


def exists(x: str, a: Formula) -> Sugar:
    return Sugar("ex", (x, a))


def exists_many(x: str, *fs: Formula) -> Sugar:
    return Sugar("exs", (x, *fs))


def iff(a: Formula, b: Formula) -> Sugar:
    return Sugar("iff", (a, b))


def eps(a: SetTerm, b: SetTerm) -> Sugar:
    return Sugar("eps", (a, b))


def member(a: SetTerm, b: SetTerm) -> Sugar:
    return Sugar("in", (a, b))


def neq(t: SetTerm, u: SetTerm) -> Sugar:
    return Sugar("neq", (t, u))


def eq(t: SetTerm, u: SetTerm) -> Sugar:
    return Sugar("eq", (t, u))


def simeq(a: SetTerm, b: SetTerm) -> Sugar:
    return Sugar("simeq", (a, b))


def strong_sub(a: SetTerm, b: SetTerm) -> Sugar:
    return Sugar("ssub", (a, b))


def strong_eq(a: SetTerm, b: SetTerm) -> Sugar:
    return Sugar("sim", (a, b))


def forall_eps(x: str, a: SetTerm, f: Formula) -> Sugar:
    return Sugar("alleps", (x, a, f))


def exists_eps(x: str, a: SetTerm, f: Formula) -> Sugar:
    return Sugar("exeps", (x, a, f))


def forall_gimel(x: str, e: SetTerm, f: Formula) -> Forall:
    return Forall(x, f, "gimel", e)


def forall_ent(x: str, f: Formula) -> Forall:
    return Forall(x, f, "ent")


def exists_ent(x: str, f: Formula) -> Sugar:
    return Sugar("exent", (x, f))


def int_formula(n: SetTerm) -> Sugar:
    return Sugar("int", (n,))


# -- expansion ----------------------------------------------------------------

_SUGAR_ARITY = {
    "not": 1, "and": 2, "or": 2, "ex": 2, "iff": 2, "eps": 2, "in": 2, "neq": 2,
    "eq": 2, "simeq": 2, "ssub": 2, "sim": 2, "alleps": 3, "exeps": 3, "exent": 2,
    "int": 1,
}


def _fresh(avoid: set[str], base: str = "v") -> str:
    for i in itertools.count():
        cand = f"{base}{i}"
        if cand not in avoid:
            return cand
    raise AssertionError  # pragma: no cover


def _unfold(s: Sugar) -> Formula:
    """One layer of abbreviation; pairs come back as a Sugar('pair', ...)."""
    op, a = s.op, s.args
    if op == "not":
        return Implies(a[0], BOT)
    if op == "or":
        return chain(Implies(a[0], BOT), Implies(a[1], BOT), BOT)
    if op == "and":
        return Implies(chain(a[0], a[1], BOT), BOT)
    if op == "ex":
        return Implies(Forall(a[0], Implies(a[1], BOT)), BOT)
    if op == "exs":
        return Implies(Forall(a[0], chain(*a[1:], BOT)), BOT)
    if op == "iff":
        return Sugar("pair", (Implies(a[0], a[1]), Implies(a[1], a[0])))
    if op == "eps":
        return Implies(Rel("neps", a[0], a[1]), BOT)
    if op == "in":
        return Implies(Rel("notin", a[0], a[1]), BOT)
    if op == "neq":
        return EqCond(a[0], a[1], BOT)
    if op == "eq":
        return Implies(EqCond(a[0], a[1], BOT), BOT)
    if op == "simeq":
        return Sugar("pair", (Rel("sub", a[0], a[1]), Rel("sub", a[1], a[0])))
    if op == "ssub":
        z = _fresh(_term_vars(a[0]) | _term_vars(a[1]), "z")
        return Forall(z, Implies(Rel("neps", SVar(z), a[1]), Rel("neps", SVar(z), a[0])))
    if op == "sim":
        return Sugar("pair", (strong_sub(a[0], a[1]), strong_sub(a[1], a[0])))
    if op == "alleps":
        x, bound, f = a
        return Forall(x, Implies(neg(f), Rel("neps", SVar(x), bound)))
    if op == "exeps":
        x, bound, f = a
        return neg(Forall(x, Implies(f, Rel("neps", SVar(x), bound))))
    if op == "exent":
        return neg(Forall(a[0], neg(a[1]), "ent"))
    if op == "int":
        n = a[0]
        taken = _term_vars(n)
        x = _fresh(taken, "x")
        y = _fresh(taken | {x}, "y")
        X, Y = SVar(x), SVar(y)
        step = Forall(y, Implies(Rel("neps", FunApp("s", (Y,)), X), Rel("neps", Y, X)))
        return Forall(x, chain(step, Rel("neps", n, X), Rel("neps", FunApp("0"), X)))
    raise ValueError(f"unknown sugar {op!r}")


def expand(f: Formula) -> tuple[Formula, ...]:
    """Eliminate all sugar.  The result is a tuple of plain formulas: one
    for ordinary formulas, several when ``f`` denotes a pair (``iff``,
    ``simeq``, ``sim``).  Pairs in hypothesis position become consecutive
    hypotheses; elsewhere they distribute over the enclosing connective."""
    if isinstance(f, (Top, Bottom, Rel, Atom)):
        return (f,)
    if isinstance(f, Sugar):
        if f.op == "pair":
            return tuple(g for part in f.args for g in expand(part))
        arity = _SUGAR_ARITY.get(f.op)
        if f.op != "exs" and (arity is None or arity != len(f.args)):
            raise ValueError(f"bad sugar {f.op!r} with {len(f.args)} argument(s)")
        return expand(_unfold(f))
    if isinstance(f, Implies):
        hyps = expand(f.hyp)
        return tuple(chain(*hyps, c) for c in expand(f.concl))
    if isinstance(f, Forall):
        return tuple(Forall(f.var, b, f.domain, f.bound) for b in expand(f.body))
    if isinstance(f, EqCond):
        return tuple(EqCond(f.left, f.right, b) for b in expand(f.body))
    raise TypeError(f"not a formula: {f!r}")


def expand1(f: Formula) -> Formula:
    parts = expand(f)
    if len(parts) != 1:
        raise ValueError("formula denotes a pair; use expand()")
    return parts[0]


# -- variables and substitution ----------------------------------------------


def _term_vars(t: SetTerm) -> set[str]:
    if isinstance(t, SVar):
        return {t.name}
    if isinstance(t, FunApp):
        out: set[str] = set()
        for a in t.args:
            out |= _term_vars(a)
        return out
    return set()


def free_vars(f: Formula) -> frozenset[str]:
    """Free individual variables."""
    if isinstance(f, (Top, Bottom, Atom)):
        return frozenset()
    if isinstance(f, Rel):
        return frozenset(_term_vars(f.left) | _term_vars(f.right))
    if isinstance(f, Implies):
        return free_vars(f.hyp) | free_vars(f.concl)
    if isinstance(f, Forall):
        inner = free_vars(f.body) - {f.var}
        return inner | frozenset(_term_vars(f.bound)) if f.bound is not None else inner
    if isinstance(f, EqCond):
        return frozenset(_term_vars(f.left) | _term_vars(f.right)) | free_vars(f.body)
    if isinstance(f, Sugar):
        return free_vars(_as_core(f))
    raise TypeError(f"not a formula: {f!r}")


def _as_core(f: Formula) -> Formula:
    parts = expand(f)
    return parts[0] if len(parts) == 1 else chain(*parts, BOT)


def is_closed(f: Formula) -> bool:
    return not free_vars(f)


def _subst_term(t: SetTerm, x: str, tau: SetTerm) -> SetTerm:
    if isinstance(t, SVar):
        return tau if t.name == x else t
    if isinstance(t, FunApp):
        return FunApp(t.symbol, tuple(_subst_term(a, x, tau) for a in t.args))
    return t


def substitute(f: Formula, x: str, tau: SetTerm) -> Formula:
    """Capture-avoiding ``f[tau/x]`` on plain formulas."""
    if isinstance(f, (Top, Bottom, Atom)):
        return f
    if isinstance(f, Rel):
        return Rel(f.rel, _subst_term(f.left, x, tau), _subst_term(f.right, x, tau))
    if isinstance(f, Implies):
        return Implies(substitute(f.hyp, x, tau), substitute(f.concl, x, tau))
    if isinstance(f, EqCond):
        return EqCond(_subst_term(f.left, x, tau), _subst_term(f.right, x, tau),
                      substitute(f.body, x, tau))
    if isinstance(f, Forall):
        bound = _subst_term(f.bound, x, tau) if f.bound is not None else None
        if f.var == x:
            return Forall(f.var, f.body, f.domain, bound)
        var, body = f.var, f.body
        tv = _term_vars(tau)
        if var in tv and x in free_vars(body):
            new = _fresh(tv | set(free_vars(body)) | {x}, var)
            body = substitute(body, var, SVar(new))
            var = new
        return Forall(var, substitute(body, x, tau), f.domain, bound)
    if isinstance(f, Sugar):
        return substitute(_as_core(f), x, tau)
    raise TypeError(f"not a formula: {f!r}")


def alpha_eq(f: Formula, g: Formula) -> bool:
    return _alpha(f, g, {}, {})


def _alpha_term(t: SetTerm, u: SetTerm, m1: dict, m2: dict) -> bool:
    if isinstance(t, SVar) and isinstance(u, SVar):
        a, b = m1.get(t.name), m2.get(u.name)
        if a is None and b is None:
            return t.name == u.name
        return a is not None and a == b
    if isinstance(t, FunApp) and isinstance(u, FunApp):
        return t.symbol == u.symbol and all(
            _alpha_term(a, b, m1, m2) for a, b in zip(t.args, u.args))
    return isinstance(t, Param) and t == u


def _alpha(f: Formula, g: Formula, m1: dict, m2: dict) -> bool:
    if isinstance(f, Sugar) or isinstance(g, Sugar):
        return _alpha(_as_core(f), _as_core(g), m1, m2)
    if type(f) is not type(g):
        return False
    if isinstance(f, (Top, Bottom, Atom)):
        return f == g
    if isinstance(f, Rel):
        return f.rel == g.rel and _alpha_term(f.left, g.left, m1, m2) and _alpha_term(f.right, g.right, m1, m2)
    if isinstance(f, Implies):
        return _alpha(f.hyp, g.hyp, m1, m2) and _alpha(f.concl, g.concl, m1, m2)
    if isinstance(f, EqCond):
        return (_alpha_term(f.left, g.left, m1, m2) and _alpha_term(f.right, g.right, m1, m2)
                and _alpha(f.body, g.body, m1, m2))
    if isinstance(f, Forall):
        if f.domain != g.domain:
            return False
        if f.bound is not None and not _alpha_term(f.bound, g.bound, m1, m2):
            return False
        depth = len(m1)
        return _alpha(f.body, g.body, {**m1, f.var: depth}, {**m2, g.var: depth})
    raise TypeError(f"not a formula: {f!r}")


# -- S-expression syntax -------------------------------------------------------

_SEXP = re.compile(r"\s*(?:(;[^\n]*)|(\()|(\))|([^\s()]+))")


def _read_sexp(text: str) -> list:
    stack: list[list] = [[]]
    pos = 0
    while pos < len(text):
        m = _SEXP.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ValueError(f"bad S-expression near offset {pos}")
        pos = m.end()
        if m.group(1):
            continue
        if m.group(2):
            stack.append([])
        elif m.group(3):
            if len(stack) == 1:
                raise ValueError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        elif m.group(4):
            stack[-1].append(m.group(4))
    if len(stack) != 1:
        raise ValueError("unbalanced '('")
    return stack[0]


def _one_sexp(text: str):
    items = _read_sexp(text)
    if len(items) != 1:
        raise ValueError(f"expected one S-expression, found {len(items)}")
    return items[0]


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*$")
_FORMULA_HEADS = {"->", "all", "eqc", "neps", "notin", "sub"}


def _to_setterm(x, env: Mapping[str, Any]) -> SetTerm:
    if isinstance(x, str):
        if x in SIGNATURE and SIGNATURE[x] == 0:
            return FunApp(x)
        if x.startswith("@"):
            key = x[1:]
            if key not in env:
                raise ValueError(f"unknown parameter {x}")
            return Param(env[key], key)
        if not _IDENT.match(x):
            raise ValueError(f"bad individual variable {x!r}")
        return SVar(x)
    if not x or not isinstance(x[0], str):
        raise ValueError("malformed term")
    return FunApp(x[0], tuple(_to_setterm(a, env) for a in x[1:]))


def _to_formula(x, env: Mapping[str, Any]) -> Formula:
    if isinstance(x, str):
        if x == "top":
            return TOP
        if x == "bot":
            return BOT
        if not _IDENT.match(x):
            raise ValueError(f"bad formula atom {x!r}")
        return Atom(x)
    if not x or not isinstance(x[0], str):
        raise ValueError("malformed formula")
    head, rest = x[0], x[1:]
    if head in RELATIONS:
        if len(rest) != 2:
            raise ValueError(f"{head} takes two terms")
        return Rel(head, _to_setterm(rest[0], env), _to_setterm(rest[1], env))
    if head == "->":
        if len(rest) < 2:
            raise ValueError("-> needs at least two formulas")
        return chain(*(_to_formula(r, env) for r in rest))
    if head == "all":
        if len(rest) == 2:
            return Forall(_var(rest[0]), _to_formula(rest[1], env))
        if len(rest) == 3 and rest[1] == ":ent":
            return Forall(_var(rest[0]), _to_formula(rest[2], env), "ent")
        if len(rest) == 4 and rest[1] == ":gimel":
            return Forall(_var(rest[0]), _to_formula(rest[3], env), "gimel", _to_setterm(rest[2], env))
        raise ValueError("malformed quantifier")
    if head == "eqc":
        if len(rest) != 3:
            raise ValueError("eqc takes two terms and a formula")
        return EqCond(_to_setterm(rest[0], env), _to_setterm(rest[1], env), _to_formula(rest[2], env))
    if head in ("ex", "exent"):
        return Sugar(head, (_var(rest[0]), _to_formula(rest[1], env)))
    if head == "exs":
        return Sugar(head, (_var(rest[0]), *(_to_formula(r, env) for r in rest[1:])))
    if head in ("alleps", "exeps"):
        return Sugar(head, (_var(rest[0]), _to_setterm(rest[1], env), _to_formula(rest[2], env)))
    if head in ("eps", "in", "neq", "eq", "simeq", "ssub", "sim"):
        return Sugar(head, tuple(_to_setterm(r, env) for r in rest))
    if head == "int":
        return Sugar(head, (_to_setterm(rest[0], env),))
    if head in ("not", "and", "or", "iff"):
        return Sugar(head, tuple(_to_formula(r, env) for r in rest))
    raise ValueError(f"unknown formula head {head!r}")


def _var(x) -> str:
    if not isinstance(x, str) or not _IDENT.match(x):
        raise ValueError(f"bad variable {x!r}")
    return x


def parse_formula(text: str, env: Mapping[str, Any] | None = None) -> Formula:
    """Parse e.g. ``(all x (-> (neps x a) (sub x x)))``.  ``@name`` refers to a
    parameter in ``env``."""
    return _to_formula(_one_sexp(text), env or {})


def parse_setterm(text: str, env: Mapping[str, Any] | None = None) -> SetTerm:
    return _to_setterm(_one_sexp(text), env or {})


def format_setterm(t: SetTerm) -> str:
    if isinstance(t, SVar):
        return t.name
    if isinstance(t, Param):
        return f"@{t.label}" if t.label else f"@<{t.value}>"
    if not t.args:
        return t.symbol
    return "(" + " ".join([t.symbol, *map(format_setterm, t.args)]) + ")"


def format_formula(f: Formula) -> str:
    if isinstance(f, Top):
        return "top"
    if isinstance(f, Bottom):
        return "bot"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Rel):
        return f"({f.rel} {format_setterm(f.left)} {format_setterm(f.right)})"
    if isinstance(f, Implies):
        parts = []
        while isinstance(f, Implies):
            parts.append(f.hyp)
            f = f.concl
        parts.append(f)
        return "(-> " + " ".join(map(format_formula, parts)) + ")"
    if isinstance(f, Forall):
        if f.domain == "ent":
            return f"(all {f.var} :ent {format_formula(f.body)})"
        if f.domain == "gimel":
            return f"(all {f.var} :gimel {format_setterm(f.bound)} {format_formula(f.body)})"
        return f"(all {f.var} {format_formula(f.body)})"
    if isinstance(f, EqCond):
        return f"(eqc {format_setterm(f.left)} {format_setterm(f.right)} {format_formula(f.body)})"
    if isinstance(f, Sugar):
        out = [f.op]
        for a in f.args:
            if isinstance(a, str):
                out.append(a)
            elif isinstance(a, (SVar, FunApp, Param)):
                out.append(format_setterm(a))
            else:
                out.append(format_formula(a))
        return "(" + " ".join(out) + ")"
    raise TypeError(f"not a formula: {f!r}")


# -- derivations --------------------------------------------------------------


@dataclass(frozen=True)
class Hyp:
    """Rule 1: a hypothesis variable."""

    concl: Formula
    var: str


@dataclass(frozen=True)
class AppD:
    """Rule 2: modus ponens."""

    concl: Formula
    fun: "Derivation"
    arg: "Derivation"


@dataclass(frozen=True)
class Lam:
    """Rule 3: discharge ``var : A`` to conclude ``A -> B``."""

    concl: Formula
    var: str
    body: "Derivation"


@dataclass(frozen=True)
class Gen:
    """Rule 4: generalisation over the eigenvariable ``var``."""

    concl: Formula
    var: str
    body: "Derivation"


@dataclass(frozen=True)
class Inst:
    """Rule 5: instantiate a universal with ``witness``."""

    concl: Formula
    witness: SetTerm
    body: "Derivation"


@dataclass(frozen=True)
class Peirce:
    """Rule 6."""

    concl: Formula


@dataclass(frozen=True)
class Efq:
    """Rule 7: from ``bot`` conclude anything."""

    concl: Formula
    body: "Derivation"


Derivation = Union[Hyp, AppD, Lam, Gen, Inst, Peirce, Efq]


class DerivationError(ValueError):
    def __init__(self, message: str, node: Derivation):
        super().__init__(f"{message} at {format_derivation(node, depth=1)}")
        self.node = node


def conclusion(d: Derivation) -> Formula:
    return d.concl


def _plain(f: Formula) -> Formula:
    return _as_core(f)


def extract(d: Derivation, hyps: Mapping[str, Formula] | None = None) -> LambdaTerm:
    """Check ``d`` under the hypothesis context and return the extracted
    lambda term.  Raises :class:`DerivationError` on the first bad node."""
    ctx = {k: _plain(v) for k, v in (hyps or {}).items()}
    return _extract(d, ctx)


def _extract(d: Derivation, ctx: dict[str, Formula]) -> LambdaTerm:
    c = _plain(d.concl)
    if isinstance(d, Hyp):
        if d.var not in ctx:
            raise DerivationError(f"hypothesis {d.var} not in context", d)
        if not alpha_eq(ctx[d.var], c):
            raise DerivationError(f"hypothesis {d.var} has a different formula", d)
        return LVar(d.var)
    if isinstance(d, AppD):
        f, a = _plain(d.fun.concl), _plain(d.arg.concl)
        if not isinstance(f, Implies):
            raise DerivationError("function premise is not an implication", d)
        if not alpha_eq(f.hyp, a):
            raise DerivationError("argument does not match the implication's hypothesis", d)
        if not alpha_eq(f.concl, c):
            raise DerivationError("conclusion does not match the implication's conclusion", d)
        return LApp(_extract(d.fun, ctx), _extract(d.arg, ctx))
    if isinstance(d, Lam):
        if not isinstance(c, Implies):
            raise DerivationError("lambda node must conclude an implication", d)
        if not alpha_eq(_plain(d.body.concl), c.concl):
            raise DerivationError("body does not conclude the implication's conclusion", d)
        return LAbs(d.var, _extract(d.body, {**ctx, d.var: c.hyp}))
    if isinstance(d, Gen):
        if not (isinstance(c, Forall) and c.domain == "all"):
            raise DerivationError("generalisation must conclude an ordinary universal", d)
        if not alpha_eq(substitute(c.body, c.var, SVar(d.var)), _plain(d.body.concl)):
            raise DerivationError("body is not the instance at the eigenvariable", d)
        if c.var != d.var and d.var in free_vars(c):
            raise DerivationError(f"eigenvariable {d.var} is free in the conclusion", d)
        for name, h in ctx.items():
            if d.var in free_vars(h):
                raise DerivationError(f"eigenvariable {d.var} occurs free in hypothesis {name}", d)
        return _extract(d.body, ctx)
    if isinstance(d, Inst):
        p = _plain(d.body.concl)
        if not (isinstance(p, Forall) and p.domain == "all"):
            raise DerivationError("instantiation premise is not an ordinary universal", d)
        if not alpha_eq(substitute(p.body, p.var, d.witness), c):
            raise DerivationError("conclusion is not the premise instantiated at the witness", d)
        return _extract(d.body, ctx)
    if isinstance(d, Peirce):
        ok = (isinstance(c, Implies) and isinstance(c.hyp, Implies)
              and isinstance(c.hyp.hyp, Implies)
              and alpha_eq(c.hyp.hyp.hyp, c.hyp.concl) and alpha_eq(c.hyp.concl, c.concl))
        if not ok:
            raise DerivationError("not an instance of ((A -> B) -> A) -> A", d)
        return LConst(CC)
    if isinstance(d, Efq):
        if not isinstance(_plain(d.body.concl), Bottom):
            raise DerivationError("ex falso premise must conclude bot", d)
        return _extract(d.body, ctx)
    raise TypeError(f"not a derivation: {d!r}")


def check(d: Derivation, hyps: Mapping[str, Formula] | None = None) -> CTerm:
    """Check ``d`` and return the extracted c-term (hypothesis variables
    remain as variables)."""
    return compile_lambda(extract(d, hyps))


_RULE_HEADS = {"hyp", "app", "lam", "gen", "inst", "peirce", "efq"}


def _to_derivation(x, env: Mapping[str, Any]) -> Derivation:
    if not isinstance(x, list) or not x or x[0] not in _RULE_HEADS:
        raise ValueError(f"expected a derivation node, got {x!r}")
    head, rest = x[0], x[1:]
    if not rest:
        raise ValueError(f"{head} node needs a conclusion")
    concl = _to_formula(rest[0], env)
    args = rest[1:]
    want = {"hyp": 1, "app": 2, "lam": 2, "gen": 2, "inst": 2, "peirce": 0, "efq": 1}[head]
    if len(args) != want:
        raise ValueError(f"{head} node takes {want} argument(s) after the conclusion")
    if head == "hyp":
        return Hyp(concl, _var(args[0]))
    if head == "app":
        return AppD(concl, _to_derivation(args[0], env), _to_derivation(args[1], env))
    if head == "lam":
        return Lam(concl, _var(args[0]), _to_derivation(args[1], env))
    if head == "gen":
        return Gen(concl, _var(args[0]), _to_derivation(args[1], env))
    if head == "inst":
        return Inst(concl, _to_setterm(args[0], env), _to_derivation(args[1], env))
    if head == "peirce":
        return Peirce(concl)
    return Efq(concl, _to_derivation(args[0], env))


def parse_derivation(text: str, env: Mapping[str, Any] | None = None) -> Derivation:
    """Nodes: ``(hyp F x)``, ``(app F d1 d2)``, ``(lam F x d)``, ``(gen F y d)``,
    ``(inst F tau d)``, ``(peirce F)``, ``(efq F d)``; the conclusion comes first."""
    return _to_derivation(_one_sexp(text), env or {})


def parse_derivation_file(text: str) -> tuple[dict[str, Formula], Derivation]:
    """A file holds optional ``(hyps (x F) ...)`` followed by one derivation.
    A hypothesis formula may be ``(scheme NAME k)``, the k-th formula of a
    closed axiom scheme."""
    items = _read_sexp(text)
    hyps: dict[str, Formula] = {}
    if items and isinstance(items[0], list) and items[0] and items[0][0] == "hyps":
        for entry in items[0][1:]:
            if not (isinstance(entry, list) and len(entry) == 2):
                raise ValueError("hypothesis entries are (name formula)")
            name, form = entry
            if isinstance(form, list) and form and form[0] == "scheme":
                k = int(form[2]) if len(form) > 2 else 0
                hyps[_var(name)] = axiom_scheme(form[1])[k]
            else:
                hyps[_var(name)] = _to_formula(form, {})
        items = items[1:]
    if len(items) != 1:
        raise ValueError("a derivation file holds exactly one derivation")
    return hyps, _to_derivation(items[0], {})


def format_derivation(d: Derivation, depth: int | None = None) -> str:
    if depth is not None and depth <= 0:
        return "..."
    nxt = None if depth is None else depth - 1
    c = format_formula(d.concl)
    if isinstance(d, Hyp):
        return f"(hyp {c} {d.var})"
    if isinstance(d, AppD):
        return f"(app {c} {format_derivation(d.fun, nxt)} {format_derivation(d.arg, nxt)})"
    if isinstance(d, Lam):
        return f"(lam {c} {d.var} {format_derivation(d.body, nxt)})"
    if isinstance(d, Gen):
        return f"(gen {c} {d.var} {format_derivation(d.body, nxt)})"
    if isinstance(d, Inst):
        return f"(inst {c} {format_setterm(d.witness)} {format_derivation(d.body, nxt)})"
    if isinstance(d, Peirce):
        return f"(peirce {c})"
    return f"(efq {c} {format_derivation(d.body, nxt)})"


# -- axiom schemes -------------------------------------------------------------


def _closed_scheme(
    body: Callable[[str, str, str], Formula],
    f: Formula | None,
    x: str,
    y: str | None,
    params: Sequence[str],
) -> Formula:
    taken = set(params) | {x} | ({y} if y else set())
    if f is not None:
        taken |= set(free_vars(f))
    a = _fresh(taken, "a")
    b = _fresh(taken | {a}, "b")
    out = body(a, b, _fresh(taken | {a, b}, "w"))
    for p in reversed(params):
        out = Forall(p, out)
    return out


def _scheme_extensionality() -> tuple[Formula, ...]:
    X, Y, Z = SVar("x"), SVar("y"), SVar("z")
    first = Forall("x", Forall("y", iff(member(X, Y), exists_eps("z", Y, simeq(X, Z)))))
    second = Forall("x", Forall("y", iff(Rel("sub", X, Y), forall_eps("z", X, member(Z, Y)))))
    return expand(first) + expand(second)


def _scheme_foundation(f: Formula, x: str, params: Sequence[str]) -> tuple[Formula, ...]:
    def body(a: str, _b: str, y: str) -> Formula:
        hyp = Forall(x, Implies(forall_eps(y, SVar(x), substitute(f, x, SVar(y))), f))
        return Forall(a, Implies(hyp, substitute(f, x, SVar(a))))
    return expand(_closed_scheme(body, f, x, None, params))


def _scheme_comprehension(f: Formula, x: str, params: Sequence[str]) -> tuple[Formula, ...]:
    def body(a: str, b: str, _w: str) -> Formula:
        X = SVar(x)
        return Forall(a, exists(b, Forall(x, iff(eps(X, SVar(b)), conj(eps(X, SVar(a)), f)))))
    return expand(_closed_scheme(body, f, x, None, params))


def _scheme_pairing() -> tuple[Formula, ...]:
    A, B, X = SVar("a"), SVar("b"), SVar("x")
    return expand(Forall("a", Forall("b", exists_many("x", eps(A, X), eps(B, X)))))


def _scheme_union() -> tuple[Formula, ...]:
    A, B, X, Y = SVar("a"), SVar("b"), SVar("x"), SVar("y")
    return expand(Forall("a", exists("b", forall_eps("x", A, forall_eps("y", X, eps(Y, B))))))


def _scheme_power() -> tuple[Formula, ...]:
    A, B, X, Y, Z = (SVar(c) for c in "abxyz")
    inner = Forall("z", iff(eps(Z, Y), conj(eps(Z, A), eps(Z, X))))
    return expand(Forall("a", exists("b", Forall("x", exists_eps("y", B, inner)))))


def _collect_body(f: Formula, x: str, y: str, a: str, b: str) -> Formula:
    return forall_eps(x, SVar(a), Implies(exists(y, f), exists_eps(y, SVar(b), f)))


def _scheme_collection(f: Formula, x: str, y: str, params: Sequence[str]) -> tuple[Formula, ...]:
    def body(a: str, b: str, _w: str) -> Formula:
        return Forall(a, exists(b, _collect_body(f, x, y, a, b)))
    return expand(_closed_scheme(body, f, x, y, params))


def _scheme_infinity(f: Formula, x: str, y: str, params: Sequence[str]) -> tuple[Formula, ...]:
    def body(a: str, b: str, _w: str) -> Formula:
        closure = forall_eps(x, SVar(b), Implies(exists(y, f), exists_eps(y, SVar(b), f)))
        return Forall(a, exists_many(b, eps(SVar(a), SVar(b)), closure))
    return expand(_closed_scheme(body, f, x, y, params))


SCHEMES: dict[str, Callable[..., tuple[Formula, ...]]] = {
    "extensionality": _scheme_extensionality,
    "foundation": _scheme_foundation,
    "comprehension": _scheme_comprehension,
    "pairing": _scheme_pairing,
    "union": _scheme_union,
    "power": _scheme_power,
    "collection": _scheme_collection,
    "infinity": _scheme_infinity,
}


def axiom_scheme(name: str, *args: Any) -> tuple[Formula, ...]:
    """Instances of the ZF_eps axioms (numbered 0-7 or by name).  Schemes
    take ``(F, x[, y], params)``; the fixed axioms take no arguments."""
    names = list(SCHEMES)
    key = names[int(name)] if str(name).isdigit() else name
    if key not in SCHEMES:
        raise ValueError(f"unknown axiom scheme {name!r}")
    return SCHEMES[key](*args)


# -- adequacy smoke test -------------------------------------------------------


def extract_and_smoke(d: Derivation, query: Any, hyps: Mapping[str, Formula] | None = None):
    """Check ``d`` (closed: no open hypotheses) and search for a refutation
    of ``extracted term ||- conclusion`` in the semantic ``query``.  Free
    individual variables of the conclusion are universally closed."""
    from .compiler import to_term
    from .semantics import realizes

    if hyps:
        raise ValueError("adequacy smoke test needs a derivation without open hypotheses")
    term = to_term(check(d))
    goal = _plain(d.concl)
    for v in sorted(free_vars(goal), reverse=True):
        goal = Forall(v, goal)
    return term, realizes(term, goal, query)


def iter_subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Implies):
        yield from iter_subformulas(f.hyp)
        yield from iter_subformulas(f.concl)
    elif isinstance(f, (Forall, EqCond)):
        yield from iter_subformulas(f.body)

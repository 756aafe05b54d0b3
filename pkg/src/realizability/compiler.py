"""c-terms, bracket abstraction and lambda-term compilation.

A c-term is a tree of variables and closed terms joined by application.
Closed subtrees are always kept as :class:`~realizability.terms.Term`
(``capp`` collapses them), so a closed c-term *is* a term.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence, Union

from .machine import reduces_to
from .terms import (
    App, B, C, E, I, K, W, Process, Stack, Term,
    COMBINATORS, Num, format_term, parse_stack, push_all,
)

__all__ = [
    "Var", "CApp", "CTerm", "LVar", "LConst", "LApp", "LAbs", "LambdaTerm",
    "capp", "free_vars", "abstract", "abstract_many", "compile_lambda",
    "substitute", "to_term", "theorem_1_1_check", "parse_lambda",
    "format_cterm", "format_lambda", "CompileError",
]


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class CApp:
    fun: "CTerm"
    arg: "CTerm"

    def __str__(self) -> str:
        return format_cterm(self)


CTerm = Union[Var, CApp, Term]


def capp(f: CTerm, a: CTerm) -> CTerm:
    if isinstance(f, Term) and isinstance(a, Term):
        return App(f, a)
    return CApp(f, a)


@lru_cache(maxsize=1 << 16)
def free_vars(t: CTerm) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, CApp):
        return free_vars(t.fun) | free_vars(t.arg)
    return frozenset()


def abstract(x: str, t: CTerm) -> CTerm:
    """``\\x t``: the first applicable of the six elimination cases."""
    if x not in free_vars(t):
        return capp(K, t)
    if isinstance(t, Var):
        return I
    assert isinstance(t, CApp)
    f, a = t.fun, t.arg
    if x not in free_vars(a):
        return capp(capp(C, abstract(x, capp(E, f))), a)
    if a == Var(x):
        if x not in free_vars(f):
            return capp(E, f)
        return capp(W, abstract(x, capp(E, f)))
    # x occurs in a, and a is neither x nor closed: a = (u)v
    assert isinstance(a, CApp)
    return abstract(x, capp(capp(capp(B, f), a.fun), a.arg))


def abstract_many(xs: Sequence[str], t: CTerm) -> CTerm:
    """``\\x1 ... \\xn t``, innermost binder first."""
    for x in reversed(xs):
        t = abstract(x, t)
    return t


def substitute(t: CTerm, bindings: Mapping[str, Term]) -> CTerm:
    if isinstance(t, Var):
        return bindings.get(t.name, t)
    if isinstance(t, CApp):
        return capp(substitute(t.fun, bindings), substitute(t.arg, bindings))
    return t


def to_term(t: CTerm) -> Term:
    if not isinstance(t, Term):
        raise CompileError(f"c-term has free variables {sorted(free_vars(t))}")
    return t


def theorem_1_1_check(
    t: CTerm,
    xs: Sequence[str],
    args: Sequence[Term],
    stack: Stack,
    budget: int,
) -> bool:
    """Does ``\\x1..\\xn t * a1 . .. . an . stack`` reach ``t[a/x] * stack``?"""
    if len(xs) != len(args):
        raise ValueError("one argument per variable")
    if not free_vars(t) <= set(xs):
        raise ValueError("t has variables outside xs")
    head = to_term(abstract_many(xs, t))
    body = to_term(substitute(t, dict(zip(xs, args))))
    return reduces_to(Process(head, push_all(args, stack)), Process(body, stack), budget)


# -- lambda terms -------------------------------------------------------------


@dataclass(frozen=True)
class LVar:
    name: str


@dataclass(frozen=True)
class LConst:
    term: Term


@dataclass(frozen=True)
class LApp:
    fun: "LambdaTerm"
    arg: "LambdaTerm"


@dataclass(frozen=True)
class LAbs:
    binder: str
    body: "LambdaTerm"


LambdaTerm = Union[LVar, LConst, LApp, LAbs]


def compile_lambda(lt: LambdaTerm) -> CTerm:
    """Eliminate every binder, innermost first."""
    if isinstance(lt, LVar):
        return Var(lt.name)
    if isinstance(lt, LConst):
        return lt.term
    if isinstance(lt, LApp):
        return capp(compile_lambda(lt.fun), compile_lambda(lt.arg))
    return abstract(lt.binder, compile_lambda(lt.body))


_LTOK = re.compile(r"\s*(?:(\\|λ)|(\.)|(\()|(\))|(#\d+)|(k\[)|([A-Za-z_][A-Za-z0-9_']*))")
_CONST_NAMES = {c.name: c for c in COMBINATORS}


def parse_lambda(text: str, env: Mapping[str, Term] | None = None) -> LambdaTerm:
    """Parse ``\\x y. body`` syntax; application is left-associative
    juxtaposition.  Names in ``env`` denote closed terms."""
    env = dict(env or {})
    toks: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _LTOK.match(text, pos)
        if not m:
            raise CompileError(f"bad lambda syntax at offset {pos}: {text[pos:pos + 20]!r}")
        kind = m.lastindex
        tok = m.group(kind)
        pos = m.end()
        if kind == 6:
            depth, j = 1, pos
            while j < len(text) and depth:
                depth += {"[": 1, "]": -1}.get(text[j], 0)
                j += 1
            if depth:
                raise CompileError("unbalanced k[...]")
            toks.append(("cont", text[pos:j - 1]))
            pos = j
        else:
            toks.append((("lam", "dot", "lp", "rp", "num", "", "id")[kind - 1], tok))
    i = 0

    def peek() -> str | None:
        return toks[i][0] if i < len(toks) else None

    def expr() -> LambdaTerm:
        nonlocal i
        if peek() == "lam":
            i += 1
            names = []
            while peek() == "id":
                names.append(toks[i][1])
                i += 1
            if not names or peek() != "dot":
                raise CompileError("expected binder names followed by '.'")
            i += 1
            body = expr()
            for n in reversed(names):
                body = LAbs(n, body)
            return body
        f = atom()
        while peek() in ("id", "lp", "num", "cont", "lam"):
            if peek() == "lam":
                f = LApp(f, expr())
                break
            f = LApp(f, atom())
        return f

    def atom() -> LambdaTerm:
        nonlocal i
        kind = peek()
        if kind is None:
            raise CompileError("unexpected end of lambda term")
        tok = toks[i][1]
        i += 1
        if kind == "lp":
            e = expr()
            if peek() != "rp":
                raise CompileError("expected ')'")
            i += 1
            return e
        if kind == "num":
            return LConst(Num(int(tok[1:])))
        if kind == "cont":
            from .terms import Cont
            return LConst(Cont(parse_stack(tok)))
        if kind == "id":
            if tok in _CONST_NAMES:
                return LConst(_CONST_NAMES[tok])
            if tok in env:
                return LConst(env[tok])
            return LVar(tok)
        raise CompileError(f"unexpected {tok!r}")

    result = expr()
    if i != len(toks):
        raise CompileError(f"trailing input near {toks[i][1]!r}")
    return result


def format_cterm(t: CTerm) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, CApp):
        return f"({format_cterm(t.fun)} {format_cterm(t.arg)})"
    return format_term(t)


def format_lambda(t: LambdaTerm) -> str:
    if isinstance(t, LVar):
        return t.name
    if isinstance(t, LConst):
        return format_term(t.term)
    if isinstance(t, LApp):
        return f"({format_lambda(t.fun)} {format_lambda(t.arg)})"
    return f"(\\{t.binder}. {format_lambda(t.body)})"

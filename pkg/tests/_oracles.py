"""Independent reference implementations used by the tests.

Neither oracle imports the code it checks: the abstraction oracle works on
plain tuples, and the truth-value oracle builds falsity values as explicit
sets, bottom-up, over a finite tail-closed stack set.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from realizability.logic import (
    Bottom, EqCond, Forall, FunApp, Implies, Param, Rel, SVar, Top, Atom, expand1,
)
from realizability.semantics import ANY as _ANY, Name
from realizability.terms import App, Comb, Push, Stack

# -- abstraction -----------------------------------------------------------------
# A tree is ("v", name) | ("c", combinator name) | ("a", fun, arg).


def has(x: str, t) -> bool:
    if t[0] == "v":
        return t[1] == x
    if t[0] == "c":
        return False
    return has(x, t[1]) or has(x, t[2])


def ap(f, a):
    return ("a", f, a)


def c(name: str):
    return ("c", name)


def oracle_abstract(x: str, t):
    """Try the six cases in order; the first whose guard holds wins."""
    cases = [
        (lambda: not has(x, t), lambda: ap(c("K"), t)),
        (lambda: t == ("v", x), lambda: c("I")),
        (lambda: t[0] == "a" and not has(x, t[2]),
         lambda: ap(ap(c("C"), oracle_abstract(x, ap(c("E"), t[1]))), t[2])),
        (lambda: t[0] == "a" and t[2] == ("v", x) and not has(x, t[1]),
         lambda: ap(c("E"), t[1])),
        (lambda: t[0] == "a" and t[2] == ("v", x) and has(x, t[1]),
         lambda: ap(c("W"), oracle_abstract(x, ap(c("E"), t[1])))),
        (lambda: t[0] == "a" and t[2][0] == "a" and (has(x, t[2][1]) or has(x, t[2][2])),
         lambda: oracle_abstract(x, ap(ap(ap(c("B"), t[1]), t[2][1]), t[2][2]))),
    ]
    for guard, build in cases:
        if guard():
            return build()
    raise AssertionError(f"no case applies to {t}")


def to_tree(t) -> tuple:
    """Convert a library c-term or term (numerals expanded) to a tree."""
    from realizability.compiler import CApp, Var

    if isinstance(t, Var):
        return ("v", t.name)
    if isinstance(t, (CApp, App)):
        return ap(to_tree(t.fun), to_tree(t.arg))
    if isinstance(t, Comb):
        return c(t.name)
    raise TypeError(f"unexpected node {t!r}")


def trees(depth: int, leaves: list) -> list:
    """Every tree of height <= depth (a leaf has height 0)."""
    level = list(leaves)
    for _ in range(depth):
        level = list(leaves) + [ap(f, a) for f in level for a in level]
    return level


# -- falsity values by brute force -----------------------------------------------------


def matches(prefix: tuple, tail, stack: Stack) -> bool:
    for t in prefix:
        if not isinstance(stack, Push) or stack.top != t:
            return False
        stack = stack.rest
    return tail is None or tail == stack


def tail_closure(stacks: Iterable[Stack]) -> frozenset[Stack]:
    out = set()
    for s in stacks:
        while True:
            out.add(s)
            if not isinstance(s, Push):
                break
            s = s.rest
    return frozenset(out)


class BruteForce:
    """Falsity values as explicit sets of stacks drawn from ``S``.

    ``complement`` is the (finite, exactly known) set of processes outside
    the pole; ``S`` contains the universe and every stack of the complement,
    closed under tails, which is all a realizability test can ever look at.
    """

    def __init__(self, complement, universe: Iterable[Stack], pool, atoms: Mapping):
        self.complement = frozenset(complement)
        self.S = tail_closure(list(universe) + [p.stack for p in self.complement])
        self.pool = tuple(pool)
        self.atoms = atoms
        self._rel: dict = {}

    def realizes(self, t, falsity: frozenset) -> bool:
        return not any((p.head == t and p.stack in falsity) for p in self.complement)

    def value(self, term, env: Mapping[str, Name]) -> Name:
        if isinstance(term, SVar):
            return env[term.name]
        if isinstance(term, Param):
            return term.value
        assert isinstance(term, FunApp)
        if term.symbol == "0":
            return Name()
        if term.symbol == "s":
            return Name(frozenset({(self.value(term.args[0], env), _ANY)}))
        raise NotImplementedError(term.symbol)

    def norm(self, f, env: Mapping[str, Name] | None = None) -> frozenset:
        env = dict(env or {})
        f = expand1(f)
        S = self.S
        if isinstance(f, Top):
            return frozenset()
        if isinstance(f, Bottom):
            return S
        if isinstance(f, Atom):
            pats = self.atoms[f.name]
            return frozenset(s for s in S if any(matches(p.prefix, p.tail, s) for p in pats))
        if isinstance(f, Implies):
            concl = self.norm(f.concl, env)
            return frozenset(s for s in S if isinstance(s, Push) and s.rest in concl
                             and self.realizes(s.top, self.norm(f.hyp, env)))
        if isinstance(f, Forall):
            assert f.domain == "all"
            out: set = set()
            for a in self.pool:
                out |= self.norm(f.body, {**env, f.var: a})
            return frozenset(out)
        if isinstance(f, EqCond):
            if self.value(f.left, env) == self.value(f.right, env):
                return self.norm(f.body, env)
            return frozenset()
        assert isinstance(f, Rel)
        return self.rel(f.rel, self.value(f.left, env), self.value(f.right, env))

    def rel(self, r: str, a: Name, b: Name) -> frozenset:
        key = (r, a, b)
        if key not in self._rel:
            self._rel[key] = self._rel_uncached(r, a, b)
        return self._rel[key]

    def _rel_uncached(self, r: str, a: Name, b: Name) -> frozenset:
        S = self.S
        if r == "neps":
            return frozenset(s for s in S if any(cn == a and matches(p.prefix, p.tail, s)
                                                 for cn, p in b.elements))
        out = set()
        if r == "sub":
            for cn, p in a.elements:
                inner = self.rel("notin", cn, b)
                for s in S:
                    if isinstance(s, Push) and matches(p.prefix, p.tail, s.rest) \
                            and self.realizes(s.top, inner):
                        out.add(s)
            return frozenset(out)
        for cn, p in b.elements:
            left, right = self.rel("sub", a, cn), self.rel("sub", cn, a)
            for s in S:
                if isinstance(s, Push) and isinstance(s.rest, Push) \
                        and matches(p.prefix, p.tail, s.rest.rest) \
                        and self.realizes(s.top, left) and self.realizes(s.rest.top, right):
                    out.add(s)
        return frozenset(out)


"""Finite realizability names, truth values and refutation search.

Names are hereditarily finite sets of ``(name, tag)`` pairs.  A tag is a
:class:`StackPattern`: a fixed prefix of terms followed either by one exact
stack or by *any* stack.  This makes the names the ground model needs
(``s(a) = {a} x Pi``, ``gimel(E) = E x Pi`` and the integers ``(s^n 0,
n . pi)``) exact finite objects, so falsity values are computed on the
whole of Pi, not on a sample.

Truth is three-valued.  A pole is given by generator processes; its
complement is the set of their reducts.  When every generator run is
certified (stuck or cyclic within budget) the complement is known exactly
and ``xi ||- F`` is decidable: a refutation needs a stack rho with
``xi * rho`` in the complement, and only finitely many such rho exist.
Otherwise only refutations are ever reported.

The remaining approximation is the range of unrestricted quantifiers: a
declared finite pool of names.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Iterator, Mapping, Sequence, Union

from .logic import (
    Atom, Bottom, EqCond, Forall, FunApp, Implies, Param, Rel, SetTerm, SVar, Top,
    Formula, expand1, format_formula, free_vars, parse_formula, parse_setterm, substitute,
)
from .machine import run, describe_status
from .terms import (
    COMBINATORS, Const, Num, Process, Push, Stack, Term,
    decode, format_stack, numeral, parse_process, parse_stack, parse_term, stack_items,
)

__all__ = [
    "Tri", "YES", "NO", "UNKNOWN", "StackPattern", "ANY", "exact", "parse_pattern", "format_pattern",
    "Name", "EMPTY", "rank", "members", "successor_name", "nat_name", "nat_value", "gimel",
    "ntilde", "one_name", "pair_name",
    "StackUniverse", "Pole", "PoleStatus", "pole_member", "TruthQuery",
    "norm_member", "realizes", "realizes3", "Refuted", "Unrefuted", "delta", "eval_term",
    "TruthRecord", "truth_table", "load_universe", "load_pole", "load_query",
]


class Tri(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    def __and__(self, other: "Tri") -> "Tri":
        if self is NO or other is NO:
            return NO
        if self is YES and other is YES:
            return YES
        return UNKNOWN

    def __or__(self, other: "Tri") -> "Tri":
        if self is YES or other is YES:
            return YES
        if self is NO and other is NO:
            return NO
        return UNKNOWN


YES, NO, UNKNOWN = Tri.YES, Tri.NO, Tri.UNKNOWN


# -- stack patterns -------------------------------------------------------------


@dataclass(frozen=True)
class StackPattern:
    """``prefix[0] . prefix[1] . ... . tail``; ``tail=None`` means any stack."""

    prefix: tuple[Term, ...] = ()
    tail: Stack | None = None

    def matches(self, s: Stack) -> bool:
        for t in self.prefix:
            if not isinstance(s, Push) or s.top is not t:
                return False
            s = s.rest
        return self.tail is None or s is self.tail

    def __str__(self) -> str:
        return format_pattern(self)


ANY = StackPattern()


def exact(s: Stack) -> StackPattern:
    return StackPattern((), s)


def parse_pattern(text: str) -> StackPattern:
    """``*`` is any stack; ``K . I . *`` a prefix followed by any stack;
    otherwise an exact stack in canonical syntax."""
    text = text.strip()
    if text == "*":
        return ANY
    if text.endswith("*"):
        head = text[:-1].rstrip()
        if not head.endswith("."):
            raise ValueError(f"bad stack pattern {text!r}")
        terms, _ = stack_items(parse_stack(head + " pi0"))
        return StackPattern(tuple(terms), None)
    return exact(parse_stack(text))


def format_pattern(p: StackPattern) -> str:
    from .terms import format_term

    parts = [format_term(t) for t in p.prefix]
    parts.append("*" if p.tail is None else format_stack(p.tail))
    return " . ".join(parts)


# -- names ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Name:
    elements: frozenset[tuple["Name", StackPattern]] = frozenset()
    label: str | None = field(default=None, compare=False)

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Name):
            return NotImplemented
        return hash(self) == hash(other) and self.elements == other.elements

    @cached_property
    def _hash(self) -> int:
        return hash(("name", self.elements))

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def rank(self) -> int:
        return 1 + max((c.rank for c, _ in self.elements), default=-1)

    def __repr__(self) -> str:
        if self.label:
            return f"Name<{self.label}>"
        n = nat_value(self)
        if n is not None:
            return f"Name<s^{n} 0>"
        inner = ", ".join(sorted(f"({c!r}, {format_pattern(p)})" for c, p in self.elements))
        return "Name{" + inner + "}"


EMPTY = Name()


def rank(a: Name) -> int:
    """0 for the empty name, else one more than the largest member rank."""
    return a.rank


def members(a: Name) -> frozenset[Name]:
    return frozenset(c for c, _ in a.elements)


def successor_name(a: Name, q: Any = None) -> Name:
    """``s(a) = {a} x Pi``."""
    return Name(frozenset({(a, ANY)}))


def nat_name(n: int) -> Name:
    out = EMPTY
    for _ in range(n):
        out = successor_name(out)
    return out


def nat_value(a: Name) -> int | None:
    """``n`` if ``a`` is ``s^n 0``, else None."""
    n = 0
    while a.elements:
        if len(a.elements) != 1:
            return None
        (c, p), = a.elements
        if p != ANY:
            return None
        a, n = c, n + 1
    return n


def gimel(e: Union[Name, Iterable[Name]], q: Any = None) -> Name:
    """``gimel(E) = E x Pi``; ``E`` is a ground set, given as its members
    or as a name whose members are taken."""
    elems = members(e) if isinstance(e, Name) else frozenset(e)
    return Name(frozenset((c, ANY) for c in elems))


def ntilde(n_max: int, q: Any = None) -> Name:
    """The integers of the realizability model, truncated: ``{(s^n 0, n . pi)}``
    for ``n <= n_max`` and every stack pi."""
    return Name(frozenset((nat_name(n), StackPattern((numeral(n),), None)) for n in range(n_max + 1)))


ONE = nat_name(1)


def one_name(e: Name, a: Name) -> Name:
    """``1_E(a)``: 1 if a is a member of the ground set E, else 0."""
    return ONE if a in members(e) else EMPTY


_PAIR_LEFT = StackPattern((), Const(0))
_PAIR_RIGHT = StackPattern((), Const(1))


def pair_name(a: Name, b: Name) -> Name:
    """An injective ground pairing: a tagged with pi0, {b} tagged with pi1."""
    return Name(frozenset({(a, _PAIR_LEFT), (Name(frozenset({(b, _PAIR_LEFT)})), _PAIR_RIGHT)}))


# -- universes and poles -------------------------------------------------------------


@dataclass(frozen=True)
class StackUniverse:
    """All stacks of depth ``<= max_depth`` over ``term_pool`` and constants
    ``pi_0 .. pi_{constant_count-1}``, listed breadth first and truncated to
    ``limit``.  Breadth-first truncation keeps the set closed under tails."""

    max_depth: int = 1
    term_pool: tuple[Term, ...] = (COMBINATORS[3], COMBINATORS[4])
    constant_count: int = 1
    limit: int | None = None

    @cached_property
    def stacks(self) -> tuple[Stack, ...]:
        layer: list[Stack] = [Const(i) for i in range(self.constant_count)]
        out = list(layer)
        for _ in range(self.max_depth):
            if self.limit is not None and len(out) >= self.limit:
                break
            layer = [Push(t, s) for s in layer for t in self.term_pool]
            out.extend(layer)
        if self.limit is not None:
            out = out[: self.limit]
        return tuple(out)

    def __iter__(self) -> Iterator[Stack]:
        return iter(self.stacks)

    def __len__(self) -> int:
        return len(self.stacks)

    def params(self) -> dict:
        from .terms import format_term

        return {"max_depth": self.max_depth, "constants": self.constant_count,
                "terms": [format_term(t) for t in self.term_pool], "limit": self.limit}


class PoleStatus(enum.Enum):
    IN_COMPLEMENT = "in-complement"
    IN_POLE = "in-pole"
    UNKNOWN = "unknown-within-budget"


@dataclass(frozen=True)
class Pole:
    """The pole whose complement is the set of reducts of ``generators``."""

    generators: tuple[Process, ...] = ()
    budget: int = 10_000
    label: str = field(default="", compare=False)

    @cached_property
    def reports(self):
        return tuple(run(g, self.budget) for g in self.generators)

    @cached_property
    def complement(self) -> frozenset[Process]:
        return frozenset(p for r in self.reports for p in r.processes())

    @cached_property
    def by_head(self) -> dict[Term, tuple[Stack, ...]]:
        out: dict[Term, list[Stack]] = {}
        for p in self.complement:
            out.setdefault(p.head, []).append(p.stack)
        return {h: tuple(v) for h, v in out.items()}

    @cached_property
    def certified(self) -> bool:
        """The complement is exactly the recorded set."""
        return all(r.certified for r in self.reports)

    def with_budget(self, budget: int) -> "Pole":
        return Pole(self.generators, budget, self.label)

    def fingerprint(self) -> str:
        from .terms import format_process

        h = hashlib.sha256()
        h.update(str(self.budget).encode())
        for g in self.generators:
            h.update(format_process(g).encode())
        return h.hexdigest()[:16]

    def describe(self) -> dict:
        return {"generators": len(self.generators), "budget": self.budget,
                "certified": self.certified, "complement_size": len(self.complement),
                "statuses": sorted({describe_status(r.status) for r in self.reports})}


def pole_member(p: Process, pole: Pole) -> PoleStatus:
    if p in pole.complement:
        return PoleStatus.IN_COMPLEMENT
    if pole.certified:
        return PoleStatus.IN_POLE
    return PoleStatus.UNKNOWN


def delta(n: int, pole: Pole, budget: int | None = None) -> Union[int, Tri]:
    """``Delta(n) = 0`` iff ``xi_n ||- bot``, i.e. iff the decoded term never
    heads a process of the complement.  Returns 0, 1 or UNKNOWN."""
    if budget is not None and budget != pole.budget:
        pole = pole.with_budget(budget)
    xi = decode(n)
    if xi in pole.by_head:
        return 1
    return 0 if pole.certified else UNKNOWN


# -- queries ---------------------------------------------------------------------


class _UnknownValue(Exception):
    pass


@dataclass
class TruthQuery:
    """Everything a closed formula's truth value depends on.

    ``pool`` is the range of unrestricted quantifiers; ``atoms`` values
    propositional constants by sets of stack patterns; ``universe`` is the
    finite stack set used for listings and sampling.
    """

    pole: Pole
    universe: StackUniverse = field(default_factory=StackUniverse)
    pool: tuple[Name, ...] = (EMPTY,)
    atoms: Mapping[str, frozenset[StackPattern]] = field(default_factory=dict)
    _norm_cache: dict = field(default_factory=dict, init=False, repr=False)
    _real_cache: dict = field(default_factory=dict, init=False, repr=False)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps(self.universe.params(), sort_keys=True).encode())
        h.update(self.pole.fingerprint().encode())
        h.update(str(len(self.pool)).encode())
        h.update(repr(sorted((k, sorted(map(str, v))) for k, v in self.atoms.items())).encode())
        return h.hexdigest()[:16]


def eval_term(t: SetTerm, q: TruthQuery | None = None) -> Name:
    """Value of a closed individual term in the ground model."""
    if isinstance(t, Param):
        v = t.value
        if isinstance(v, int):
            return nat_name(v)
        if not isinstance(v, Name):
            raise TypeError(f"parameter {t.label or v!r} is not a name")
        return v
    if isinstance(t, SVar):
        raise ValueError(f"free variable {t.name} in a closed term")
    args = [eval_term(a, q) for a in t.args]
    sym = t.symbol
    if sym == "0":
        return EMPTY
    if sym == "1":
        return ONE
    if sym == "s":
        return successor_name(args[0])
    if sym == "gimel":
        return gimel(args[0])
    if sym == "one":
        return one_name(args[0], args[1])
    if sym in ("band", "bor"):
        x, y = (a == ONE for a in args)
        return ONE if (x and y if sym == "band" else x or y) else EMPTY
    if sym == "bnot":
        return EMPTY if args[0] == ONE else ONE
    if sym == "lt":
        m, n = nat_value(args[0]), nat_value(args[1])
        return ONE if m is not None and n is not None and m < n else EMPTY
    if sym == "pair":
        return pair_name(args[0], args[1])
    if sym == "delta":
        n = nat_value(args[0])
        if n is None:
            return EMPTY
        if q is None:
            raise ValueError("delta needs a pole")
        d = delta(n, q.pole)
        if d is UNKNOWN:
            raise _UnknownValue
        return ONE if d == 1 else EMPTY
    raise ValueError(f"no interpretation for {sym!r}")


def _closed(f: Formula) -> Formula:
    f = expand1(f)
    fv = free_vars(f)
    if fv:
        raise ValueError(f"formula is not closed: free {sorted(fv)}")
    return f


def _norm(pi: Stack, f: Formula, q: TruthQuery) -> Tri:
    key = (pi, f)
    hit = q._norm_cache.get(key)
    if hit is not None:
        return hit
    out = _norm_uncached(pi, f, q)
    q._norm_cache[key] = out
    return out


def _norm_uncached(pi: Stack, f: Formula, q: TruthQuery) -> Tri:
    if isinstance(f, Top):
        return NO
    if isinstance(f, Bottom):
        return YES
    if isinstance(f, Atom):
        pats = q.atoms.get(f.name)
        if pats is None:
            raise ValueError(f"no value for propositional constant {f.name}")
        return YES if any(p.matches(pi) for p in pats) else NO
    if isinstance(f, Rel):
        try:
            a, b = eval_term(f.left, q), eval_term(f.right, q)
        except _UnknownValue:
            return UNKNOWN
        return _norm_rel(pi, f.rel, a, b, q)
    if isinstance(f, Implies):
        if not isinstance(pi, Push):
            return NO
        rest = _norm(pi.rest, f.concl, q)
        if rest is NO:
            return NO
        return _real(pi.top, f.hyp, q)[0] & rest
    if isinstance(f, Forall):
        if f.domain == "ent":
            if not (isinstance(pi, Push) and isinstance(pi.top, Num)):
                return NO
            return _norm(pi.rest, substitute(f.body, f.var, Param(nat_name(pi.top.n))), q)
        if f.domain == "gimel":
            try:
                dom = sorted(members(eval_term(f.bound, q)), key=hash)
            except _UnknownValue:
                return UNKNOWN
        else:
            dom = q.pool
        out = NO
        for a in dom:
            out = out | _norm(pi, substitute(f.body, f.var, Param(a)), q)
            if out is YES:
                break
        return out
    if isinstance(f, EqCond):
        try:
            same = eval_term(f.left, q) == eval_term(f.right, q)
        except _UnknownValue:
            return UNKNOWN if _norm(pi, f.body, q) is not NO else NO
        return _norm(pi, f.body, q) if same else NO
    raise TypeError(f"cannot evaluate {f!r}")


def _norm_rel(pi: Stack, rel: str, a: Name, b: Name, q: TruthQuery) -> Tri:
    if rel == "neps":
        return YES if any(c == a and p.matches(pi) for c, p in b.elements) else NO
    if rel == "sub":
        if not isinstance(pi, Push):
            return NO
        xi, rest = pi.top, pi.rest
        out = NO
        for c, p in a.elements:
            if p.matches(rest):
                out = out | _real(xi, Rel("notin", Param(c), Param(b)), q)[0]
                if out is YES:
                    break
        return out
    # notin
    if not (isinstance(pi, Push) and isinstance(pi.rest, Push)):
        return NO
    xi, xi2, rest = pi.top, pi.rest.top, pi.rest.rest
    out = NO
    for c, p in b.elements:
        if p.matches(rest):
            left = _real(xi, Rel("sub", Param(a), Param(c)), q)[0]
            if left is NO:
                continue
            out = out | (left & _real(xi2, Rel("sub", Param(c), Param(a)), q)[0])
            if out is YES:
                break
    return out


def _real(xi: Term, f: Formula, q: TruthQuery) -> tuple[Tri, Stack | None]:
    """``xi ||- f``: NO with a witness stack, YES (certified pole only) or UNKNOWN."""
    key = (xi, f)
    hit = q._real_cache.get(key)
    if hit is not None:
        return hit
    undecided = False
    out: tuple[Tri, Stack | None] | None = None
    for rho in q.pole.by_head.get(xi, ()):
        v = _norm(rho, f, q)
        if v is YES:
            out = (NO, rho)
            break
        if v is UNKNOWN:
            undecided = True
    if out is None:
        out = (YES, None) if q.pole.certified and not undecided else (UNKNOWN, None)
    q._real_cache[key] = out
    return out


def norm_member(pi: Stack, f: Formula, q: TruthQuery) -> Tri:
    """Is ``pi`` in the falsity value of the closed formula ``f``?"""
    return _norm(pi, _closed(f), q)


@dataclass(frozen=True)
class Refuted:
    witness: Stack


@dataclass(frozen=True)
class Unrefuted:
    """No counterexample.  ``exhaustive`` means the pole is certified and all
    candidate stacks were decided, so the result holds relative to the
    query's name pool and integer truncation."""

    exhaustive: bool = False


def realizes3(xi: Term, f: Formula, q: TruthQuery) -> Tri:
    return _real(xi, _closed(f), q)[0]


def realizes(xi: Term, f: Formula, q: TruthQuery) -> Union[Refuted, Unrefuted]:
    """Search a stack rho in the falsity value of ``f`` with ``xi * rho`` in
    the pole's complement."""
    v, w = _real(xi, _closed(f), q)
    if v is NO:
        return Refuted(w)
    return Unrefuted(v is YES)


# -- reports and file formats ---------------------------------------------------------


@dataclass(frozen=True)
class TruthRecord:
    formula: str
    stack: str
    verdict: str
    universe: str

    def to_json(self) -> str:
        return json.dumps({"formula": self.formula, "stack": self.stack,
                           "verdict": self.verdict, "universe": self.universe}, sort_keys=True)


def truth_table(f: Formula, q: TruthQuery) -> list[TruthRecord]:
    """Membership of every universe stack in the falsity value of ``f``."""
    g = _closed(f)
    fp = q.fingerprint()
    text = format_formula(g)
    return [TruthRecord(text, format_stack(s), _norm(s, g, q).value, fp) for s in q.universe]


def load_universe(spec: Mapping[str, Any]) -> StackUniverse:
    """``{"max_depth": 2, "constants": 1, "terms": ["I", "K"], "limit": 50}``."""
    terms = tuple(parse_term(t) for t in spec.get("terms", ["I", "K"]))
    return StackUniverse(int(spec.get("max_depth", 1)), terms,
                         int(spec.get("constants", 1)), spec.get("limit"))


def load_pole(spec: Mapping[str, Any]) -> Pole:
    """``{"generators": ["K * pi0"], "budget": 1000}`` or ``{"threads": N, "budget": B}``."""
    budget = int(spec.get("budget", 10_000))
    if "threads" in spec:
        from .threads import thread_pole

        return thread_pole(int(spec["threads"]), budget)
    gens = tuple(parse_process(g) for g in spec.get("generators", []))
    return Pole(gens, budget)


def _load_name(value: Any, env: dict[str, Any]) -> Name:
    if isinstance(value, Mapping) and "ntilde" in value:
        return ntilde(int(value["ntilde"]))
    if isinstance(value, str):
        return eval_term(parse_setterm(value, env))
    if isinstance(value, list):
        elems = set()
        for entry in value:
            member_spec, pattern = entry
            elems.add((_load_name(member_spec, env), parse_pattern(pattern)))
        return Name(frozenset(elems))
    raise ValueError(f"bad name specification {value!r}")


def load_query(spec: Mapping[str, Any]) -> tuple[TruthQuery, dict[str, Name]]:
    """Build a query from a declarative mapping:

    ``universe`` / ``pole``: as for :func:`load_universe` / :func:`load_pole`;
    ``names``: ordered mapping name -> ``[[member, pattern], ...]`` or a term
    such as ``"(s @a)"`` or ``{"ntilde": 3}``; members are terms too;
    ``pool``: names ranged over by unrestricted quantifiers (default: all);
    ``atoms``: constant -> list of stack patterns.
    """
    universe = load_universe(spec.get("universe", {}))
    pole = load_pole(spec.get("pole", {}))
    env: dict[str, Any] = {}
    for key, value in spec.get("names", {}).items():
        n = _load_name(value, env)
        env[key] = Name(n.elements, key)
    pool_keys = spec.get("pool", list(env))
    pool = tuple(env[k] for k in pool_keys) if pool_keys else (EMPTY,)
    atoms = {k: frozenset(parse_pattern(p) for p in v) for k, v in spec.get("atoms", {}).items()}
    return TruthQuery(pole, universe, pool, atoms), env


def query_formula(text: str, env: Mapping[str, Any]) -> Formula:
    return parse_formula(text, env)

"""Terms, stacks and processes of the standard realizability algebra.

Every node is interned: two structurally equal terms (or stacks) are the
same Python object, so equality is identity and hashing is O(1).  This is
what makes exact cycle detection on long machine traces cheap.

Numerals get a compact node, :class:`Num`.  ``Num(n)`` *is* the tree
``(sigma)(sigma)...(K)I`` -- it exposes ``fun``/``arg`` like any
application -- but it is stored as a single integer.  The quote
instruction pushes ``numeral(code(eta))`` and codes grow doubly
exponentially with term depth, so materialising the tree is not an
option.  The :func:`App` constructor folds ``(sigma)Num(n)`` into
``Num(n + 1)`` and ``(K)I`` into ``Num(0)``; interning therefore stays a
faithful structural equality.
"""

from __future__ import annotations

import math
import threading
import weakref
from dataclasses import dataclass
from typing import Iterator, Sequence

__all__ = [
    "Term", "Comb", "App", "Num", "Cont", "Stack", "Const", "Push", "Process",
    "B", "C", "E", "I", "K", "W", "CC", "QT", "COMBINATORS",
    "sigma", "numeral", "is_proof_like", "app", "apps", "push_all", "stack_items",
    "encode", "decode", "encode_stack", "decode_stack", "pair", "unpair",
    "EncodingTooLarge", "ParseError",
    "parse_term", "parse_stack", "parse_process",
    "format_term", "format_stack", "format_process",
]

_EMPTY: frozenset[int] = frozenset()
_lock = threading.RLock()
_apps: "weakref.WeakValueDictionary[tuple[int, int], App]" = weakref.WeakValueDictionary()
_nums: "weakref.WeakValueDictionary[int, Num]" = weakref.WeakValueDictionary()
_conts: "weakref.WeakValueDictionary[int, Cont]" = weakref.WeakValueDictionary()
_pushes: "weakref.WeakValueDictionary[tuple[int, int], Push]" = weakref.WeakValueDictionary()
_consts: dict[int, Const] = {}


class Term:
    """Base class of the term nodes.

    ``size`` counts nodes of the fully expanded tree, ``consts`` is the set
    of stack-constant indices occurring anywhere inside.  A term is
    proof-like iff it has no continuation, and every continuation holds a
    stack ending in a constant, so ``consts`` is empty exactly for
    proof-like terms.
    """

    __slots__ = ("_hash", "size", "consts", "__weakref__")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return self is other

    def __ne__(self, other: object) -> bool:
        return self is not other

    def __repr__(self) -> str:
        return f"<{format_term(self, limit=200)}>"

    def __str__(self) -> str:
        return format_term(self)

    def __reduce__(self):
        return (parse_term, (format_term(self),))

    @property
    def proof_like(self) -> bool:
        return not self.consts


class Comb(Term):
    """One of the eight elementary combinators."""

    __slots__ = ("name", "index")

    def __init__(self, name: str, index: int):
        self.name = name
        self.index = index
        self.size = 1
        self.consts = _EMPTY
        self._hash = hash(("comb", index))


B = Comb("B", 0)
C = Comb("C", 1)
E = Comb("E", 2)
I = Comb("I", 3)  # noqa: E741
K = Comb("K", 4)
W = Comb("W", 5)
CC = Comb("cc", 6)
QT = Comb("qt", 7)
COMBINATORS: tuple[Comb, ...] = (B, C, E, I, K, W, CC, QT)
_BY_NAME = {c.name: c for c in COMBINATORS}

_SIGMA: "App | None" = None


class App(Term):
    """Application ``(fun)arg``."""

    __slots__ = ("fun", "arg")

    def __new__(cls, fun: Term, arg: Term) -> "App":
        if fun is K and arg is I:
            return Num(0)
        if isinstance(arg, Num) and fun is _SIGMA and _SIGMA is not None:
            return Num(arg.n + 1)
        key = (id(fun), id(arg))
        node = _apps.get(key)
        if node is not None:
            return node
        with _lock:
            node = _apps.get(key)
            if node is None:
                node = object.__new__(App)
                node.fun = fun
                node.arg = arg
                node.size = 1 + fun.size + arg.size
                node.consts = fun.consts | arg.consts if arg.consts else fun.consts
                node._hash = hash(("app", fun._hash, arg._hash))
                _apps[key] = node
        return node


class Num(App):
    """The numeral ``n`` stored compactly; structurally an :class:`App`."""

    __slots__ = ("n",)

    def __new__(cls, n: int) -> "Num":
        if n < 0:
            raise ValueError("numerals are natural numbers")
        node = _nums.get(n)
        if node is not None:
            return node
        with _lock:
            node = _nums.get(n)
            if node is None:
                node = object.__new__(Num)
                node.n = n
                node.size = 3 + 8 * n
                node.consts = _EMPTY
                node._hash = _num_hash(n)
                _nums[n] = node
        return node

    @property
    def fun(self) -> Term:  # type: ignore[override]
        return K if self.n == 0 else _SIGMA

    @property
    def arg(self) -> Term:  # type: ignore[override]
        return I if self.n == 0 else Num(self.n - 1)


class Cont(Term):
    """The continuation ``k[stack]``."""

    __slots__ = ("stack",)

    def __new__(cls, stack: "Stack") -> "Cont":
        key = id(stack)
        node = _conts.get(key)
        if node is not None:
            return node
        with _lock:
            node = _conts.get(key)
            if node is None:
                node = object.__new__(Cont)
                node.stack = stack
                node.size = 1 + stack.size
                node.consts = stack.consts
                node._hash = hash(("k", stack._hash))
                _conts[key] = node
        return node


class Stack:
    __slots__ = ("_hash", "size", "depth", "consts", "__weakref__")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        return self is other

    def __ne__(self, other: object) -> bool:
        return self is not other

    def __repr__(self) -> str:
        return f"<{format_stack(self, limit=200)}>"

    def __str__(self) -> str:
        return format_stack(self)

    def __reduce__(self):
        return (parse_stack, (format_stack(self),))

    @property
    def bottom(self) -> "Const":
        s = self
        while isinstance(s, Push):
            s = s.rest
        return s


class Const(Stack):
    """Stack constant ``pi<index>``."""

    __slots__ = ("index",)

    def __new__(cls, index: int) -> "Const":
        node = _consts.get(index)
        if node is not None:
            return node
        if index < 0:
            raise ValueError("stack constant indices are natural numbers")
        with _lock:
            node = _consts.get(index)
            if node is None:
                node = object.__new__(Const)
                node.index = index
                node.size = 1
                node.depth = 0
                node.consts = frozenset((index,))
                node._hash = hash(("pi", index))
                _consts[index] = node
        return node


class Push(Stack):
    """``top . rest``."""

    __slots__ = ("top", "rest")

    def __new__(cls, top: Term, rest: Stack) -> "Push":
        key = (id(top), id(rest))
        node = _pushes.get(key)
        if node is not None:
            return node
        with _lock:
            node = _pushes.get(key)
            if node is None:
                node = object.__new__(Push)
                node.top = top
                node.rest = rest
                node.size = 1 + top.size + rest.size
                node.depth = rest.depth + 1
                node.consts = rest.consts | top.consts if top.consts else rest.consts
                node._hash = hash(("push", top._hash, rest._hash))
                _pushes[key] = node
        return node


@dataclass(frozen=True, slots=True)
class Process:
    """``head * stack``."""

    head: Term
    stack: Stack

    def __str__(self) -> str:
        return format_process(self)

    @property
    def size(self) -> int:
        return self.head.size + self.stack.size

    @property
    def consts(self) -> frozenset[int]:
        return self.head.consts | self.stack.consts


# -- numerals ---------------------------------------------------------------

_SIGMA = App(App(B, W), App(B, B))

def _num_hash(n: int) -> int:
    return hash(("num", n))


def sigma() -> App:
    """The successor ``(BW)(B)B``."""
    return _SIGMA


def numeral(n: int) -> Num:
    return Num(n)


def is_proof_like(t: Term) -> bool:
    return not t.consts


def app(f: Term, *args: Term) -> Term:
    """Left-associated application ``(f)a1 a2 ... ak``."""
    for a in args:
        f = App(f, a)
    return f


apps = app


def push_all(terms: Sequence[Term], bottom: Stack) -> Stack:
    """``terms[0] . terms[1] . ... . bottom``."""
    s = bottom
    for t in reversed(terms):
        s = Push(t, s)
    return s


def stack_items(s: Stack) -> tuple[list[Term], Const]:
    items = []
    while isinstance(s, Push):
        items.append(s.top)
        s = s.rest
    return items, s


# -- numbering ---------------------------------------------------------------

class EncodingTooLarge(OverflowError):
    """The Goedel code of a term exceeds the configured bit budget."""


MAX_CODE_BITS = 1 << 20


def pair(x: int, y: int) -> int:
    s = x + y
    return s * (s + 1) // 2 + y


def unpair(z: int) -> tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    y = z - w * (w + 1) // 2
    return w - y, y


def _check(code: int, max_bits: int) -> int:
    if code.bit_length() > max_bits:
        raise EncodingTooLarge(f"code exceeds {max_bits} bits")
    return code


def encode(t: Term, max_bits: int = MAX_CODE_BITS) -> int:
    """Goedel code of ``t`` (constants 0-7, applications and continuations
    interleaved on the even/odd codes above 8)."""
    return _encode_node(t, {}, max_bits)


def encode_stack(s: Stack, max_bits: int = MAX_CODE_BITS) -> int:
    return _encode_node(s, {}, max_bits)


def _encode_node(root: "Term | Stack", memo: dict[int, int], max_bits: int) -> int:
    # Iterative post-order; memo is keyed by node identity (nodes are interned).
    work: list[object] = [root]
    while work:
        node = work[-1]
        key = id(node)
        if key in memo:
            work.pop()
            continue
        if isinstance(node, Comb):
            memo[key] = node.index
            work.pop()
        elif isinstance(node, Num):
            memo[key] = _encode_num(node.n, memo, max_bits)
            work.pop()
        elif isinstance(node, App):
            f, a = node.fun, node.arg
            if id(f) in memo and id(a) in memo:
                memo[key] = _check(8 + 2 * pair(memo[id(f)], memo[id(a)]), max_bits)
                work.pop()
            else:
                work.append(f)
                work.append(a)
        elif isinstance(node, Cont):
            s = node.stack
            if id(s) in memo:
                memo[key] = _check(8 + 2 * memo[id(s)] + 1, max_bits)
                work.pop()
            else:
                work.append(s)
        elif isinstance(node, Const):
            memo[key] = 2 * node.index
            work.pop()
        else:
            assert isinstance(node, Push)
            t, r = node.top, node.rest
            if id(t) in memo and id(r) in memo:
                memo[key] = _check(2 * pair(memo[id(t)], memo[id(r)]) + 1, max_bits)
                work.pop()
            else:
                work.append(t)
                work.append(r)
    return memo[id(root)]


_num_codes: list[int] = []
_SIGMA_CODE: int | None = None


def _encode_num(n: int, memo: dict[int, int], max_bits: int) -> int:
    global _SIGMA_CODE
    if _SIGMA_CODE is None:
        _SIGMA_CODE = _encode_node(_SIGMA, {}, max_bits)
        _num_codes.append(8 + 2 * pair(K.index, I.index))
    with _lock:
        while len(_num_codes) <= n:
            _num_codes.append(_check(8 + 2 * pair(_SIGMA_CODE, _num_codes[-1]), max_bits))
    code = _num_codes[n]
    return _check(code, max_bits)


def decode(n: int) -> Term:
    """Inverse of :func:`encode`."""
    if n < 0:
        raise ValueError("codes are natural numbers")
    return _decode(n, True)


def decode_stack(n: int) -> Stack:
    if n < 0:
        raise ValueError("codes are natural numbers")
    return _decode(n, False)


def _decode(root: int, is_term: bool):
    # Explicit stack of (code, is_term) frames; results keyed by frame.
    done: dict[tuple[int, bool], object] = {}
    work: list[tuple[int, bool]] = [(root, is_term)]
    while work:
        code, term = frame = work[-1]
        if frame in done:
            work.pop()
            continue
        if term:
            if code < 8:
                done[frame] = COMBINATORS[code]
                work.pop()
                continue
            m = code - 8
            if m % 2 == 0:
                a, b = unpair(m // 2)
                fa, fb = (a, True), (b, True)
                if fa in done and fb in done:
                    done[frame] = App(done[fa], done[fb])
                    work.pop()
                else:
                    work.append(fa)
                    work.append(fb)
            else:
                fs = ((m - 1) // 2, False)
                if fs in done:
                    done[frame] = Cont(done[fs])
                    work.pop()
                else:
                    work.append(fs)
        else:
            if code % 2 == 0:
                done[frame] = Const(code // 2)
                work.pop()
                continue
            a, b = unpair((code - 1) // 2)
            fa, fb = (a, True), (b, False)
            if fa in done and fb in done:
                done[frame] = Push(done[fa], done[fb])
                work.pop()
            else:
                work.append(fa)
                work.append(fb)
    return done[(root, is_term)]


# -- text syntax ---------------------------------------------------------------
#
#   term    := B | C | E | I | K | W | cc | qt | '(' term term+ ')'
#            | 'k' '[' stack ']' | '#' digits
#   stack   := 'pi' digits | term '.' stack
#   process := term '*' stack
#
# '#n' is shorthand for the numeral n; the printer only emits it for
# numerals above NUMERAL_LITERAL_THRESHOLD.

NUMERAL_LITERAL_THRESHOLD = 256


class ParseError(ValueError):
    pass


def _tokens(text: str) -> list[str]:
    out: list[str] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()[].*":
            out.append(ch)
            i += 1
        elif ch == "#" or ch.isalnum() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(text[i:j])
            i = j
        else:
            raise ParseError(f"unexpected character {ch!r} at offset {i}")
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.pos = 0

    def peek(self) -> str | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, got {tok!r}")
        self.pos += 1
        return tok

    def done(self) -> None:
        if self.peek() is not None:
            raise ParseError(f"trailing input at {self.peek()!r}")

    def term(self) -> Term:
        tok = self.take()
        if tok in _BY_NAME:
            return _BY_NAME[tok]
        if tok == "(":
            f = self.term()
            args = 0
            while self.peek() != ")":
                f = App(f, self.term())
                args += 1
            self.take(")")
            if args == 0:
                raise ParseError("application needs at least two terms")
            return f
        if tok == "k":
            self.take("[")
            s = self.stack()
            self.take("]")
            return Cont(s)
        if tok.startswith("#") and tok[1:].isdigit():
            return Num(int(tok[1:]))
        raise ParseError(f"unexpected token {tok!r}")

    def stack(self) -> Stack:
        terms: list[Term] = []
        while True:
            tok = self.peek()
            if tok is not None and tok.startswith("pi") and tok[2:].isdigit():
                self.take()
                return push_all(terms, Const(int(tok[2:])))
            terms.append(self.term())
            self.take(".")


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    p.done()
    return t


def parse_stack(text: str) -> Stack:
    p = _Parser(text)
    s = p.stack()
    p.done()
    return s


def parse_process(text: str) -> Process:
    p = _Parser(text)
    head = p.term()
    p.take("*")
    s = p.stack()
    p.done()
    return Process(head, s)


class _Truncated(Exception):
    pass


def _emit(node, out: list[str], limit: int | None) -> None:
    # Iterative printer; handles terms and stacks.
    budget = [limit]
    work: list[object] = [node]

    def put(s: str) -> None:
        out.append(s)
        if budget[0] is not None:
            budget[0] -= len(s)
            if budget[0] < 0:
                raise _Truncated

    while work:
        item = work.pop()
        if isinstance(item, str):
            put(item)
        elif isinstance(item, Comb):
            put(item.name)
        elif isinstance(item, Num) and item.n > NUMERAL_LITERAL_THRESHOLD:
            put(f"#{item.n}")
        elif isinstance(item, App):
            put("(")
            work.extend((")", item.arg, " ", item.fun))
        elif isinstance(item, Cont):
            put("k[")
            work.extend(("]", item.stack))
        elif isinstance(item, Const):
            put(f"pi{item.index}")
        else:
            assert isinstance(item, Push)
            work.extend((item.rest, " . ", item.top))


def _format(node, limit: int | None) -> str:
    out: list[str] = []
    try:
        _emit(node, out, limit)
    except _Truncated:
        return "".join(out)[: limit] + "..."
    return "".join(out)


def format_term(t: Term, limit: int | None = None) -> str:
    return _format(t, limit)


def format_stack(s: Stack, limit: int | None = None) -> str:
    return _format(s, limit)


def format_process(p: Process, limit: int | None = None) -> str:
    return f"{_format(p.head, limit)} * {_format(p.stack, limit)}"


def iter_subterms(t: Term) -> Iterator[Term]:
    """Pre-order walk over the expanded tree (numerals are expanded)."""
    work: list[object] = [t]
    while work:
        node = work.pop()
        if isinstance(node, Term):
            yield node
            if isinstance(node, App):
                work.append(node.arg)
                work.append(node.fun)
            elif isinstance(node, Cont):
                work.append(node.stack)
        elif isinstance(node, Push):
            work.append(node.rest)
            work.append(node.top)

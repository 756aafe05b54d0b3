"""The machine rules written out as data, independently of the machine.

Each rule: name, a left-hand-side recogniser, the number of stack items it
consumes, and a right-hand-side builder from the consumed items and the
remaining stack.
"""

from __future__ import annotations

import random

from realizability.terms import (
    B, C, CC, E, I, K, QT, W, App, Const, Cont, Num, Process, Push, encode,
)

from _strategies import random_stack, random_term


def _items(s, n):
    out = []
    for _ in range(n):
        if not isinstance(s, Push):
            return None, None
        out.append(s.top)
        s = s.rest
    return out, s


RULE_TABLE = {
    "push": (lambda h: isinstance(h, App), 0, lambda h, xs, pi: Process(h.fun, Push(h.arg, pi))),
    "I": (lambda h: h is I, 1, lambda h, xs, pi: Process(xs[0], pi)),
    "K": (lambda h: h is K, 2, lambda h, xs, pi: Process(xs[0], pi)),
    "E": (lambda h: h is E, 2, lambda h, xs, pi: Process(App(xs[0], xs[1]), pi)),
    "W": (lambda h: h is W, 2, lambda h, xs, pi: Process(xs[0], Push(xs[1], Push(xs[1], pi)))),
    "C": (lambda h: h is C, 3, lambda h, xs, pi: Process(xs[0], Push(xs[2], Push(xs[1], pi)))),
    "B": (lambda h: h is B, 3, lambda h, xs, pi: Process(App(xs[0], App(xs[1], xs[2])), pi)),
    "cc": (lambda h: h is CC, 1, lambda h, xs, pi: Process(xs[0], Push(Cont(pi), pi))),
    "k": (lambda h: isinstance(h, Cont), 1, lambda h, xs, pi: Process(xs[0], h.stack)),
    "qt": (lambda h: h is QT, 2, lambda h, xs, pi: Process(xs[0], Push(Num(encode(xs[1])), pi))),
}


def matching_rules(p: Process) -> list[str]:
    out = []
    for name, (is_head, n, _) in RULE_TABLE.items():
        if is_head(p.head) and _items(p.stack, n)[0] is not None:
            out.append(name)
    return out


def expected_step(p: Process):
    names = matching_rules(p)
    if not names:
        return None
    name = names[0]
    is_head, n, rhs = RULE_TABLE[name]
    xs, rest = _items(p.stack, n)
    return name, rhs(p.head, xs, rest)


HEADS = {"push": None, "I": I, "K": K, "E": E, "W": W, "C": C, "B": B, "cc": CC, "qt": QT}


def random_instance(rule: str, rng: random.Random) -> Process:
    """A process whose left-hand side is exactly ``rule``'s, with random
    arguments and a random remaining stack."""
    is_head, n, _ = RULE_TABLE[rule]
    if rule == "push":
        head = App(random_term(rng, 3), random_term(rng, 3))
    elif rule == "k":
        head = Cont(random_stack(rng, 2))
    else:
        head = HEADS[rule]
    rest = random_stack(rng, 2)
    args = [random_term(rng, 3, conts=rule != "qt") for _ in range(n)]
    for t in reversed(args):
        rest = Push(t, rest)
    return Process(head, rest)


def head_kinds(rng: random.Random) -> list:
    return [App(K, I), App(B, C), Cont(Const(0)), Cont(Push(I, Const(1)))] + [
        I, K, E, W, C, B, CC, QT]


def stacks_of_depth(d: int, rng: random.Random):
    s = Const(rng.randrange(3))
    for _ in range(d):
        s = Push(random_term(rng, 2, conts=False), s)
    return s

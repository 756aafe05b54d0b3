"""Deterministic weak-head execution of processes.

One step fires the unique rule whose left-hand side matches the process:
the head constructor picks the rule, the stack depth decides whether it
can fire.  Anything else is :class:`Stuck`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Union

from .terms import (
    App, Comb, Cont, Process, Push,
    B, C, CC, E, I, K, QT, W,
    EncodingTooLarge, encode, format_process, numeral,
)

__all__ = [
    "RULES", "ARITY", "Next", "Stuck", "BudgetExhausted", "Cyclic",
    "TraceEntry", "RunReport", "step", "run", "reduces_to", "trace_lines", "describe_status",
    "DEFAULT_STATE_SIZE_CAP",
]

RULES = ("push", "I", "K", "E", "W", "C", "B", "cc", "k", "qt")

# Stack depth each head needs before its rule fires.
ARITY = {I: 1, K: 2, E: 2, W: 2, C: 3, B: 3, CC: 1, QT: 2}

DEFAULT_STATE_SIZE_CAP = 10**6


@dataclass(frozen=True)
class Next:
    rule: str
    process: Process


@dataclass(frozen=True)
class Stuck:
    process: Process


StepOutcome = Union[Next, Stuck]


@dataclass(frozen=True)
class BudgetExhausted:
    """The run stopped without a certificate.  ``reason`` is ``"steps"``
    or ``"code-size"`` (a quote step whose Goedel code is too big to build)."""

    reason: str = "steps"


@dataclass(frozen=True)
class Cyclic:
    prefix_length: int
    period: int


@dataclass(frozen=True)
class TraceEntry:
    index: int
    rule: str | None  # None for the initial process
    process: Process


@dataclass
class RunReport:
    trace: list[TraceEntry]
    status: Union[Stuck, BudgetExhausted, Cyclic]
    steps: int = field(default=0)

    @property
    def final(self) -> Process:
        return self.trace[-1].process

    @property
    def certified(self) -> bool:
        """The trace determines the whole (finite) set of reducts."""
        return isinstance(self.status, (Stuck, Cyclic))

    def processes(self) -> list[Process]:
        return [e.process for e in self.trace]


def step(p: Process) -> StepOutcome:
    h, s = p.head, p.stack
    if isinstance(h, App):
        return Next("push", Process(h.fun, Push(h.arg, s)))
    if isinstance(h, Cont):
        if isinstance(s, Push):
            return Next("k", Process(s.top, h.stack))
        return Stuck(p)
    assert isinstance(h, Comb)
    if s.depth < ARITY[h]:
        return Stuck(p)
    x = s.top
    if h is I:
        return Next("I", Process(x, s.rest))
    if h is CC:
        return Next("cc", Process(x, Push(Cont(s.rest), s.rest)))
    s1 = s.rest
    y = s1.top
    if h is K:
        return Next("K", Process(x, s1.rest))
    if h is E:
        return Next("E", Process(App(x, y), s1.rest))
    if h is W:
        return Next("W", Process(x, Push(y, s1)))
    if h is QT:
        return Next("qt", Process(x, Push(numeral(encode(y)), s1.rest)))
    s2 = s1.rest
    z = s2.top
    if h is C:
        return Next("C", Process(x, Push(z, Push(y, s2.rest))))
    assert h is B
    return Next("B", Process(App(x, App(y, z)), s2.rest))


def run(
    p: Process,
    budget: int,
    detect_cycles: bool = True,
    state_size_cap: int = DEFAULT_STATE_SIZE_CAP,
) -> RunReport:
    """Iterate :func:`step` at most ``budget`` times.

    With ``detect_cycles`` the first exact repetition of a state stops the
    run as ``Cyclic``; states bigger than ``state_size_cap`` nodes are not
    remembered, so a reported cycle is always genuine but some cycles
    through huge states go unnoticed.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    trace = [TraceEntry(0, None, p)]
    seen: dict[Process, int] = {}
    if detect_cycles and p.size <= state_size_cap:
        seen[p] = 0
    cur = p
    for i in range(1, budget + 1):
        try:
            out = step(cur)
        except EncodingTooLarge:
            return RunReport(trace, BudgetExhausted("code-size"), i - 1)
        if isinstance(out, Stuck):
            return RunReport(trace, out, i - 1)
        cur = out.process
        trace.append(TraceEntry(i, out.rule, cur))
        if detect_cycles and cur.size <= state_size_cap:
            j = seen.get(cur)
            if j is not None:
                return RunReport(trace, Cyclic(j, i - j), i)
            seen[cur] = i
    try:
        out = step(cur)
    except EncodingTooLarge:
        return RunReport(trace, BudgetExhausted("code-size"), budget)
    if isinstance(out, Stuck):
        return RunReport(trace, out, budget)
    return RunReport(trace, BudgetExhausted(), budget)


def reduces_to(p: Process, q: Process, budget: int) -> bool:
    """Does ``q`` occur in the execution of ``p`` within ``budget`` steps?"""
    cur = p
    if cur == q:
        return True
    for _ in range(budget):
        try:
            out = step(cur)
        except EncodingTooLarge:
            return False
        if isinstance(out, Stuck):
            return False
        cur = out.process
        if cur == q:
            return True
    return False


def trace_lines(report: RunReport, mode: str = "human", limit: int | None = None) -> Iterable[str]:
    """Render a trace: ``human`` (index, rule, process), ``compact`` (rule
    names only) or ``records`` (one JSON object per line)."""
    for e in report.trace:
        rule = e.rule or "start"
        if mode == "compact":
            yield rule
        elif mode == "records":
            yield json.dumps({"step": e.index, "rule": rule,
                              "process": format_process(e.process, limit)})
        else:
            yield f"{e.index}\t{rule}\t{format_process(e.process, limit)}"


def describe_status(status: Union[Stuck, BudgetExhausted, Cyclic]) -> str:
    if isinstance(status, Cyclic):
        return f"cyclic prefix={status.prefix_length} period={status.period}"
    if isinstance(status, Stuck):
        return "stuck"
    if status.reason != "steps":
        return f"budget-exhausted ({status.reason})"
    return "budget-exhausted"

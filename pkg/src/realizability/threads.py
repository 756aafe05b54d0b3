"""The model of threads.

Thread ``n`` is the execution of ``theta_n * pi_n`` where ``theta_n`` is the
n-th proof-like term in code order and ``pi_n`` is the stack constant of
index ``n``.  The complement of the pole is the union of all threads.
"""

from __future__ import annotations

import enum
import json
import threading
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from ._kernels import prooflike_sieve
from .machine import Cyclic, RunReport, Stuck, describe_status, run
from .semantics import Pole
from .terms import App, Const, Cont, Process, Stack, Term, decode, encode, format_term

__all__ = [
    "prooflike_code", "prooflike_enum", "prooflike_index", "thread_process",
    "ThreadReport", "run_thread", "InThread", "in_thread", "NotApplicable", "locate_thread",
    "CoherenceReport", "coherence_check", "LoopReport", "loop_argument_demo",
    "thread_pole", "thread_status_line",
]

# Largest code the sieve will scan to invert the enumeration (64 MiB of flags).
MAX_SIEVE = 1 << 26

_lock = threading.Lock()
_codes = np.zeros(0, dtype=np.int64)
_scanned = 0


def _ensure(count: int = 0, below: int = 0) -> None:
    """Grow the cached list of proof-like codes until it has ``count``
    entries and covers every code below ``below``."""
    global _codes, _scanned
    with _lock:
        size = max(_scanned, 1024)
        while len(_codes) < count or _scanned < below:
            size = max(size * 2, below)
            _codes = np.flatnonzero(prooflike_sieve(size)).astype(np.int64)
            _scanned = size


def prooflike_code(n: int) -> int:
    """Goedel code of the n-th proof-like term."""
    if n < 0:
        raise ValueError("thread indices are natural numbers")
    _ensure(count=n + 1)
    return int(_codes[n])


def prooflike_enum(n: int) -> Term:
    """The n-th proof-like term in code order (``theta_n``)."""
    return decode(prooflike_code(n))


def prooflike_index(t: Term) -> int:
    """Inverse of :func:`prooflike_enum`."""
    if not t.proof_like:
        raise ValueError("term is not proof-like")
    c = encode(t)
    if c >= MAX_SIEVE:
        raise ValueError(f"code {c.bit_length()} bits long is beyond the enumerated range")
    _ensure(below=c + 1)
    i = int(np.searchsorted(_codes, c))
    assert _codes[i] == c
    return i


def thread_process(n: int) -> Process:
    return Process(prooflike_enum(n), Const(n))


@dataclass(frozen=True)
class ThreadReport:
    index: int
    term: Term
    run: RunReport
    constants_seen: frozenset[int]

    @property
    def status(self):
        return self.run.status

    @property
    def certified(self) -> bool:
        return self.run.certified


def run_thread(n: int, budget: int, detect_cycles: bool = True) -> ThreadReport:
    report = run(thread_process(n), budget, detect_cycles)
    seen: frozenset[int] = frozenset()
    for p in report.processes():
        seen |= p.consts
    return ThreadReport(n, report.trace[0].process.head, report, seen)


class InThread(enum.Enum):
    YES = "yes"
    NO_CERTIFIED = "no-certified"
    UNKNOWN = "unknown-within-budget"


def in_thread(p: Process, n: int, budget: int) -> InThread:
    r = run_thread(n, budget)
    if any(q == p for q in r.run.processes()):
        return InThread.YES
    return InThread.NO_CERTIFIED if r.certified else InThread.UNKNOWN


class NotApplicable:
    """No single thread can be read off the process."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "NotApplicable"


NOT_APPLICABLE = NotApplicable()


def locate_thread(p: Process) -> Union[int, NotApplicable]:
    """The only thread that can contain ``p``: the one numbered by its stack
    constant.  Processes mixing several constants lie in no thread."""
    consts = p.consts
    if len(consts) != 1:
        return NOT_APPLICABLE
    return next(iter(consts))


@dataclass(frozen=True)
class CoherenceReport:
    count: int
    budget: int
    passed: bool
    failures: tuple[int, ...]
    locality_violations: tuple[int, ...]
    statuses: dict


def coherence_check(count: int, budget: int = 10_000) -> CoherenceReport:
    """For every ``n < count``: ``theta_n * pi_n`` opens thread n (so it lies
    outside the pole, witnessing that theta_n does not realize bot) and every
    state of the thread mentions no constant other than pi_n."""
    failures, violations = [], []
    statuses: dict[str, int] = {}
    for n in range(count):
        r = run_thread(n, budget)
        if r.run.trace[0].process != Process(prooflike_enum(n), Const(n)):
            failures.append(n)
        if not r.constants_seen <= {n}:
            violations.append(n)
        key = describe_status(r.status).split()[0]
        statuses[key] = statuses.get(key, 0) + 1
    return CoherenceReport(count, budget, not failures and not violations,
                           tuple(failures), tuple(violations), statuses)


@dataclass(frozen=True)
class LoopReport:
    applicable: bool
    alpha_positions: tuple[int, ...]
    cycle: Cyclic | None
    heads: tuple[int, ...]  # which k_pi alpha zeta_i reached head position
    counterexample: bool
    thread: Union[int, NotApplicable]
    steps: int


def loop_argument_demo(alpha: Term, zetas: Sequence[Term], pi: Stack, budget: int) -> LoopReport:
    """Replay the shape of the loop argument for three terms ``k_pi alpha zeta_i``.

    The run starts at ``k_pi alpha zeta_0 * pi`` (so its fourth state is
    ``alpha * pi``).  If ``alpha * pi`` occurs twice, execution is periodic
    from the second occurrence on, so no term can newly reach head
    position afterwards; at most the two that did before can.
    """
    if len(zetas) != 3 or len(set(zetas)) != 3:
        raise ValueError("need three distinct terms")
    k = Cont(pi)
    heads_terms = [App(App(k, alpha), z) for z in zetas]
    start = Process(heads_terms[0], pi)
    report = run(start, budget)
    target = Process(alpha, pi)
    positions = tuple(e.index for e in report.trace if e.process == target)
    heads = tuple(i for i, h in enumerate(heads_terms)
                  if any(e.process.head is h for e in report.trace))
    cyc = report.status if isinstance(report.status, Cyclic) else None
    applicable = (cyc is not None and len(positions) >= 2
                  and positions[1] == cyc.prefix_length + cyc.period
                  and positions[0] == cyc.prefix_length)
    return LoopReport(applicable, positions, cyc, heads, len(heads) == 3,
                      locate_thread(start), report.steps)


def thread_pole(count: int, budget: int = 10_000) -> Pole:
    """Pole whose complement is the union of threads ``0 .. count-1``.

    Threads beyond ``count`` are ignored, so this over-approximates the
    pole of the model of threads.
    """
    gens = tuple(thread_process(n) for n in range(count))
    return Pole(gens, budget, f"threads<{count}")


def thread_status_line(r: ThreadReport, mode: str = "human") -> str:
    status = describe_status(r.status)
    code = prooflike_code(r.index)
    if mode == "records":
        return json.dumps({"thread": r.index, "code": code, "term": format_term(r.term, 200),
                           "status": status, "steps": r.run.steps,
                           "constants": sorted(r.constants_seen)})
    return f"{r.index}\t{code}\t{format_term(r.term, 200)}\t{status}\tsteps={r.run.steps}"

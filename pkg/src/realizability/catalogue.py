"""Named realizers, compiled from lambda sources, with replayable reduction
contracts: the head reductions the correctness arguments rely on."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

from .compiler import abstract, compile_lambda, parse_lambda, substitute, to_term
from .machine import Cyclic, run
from .terms import (
    App, Cont, Const, I, Num, Process, Push, Stack, Term,
    encode, format_term, numeral, push_all, sigma,
)

__all__ = [
    "Contract", "CatalogueEntry", "ContractResult", "EntryReport",
    "get", "names", "run_contracts", "run_all", "compile_source", "format_named",
    "XI", "ETA", "ZETA", "PHI", "ALPHA", "PI",
]

# Inert placeholders for the universally quantified terms and stack.  A
# continuation over a fresh constant is a term nothing else can build.
PI: Stack = Const(100)
XI: Term = Cont(Const(101))
ETA: Term = Cont(Const(102))
ZETA: Term = Cont(Const(103))
PHI: Term = Cont(Const(104))
ALPHA: Term = Cont(Const(105))
XI2: Term = Cont(Const(106))
PI0: Stack = Const(107)

_PLACEHOLDERS = {XI: "xi", ETA: "eta", ZETA: "zeta", PHI: "phi", ALPHA: "alpha", XI2: "xi'"}

DEFAULT_BUDGET = 1_000


@dataclass(frozen=True)
class Contract:
    """``start`` reaches ``expected`` within ``budget`` steps; or, when
    ``period`` is set, the run from ``start`` is cyclic with that period."""

    description: str
    start: Process
    expected: Process | None
    budget: int = DEFAULT_BUDGET
    period: int | None = None
    display: str | None = None


@dataclass(frozen=True)
class CatalogueEntry:
    name: str
    source: str
    term: Term
    anchor: str
    contracts: tuple[Contract, ...] = field(default=())


@dataclass(frozen=True)
class ContractResult:
    description: str
    passed: bool
    steps: int | None
    detail: str


@dataclass(frozen=True)
class EntryReport:
    name: str
    results: tuple[ContractResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


_ENV: dict[str, Term] = {}


def compile_source(src: str, env: Mapping[str, Term] | None = None) -> Term:
    return to_term(compile_lambda(parse_lambda(src, {**_ENV, **(env or {})})))


def _open(src: str, bindings: Mapping[str, Term]) -> Term:
    """Compile ``src`` with free variables, then plug closed terms in."""
    return to_term(substitute(compile_lambda(parse_lambda(src, _ENV)), bindings))


def format_named(x: Term | Stack | Process, extra: Mapping[Term, str] | None = None) -> str:
    """Canonical syntax, with placeholders and catalogue terms shown by name."""
    names = {**_PLACEHOLDERS, **{e.term: n for n, e in _ENTRIES.items() if n in _DISPLAY}, **(extra or {})}

    def term(t: Term) -> str:
        if t in names:
            return names[t]
        if isinstance(t, Num) and t.n > 0:
            return f"#{t.n}"
        if isinstance(t, App):
            return f"({term(t.fun)} {term(t.arg)})"
        if isinstance(t, Cont):
            return f"k[{stack(t.stack)}]"
        return format_term(t)

    def stack(s: Stack) -> str:
        parts = []
        while isinstance(s, Push):
            parts.append(term(s.top))
            s = s.rest
        parts.append(f"pi{s.index}")
        return " . ".join(parts)

    if isinstance(x, Process):
        return f"{term(x.head)} * {stack(x.stack)}"
    if isinstance(x, Term):
        return term(x)
    return stack(x)


_DISPLAY = {"Y", "sigma", "omega", "omega0", "omega1", "succ_shift"}

_ENTRIES: dict[str, CatalogueEntry] = {}
_BUILDERS: list[tuple[str, str, str, Callable[[Term], list[Contract]]]] = []


def _entry(name: str, source: str, anchor: str):
    def deco(fn: Callable[[Term], list[Contract]]):
        _BUILDERS.append((name, source, anchor, fn))
        return fn
    return deco


def P(head: Term, *items: Term, bottom: Stack = PI) -> Process:
    return Process(head, push_all(list(items), bottom))


def K_(s: Stack = PI) -> Term:
    return Cont(s)


def _app(*ts: Term) -> Term:
    out = ts[0]
    for t in ts[1:]:
        out = App(out, t)
    return out


@_entry("A", r"\a f. f (a a f)", "Turing fixed point combinator, half")
def _a(t: Term) -> list[Contract]:
    return [Contract("A * eta . xi . pi > xi * (eta eta xi) . pi",
                     P(t, ETA, XI), P(XI, _app(ETA, ETA, XI)))]


@_entry("Y", "A A", "Turing fixed point combinator")
def _y(t: Term) -> list[Contract]:
    return [Contract("Y * xi . pi > xi * (Y xi) . pi", P(t, XI), P(XI, App(t, XI)))]


@_entry("sigma", "B W (B B)", "successor on numerals")
def _sigma(t: Term) -> list[Contract]:
    assert t is sigma()
    return [Contract("sigma * xi . eta . zeta . pi > (xi eta) (eta zeta) * pi",
                     P(t, XI, ETA, ZETA), P(_app(XI, ETA, App(ETA, ZETA))))]


@_entry("numerals", "K I", "numeral chain of the recurrence lemma")
def _numerals(t: Term) -> list[Contract]:
    out = [Contract("0 * xi . eta . pi > eta * pi", P(t, XI, ETA), P(ETA))]
    for n in range(11):
        out.append(Contract(f"{n + 1} * xi . alpha . pi > {n} * xi . (xi alpha) . pi",
                            P(numeral(n + 1), XI, ALPHA), P(numeral(n), XI, App(XI, ALPHA))))
    return out


@_entry("eq_intro", r"\x. x I", "equality condition, introduction")
def _eq_intro(t: Term) -> list[Contract]:
    return [Contract("theta * xi . pi > xi * I . pi", P(t, XI), P(XI, I))]


@_entry("eq_elim", r"\x y. cc (\k. y (k x))", "equality condition, elimination")
def _eq_elim(t: Term) -> list[Contract]:
    return [Contract("theta * xi . eta . pi > eta * (k_pi xi) . pi",
                     P(t, XI, ETA), P(ETA, App(K_(), XI)))]


@_entry("quant_i", r"\x y z. y (x z)", "integer quantifier, first direction")
def _quant_i(t: Term) -> list[Contract]:
    n = numeral(3)
    return [Contract("theta * xi . eta . n . pi > eta * (xi n) . pi",
                     P(t, XI, ETA, n), P(ETA, App(XI, n)))]


@_entry("quant_ii", r"\x y. cc (\k. x k y)", "integer quantifier, second direction")
def _quant_ii(t: Term) -> list[Contract]:
    n = numeral(3)
    return [Contract("theta * xi . n . pi > xi * k_pi . n . pi",
                     P(t, XI, n), P(XI, K_(), n))]


@_entry("succ_shift", r"\g x. g (sigma x)", "successor shift")
def _succ_shift(t: Term) -> list[Contract]:
    return [Contract(f"theta * xi . {n} . pi > xi * {n + 1} . pi",
                     P(t, XI, numeral(n)), P(XI, numeral(n + 1))) for n in range(11)]


def church(n: int) -> Term:
    """``\\f x. f (f ... (f x))`` with n applications."""
    body = "x"
    for _ in range(n):
        body = f"f ({body})"
    return compile_source(rf"\f x. {body}")


@_entry("storage_T", r"\n f. n succ_shift f #0", "storage operator for integers")
def _storage(t: Term) -> list[Contract]:
    s = _ENTRIES["succ_shift"].term
    out = [Contract("T * nu . phi . pi > nu * S . phi . 0 . pi",
                    P(t, ETA, PHI), P(ETA, s, PHI, numeral(0)))]
    for n in range(11):
        out.append(Contract(f"T * nu_{n} . phi . pi > phi * {n} . pi",
                            P(t, church(n), PHI), P(PHI, numeral(n)), budget=2_000))
    return out


@_entry("bool_split", r"\x y f. f x y", "Boolean values are integers")
def _bool_split(t: Term) -> list[Contract]:
    return [
        Contract("theta * xi . eta . 0 . pi > eta * pi", P(t, XI, ETA, numeral(0)), P(ETA)),
        Contract("theta * eta . xi . 1 . pi > eta * xi . pi", P(t, ETA, XI, numeral(1)), P(ETA, XI)),
    ]


@_entry("neac", r"\x. qt x x", "non-extensional choice")
def _neac(t: Term) -> list[Contract]:
    return [Contract("theta * xi . pi > xi * n_xi . pi",
                     P(t, XI), P(XI, numeral(encode(XI))))]


@_entry("delta_theta", r"\x y. qt y x x", "density of Delta")
def _delta_theta(t: Term) -> list[Contract]:
    return [Contract("theta * xi . eta . pi > eta * n_xi . xi . pi",
                     P(t, XI, ETA), P(ETA, numeral(encode(XI)), XI))]


@_entry("omega", r"(\x. x x) (\x. x x)", "looping term of the model of threads")
def _omega(t: Term) -> list[Contract]:
    return [
        Contract("omega * pi loops", P(t), None, period=7),
        Contract("omega * xi . pi loops", P(t, XI), None, period=7),
    ]


@_entry("omega0", "omega #0", "omega applied to 0")
def _omega0(t: Term) -> list[Contract]:
    return [Contract("omega0 * xi . pi loops", P(t, XI), None, period=7)]


@_entry("omega1", "omega #1", "omega applied to 1")
def _omega1(t: Term) -> list[Contract]:
    return [Contract("omega1 * xi . pi loops", P(t, XI), None, period=7)]


@_entry("t51", r"\f. cc (\k. f (omega1 k) (omega0 k))", "the Boolean algebra is non trivial")
def _t51(t: Term) -> list[Contract]:
    w0, w1 = _ENTRIES["omega0"].term, _ENTRIES["omega1"].term
    k = K_()
    return [Contract("theta * xi . pi > xi * (omega1 k_pi) . (omega0 k_pi) . pi",
                     P(t, XI), P(XI, App(w1, k), App(w0, k)),
                     display="xi * (omega1 k[pi100]) . (omega0 k[pi100]) . pi100")]


@_entry("t52", r"\x y. cc (\k. x (k y #0) (x (k y #1) (k y #2)))", "the Boolean algebra is atomless")
def _t52(t: Term) -> list[Contract]:
    k = K_()
    a0, a1, a2 = numeral(0), numeral(1), numeral(2)
    rest = App(App(ETA, _app(k, XI, a1)), _app(k, XI, a2))
    return [Contract("theta * eta . xi . pi > eta * (k_pi xi a0) . ((eta (k_pi xi a1)) (k_pi xi a2)) . pi",
                     P(t, ETA, XI), P(ETA, _app(k, XI, a0), rest))]


@_entry("t53", r"\x x'. cc (\k. x' (\z. x z z (omega k z)))", "no surjection between finite types")
def _t53(t: Term) -> list[Contract]:
    k = K_()
    eta = _open(r"\z. x z z (omega k z)", {"x": XI, "k": k})
    omega = _ENTRIES["omega"].term
    return [
        Contract("theta * xi . xi' . pi > xi' * eta . pi", P(t, XI, XI2), P(XI2, eta)),
        Contract("eta * zeta . pi0 > xi * zeta . zeta . (omega k_pi zeta) . pi0",
                 P(eta, ZETA, bottom=PI0), P(XI, ZETA, ZETA, _app(omega, k, ZETA), bottom=PI0)),
    ]


@_entry("t54", r"\x x'. cc (\k. x (\n. cc (\h. x' h h (omega k (\f. f h n)))))",
        "no surjection from the integers onto the Boolean algebra")
def _t54(t: Term) -> list[Contract]:
    k, k0 = K_(), K_(PI0)
    n0 = numeral(2)
    eta = _open(r"\n. cc (\h. x' h h (omega k (\f. f h n)))", {"x'": XI2, "k": k})
    pair = _open(r"\f. f h n", {"h": k0, "n": n0})
    zeta0 = App(App(_ENTRIES["omega"].term, k), pair)
    return [
        Contract("theta * xi . xi' . pi > xi * eta . pi", P(t, XI, XI2), P(XI, eta)),
        Contract("eta * n0 . pi0 > xi' * k_pi0 . k_pi0 . zeta0 . pi0",
                 P(eta, n0, bottom=PI0), P(XI2, k0, k0, zeta0, bottom=PI0)),
    ]


@_entry("t57", r"\a x y. cc (\k. y (\z. x z z (k a z)))", "no surjection onto a slice of a finite type")
def _t57(t: Term) -> list[Contract]:
    k = K_()
    theta2 = _open(r"\z. x z z (k a z)", {"x": XI, "k": k, "a": ALPHA})
    return [
        Contract("theta * alpha . xi . eta . pi > eta * theta' . pi",
                 P(t, ALPHA, XI, ETA), P(ETA, theta2)),
        Contract("theta' * zeta . pi0 > xi * zeta . zeta . (k_pi alpha zeta) . pi0",
                 P(theta2, ZETA, bottom=PI0), P(XI, ZETA, ZETA, _app(k, ALPHA, ZETA), bottom=PI0)),
    ]


@_entry("recurrence_I", "I", "recurrence scheme realized by I")
def _recurrence(t: Term) -> list[Contract]:
    out = []
    for n in range(6):
        iterated = ALPHA
        for _ in range(n):
            iterated = App(XI, iterated)
        out.append(Contract(f"I * {n} . xi . alpha . pi > {n} * xi . alpha . pi",
                            P(t, numeral(n), XI, ALPHA), P(numeral(n), XI, ALPHA)))
        out.append(Contract(f"I * {n} . xi . alpha . pi > xi^{n} alpha * pi",
                            P(t, numeral(n), XI, ALPHA), P(iterated)))
    return out


def _build() -> None:
    for name, source, anchor, fn in _BUILDERS:
        term = compile_source(source)
        _ENV[name] = term
        _ENTRIES[name] = CatalogueEntry(name, source, term, anchor)
        _ENTRIES[name] = CatalogueEntry(name, source, term, anchor, tuple(fn(term)))


_build()


class UnknownEntry(KeyError):
    pass


def names() -> list[str]:
    return list(_ENTRIES)


def get(name: str) -> CatalogueEntry:
    try:
        return _ENTRIES[name]
    except KeyError:
        raise UnknownEntry(f"no catalogue entry {name!r}; known: {', '.join(_ENTRIES)}") from None


def _check(c: Contract, budget: int) -> ContractResult:
    report = run(c.start, budget)
    if c.period is not None:
        st = report.status
        ok = isinstance(st, Cyclic) and st.period == c.period
        return ContractResult(c.description, ok, report.steps,
                              f"status {st}" if not ok else f"cyclic, period {c.period}")
    for e in report.trace:
        if e.process == c.expected:
            detail = f"reached in {e.index} steps"
            if c.display is not None and format_named(e.process) != c.display:
                return ContractResult(c.description, False, e.index,
                                      f"display mismatch: {format_named(e.process)}")
            return ContractResult(c.description, True, e.index, detail)
    return ContractResult(c.description, False, None,
                          f"not reached within {budget} steps; last {format_named(report.final)}")


def run_contracts(name: str, budget: int | None = None) -> EntryReport:
    """Replay every contract of an entry; ``budget`` overrides the declared ones."""
    entry = get(name)
    return EntryReport(name, tuple(_check(c, budget if budget is not None else c.budget)
                                   for c in entry.contracts))


def run_all(budget: int | None = None) -> list[EntryReport]:
    return [run_contracts(n, budget) for n in _ENTRIES]

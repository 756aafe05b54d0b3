import pytest
from hypothesis import given, strategies as st

from realizability.compiler import format_cterm
from realizability.logic import (
    BOT, TOP, AppD, Atom, DerivationError, Efq, EqCond, Forall, FunApp, Gen, Hyp, Implies,
    Inst, Lam, Peirce, Rel, SCHEMES, SVar, Sugar,
    alpha_eq, axiom_scheme, chain, check, conj, exists, expand, expand1, extract,
    format_derivation, format_formula, free_vars, iff, int_formula, is_closed, neg,
    parse_derivation, parse_derivation_file, parse_formula, simeq, substitute,
)

A, Bf = Atom("A"), Atom("B")
x, y, z = SVar("x"), SVar("y"), SVar("z")

setterms = st.recursive(
    st.one_of(st.sampled_from("xyz").map(SVar), st.just(FunApp("0"))),
    lambda ch: ch.map(lambda t: FunApp("s", (t,))),
    max_leaves=3,
)
formulas = st.recursive(
    st.one_of(
        st.just(TOP), st.just(BOT), st.sampled_from(["A", "B"]).map(Atom),
        st.tuples(st.sampled_from(["neps", "notin", "sub"]), setterms, setterms)
        .map(lambda p: Rel(*p)),
    ),
    lambda ch: st.one_of(
        st.tuples(ch, ch).map(lambda p: Implies(*p)),
        st.tuples(st.sampled_from("xyz"), ch).map(lambda p: Forall(*p)),
        st.tuples(setterms, setterms, ch).map(lambda p: EqCond(*p)),
        st.tuples(ch).map(lambda p: neg(p[0])),
    ),
    max_leaves=6,
)


@given(formulas)
def test_formula_text_roundtrip(f):
    assert parse_formula(format_formula(f)) == f


def test_parse_examples():
    f = parse_formula("(all x (-> (neps x a) (sub x x)))")
    assert f == Forall("x", Implies(Rel("neps", x, SVar("a")), Rel("sub", x, x)))
    assert parse_formula("(-> A B A)") == chain(A, Bf, A)
    assert parse_formula("(all n :ent (neps n 0))").domain == "ent"


@pytest.mark.parametrize("bad", ["(foo x)", "(neps x)", "(all 1 A)", "(-> A)", "(s x)"])
def test_parse_errors(bad):
    with pytest.raises(ValueError):
        parse_formula(bad)


def test_unknown_function_symbol():
    with pytest.raises(ValueError):
        parse_formula("(neps (nope x) y)")


def test_negation_and_conjunction():
    assert expand1(neg(A)) == Implies(A, BOT)
    assert expand1(conj(A, Bf)) == Implies(chain(A, Bf, BOT), BOT)


def test_existential_is_double_negation():
    assert expand1(exists("x", Rel("neps", x, y))) == \
        Implies(Forall("x", Implies(Rel("neps", x, y), BOT)), BOT)


def test_pairs_distribute_and_flatten():
    assert expand(iff(A, Bf)) == (Implies(A, Bf), Implies(Bf, A))
    # a pair in hypothesis position becomes two hypotheses
    assert expand(Implies(simeq(x, y), A)) == (chain(Rel("sub", x, y), Rel("sub", y, x), A),)
    # a pair in conclusion position distributes
    assert expand(Implies(A, simeq(x, y))) == (Implies(A, Rel("sub", x, y)), Implies(A, Rel("sub", y, x)))
    with pytest.raises(ValueError):
        expand1(iff(A, Bf))


def test_int_formula_shape():
    f = expand1(int_formula(SVar("n")))
    assert isinstance(f, Forall)
    step, mem, zero = f.body.hyp, f.body.concl.hyp, f.body.concl.concl
    assert isinstance(step, Forall) and step.body.hyp.rel == "neps"
    assert mem == Rel("neps", SVar("n"), SVar(f.var))
    assert zero == Rel("neps", FunApp("0"), SVar(f.var))


def test_substitution_avoids_capture():
    f = Forall("y", Rel("neps", x, y))
    g = substitute(f, "x", y)
    assert isinstance(g, Forall) and g.var != "y"
    assert free_vars(g) == {"y"}


def test_alpha_equivalence():
    assert alpha_eq(Forall("x", Rel("sub", x, x)), Forall("y", Rel("sub", y, y)))
    assert not alpha_eq(Forall("x", Rel("sub", x, y)), Forall("y", Rel("sub", y, y)))


@given(formulas)
def test_free_vars_after_closing(f):
    g = f
    for v in sorted(free_vars(f)):
        g = Forall(v, g)
    assert is_closed(g)


# -- derivations -----------------------------------------------------------------

IDENTITY = Lam(Implies(A, A), "u", Hyp(A, "u"))
K_SHAPE = Lam(chain(A, Bf, A), "u", Lam(Implies(Bf, A), "v", Hyp(A, "u")))
PEIRCE = Peirce(Implies(Implies(Implies(A, Bf), A), A))


def test_extracted_terms():
    assert format_cterm(check(IDENTITY)) == "I"
    assert format_cterm(check(K_SHAPE)) == "(E K)"
    assert format_cterm(check(PEIRCE)) == "cc"


def test_modus_ponens_and_hypotheses():
    d = AppD(Bf, Hyp(Implies(A, Bf), "f"), Hyp(A, "a"))
    assert format_cterm(check(d, {"f": Implies(A, Bf), "a": A})) == "(f a)"
    with pytest.raises(DerivationError):
        check(d, {"f": Implies(A, Bf)})
    with pytest.raises(DerivationError):
        check(AppD(A, Hyp(Implies(A, Bf), "f"), Hyp(A, "a")), {"f": Implies(A, Bf), "a": A})


def test_generalisation_and_instance():
    fx = Rel("sub", x, x)
    hyp = {"h": Forall("x", fx)}
    inst = Inst(Rel("sub", y, y), y, Hyp(Forall("x", fx), "h"))
    gen = Gen(Forall("y", Rel("sub", y, y)), "y", inst)
    assert format_cterm(check(gen, hyp)) == "h"


def test_eigenvariable_condition():
    bad = Gen(Forall("x", Rel("sub", x, x)), "x", Hyp(Rel("sub", x, x), "h"))
    with pytest.raises(DerivationError, match="eigenvariable"):
        check(bad, {"h": Rel("sub", x, x)})


def test_wrong_instance_rejected():
    with pytest.raises(DerivationError):
        check(Inst(Rel("sub", y, x), y, Hyp(Forall("x", Rel("sub", x, x)), "h")),
              {"h": Forall("x", Rel("sub", x, x))})


def test_ex_falso():
    d = Lam(Implies(BOT, A), "u", Efq(A, Hyp(BOT, "u")))
    assert format_cterm(check(d)) == "I"
    with pytest.raises(DerivationError):
        check(Lam(Implies(Bf, A), "u", Efq(A, Hyp(Bf, "u"))))


def test_bad_peirce_rejected():
    with pytest.raises(DerivationError):
        check(Peirce(Implies(Implies(Implies(A, Bf), Bf), A)))


def test_sugar_in_conclusion_is_checked_after_expansion():
    # |- not A -> not A, written with sugar
    d = Lam(Implies(neg(A), neg(A)), "u", Hyp(neg(A), "u"))
    assert format_cterm(check(d)) == "I"


def test_derivation_roundtrip():
    for d in (IDENTITY, K_SHAPE, PEIRCE):
        assert parse_derivation(format_derivation(d)) == d


def test_derivation_file_with_scheme_hypothesis():
    text = "(hyps (e (scheme extensionality 0)))\n(hyp " + format_formula(
        axiom_scheme("extensionality")[0]) + " e)"
    hyps, d = parse_derivation_file(text)
    assert format_cterm(check(d, hyps)) == "e"


def test_extracted_lambda_terms():
    from realizability.compiler import LAbs, LVar

    assert extract(IDENTITY) == LAbs("u", LVar("u"))


def test_schemes_are_closed_and_sugar_free():
    fx = Rel("neps", x, SVar("p"))
    fxy = Rel("neps", y, x)
    instances = {
        "extensionality": axiom_scheme("extensionality"),
        "foundation": axiom_scheme("foundation", fx, "x", ["p"]),
        "comprehension": axiom_scheme("comprehension", fx, "x", ["p"]),
        "pairing": axiom_scheme("pairing"),
        "union": axiom_scheme("union"),
        "power": axiom_scheme("power"),
        "collection": axiom_scheme("collection", fxy, "x", "y", []),
        "infinity": axiom_scheme("infinity", fxy, "x", "y", []),
    }
    assert set(instances) == set(SCHEMES)
    assert len(instances["extensionality"]) == 4
    for name, fs in instances.items():
        for f in fs:
            assert is_closed(f), name
            assert "Sugar" not in repr(f), name


def test_scheme_lookup_by_index():
    assert axiom_scheme("0") == axiom_scheme("extensionality")
    with pytest.raises(ValueError):
        axiom_scheme("choice")

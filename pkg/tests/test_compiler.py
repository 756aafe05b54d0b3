import random

import pytest
from hypothesis import given, strategies as st

from realizability.compiler import (
    CApp, CompileError, LAbs, LApp, LConst, LVar, Var,
    abstract, capp, compile_lambda, format_cterm, format_lambda,
    free_vars, parse_lambda, substitute, theorem_1_1_check, to_term,
)
from realizability.machine import reduces_to
from realizability.terms import B, C, CC, E, I, K, W, App, Const, Cont, Num, Process, Push, parse_term

from _oracles import c, oracle_abstract, to_tree, trees
from _strategies import cterms, random_cterm, random_stack, random_term, terms

x, y = Var("x"), Var("y")


def test_case_examples():
    assert abstract("x", x) is I
    assert abstract("x", K) == App(K, K)
    assert abstract("x", CApp(x, x)) == App(W, App(E, E))
    assert compile_lambda(parse_lambda(r"\x y. x")) == App(E, K)


def test_case_three_recurses_before_wrapping():
    # \x (x)K = (C \x (E)x)K and \x (E)x = (E)E
    assert abstract("x", CApp(x, K)) == App(App(C, App(E, E)), K)


def test_case_six_rewrites_with_b():
    t = CApp(K, CApp(y, x))
    # x in (y)x; not cases 3-5, so \x (B K y)x = (E)(B K y)
    assert abstract("x", t) == capp(E, capp(capp(B, K), y))


def test_capp_collapses_closed_subtrees():
    assert capp(K, I) is App(K, I)
    assert isinstance(capp(x, I), CApp)


@given(cterms())
def test_abstraction_never_contains_the_variable(t):
    assert "x" not in free_vars(abstract("x", t))


@given(cterms(("x", "y")))
def test_abstraction_matches_case_oracle(t):
    assert to_tree(abstract("x", t)) == oracle_abstract("x", to_tree(t))


def test_abstraction_oracle_exhaustive_small():
    leaves = [("v", "x"), ("v", "y"), c("K"), c("B")]
    for tree in trees(2, leaves):
        t = _from_tree(tree)
        for v in ("x", "y"):
            assert to_tree(abstract(v, t)) == oracle_abstract(v, tree)


def _from_tree(tree):
    from realizability.terms import COMBINATORS

    if tree[0] == "v":
        return Var(tree[1])
    if tree[0] == "c":
        return next(k for k in COMBINATORS if k.name == tree[1])
    return capp(_from_tree(tree[1]), _from_tree(tree[2]))


def test_substitute_examples():
    assert substitute(x, {"x": K}) is K
    assert substitute(K, {"x": I}) is K
    assert substitute(CApp(x, y), {"x": I, "y": K}) == App(I, K)


def test_to_term_rejects_open_terms():
    with pytest.raises(CompileError):
        to_term(CApp(x, K))


def test_theorem_examples():
    xi = parse_term("k[pi4]")
    assert theorem_1_1_check(x, ["x"], [xi], Const(0), 10)
    assert theorem_1_1_check(CApp(x, x), ["x"], [xi], Const(0), 20)


@given(cterms(), st.lists(terms, min_size=3, max_size=3), st.integers(0, 3))
def test_abstraction_then_substitution_reduces(t, args, pi):
    assert theorem_1_1_check(t, ["x", "y", "z"], args, Const(pi), 100_000)


def test_theorem_fuzz_seeded():
    rng = random.Random(11)
    for _ in range(100):
        t = random_cterm(rng, ["x", "y", "z"], 5)
        args = [random_term(rng, 3) for _ in range(3)]
        assert theorem_1_1_check(t, ["x", "y", "z"], args, random_stack(rng, 2), 100_000)


def test_unused_binders_are_dropped_by_k():
    # \x y. y ignores x: (K)I
    assert compile_lambda(parse_lambda(r"\x y. y")) == App(K, I)


def test_compile_leaves_free_variables():
    assert free_vars(compile_lambda(parse_lambda(r"\x. x f"))) == {"f"}


def test_lambda_parser_shapes():
    assert parse_lambda(r"\x y. x") == LAbs("x", LAbs("y", LVar("x")))
    assert parse_lambda("f a b") == LApp(LApp(LVar("f"), LVar("a")), LVar("b"))
    assert parse_lambda("f \\x. x") == LApp(LVar("f"), LAbs("x", LVar("x")))
    assert parse_lambda("cc #2") == LApp(LConst(CC), LConst(Num(2)))
    assert parse_lambda("k[K . pi1]") == LConst(Cont(Push(K, Const(1))))
    assert parse_lambda("λx. x") == parse_lambda(r"\x. x")
    assert parse_lambda("w", {"w": I}) == LConst(I)


@pytest.mark.parametrize("bad", [r"\. x", "(x", "x)", r"\x x", "", "k[K"])
def test_lambda_parse_errors(bad):
    with pytest.raises(CompileError):
        parse_lambda(bad)


def test_formatting():
    assert format_lambda(parse_lambda(r"\x. x y")) == r"(\x. (x y))"
    assert format_cterm(CApp(x, K)) == "(x K)"


def test_turing_fixed_point():
    a = compile_lambda(parse_lambda(r"\a f. f (a a f)"))
    y_comb = App(a, a)
    xi = parse_term("k[pi9]")
    start = Process(y_comb, Push(xi, Const(0)))
    assert reduces_to(start, Process(xi, Push(App(y_comb, xi), Const(0))), 500)

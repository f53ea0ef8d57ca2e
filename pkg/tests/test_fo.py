import itertools

import pytest
from hypothesis import given, strategies as st

from bundlefoml.fo import (
    BOX_EXISTS2,
    FORALL_BOX,
    FAnd,
    FNot,
    FOParseError,
    FOStructure,
    FOr,
    Rel,
    build_gamma,
    build_lambda,
    build_psi,
    fo_eval,
    fo_satisfiable_up_to,
    marker_predicates,
    parse_fo,
    tr_matrix,
    translate,
    translate_box_exists2,
    translate_forall_box,
)
from bundlefoml.formula import (
    And,
    Fragment,
    alpha_equivalent,
    bundles,
    classify,
    free_vars,
    is_clean,
    is_pnf,
    modal_depth,
    predicates,
)
from bundlefoml.kripke import DomainPolicy
from bundlefoml.oracle import bounded_sat
from bundlefoml.syntax import parse


def test_parse_fo():
    a = parse_fo("A x. E y. R(x,y)")
    assert a.prefix == (("A", "x"), ("E", "y"))
    assert a.matrix == Rel("x", "y")
    assert parse_fo("E x. R(x,x)").prefix == (("E", "x"),)
    b = parse_fo("A x. ~R(x,x) | R(x,x) & ~(R(x,x) -> R(x,x))")
    assert b.matrix == FOr(
        FNot(Rel("x", "x")),
        FAnd(Rel("x", "x"), FNot(FOr(FNot(Rel("x", "x")), Rel("x", "x")))),
    )


@pytest.mark.parametrize(
    "text, message",
    [
        ("A x. R(x,y)", "unbound"),
        ("A x. A x. R(x,x)", "twice"),
        ("A x. R(x,x) & E y. R(y,y)", "prenex"),
        ("A x. R(x,x) & S(x,x)", "relation"),
        ("A x. R(x", "end of input"),
    ],
)
def test_parse_fo_errors(text, message):
    with pytest.raises(FOParseError, match=message):
        parse_fo(text)


def brute_eval(universe, rel, alpha):
    """Reference evaluator: try every assignment of the prefix variables."""
    names = [v for _, v in alpha.prefix]

    def holds(m, env):
        if isinstance(m, Rel):
            return (env[m.x], env[m.y]) in rel
        if isinstance(m, FNot):
            return not holds(m.body, env)
        if isinstance(m, FAnd):
            return holds(m.left, env) and holds(m.right, env)
        return holds(m.left, env) or holds(m.right, env)

    table = {
        values: holds(alpha.matrix, dict(zip(names, values)))
        for values in itertools.product(universe, repeat=len(names))
    }

    def go(k, prefix):
        if k == len(names):
            return table[prefix]
        branch = (go(k + 1, prefix + (d,)) for d in universe)
        return all(branch) if alpha.prefix[k][0] == "A" else any(branch)

    return go(0, ())


def test_fo_eval_examples():
    total = parse_fo("A x. E y. R(x,y)")
    loop = parse_fo("E x. R(x,x)")
    assert fo_eval(FOStructure(("a",), frozenset({("a", "a")})), total)
    assert not fo_eval(FOStructure(("a",), frozenset()), total)
    swap = FOStructure(("a", "b"), frozenset({("a", "b"), ("b", "a")}))
    assert fo_eval(swap, total)
    assert not fo_eval(swap, loop)


SENTENCES = [
    "A x. E y. R(x,y)",
    "E x. R(x,x)",
    "A x. A y. R(x,y) -> R(y,x)",
    "E x. A y. R(x,y) & ~R(y,y)",
    "A x. E y. A z. (R(x,y) & R(y,z)) -> R(x,z)",
]


@pytest.mark.parametrize("text", SENTENCES)
def test_fo_eval_matches_brute_force(text):
    alpha = parse_fo(text)
    universe = ("a", "b")
    pairs = list(itertools.product(universe, repeat=2))
    for bits in itertools.product([0, 1], repeat=len(pairs)):
        rel = frozenset(p for p, b in zip(pairs, bits) if b)
        assert fo_eval(FOStructure(universe, rel), alpha) == brute_eval(universe, rel, alpha)


def test_structure_validation():
    with pytest.raises(ValueError):
        FOStructure(("a",), frozenset({("a", "b")}))
    with pytest.raises(ValueError):
        FOStructure((), frozenset())


def test_fo_satisfiable_up_to():
    assert fo_satisfiable_up_to(parse_fo("A x. E y. R(x,y)"), 1) is not None
    assert fo_satisfiable_up_to(parse_fo("A x. R(x,x) & ~R(x,x)"), 3) is None


def test_tr_matrix():
    assert tr_matrix(Rel("x", "y"), FORALL_BOX) == parse("exists z dia (P(x) & Q(y))")
    assert tr_matrix(FNot(Rel("x", "y")), FORALL_BOX) == parse("forall z box (~P(x) | ~Q(y))")
    assert tr_matrix(Rel("x", "y"), BOX_EXISTS2) == parse("dia forall z z' (P(x) & Q(y))")


def test_tr_matrix_keeps_binders_apart():
    f = tr_matrix(FAnd(Rel("x", "y"), Rel("y", "x")), FORALL_BOX)
    assert is_clean(f)
    assert alpha_equivalent(f, parse("(exists z dia (P(x) & Q(y))) & exists t dia (P(y) & Q(x))"))


def test_build_psi():
    total = parse_fo("A x. E y. R(x,y)")
    assert alpha_equivalent(
        build_psi(total, FORALL_BOX), parse("forall x box exists y dia exists z dia (P(x) & Q(y))")
    )
    assert alpha_equivalent(
        build_psi(parse_fo("E x. R(x,x)"), FORALL_BOX), parse("exists x dia exists z dia (P(x) & Q(x))")
    )
    assert alpha_equivalent(
        build_psi(total, BOX_EXISTS2),
        parse("box forall x x' dia exists y y' dia forall z z' (P(x) & Q(y))"),
    )


def test_build_lambda():
    assert alpha_equivalent(build_lambda(0), parse("exists z0 dia top"))
    assert alpha_equivalent(
        build_lambda(1), parse("(exists z0 dia top) & (forall z1 box exists z2 dia top)")
    )
    assert alpha_equivalent(build_lambda(0, BOX_EXISTS2), parse("dia forall z z' top"))


def test_build_gamma():
    assert alpha_equivalent(
        build_gamma(0),
        parse(
            "forall z1 box forall z2 box ((forall z box (~P(z1) | ~Q(z2))) | (exists z dia (P(z1) & Q(z2))))"
        ),
    )
    assert alpha_equivalent(
        build_gamma(1, BOX_EXISTS2),
        parse(
            "box forall z1 z2 ((box exists z box exists t (~P(z1) | ~Q(z2))) | "
            "(box exists z dia forall t (P(z1) & Q(z2))))"
        ),
    )


@pytest.mark.parametrize("n", [0, 1, 2])
def test_gamma_depth(n):
    assert modal_depth(build_gamma(n)) == n + 3


@pytest.mark.parametrize(
    "text, depth", [("E x. R(x,x)", 4), ("A x. E y. R(x,y)", 5), ("A x. E y. A z. R(x,z) & R(z,y)", 6)]
)
def test_forall_box_translation(text, depth):
    f = translate_forall_box(parse_fo(text))
    assert modal_depth(f) == depth
    assert is_pnf(f) and is_clean(f)
    assert not free_vars(f)
    assert classify(f) is Fragment.EXISTS_BOX_FORALL_BOX


def test_box_exists2_translation():
    f = translate_box_exists2(parse_fo("A x. E y. R(x,y)"))
    assert isinstance(f, And) and isinstance(f.left, And) and not isinstance(f.left.left, And)
    assert all(not b.kind.quantifier_first for b in bundles(f))
    assert classify(f) is Fragment.BOX_EXISTS2
    assert is_pnf(f) and is_clean(f)
    assert translate(parse_fo("A x. E y. R(x,y)"), BOX_EXISTS2) == f


def test_marker_predicates_avoid_the_relation():
    assert marker_predicates("R") == ("P", "Q")
    p, q = marker_predicates("P")
    assert {p, q}.isdisjoint({"P"}) and p != q
    f = translate_forall_box(parse_fo("A x. P(x,x)"))
    assert set(predicates(f)) == {p, q}


def test_translation_reuses_no_names_across_parts():
    f = translate_forall_box(parse_fo("A z. E z1. R(z,z1)"))
    assert is_clean(f)


def test_reduction_sanity():
    policy = DomainPolicy.CONSTANT
    assert bounded_sat(translate_forall_box(parse_fo("A x. E y. R(x,y)")), 3, 3, policy)
    assert bounded_sat(translate_forall_box(parse_fo("A x. R(x,x) & ~R(x,x)")), 3, 3, policy) is None


@given(st.sampled_from(SENTENCES))
def test_translation_is_deterministic(text):
    alpha = parse_fo(text)
    assert translate_forall_box(alpha) == translate_forall_box(alpha)
    assert translate_box_exists2(alpha) == translate_box_exists2(alpha)

import random

import pytest
from hypothesis import given, settings, strategies as st

from bundlefoml.corpus import generate_corpus, random_formula
from bundlefoml.formula import bound_vars, modal_depth
from bundlefoml.kripke import DomainPolicy, evaluate, validate
from bundlefoml.oracle import bounded_sat
from bundlefoml.syntax import parse
from bundlefoml.tableau import (
    ROOT,
    FragmentError,
    Label,
    Rule,
    apply_br,
    apply_end,
    br_depth,
    extract_model,
    init_root,
    is_closed,
    partition,
    saturate_boolean,
    solve,
)


def label(world, texts, sigma):
    return Label(world, tuple(parse(t) for t in texts), tuple(sigma))


def texts(l):
    return [str(f) for f in l.formulas]


@pytest.mark.parametrize(
    "text, sigma",
    [
        ("box exists x P(x,y)", ("y", "z0")),
        ("dia forall u P(u)", ("z0",)),
        ("P(x) & ~Q(x,y)", ("x", "y", "z0")),
        ("P(z0) & box exists u Q(u)", ("z0", "z0_1")),
    ],
)
def test_init_root(text, sigma):
    root = init_root(parse(text))
    assert root.world == ROOT
    assert root.sigma == sigma


def test_init_root_rejects_quantifier_first():
    with pytest.raises(FragmentError):
        init_root(parse("exists x box P(x)"))
    with pytest.raises(FragmentError):
        init_root(parse("box exists x y P(x,y)"))


def test_saturate_boolean():
    alts = saturate_boolean(label("w", ["(P(x) & Q(x)) | R(x)"], ["x"]))
    assert [set(a.formulas) for a in alts] == [
        {parse("P(x)"), parse("Q(x)")},
        {parse("R(x)")},
    ]
    alts = saturate_boolean(label("w", ["P(x) & ~P(x)"], ["x"]))
    assert [a.formulas for a in alts] == [(parse("P(x)"), parse("~P(x)"))]
    alts = saturate_boolean(label("w", ["bot | P(x)"], ["x"]))
    assert [a.formulas for a in alts] == [(parse("P(x)"),)]
    assert saturate_boolean(label("w", ["bot & P(x)"], ["x"])) == []


def test_saturate_keeps_bundles_whole():
    alts = saturate_boolean(label("w", ["(box exists x P(x)) & top"], ["z"]))
    assert [a.formulas for a in alts] == [(parse("box exists x P(x)"),)]


def test_partition():
    l = label("w", ["box exists x P(x)", "dia exists u Q(u)", "P(z)"], ["z"])
    assert partition(l) == (
        [parse("box exists x P(x)")], [], [], [parse("dia exists u Q(u)")], [parse("P(z)")]
    )
    lits = label("w", ["P(z)", "~Q(z)"], ["z"])
    assert partition(lits) == ([], [], [], [], list(lits.formulas))
    assert partition(label("w", ["dia forall t Q(t)"], ["z"])) == (
        [], [], [parse("dia forall t Q(t)")], [], []
    )
    with pytest.raises(ValueError):
        partition(label("w", ["P(z) & Q(z)"], ["z"]))


def test_apply_br_box_exists_and_dia_exists():
    (child,) = apply_br(label("w", ["box exists x P(x)", "dia exists u Q(u)"], ["z"]))
    assert child.world == "w.v_u"
    assert set(child.formulas) == {parse("P(x)"), parse("Q(u)")}
    assert child.sigma == ("z", "x", "u")


def test_apply_br_box_forall_and_dia_forall():
    (child,) = apply_br(label("w", ["box forall y P(y)", "dia forall t Q(t)"], ["z"]))
    assert child.world == "w.v_t"
    assert set(child.formulas) == {parse("P(z)"), parse("Q(z)")}
    assert child.sigma == ("z",)


def test_apply_br_one_child_per_diamond():
    # u joins sigma' for both children, so the dia-forall body is instantiated at u too
    a, b = apply_br(label("w", ["dia forall t Q(t)", "dia exists u S(u)"], ["z"]))
    assert (a.world, set(a.formulas), a.sigma) == ("w.v_t", {parse("Q(z)"), parse("Q(u)")}, ("z", "u"))
    assert (b.world, set(b.formulas), b.sigma) == ("w.v_u", {parse("S(u)")}, ("z", "u"))


def test_apply_br_renames_repeated_binders():
    l = label("w", ["box forall y box exists s P(y,s)", "dia exists u top"], ["z"])
    (child,) = apply_br(l)
    assert len(child.formulas) == 3
    binders = [b for f in child.formulas for b in bound_vars(f)]
    assert len(binders) == len(set(binders))
    assert not set(binders) & set(child.sigma)


def test_apply_br_needs_diamond():
    with pytest.raises(ValueError):
        apply_br(label("w", ["box exists x P(x)"], ["z"]))


def test_apply_end():
    assert apply_end(label("w", ["box exists x P(x)", "Q(z)"], ["z"])) == label("w", ["Q(z)"], ["z"])
    assert apply_end(label("w", ["box forall y P(y)"], ["z"])) == Label("w", (), ("z",))
    with pytest.raises(ValueError):
        apply_end(label("w", ["P(z)"], ["z"]))
    with pytest.raises(ValueError):
        apply_end(label("w", ["box forall y P(y)", "dia exists u top"], ["z"]))


@pytest.mark.parametrize(
    "lits, closed",
    [(["P(z)", "~P(z)"], True), (["P(z)", "~P(y)"], False), (["bot"], True), ([], False), (["top"], False)],
)
def test_is_closed(lits, closed):
    assert is_closed([parse(t) for t in lits]) is closed


@pytest.mark.parametrize(
    "text, sat",
    [
        ("P(x) & ~P(x)", False),
        ("(dia forall z P(z)) & (dia forall t ~P(t))", True),
        ("(box forall y P(y)) & (dia exists u ~P(u))", False),
        ("box exists x P(x)", True),
        ("dia exists u (P(u) & ~P(u))", False),
        ("(dia forall u P(u)) & box exists v ~P(v)", False),
        ("(dia exists u P(u)) & box exists v ~P(v)", True),
        ("dia forall u (P(u) | Q(u)) & box forall v ~P(v)", True),
        ("top", True),
        ("bot", False),
    ],
)
def test_solve(text, sat):
    f = parse(text)
    result = solve(f)
    assert bool(result) is sat
    # independent confirmation at small bounds
    assert (bounded_sat(f, 3, 2) is not None) is sat


def test_solve_rejects_other_fragments():
    with pytest.raises(FragmentError):
        solve(parse("exists x box P(x)"))


def test_shared_witness_regression():
    # without renaming, the two copies of the box-exists body would share one
    # witness name and the branch would close wrongly
    f = parse(
        "(box exists s A(s)) & (dia exists u ~A(u)) & "
        "(box forall y ((dia exists t top) & box exists v ((A(y) & P(v)) | (~A(y) & ~P(v)))))"
    )
    assert bounded_sat(f, 3, 3) is not None
    assert solve(f)


def test_extract_model_single_diamond():
    result = solve(parse("dia forall t Q(t)"))
    m = result.model
    assert set(m.worlds) == {"r", "r.v_t"}
    assert m.relation == {("r", "r.v_t")}
    assert m.delta == {"r": {"z0"}, "r.v_t": {"z0"}}
    assert m.valuation["r.v_t"]["Q"] == {("z0",)}
    assert result.valuation == {"z0": "z0"}


def test_extract_model_end_discards_boxes():
    result = solve(parse("box exists x P(x)"))
    assert result.model.worlds == ("r",)
    assert result.model.relation == frozenset()
    assert result.tableau.rule is Rule.END


def test_extract_model_standalone():
    result = solve(parse("(dia exists u P(u)) & box forall v R(v,v)"))
    model, root, sigma = extract_model(result.tableau)
    assert model == result.model
    assert validate(model, DomainPolicy.INCREASING) is None
    for w, v in model.relation:
        assert model.delta[w] <= model.delta[v]


def test_trace_lines():
    lines = []
    solve(parse("(P(x) | Q(x)) & dia exists u P(u)"), trace=lines.append)
    assert lines == ["OR r 1 2", "BR r 2 2", "LEAF r.v_u 1 3"]


def test_free_variables_become_root_elements():
    result = solve(parse("P(x) & dia forall y R(x,y)"))
    assert result.valuation == {"x": "x", "z0": "z0"}
    assert evaluate(result.model, result.root, result.valuation, parse("P(x) & dia forall y R(x,y)"))


def _tableau_formulas():
    return st.integers(0, 2**32).map(lambda s: random_formula(random.Random(s)))


@settings(max_examples=200)
@given(_tableau_formulas())
def test_soundness_and_termination(f):
    result = solve(f)
    if result:
        assert validate(result.model, DomainPolicy.INCREASING) is None
        assert evaluate(result.model, result.root, result.valuation, f)
        assert br_depth(result.tableau) <= modal_depth(f)
        for node in result.tableau.walk():
            for child in node.children:
                assert set(node.label.sigma) <= set(child.label.sigma)


@settings(max_examples=200)
@given(_tableau_formulas())
def test_verdict_independent_of_exploration_order(f):
    assert bool(solve(f)) == bool(solve(f, reverse=True))


@settings(max_examples=60)
@given(_tableau_formulas())
def test_agrees_with_oracle(f):
    found = bounded_sat(f, 3, 3)
    result = solve(f)
    if found is not None:
        assert result
    if not result:
        assert found is None


def test_corpus_is_deterministic_and_in_fragment():
    a, b = generate_corpus(0, 50), generate_corpus(0, 50)
    assert a == b
    for f in a:
        assert modal_depth(f) <= 3
        init_root(f)

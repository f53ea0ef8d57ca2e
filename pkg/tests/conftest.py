import hypothesis.strategies as st
from hypothesis import settings

from bundlefoml.formula import BOT, TOP, And, Atom, Bundle, Kind, NegAtom, Not, Or

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

VARS = ("x", "y", "u", "v")
SIGNATURE = {"P": 1, "R": 2}


def atoms(signature=SIGNATURE, variables=VARS):
    def make(pred):
        return st.tuples(*[st.sampled_from(variables)] * signature[pred]).map(
            lambda args: (pred, args)
        )

    pairs = st.sampled_from(sorted(signature)).flatmap(make)
    return st.one_of(
        st.just(TOP),
        st.just(BOT),
        pairs.map(lambda pa: Atom(*pa)),
        pairs.map(lambda pa: NegAtom(*pa)),
    )


def formulas(kinds=tuple(Kind), max_binders=1, signature=SIGNATURE, variables=VARS, max_leaves=8):
    """Arbitrary formulas: possibly with Not, shadowed or clashing binders."""

    def bundle(children):
        binders = st.lists(st.sampled_from(variables), min_size=1, max_size=max_binders)
        return st.builds(
            lambda k, bs, body: Bundle(k, tuple(bs), body),
            st.sampled_from(kinds),
            binders,
            children,
        )

    return st.recursive(
        atoms(signature, variables),
        lambda children: st.one_of(
            children.map(Not),
            st.builds(And, children, children),
            st.builds(Or, children, children),
            bundle(children),
        ),
        max_leaves=max_leaves,
    )


def two_binder_ok(f):
    """Parser accepts two binders only after the modality."""
    from bundlefoml.formula import bundles

    return all(len(b.binders) == 1 or not b.kind.quantifier_first for b in bundles(f))

import functools

import pytest
from hypothesis import strategies as st

from packsem.parser import parse, pp_sentence
from packsem.semgrammar import demo_grammar
from packsem.term import App, Var

VAR_NAMES = ["A", "B", "C", "D", "E"]
FUNCTORS = [("f", 2), ("g", 1), ("h", 3), ("k", 2)]
CONSTS = ["a", "b", "c"]


def terms(max_leaves=12, ground=False):
    leaves = st.sampled_from(CONSTS).map(App)
    if not ground:
        leaves = leaves | st.sampled_from(VAR_NAMES).map(Var)

    def extend(children):
        return st.sampled_from(FUNCTORS).flatmap(
            lambda fa: st.lists(children, min_size=fa[1], max_size=fa[1]).map(
                lambda args, fn=fa[0]: App(fn, args)))

    return st.recursive(leaves, extend, max_leaves=max_leaves)


@functools.lru_cache(maxsize=None)
def grammar(name="demo"):
    return demo_grammar(name)


@functools.lru_cache(maxsize=None)
def pp_forest(n, name="demo"):
    return parse(pp_sentence(n), grammar(name).backbone)


@pytest.fixture(scope="session")
def demo():
    return grammar("demo")

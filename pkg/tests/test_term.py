import pytest
from hypothesis import given, settings, strategies as st

from packsem.term import (
    App, Var, VarSupply, anti_unify, anti_unify_n, apply, canonical_form, format_term,
    mklist, occurs, parse_term, term_size, term_vars, unify, TermSyntaxError,
)

from conftest import terms

T = parse_term


def renaming_of(t, prefix="R"):
    return {v: Var(f"{prefix}{i}") for i, v in enumerate(term_vars(t))}


# --- unify -------------------------------------------------------------------

def test_unify_textbook():
    s = unify(T("f(X,b)"), T("f(a,Y)"))
    assert s == {Var("X"): T("a"), Var("Y"): T("b")}


def test_unify_occurs_check_fails():
    assert unify(T("X"), T("f(X)")) is None
    assert unify(T("f(X,Y)"), T("f(Y,g(X))")) is None


def test_unify_identity_is_empty():
    t = T("f(X,g(Y,a))")
    assert unify(t, t) == {}


def test_unify_arity_is_part_of_functor():
    assert unify(T("f(a)"), T("f(a,b)")) is None
    assert unify(T("f"), T("f(a)")) is None


def test_unify_extends_seed():
    s = unify(T("f(X)"), T("f(Y)"), {Var("Y"): T("b")})
    assert apply(s, T("X")) == T("b")
    assert unify(T("X"), T("a"), {Var("X"): T("b")}) is None


@given(terms(), terms())
@settings(max_examples=300)
def test_unifier_is_sound(t1, t2):
    s = unify(t1, t2)
    if s is not None:
        assert apply(s, t1) == apply(s, t2)
        # idempotent
        assert all(not occurs(v, u) for v in s for u in s.values())


@given(terms(), st.dictionaries(st.sampled_from("ABCDE").map(Var), terms(ground=True, max_leaves=4)))
@settings(max_examples=300)
def test_unifier_is_most_general(t, inst):
    # t and one of its instances always unify, and the instance factors
    # through the mgu
    t2 = apply(inst, t)
    s = unify(t, t2)
    assert s is not None
    assert apply(inst, apply(s, t)) == t2


# --- apply -------------------------------------------------------------------

def test_apply_examples():
    assert apply({Var("X"): T("a")}, T("f(X,X)")) == T("f(a,a)")
    t = T("g(Y,h(a,b,Z))")
    assert apply({}, t) is t
    assert apply({Var("X"): T("a")}, T("b")) == T("b")


@given(terms(), terms(), terms())
def test_apply_idempotent_for_mgus(t1, t2, t):
    s = unify(t1, t2)
    if s is not None:
        assert apply(s, apply(s, t)) == apply(s, t)


# --- anti-unification ---------------------------------------------------------

def test_anti_unify_identity():
    t = T("f(X,g(a))")
    g, s1, s2 = anti_unify(t, t)
    assert g == t and s1 == {} and s2 == {}


def test_anti_unify_disagreement():
    g, s1, s2 = anti_unify(T("f(a,g(b))"), T("f(a,g(c))"))
    assert canonical_form(g) == T("f(a,g(V0))")
    (z,) = term_vars(g)
    assert s1 == {z: T("b")} and s2 == {z: T("c")}


def test_anti_unify_pair_table_reuse():
    g, s1, s2 = anti_unify(T("f(a,a)"), T("f(b,b)"))
    z = g.args[0]
    assert g == App("f", [z, z])
    assert s1 == {z: T("a")} and s2 == {z: T("b")}


def test_anti_unify_functor_clash_at_root():
    g, s1, s2 = anti_unify(T("f(a)"), T("g(a)"))
    assert isinstance(g, Var)
    assert s1 == {g: T("f(a)")} and s2 == {g: T("g(a)")}


def test_anti_unify_fresh_vars_from_supply():
    supply = VarSupply(100)
    g, _, _ = anti_unify(T("f(a)"), T("f(b)"), supply)
    assert g.args[0] == Var(100)


def test_anti_unify_n_examples():
    t = T("h(a,X,g(b))")
    g, ss = anti_unify_n([t])
    assert g == t and ss == [{}]
    g, ss = anti_unify_n([T("f(a)"), T("f(b)"), T("f(c)")])
    z = g.args[0]
    assert ss == [{z: T("a")}, {z: T("b")}, {z: T("c")}]


def test_anti_unify_n_rejects_empty():
    with pytest.raises(ValueError):
        anti_unify_n([])


# Anti-unification laws; each runs on well over 1000 random pairs.

@given(terms(), terms())
@settings(max_examples=1500)
def test_lgg_soundness(t1, t2):
    g, s1, s2 = anti_unify(t1, t2)
    assert apply(s1, g) == t1
    assert apply(s2, g) == t2


@given(terms(), terms())
@settings(max_examples=1500)
def test_lgg_size_bound(t1, t2):
    g, s1, s2 = anti_unify(t1, t2)
    assert term_size(g) <= min(term_size(t1), term_size(t2))
    assert term_size(apply(s1, g)) >= term_size(g)


@given(terms(), terms())
@settings(max_examples=1500)
def test_lgg_commutative_up_to_renaming(t1, t2):
    g12, _, _ = anti_unify(t1, t2)
    g21, _, _ = anti_unify(t2, t1)
    assert canonical_form(g12) == canonical_form(g21)


@given(terms(), st.dictionaries(st.sampled_from("ABCDE").map(Var), terms(max_leaves=4)))
@settings(max_examples=1500)
def test_lgg_absorbs_instances(t1, s):
    g, _, _ = anti_unify(t1, apply(s, t1))
    assert canonical_form(g) == canonical_form(t1)


@given(st.lists(terms(), min_size=1, max_size=5))
@settings(max_examples=1500)
def test_nary_equals_binary_fold(ts):
    g, ss = anti_unify_n(ts)
    for t, s in zip(ts, ss):
        assert apply(s, g) == t
    acc = ts[0]
    for t in ts[1:]:
        acc, _, _ = anti_unify(acc, t)
    assert canonical_form(g) == canonical_form(acc)


def matches(pattern, t, s=None):
    """One-way matching: a substitution for pattern's variables giving t."""
    s = {} if s is None else s
    if isinstance(pattern, Var):
        if pattern in s:
            return s if s[pattern] == t else None
        s[pattern] = t
        return s
    if isinstance(t, Var) or pattern.functor != t.functor or pattern.arity != t.arity:
        return None
    for a, b in zip(pattern.args, t.args):
        if matches(a, b, s) is None:
            return None
    return s


@given(terms(), terms(), terms())
@settings(max_examples=300)
def test_lgg_is_most_specific(t1, t2, u):
    # a generalisation of the lgg generalises both inputs, and the lgg is an
    # instance of every such common generalisation
    g, _, _ = anti_unify(t1, t2)
    h, _, _ = anti_unify(g, u, VarSupply(10_000))
    assert matches(h, t1) is not None and matches(h, t2) is not None
    assert matches(h, g) is not None


# --- canonical form, size ---------------------------------------------------

def test_canonical_form_examples():
    assert canonical_form(T("f(Y,X,Y)")) == App("f", [Var("V0"), Var("V1"), Var("V0")])
    assert canonical_form(T("f(A,B)")) == canonical_form(T("f(P,Q)"))
    assert canonical_form(T("f(A,A)")) != canonical_form(T("f(P,Q)"))


@given(terms())
def test_canonical_form_idempotent_and_renaming_invariant(t):
    c = canonical_form(t)
    assert canonical_form(c) == c
    assert canonical_form(apply(renaming_of(t), t)) == c


def test_term_size_examples():
    assert term_size(T("a")) == 1
    assert term_size(T("f(a,X)")) == 3
    assert term_size(T("X")) == 1


# --- syntax -----------------------------------------------------------------

@pytest.mark.parametrize("text", [
    "lt(L1,L2)", "drs(in(I),out(O))", "[a,b|T]", "[]", "f('Hello world',x)",
    "[[E,VL,DL,TL],Di,Do]", "p(-3,42)",
])
def test_syntax_round_trip(text):
    t = T(text)
    assert T(format_term(t)) == t


def test_list_sugar():
    assert T("[a,b|T]") == mklist([T("a"), T("b")], Var("T"))
    assert format_term(mklist([T("a")])) == "[a]"


@given(terms())
def test_format_parse_round_trip(t):
    assert T(format_term(t)) == t


@pytest.mark.parametrize("bad", ["f(a", "f(a,)", "[a|", "", "f a", "(a)"])
def test_syntax_errors(bad):
    with pytest.raises(TermSyntaxError):
        T(bad)


def test_var_supply_never_repeats():
    s = VarSupply()
    vs = [s.fresh() for _ in range(1000)]
    assert len(set(vs)) == 1000
    t = T("f(X,Y,X)")
    r = s.rename(t)
    assert r.args[0] == r.args[2] and r.args[0] != r.args[1]
    assert not set(term_vars(r)) & {Var("X"), Var("Y")}

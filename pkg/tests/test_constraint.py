import pytest
from hypothesis import given, settings, strategies as st

from packsem.constraint import (
    TRUE, Conj, Disj, Env, Eq, Name, SolvedForm, Use, UndefinedName, conjoin, disjoin,
    disjuncts, expand, format_constraint, format_env, generalise, generalise_n,
    parse_constraint, parse_env, solve,
)
from packsem.term import Var, VarSupply, canonical_form, parse_term, term_size

from conftest import terms

T = parse_term
X, Y, Z = Var("X"), Var("Y"), Var("Z")


def eq(a, b):
    return Eq(T(a), T(b))


def canon(s: SolvedForm):
    return canonical_form(s.term)


# --- conjoin ---------------------------------------------------------------

def test_conjoin_units():
    phi, psi = eq("X", "a"), eq("Y", "b")
    assert conjoin([TRUE, phi]) == phi
    assert conjoin([]) is TRUE
    assert conjoin([phi, psi, TRUE]) == Conj((phi, psi))


def test_conjoin_flattens():
    a, b, c = eq("X", "a"), eq("Y", "b"), eq("Z", "c")
    assert conjoin([Conj((a, b)), c]) == Conj((a, b, c))
    assert disjoin([Disj((a, b)), c]) == Disj((a, b, c))
    assert disjoin([a]) == a


# --- solve -----------------------------------------------------------------

def test_solve_examples():
    s = solve([eq("X", "f(a)")])
    assert s.binding == {X: T("f(a)")}
    s = solve([eq("X", "f(Y)"), eq("Y", "b")])
    assert s.binding == {X: T("f(b)"), Y: T("b")}
    assert solve([eq("X", "a"), eq("X", "b")]) is None


def test_solve_with_seed_and_keep():
    seed = SolvedForm(X, {X: T("f(Y,Z)")})
    s = solve([eq("Y", "a"), eq("Z", "g(W)")], seed, keep={Var("W")})
    assert s.binding == {X: T("f(a,g(W))")}
    assert s.root == X


@given(st.lists(st.tuples(st.sampled_from("XYZ").map(Var), terms(max_leaves=5)), max_size=6),
       st.randoms(use_true_random=False))
def test_solve_is_order_independent(pairs, rnd):
    eqs = [Eq(v, t) for v, t in pairs]
    shuffled = list(eqs)
    rnd.shuffle(shuffled)
    s1 = solve(eqs, root=X)
    s2 = solve(shuffled, root=X)
    assert (s1 is None) == (s2 is None)
    if s1 is not None:
        assert canon(s1) == canon(s2)


# --- generalise ------------------------------------------------------------

def test_generalise_example():
    gen, r1, r2 = generalise(SolvedForm(X, {X: T("f(a)")}), SolvedForm(X, {X: T("f(b)")}))
    (z,) = [a for a in gen.term.args]
    assert gen.root == X and isinstance(z, Var)
    assert r1 == Eq(z, T("a")) and r2 == Eq(z, T("b"))


def test_generalise_identity():
    s = SolvedForm(X, {X: T("g(a,b)")})
    gen, r1, r2 = generalise(s, s)
    assert canon(gen) == canon(s)
    assert r1 is TRUE and r2 is TRUE


def test_generalise_needs_common_root():
    with pytest.raises(ValueError):
        generalise(SolvedForm(X, {X: T("a")}), SolvedForm(Y, {Y: T("a")}))


def solved_pairs():
    return st.tuples(terms(), terms()).map(
        lambda p: (SolvedForm(X, {X: p[0]}), SolvedForm(X, {X: p[1]})))


@given(solved_pairs())
@settings(max_examples=500)
def test_generalise_round_trip_and_size(pair):
    s1, s2 = pair
    gen, r1, r2 = generalise(s1, s2, VarSupply(1000))
    for s, r in ((s1, r1), (s2, r2)):
        back = solve(list(next(disjuncts(r))), gen)
        assert back is not None and canon(back) == canon(s)
    assert term_size(gen.term) <= min(term_size(s1.term), term_size(s2.term))


@given(st.lists(terms(), min_size=2, max_size=5))
@settings(max_examples=300)
def test_generalise_nary_equals_fold(ts):
    forms = [SolvedForm(X, {X: t}) for t in ts]
    g1, rems1 = generalise_n(forms, VarSupply(1000))
    g2, rems2 = generalise_n(forms, VarSupply(1000), fold=True)
    assert canon(g1) == canon(g2)
    for f, r1, r2 in zip(forms, rems1, rems2):
        for g, r in ((g1, r1), (g2, r2)):
            assert canon(solve(next(disjuncts(r)), g)) == canon(f)


def test_generalise_carries_non_root_bindings():
    s1 = SolvedForm(X, {X: T("f(Y)"), Y: T("a")})
    s2 = SolvedForm(X, {X: T("f(b)")})
    gen, r1, r2 = generalise(s1, s2)
    assert Eq(Y, T("a")) in (r1.parts if isinstance(r1, Conj) else (r1,))
    assert canon(solve(next(disjuncts(r1)), gen)) == T("f(a)")


# --- env, expand -------------------------------------------------------------

def test_env_stack_discipline():
    env = Env()
    n1, n2 = Name(1), Name(2)
    env.push(n1, eq("X", "a"))
    with pytest.raises(ValueError):
        env.push(n1, TRUE)
    with pytest.raises(UndefinedName):
        env.push(n2, Use(Name(3)))
    env.push(n2, Disj((Use(n1), eq("X", "b"))))
    assert len(env) == 2 and n1 in env
    with pytest.raises(UndefinedName):
        env[Name(9)]


def test_expand_examples():
    phi, a, b = eq("X", "a"), eq("Y", "b"), eq("Y", "c")
    n = Name(1)
    env = Env([(n, Disj((a, b)))])
    assert expand(TRUE, env) is TRUE
    assert expand(Use(n), Env([(n, phi)])) == phi
    assert expand(Conj((phi, Use(n))), env) == Conj((phi, Disj((a, b))))
    with pytest.raises(UndefinedName):
        expand(Use(Name(7)), env)


def test_expand_deep_chain_terminates():
    env = Env()
    prev = TRUE
    for i in range(1, 60):
        d = Disj((conjoin([prev, eq("X", "a")]), conjoin([prev, eq("X", "a")])))
        env.push(Name(i), d)
        prev = Use(Name(i))
    assert expand(prev, env) is not None


def test_disjuncts_dnf():
    c = Conj((Disj((eq("X", "a"), eq("X", "b"))), Disj((eq("Y", "a"), eq("Y", "b")))))
    assert len(list(disjuncts(c))) == 4
    assert list(disjuncts(TRUE)) == [[]]


# --- syntax ------------------------------------------------------------------

def test_constraint_text_round_trip():
    text = "X = f(a) & (Y = b | Y = c & #1) | true"
    names = {}
    c = parse_constraint(text, names)
    assert parse_constraint(format_constraint(c), names) == c
    assert isinstance(c, Disj) and c.alts[1] is TRUE


def test_env_text_round_trip():
    env = parse_env("#1 := X = a | X = b\n#2 := Y = g(X) & #1\n")
    again = parse_env(format_env(env))
    assert [n for n, _ in again] == [Name(1), Name(2)]
    assert format_env(again) == format_env(env)

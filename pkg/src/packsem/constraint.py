"""Constraint language over first-order terms.

Constraints are built from ``TRUE``, equations (``Eq``), conjunction,
disjunction and name uses (``Use``). Names are bound to constraints in an
append-only ``Env``. Satisfiable conjunctions of equations are normalised
to ``SolvedForm``: an idempotent substitution together with the
distinguished variable it describes.

Text syntax::

    X = f(a) & (Y = b | Y = c) & #3
    #3 := (Z = a | Z = b)
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Container, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .term import (
    App, Substitution, Term, TermSyntaxError, Var, VarSupply, _TermReader, _tokenize,
    anti_unify_n, apply, format_term, resolve_bindings, term_vars, unify_into,
)

__all__ = [
    "TRUE", "Eq", "Conj", "Disj", "Use", "Name", "Constraint", "Env", "SolvedForm",
    "UndefinedName", "conjoin", "disjoin", "solve", "generalise", "generalise_n",
    "expand", "uses", "constraint_vars", "disjuncts", "format_constraint", "parse_constraint",
    "format_env", "parse_env",
]


class _True:
    __slots__ = ()

    def __repr__(self):
        return "true"

    def __reduce__(self):
        return (_true, ())


def _true():
    return TRUE


TRUE = _True()


@dataclass(frozen=True)
class Name:
    id: int

    def __repr__(self):
        return f"#{self.id}"


@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term

    def __repr__(self):
        return format_constraint(self)


@dataclass(frozen=True)
class Conj:
    parts: Tuple["Constraint", ...]

    def __repr__(self):
        return format_constraint(self)


@dataclass(frozen=True)
class Disj:
    alts: Tuple["Constraint", ...]

    def __repr__(self):
        return format_constraint(self)


@dataclass(frozen=True)
class Use:
    name: Name

    def __repr__(self):
        return repr(self.name)


Constraint = Union[_True, Eq, Conj, Disj, Use]


class UndefinedName(KeyError):
    pass


def conjoin(cs: Iterable[Constraint]) -> Constraint:
    """Flattened conjunction with ``true`` units dropped."""
    parts: List[Constraint] = []
    for c in cs:
        if c is TRUE:
            continue
        if isinstance(c, Conj):
            parts.extend(c.parts)
        else:
            parts.append(c)
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return Conj(tuple(parts))


def disjoin(cs: Iterable[Constraint]) -> Constraint:
    alts: List[Constraint] = []
    for c in cs:
        if isinstance(c, Disj):
            alts.extend(c.alts)
        else:
            alts.append(c)
    if not alts:
        raise ValueError("empty disjunction")
    if len(alts) == 1:
        return alts[0]
    return Disj(tuple(alts))


def uses(c: Constraint) -> Iterator[Name]:
    if isinstance(c, Use):
        yield c.name
    elif isinstance(c, Conj):
        for p in c.parts:
            yield from uses(p)
    elif isinstance(c, Disj):
        for p in c.alts:
            yield from uses(p)


def constraint_vars(c: Constraint) -> Iterator[Var]:
    if isinstance(c, Eq):
        yield from term_vars(c.lhs)
        yield from term_vars(c.rhs)
    elif isinstance(c, Conj):
        for p in c.parts:
            yield from constraint_vars(p)
    elif isinstance(c, Disj):
        for p in c.alts:
            yield from constraint_vars(p)


class Env:
    """Append-only stack of name definitions.

    A definition may only use names defined before it, so expansion always
    terminates.
    """

    def __init__(self, defs: Iterable[Tuple[Name, Constraint]] = ()):
        self._defs: Dict[Name, Constraint] = {}
        for name, c in defs:
            self.push(name, c)

    def push(self, name: Name, c: Constraint) -> None:
        if name in self._defs:
            raise ValueError(f"{name} is already defined")
        for used in uses(c):
            if used not in self._defs:
                raise UndefinedName(f"{used} used in the definition of {name} before being defined")
        self._defs[name] = c

    def __getitem__(self, name: Name) -> Constraint:
        try:
            return self._defs[name]
        except KeyError:
            raise UndefinedName(f"{name} is not defined") from None

    def __contains__(self, name) -> bool:
        return name in self._defs

    def __iter__(self):
        return iter(self._defs.items())

    def __len__(self):
        return len(self._defs)

    def __repr__(self):
        return f"Env({len(self)} definitions)"


@dataclass(frozen=True, eq=False)
class SolvedForm:
    """Idempotent substitution describing the variable ``root``.

    Variables other than ``root`` are implicitly existential. An empty
    binding is the unconstrained (``true``) case.
    """

    root: Optional[Var]
    binding: Dict[Var, Term] = field(default_factory=dict)

    @property
    def term(self) -> Term:
        return self.binding.get(self.root, self.root)

    def equations(self) -> List[Eq]:
        return [Eq(v, t) for v, t in self.binding.items()]

    def __repr__(self):
        return format_constraint(conjoin(self.equations())) if self.binding else "true"


def solve(eqs: Iterable[Eq], seed: Optional[SolvedForm] = None, *,
          root: Optional[Var] = None,
          keep: Optional[Container[Var]] = None) -> Optional[SolvedForm]:
    """Solve ``seed`` conjoined with ``eqs`` by unification.

    Returns None when the conjunction is unsatisfiable. When ``keep`` is
    given, only the root and those variables stay in the binding; all
    other variables are treated as existentially eliminated.
    """
    bindings: Dict[Var, Term] = dict(seed.binding) if seed is not None else {}
    if root is None and seed is not None:
        root = seed.root
    for eq in eqs:
        if not unify_into(bindings, eq.lhs, eq.rhs):
            return None
    if keep is None:
        return SolvedForm(root, resolve_bindings(bindings))
    wanted = [root] if root is not None else []
    wanted.extend(v for v in bindings if v in keep and v != root)
    return SolvedForm(root, resolve_bindings(bindings, wanted))


def _remainder(subst: Substitution, form: SolvedForm) -> Constraint:
    eqs = [Eq(v, t) for v, t in subst.items()]
    eqs.extend(Eq(v, t) for v, t in form.binding.items() if v != form.root)
    return conjoin(eqs)


def generalise(s1: SolvedForm, s2: SolvedForm, supply: Optional[VarSupply] = None
               ) -> Tuple[SolvedForm, Constraint, Constraint]:
    """Split two solved forms on the same root into a common part and two
    remainders, via anti-unification of the root bindings.

    ``gen & rem1`` is equivalent to ``s1`` and ``gen & rem2`` to ``s2``.
    """
    gen, (rem1, rem2) = generalise_n([s1, s2], supply)
    return gen, rem1, rem2


def generalise_n(forms: Sequence[SolvedForm], supply: Optional[VarSupply] = None,
                 fold: bool = False) -> Tuple[SolvedForm, List[Constraint]]:
    """n-ary ``generalise``. With ``fold`` the binary operation is folded
    from the left and the residual substitutions composed, which gives the
    same result up to renaming of the fresh variables."""
    if not forms:
        raise ValueError("generalise_n needs at least one solved form")
    root = forms[0].root
    if any(f.root != root for f in forms):
        raise ValueError("generalise needs solved forms over one root variable")
    if supply is None:
        supply = VarSupply()
    terms = [f.term for f in forms]
    if fold and len(forms) > 2:
        g, substs = _fold_anti_unify(terms, supply)
    else:
        g, substs = anti_unify_n(terms, supply)
    gen = SolvedForm(root, {} if g == root else {root: g})
    return gen, [_remainder(s, f) for s, f in zip(substs, forms)]


def _fold_anti_unify(terms, supply):
    from .term import anti_unify
    g, s_a, s_b = anti_unify(terms[0], terms[1], supply)
    substs = [s_a, s_b]
    for t in terms[2:]:
        g2, up, s_new = anti_unify(g, t, supply)
        # residuals of earlier terms are rebased onto the new generalisation
        substs = [{v: apply(s, u) for v, u in up.items()} for s in substs]
        substs.append(s_new)
        g = g2
    return g, substs


def expand(c: Constraint, env: Env, _memo: Optional[dict] = None) -> Constraint:
    """Replace every name use by its definition, recursively."""
    if _memo is None:
        _memo = {}
    if isinstance(c, Use):
        hit = _memo.get(c.name)
        if hit is None:
            hit = _memo[c.name] = expand(env[c.name], env, _memo)
        return hit
    if isinstance(c, Conj):
        return conjoin(expand(p, env, _memo) for p in c.parts)
    if isinstance(c, Disj):
        return disjoin(expand(p, env, _memo) for p in c.alts)
    return c


def disjuncts(c: Constraint) -> Iterator[List[Eq]]:
    """Disjunctive normal form of a name-free constraint, lazily, as lists
    of equations."""
    if c is TRUE:
        yield []
    elif isinstance(c, Eq):
        yield [c]
    elif isinstance(c, Disj):
        for a in c.alts:
            yield from disjuncts(a)
    elif isinstance(c, Conj):
        def rec(i):
            if i == len(c.parts):
                yield []
                return
            for head in disjuncts(c.parts[i]):
                for rest in rec(i + 1):
                    yield head + rest
        yield from rec(0)
    elif isinstance(c, Use):
        raise UndefinedName(f"{c.name} must be expanded first")
    else:
        raise TypeError(f"not a constraint: {c!r}")


# ---------------------------------------------------------------------------
# text syntax

def format_constraint(c: Constraint) -> str:
    return _fmt(c, 0)


def _fmt(c, prec):
    # prec: 0 top, 1 inside '|', 2 inside '&'
    if c is TRUE:
        return "true"
    if isinstance(c, Eq):
        return f"{format_term(c.lhs)} = {format_term(c.rhs)}"
    if isinstance(c, Use):
        return repr(c.name)
    if isinstance(c, Conj):
        s = " & ".join(_fmt(p, 2) for p in c.parts)
        return f"({s})" if prec > 1 else s
    if isinstance(c, Disj):
        s = " | ".join(_fmt(p, 1) for p in c.alts)
        return f"({s})" if prec > 0 else s
    raise TypeError(f"not a constraint: {c!r}")


def format_env(env: Env) -> str:
    return "\n".join(f"{name!r} := ({format_constraint(c)})" for name, c in env)


_CTOKEN = re.compile(r"\s*(?:(?P<name>#\d+)|(?P<op>:=|[&|=()]))")


class _ConstraintReader:
    def __init__(self, text: str, names: Optional[Dict[str, Var]] = None):
        self.text = text
        self.pos = 0
        self.names = {} if names is None else names

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek_op(self, op):
        self.skip()
        return self.text.startswith(op, self.pos)

    def take_op(self, op):
        if not self.peek_op(op):
            raise TermSyntaxError(f"expected {op!r} at {self.pos} in {self.text!r}")
        self.pos += len(op)

    def at_end(self):
        self.skip()
        return self.pos >= len(self.text)

    def disj(self):
        alts = [self.conj()]
        while self.peek_op("|"):
            self.take_op("|")
            alts.append(self.conj())
        return alts[0] if len(alts) == 1 else Disj(tuple(alts))

    def conj(self):
        parts = [self.atom()]
        while self.peek_op("&"):
            self.take_op("&")
            parts.append(self.atom())
        return parts[0] if len(parts) == 1 else Conj(tuple(parts))

    def atom(self):
        self.skip()
        m = re.compile(r"#(\d+)").match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return Use(Name(int(m.group(1))))
        if re.compile(r"true\b").match(self.text, self.pos):
            self.pos += 4
            return TRUE
        if self.peek_op("("):
            self.take_op("(")
            c = self.disj()
            self.take_op(")")
            return c
        lhs = self.term()
        self.take_op("=")
        rhs = self.term()
        return Eq(lhs, rhs)

    def term(self):
        # read one term from the current position using the term reader
        end = _term_extent(self.text, self.pos)
        chunk = self.text[self.pos:end]
        reader = _TermReader(_tokenize(chunk), chunk)
        reader.names = self.names
        t = reader.term()
        if reader.peek()[0] is not None:
            raise TermSyntaxError(f"bad term {chunk!r}")
        self.pos = end
        return t


def _term_extent(text, pos):
    depth = 0
    i = pos
    while i < len(text):
        ch = text[i]
        if ch in "([":
            depth += 1
        elif ch in ")]":
            if depth == 0:
                break
            depth -= 1
        elif depth == 0 and ch in "=&|":
            break
        i += 1
    return i


def parse_constraint(text: str, names: Optional[Dict[str, Var]] = None) -> Constraint:
    """Inverse of ``format_constraint``. Variables with the same name
    share identity; ``names`` carries them across calls."""
    r = _ConstraintReader(text, names)
    c = r.disj()
    if not r.at_end():
        raise TermSyntaxError(f"trailing input at {r.pos} in {text!r}")
    return c


def parse_env(text: str, names: Optional[Dict[str, Var]] = None) -> Env:
    names = {} if names is None else names
    env = Env()
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        m = re.match(r"#(\d+)\s*:=\s*(.*)$", line)
        if not m:
            raise TermSyntaxError(f"bad definition line {line!r}")
        env.push(Name(int(m.group(1))), parse_constraint(m.group(2), names))
    return env

"""Reading recovery from packed results, and the per-tree oracle.

``enumerate_solutions`` expands ``D[root]`` lazily, depth first: a name use
is replaced by its definition, every alternative of a disjunction is tried,
and equations are solved as they are met so that unsatisfiable branches are
cut early. ``oracle_per_tree`` computes the same set of readings the slow
way, one parse tree at a time.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

from .constraint import TRUE, Conj, Disj, Eq, Name, SolvedForm, Use, constraint_vars
from .forest import And, Forest, Leaf, enumerate_readings, reading_nodes, readings_count
from .packer import PackedResult
from .semgrammar import SemGrammar, assign_vars, lexical_constants, leaf_constraint, rule_constraint
from .term import (
    App, Term, Var, VarSupply, _resolve, canonical_form, format_term, term_vars,
    unify_into,
)

__all__ = [
    "Solution", "EquivResult", "OracleBoundExceeded", "GrammarFailure", "UnknownVariable",
    "DEFAULT_ORACLE_BOUND", "oracle_bound", "enumerate_solutions", "query_bindings",
    "oracle_per_tree", "equiv_check", "solutions_text", "solutions_json",
]

DEFAULT_ORACLE_BOUND = 1000


def oracle_bound() -> int:
    """Reading bound for oracle runs; ``PACKSEM_ORACLE_BOUND`` overrides."""
    raw = os.environ.get("PACKSEM_ORACLE_BOUND")
    return int(raw) if raw else DEFAULT_ORACLE_BOUND


class OracleBoundExceeded(ValueError):
    pass


class GrammarFailure(RuntimeError):
    pass


class UnknownVariable(KeyError):
    pass


@dataclass(frozen=True, eq=False)
class Solution:
    binding: SolvedForm
    choices: Dict[Name, int] = field(default_factory=dict)

    @property
    def term(self) -> Term:
        return self.binding.term


def _search(p: PackedResult, memo: bool = True):
    """Yield ``(bindings, choices)`` once per satisfiable total choice. The
    yielded objects are live and change after the generator resumes."""
    bindings: Dict[Var, Term] = dict(p.sem_root.binding)
    trail: List[Var] = []
    expanded: Set[Name] = set()
    exp_trail: List[Name] = []
    chosen: Dict[Name, int] = {}
    # choice point: (goals after the use, name, alternatives, next index,
    #                binding trail length, name trail length)
    points: List[tuple] = []
    goals = (p.d_root, None)

    def undo(tlen, elen):
        while len(trail) > tlen:
            del bindings[trail.pop()]
        while len(exp_trail) > elen:
            nm = exp_trail.pop()
            expanded.discard(nm)
            chosen.pop(nm, None)

    while True:
        ok = True
        while goals is not None:
            g, goals = goals
            if g is TRUE:
                continue
            if isinstance(g, Eq):
                if not unify_into(bindings, g.lhs, g.rhs, trail):
                    ok = False
                    break
            elif isinstance(g, Conj):
                for part in reversed(g.parts):
                    goals = (part, goals)
            elif isinstance(g, Use):
                name = g.name
                if memo and name in expanded:
                    continue
                d = p.env[name]
                if isinstance(d, Disj):
                    points.append((goals, name, d.alts, 1, len(trail), len(exp_trail)))
                    chosen[name] = 0
                    d = d.alts[0]
                expanded.add(name)
                exp_trail.append(name)
                goals = (d, goals)
            elif isinstance(g, Disj):
                # anonymous disjunction, not produced by pack
                points.append((goals, None, g.alts, 1, len(trail), len(exp_trail)))
                goals = (g.alts[0], goals)
            else:
                raise TypeError(f"not a constraint: {g!r}")
        if ok:
            yield bindings, chosen
        # backtrack to the most recent choice point with alternatives left
        while points:
            rest, name, alts, k, tlen, elen = points.pop()
            undo(tlen, elen)
            if k < len(alts):
                points.append((rest, name, alts, k + 1, tlen, elen))
                if name is not None:
                    chosen[name] = k
                    expanded.add(name)
                    exp_trail.append(name)
                goals = (alts[k], rest)
                break
        else:
            return


def enumerate_solutions(p: PackedResult, cap: Optional[int] = None,
                        memo: bool = True) -> Iterator[Solution]:
    """Yield one ``Solution`` per satisfiable choice of disjuncts.

    With ``memo`` a name is expanded at most once per path and its choice is
    reused when met again; without it every occurrence chooses anew, which
    can repeat readings.
    """
    root = p.sem_root.root
    for k, (bindings, chosen) in enumerate(_search(p, memo)):
        if cap is not None and k >= cap:
            return
        term = _resolve(bindings, root, {})
        yield Solution(SolvedForm(root, {} if term == root else {root: term}), dict(chosen))


def _known_vars(p: PackedResult) -> Set[Var]:
    out = set(term_vars(p.sem_root.term))
    out.update(p.sem_root.binding)
    for _, c in p.env:
        out.update(constraint_vars(c))
    return out


def query_bindings(p: PackedResult, vars: Sequence[Var],
                   cap: Optional[int] = None) -> List[Tuple[Term, ...]]:
    """Distinct values of ``vars`` across all solutions, sorted by their
    printed form. Variables left open are renamed canonically per tuple, so
    rows that differ only in such names collapse."""
    known = _known_vars(p)
    for v in vars:
        if v not in known:
            raise UnknownVariable(f"{format_term(v)} does not occur in the packed result")
    out = set()
    for k, (bindings, _) in enumerate(_search(p)):
        if cap is not None and k >= cap:
            break
        memo: dict = {}
        row = canonical_form(App("row", [_resolve(bindings, v, memo) for v in vars]))
        out.add(row.args)
    return sorted(out, key=lambda t: tuple(format_term(x) for x in t))


# ---------------------------------------------------------------------------
# oracle

def oracle_per_tree(f: Forest, sem: SemGrammar, bound: Optional[int] = None,
                    node: Optional[int] = None) -> Set[Term]:
    """Canonical semantics of every tree of the (sub)forest, computed tree
    by tree from the conjunction of its leaf and rule constraints."""
    bound = oracle_bound() if bound is None else bound
    start = f.root if node is None else node
    count = readings_count(f, start)
    if count > bound:
        raise OracleBoundExceeded(f"{count} readings exceed the oracle bound {bound}")
    consts = lexical_constants(f, sem)
    out: Set[Term] = set()
    for reading in enumerate_readings(f, node=start):
        supply = VarSupply()
        vars = assign_vars(f, supply)
        eqs: List[Eq] = []
        for i in reading_nodes(f, reading, start):
            n = f.nodes[i]
            if isinstance(n, Leaf):
                eqs.extend(leaf_constraint(i, vars, f, sem, supply, consts).equations())
            elif isinstance(n, And):
                eqs.extend(rule_constraint(i, vars, f, sem, supply))
        bindings: Dict[Var, Term] = {}
        for eq in eqs:
            if not unify_into(bindings, eq.lhs, eq.rhs):
                raise GrammarFailure(f"semantic rules fail on the tree {reading.choice}")
        out.add(canonical_form(_resolve(bindings, vars[start], {})))
    return out


@dataclass
class EquivResult:
    missing: Set[Term]
    extra: Set[Term]
    packed_count: int
    oracle_count: int

    @property
    def equal(self) -> bool:
        return not self.missing and not self.extra

    def __bool__(self):
        return self.equal

    def __str__(self):
        if self.equal:
            return f"equal ({self.oracle_count} forms)"
        lines = [f"differ: {len(self.missing)} missing, {len(self.extra)} extra"]
        lines += [f"  missing {format_term(t)}" for t in sorted(self.missing, key=format_term)]
        lines += [f"  extra   {format_term(t)}" for t in sorted(self.extra, key=format_term)]
        return "\n".join(lines)


def equiv_check(p: PackedResult, oracle: Set[Term]) -> EquivResult:
    """Compare the packed result's readings with an oracle set (both as
    canonical root bindings)."""
    packed = {canonical_form(s.term) for s in enumerate_solutions(p)}
    return EquivResult(oracle - packed, packed - oracle, len(packed), len(oracle))


# ---------------------------------------------------------------------------
# export

def solutions_text(solutions: Sequence[Solution]) -> str:
    blocks = []
    for s in solutions:
        blocks.append("\n".join(f"{format_term(v)} = {format_term(t)}"
                                for v, t in s.binding.binding.items()) or "true")
    return "\n\n".join(blocks) + "\n"


def solutions_json(solutions: Sequence[Solution]) -> str:
    return json.dumps([
        {"bindings": {format_term(v): format_term(t) for v, t in s.binding.binding.items()},
         "choices": {repr(n): k for n, k in s.choices.items()}}
        for s in solutions], indent=1)

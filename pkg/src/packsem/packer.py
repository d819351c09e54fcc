"""Packed semantics construction.

One bottom-up pass over the forest computes, for every node, a solved form
``SEM[node]`` (the information common to all of the node's readings) and a
``D[node]`` that is either ``true`` or a name whose definition in the
environment holds the remaining, disjunctive information::

    leaf            SEM := leaf constraint                 D := true
    AND(n1, n2)     SEM := solve(rule & SEM[n1] & SEM[n2])
                    D   := the non-true child D, or a new name N with
                           N := D[n1] & D[n2]
    OR(n1, ..., nk) (GEN, REM1..REMk) := generalise(SEM[n1], ..., SEM[nk])
                    SEM := GEN
                    D   := new name N with N := REM1 & D[n1] | ... | REMk & D[nk]

The result ``SEM[root] & D[root] & ENV`` is equivalent to the disjunction of
the semantics of all trees in the forest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set

from .constraint import (
    TRUE, Constraint, Env, Eq, Name, SolvedForm, Use, UndefinedName, conjoin,
    constraint_vars, disjoin, disjuncts, expand, format_constraint, format_env,
    generalise_n, parse_constraint, parse_env, solve, uses,
)
from .forest import And, Forest, Leaf, Or, bottom_up_order, readings_count
from .semgrammar import (
    NodeVarMap, SemGrammar, assign_vars, lexical_constants, leaf_constraint, rule_constraint,
)
from .term import App, Term, Var, VarSupply, canonical_form, format_term, term_size

__all__ = [
    "PackedResult", "PackWork", "PackFailure", "InvariantReport",
    "pack", "check_invariants", "dump_packed", "load_packed", "sem_to_dot",
]


class PackFailure(RuntimeError):
    """Solving a rule constraint failed. Packing needs every rule
    application to succeed, so this is reported as a grammar error."""

    def __init__(self, node: int, rule: str):
        super().__init__(
            f"semantic rule {rule} failed at node {node}; packing requires every "
            "rule application to succeed")
        self.node = node
        self.rule = rule


@dataclass
class PackWork:
    sem: List[Optional[SolvedForm]]
    d: List[Constraint]


@dataclass
class PackedResult:
    sem_root: SolvedForm
    d_root: Constraint
    env: Env
    vars: NodeVarMap = field(default_factory=dict)
    work: Optional[PackWork] = None
    generalise_calls: int = 0

    @property
    def root_var(self) -> Var:
        return self.sem_root.root


def pack(f: Forest, sem: SemGrammar, *, nary: bool = True,
         supply: Optional[VarSupply] = None) -> PackedResult:
    """Build the packed semantic representation of every reading of ``f``.

    ``nary=False`` generalises OR nodes with more than two children by a
    left fold of the binary operation instead of one n-ary pass.
    """
    supply = supply or VarSupply()
    vars = assign_vars(f, supply)
    consts = lexical_constants(f, sem)
    n = len(f.nodes)
    SEM: List[Optional[SolvedForm]] = [None] * n
    D: List[Constraint] = [TRUE] * n
    env = Env()
    names = itertools.count(1)
    # variables mentioned by some definition; their bindings must be kept
    relevant: Set[Var] = set()
    gen_calls = 0

    for i in bottom_up_order(f):
        node = f.nodes[i]
        if isinstance(node, Leaf):
            SEM[i] = leaf_constraint(i, vars, f, sem, supply, consts)
            D[i] = TRUE
        elif isinstance(node, And):
            merged: Dict[Var, Term] = {}
            for c in node.children:
                merged.update(SEM[c].binding)
            eqs = rule_constraint(i, vars, f, sem, supply)
            s = solve(eqs, SolvedForm(vars[i], merged), keep=relevant)
            if s is None:
                raise PackFailure(i, node.rule)
            SEM[i] = s
            ds = [D[c] for c in node.children if D[c] is not TRUE]
            if not ds:
                D[i] = TRUE
            elif len(ds) == 1:
                D[i] = ds[0]
            else:
                name = Name(next(names))
                env.push(name, conjoin(ds))
                D[i] = Use(name)
        else:
            forms = [SEM[c] for c in node.children]
            gen, rems = generalise_n(forms, supply, fold=not nary)
            gen_calls += 1 if nary else len(forms) - 1
            for r in rems:
                relevant.update(constraint_vars(r))
            SEM[i] = gen
            name = Name(next(names))
            env.push(name, disjoin(conjoin([r, D[c]]) for r, c in zip(rems, node.children)))
            D[i] = Use(name)

    return PackedResult(SEM[f.root], D[f.root], env, vars, PackWork(SEM, D), gen_calls)


# ---------------------------------------------------------------------------
# invariants

@dataclass
class InvariantReport:
    names: List[str] = field(default_factory=list)
    equivalence: List[str] = field(default_factory=list)
    size: List[str] = field(default_factory=list)
    checked_nodes: int = 0
    skipped_nodes: int = 0

    @property
    def ok(self) -> bool:
        return not (self.names or self.equivalence or self.size)

    def __str__(self):
        lines = [f"names:       {'ok' if not self.names else len(self.names)}",
                 f"equivalence: {'ok' if not self.equivalence else len(self.equivalence)}",
                 f"size:        {'ok' if not self.size else len(self.size)}",
                 f"nodes checked {self.checked_nodes}, skipped {self.skipped_nodes}"]
        lines += self.names + self.equivalence + self.size
        return "\n".join(lines)


def _name_violations(p: PackedResult) -> List[str]:
    out = []
    seen: Set[Name] = set()
    for name, c in p.env:
        if name in seen:
            out.append(f"{name!r} defined twice")
        for u in uses(c):
            if u not in seen:
                out.append(f"{u!r} used in {name!r} before any definition")
        seen.add(name)
    roots = [p.d_root] + (list(p.work.d) if p.work else [])
    for c in roots:
        for u in uses(c):
            if u not in seen:
                out.append(f"{u!r} used but never defined")
    return sorted(set(out))


def _expanded_forms(sem_node: SolvedForm, d: Constraint, env: Env) -> Set[Term]:
    out = set()
    for eqs in disjuncts(expand(d, env)):
        s = solve(eqs, sem_node)
        if s is not None:
            out.add(canonical_form(s.term))
    return out


def check_invariants(p: PackedResult, f: Forest, sem: SemGrammar,
                     bound: int = 100) -> InvariantReport:
    """Check unique definitions, per-node equivalence with the per-tree
    semantics, and that no SEM entry is larger than the smallest single-tree
    semantics at that node. The last two are checked at nodes whose
    subforest has at most ``bound`` readings."""
    from .unfolder import oracle_per_tree

    report = InvariantReport()
    report.names = _name_violations(p)
    if p.work is None:
        return report
    for i in bottom_up_order(f):
        if readings_count(f, i) > bound:
            report.skipped_nodes += 1
            continue
        report.checked_nodes += 1
        oracle = oracle_per_tree(f, sem, bound=bound, node=i)
        try:
            packed = _expanded_forms(p.work.sem[i], p.work.d[i], p.env)
        except UndefinedName as e:
            report.equivalence.append(f"node {i}: {e}")
            continue
        if packed != oracle:
            report.equivalence.append(
                f"node {i}: {len(oracle - packed)} tree semantics missing, "
                f"{len(packed - oracle)} spurious")
        smallest = min(term_size(t) for t in oracle)
        size = term_size(p.work.sem[i].term)
        if size > smallest:
            report.size.append(f"node {i}: SEM size {size} > smallest tree semantics {smallest}")
    return report


# ---------------------------------------------------------------------------
# output

def dump_packed(p: PackedResult) -> str:
    """Text dump: the conjunctive part, the D[root] goal and the environment."""
    lines = ["% SEM[root]"]
    if p.sem_root.binding:
        for v, t in p.sem_root.binding.items():
            lines.append(f"{format_term(v)} = {format_term(t)}")
    else:
        lines.append("true")
    lines += ["% D[root]", format_constraint(p.d_root), "% ENV"]
    if len(p.env):
        lines.append(format_env(p.env))
    return "\n".join(lines) + "\n"


def load_packed(text: str) -> PackedResult:
    """Inverse of ``dump_packed``, up to variable identity: variables come
    back as named variables."""
    sections: Dict[str, List[str]] = {}
    current = None
    for line in text.splitlines():
        if line.startswith("% "):
            current = line[2:].strip()
            sections[current] = []
        elif line.strip() and current is not None:
            sections[current].append(line)
    names: Dict[str, Var] = {}
    binding: Dict[Var, Term] = {}
    root = None
    for line in sections.get("SEM[root]", []):
        c = parse_constraint(line, names)
        if isinstance(c, Eq):
            binding[c.lhs] = c.rhs
            if root is None:
                root = c.lhs
    d_lines = sections.get("D[root]", ["true"])
    d_root = parse_constraint(" ".join(d_lines), names)
    env = parse_env("\n".join(sections.get("ENV", [])), names)
    return PackedResult(SolvedForm(root, binding), d_root, env)


def sem_to_dot(p: PackedResult) -> str:
    """Graphviz drawing of the conjunctive part as a term graph with
    structure sharing; variables are drawn as boxes."""
    lines = ["digraph sem {", "  node [fontsize=10];"]
    ids: Dict[int, str] = {}
    by_key: Dict[Term, str] = {}

    def visit(t: Term) -> str:
        hit = by_key.get(t)
        if hit is not None:
            return hit
        nid = f"t{len(by_key)}"
        by_key[t] = nid
        if isinstance(t, Var):
            lines.append(f"  {nid} [shape=box, label=\"{format_term(t)}\"];")
            return nid
        lines.append(f"  {nid} [shape=ellipse, label=\"{t.functor}\"];")
        for k, a in enumerate(t.args):
            lines.append(f"  {nid} -> {visit(a)} [label=\"{k + 1}\"];")
        return nid

    if p.sem_root.root is not None:
        lines.append(f"  root [shape=plaintext, label=\"{format_term(p.sem_root.root)}\"];")
        lines.append(f"  root -> {visit(p.sem_root.term)};")
    lines.append("}")
    return "\n".join(lines) + "\n"

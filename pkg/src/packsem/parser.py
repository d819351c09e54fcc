"""CKY construction of maximally shared parse forests.

Rules have one or two right-hand-side categories. Every (category, span)
cell with two or more derivations becomes one OR node; a cell with a
single derivation is represented by that derivation's node directly.
"""

from __future__ import annotations

import logging
import sys
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .forest import And, Forest, Leaf, Node, Or

__all__ = ["Rule", "BackboneGrammar", "GrammarError", "NoParse", "UnknownToken",
           "parse", "pp_sentence"]

log = logging.getLogger(__name__)


class GrammarError(ValueError):
    pass


class NoParse(ValueError):
    pass


class UnknownToken(ValueError):
    def __init__(self, token: str, position: int):
        super().__init__(f"unknown token {token!r} at position {position}")
        self.token = token
        self.position = position


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: Tuple[str, ...]
    id: str

    def __str__(self):
        return f"{self.lhs} -> {' '.join(self.rhs)}"


@dataclass
class BackboneGrammar:
    rules: List[Rule]
    lexicon: Dict[str, List[Tuple[str, str]]]   # token -> [(category, lexeme id)]
    start: str
    _by_id: Dict[str, Rule] = field(init=False, repr=False)

    def __post_init__(self):
        self._by_id = {}
        for r in self.rules:
            if r.id in self._by_id:
                raise GrammarError(f"duplicate rule id {r.id!r}")
            if not 1 <= len(r.rhs) <= 2:
                raise GrammarError(
                    f"rule {r.id} ({r}) has {len(r.rhs)} right-hand-side categories; "
                    "only unary and binary rules are supported, binarize the grammar")
            self._by_id[r.id] = r
        self._check_unary_cycles()
        self._warn_useless()

    def rule(self, rule_id: str) -> Optional[Rule]:
        return self._by_id.get(rule_id)

    def has_lexeme(self, token: str, cat: str) -> bool:
        return any(c == cat for c, _ in self.lexicon.get(token, ()))

    def _check_unary_cycles(self):
        graph: Dict[str, List[str]] = {}
        for r in self.rules:
            if len(r.rhs) == 1:
                graph.setdefault(r.lhs, []).append(r.rhs[0])
        state: Dict[str, int] = {}

        def visit(c, path):
            state[c] = 1
            for d in graph.get(c, ()):
                if state.get(d) == 1:
                    raise GrammarError(f"unary cycle: {' -> '.join(path + [c, d])}")
                if d not in state:
                    visit(d, path + [c])
            state[c] = 2

        for c in list(graph):
            if c not in state:
                visit(c, [])

    def _warn_useless(self):
        lexcats = {c for entries in self.lexicon.values() for c, _ in entries}
        productive = set(lexcats)
        changed = True
        while changed:
            changed = False
            for r in self.rules:
                if r.lhs not in productive and all(c in productive for c in r.rhs):
                    productive.add(r.lhs)
                    changed = True
        reachable = {self.start}
        changed = True
        while changed:
            changed = False
            for r in self.rules:
                if r.lhs in reachable:
                    for c in r.rhs:
                        if c not in reachable:
                            reachable.add(c)
                            changed = True
        cats = lexcats | {r.lhs for r in self.rules} | {c for r in self.rules for c in r.rhs}
        for c in sorted(cats):
            if c not in productive:
                log.warning("category %s is not productive", c)
            if c not in reachable:
                log.warning("category %s is not reachable from %s", c, self.start)


Cell = Tuple[str, int, int]


def parse(tokens: Sequence[str], g: BackboneGrammar) -> Forest:
    """Parse ``tokens`` into a shared packed forest containing exactly the
    parse trees of the CKY chart rooted in the start category."""
    n = len(tokens)
    if n == 0:
        raise NoParse("empty input")
    binary: Dict[Tuple[str, str], List[Rule]] = {}
    unary: Dict[str, List[Rule]] = {}
    for r in g.rules:
        if len(r.rhs) == 2:
            binary.setdefault(r.rhs, []).append(r)
        else:
            unary.setdefault(r.rhs[0], []).append(r)

    # chart[(i, j)][cat] -> derivations; ("lex", cat, lexeme) or ("rule", rule, cells)
    chart: Dict[Tuple[int, int], Dict[str, list]] = {}

    def close_unary(cell: Dict[str, list], i, j):
        agenda = list(cell)
        while agenda:
            b = agenda.pop()
            for r in unary.get(b, ()):
                derivs = cell.setdefault(r.lhs, [])
                d = ("rule", r, ((b, i, j),))
                if d not in derivs:
                    fresh = not derivs
                    derivs.append(d)
                    if fresh:
                        agenda.append(r.lhs)

    for i, tok in enumerate(tokens):
        entries = g.lexicon.get(tok)
        if not entries:
            raise UnknownToken(tok, i)
        cell: Dict[str, list] = {}
        for cat, lexeme in entries:
            cell.setdefault(cat, []).append(("lex", tok, lexeme))
        close_unary(cell, i, i + 1)
        chart[(i, i + 1)] = cell

    for width in range(2, n + 1):
        for i in range(0, n - width + 1):
            j = i + width
            cell = {}
            for k in range(i + 1, j):
                left = chart[(i, k)]
                right = chart[(k, j)]
                if not left or not right:
                    continue
                for b in left:
                    for c in right:
                        for r in binary.get((b, c), ()):
                            cell.setdefault(r.lhs, []).append(("rule", r, ((b, i, k), (c, k, j))))
            close_unary(cell, i, j)
            chart[(i, j)] = cell

    if g.start not in chart[(0, n)]:
        raise NoParse(f"no {g.start} spanning the input")

    nodes: List[Node] = []
    cell_node: Dict[Cell, int] = {}

    def build(cell: Cell) -> int:
        hit = cell_node.get(cell)
        if hit is not None:
            return hit
        cat, i, j = cell
        ids = []
        for d in chart[(i, j)][cat]:
            if d[0] == "lex":
                nodes.append(Leaf(cat, d[1], (i, j), d[2]))
            else:
                kids = tuple(build(c) for c in d[2])
                nodes.append(And(cat, d[1].id, kids, (i, j)))
            ids.append(len(nodes) - 1)
        if len(ids) == 1:
            out = ids[0]
        else:
            nodes.append(Or(cat, tuple(ids), (i, j)))
            out = len(nodes) - 1
        cell_node[cell] = out
        return out

    root = _with_recursion_room(build, (g.start, 0, n))
    return Forest(tuple(nodes), root)


def _with_recursion_room(build, cell):
    # recursion depth grows with sentence length
    limit = sys.getrecursionlimit()
    try:
        sys.setrecursionlimit(max(limit, 10000))
        return build(cell)
    finally:
        sys.setrecursionlimit(limit)


def pp_sentence(n: int) -> List[str]:
    """"i saw a man" followed by ``n`` copies of "on a hill"."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return ["i", "saw", "a", "man"] + ["on", "a", "hill"] * n

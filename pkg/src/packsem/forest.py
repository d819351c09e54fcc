"""Shared packed parse forests: rooted AND-OR DAGs over parse nodes.

Node ids are dense integers indexing ``Forest.nodes``. OR nodes carry the
category of their children for convenience; the children themselves are
AND nodes or leaves, never OR nodes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

__all__ = [
    "Leaf", "And", "Or", "Node", "Forest", "Reading", "Violation",
    "validate", "bottom_up_order", "readings_count", "enumerate_readings",
    "reading_nodes", "must_occur", "node_counts", "CycleError",
    "forest_to_json", "forest_from_json", "forest_to_dot", "ForestFormatError",
]

Span = Tuple[int, int]


@dataclass(frozen=True)
class Leaf:
    cat: str
    token: str
    span: Span
    lexeme: Optional[str] = None

    @property
    def children(self) -> Tuple[int, ...]:
        return ()


@dataclass(frozen=True)
class And:
    cat: str
    rule: str
    children: Tuple[int, ...]
    span: Span


@dataclass(frozen=True)
class Or:
    cat: str
    children: Tuple[int, ...]
    span: Span


Node = Union[Leaf, And, Or]


@dataclass(frozen=True)
class Forest:
    nodes: Tuple[Node, ...]
    root: int

    def __len__(self):
        return len(self.nodes)

    def __getitem__(self, i: int) -> Node:
        return self.nodes[i]

    def parents(self) -> List[List[int]]:
        out: List[List[int]] = [[] for _ in self.nodes]
        for i, node in enumerate(self.nodes):
            for c in node.children:
                out[c].append(i)
        return out

    @property
    def tokens(self) -> List[str]:
        leaves = sorted((n.span[0], n.token) for n in self.nodes if isinstance(n, Leaf))
        seen: Dict[int, str] = {}
        for pos, tok in leaves:
            seen.setdefault(pos, tok)
        return [seen[k] for k in sorted(seen)]


@dataclass(frozen=True)
class Reading:
    """One tree of the forest, given by the child chosen at every OR node
    that is reachable under these very choices."""

    choice: Dict[int, int] = field(default_factory=dict)

    def __hash__(self):
        return hash(frozenset(self.choice.items()))


@dataclass(frozen=True)
class Violation:
    kind: str
    node: Optional[int]
    message: str

    def __str__(self):
        where = f"node {self.node}: " if self.node is not None else ""
        return f"[{self.kind}] {where}{self.message}"


class CycleError(ValueError):
    pass


def _yield(f: Forest, i: int, memo: Dict[int, Tuple[str, ...]]):
    hit = memo.get(i)
    if hit is not None:
        return hit
    node = f.nodes[i]
    if isinstance(node, Leaf):
        out = (node.token,)
    elif isinstance(node, Or):
        out = _yield(f, node.children[0], memo) if node.children else ()
    else:
        out = sum((_yield(f, c, memo) for c in node.children), ())
    memo[i] = out
    return out


def validate(f: Forest, g=None) -> List[Violation]:
    """Check structural well-formedness and, given a backbone grammar,
    that every AND node instantiates one of its rules. Returns the list of
    violations (empty when the forest is fine)."""
    out: List[Violation] = []
    n = len(f.nodes)
    if not 0 <= f.root < n:
        return [Violation("root", None, f"root id {f.root} out of range")]
    for i, node in enumerate(f.nodes):
        for c in node.children:
            if not 0 <= c < n:
                out.append(Violation("dangling", i, f"child id {c} out of range"))
    if out:
        return out
    try:
        order = bottom_up_order(f)
    except CycleError as e:
        return [Violation("cycle", None, str(e))]
    reachable = set(order)
    for i in range(n):
        if i not in reachable:
            out.append(Violation("unreachable", i, "node not reachable from root"))

    yields: Dict[int, Tuple[str, ...]] = {}
    for i in order:
        node = f.nodes[i]
        if isinstance(node, Leaf):
            if node.span[1] - node.span[0] != 1:
                out.append(Violation("span", i, f"leaf span {node.span} is not one token"))
            if g is not None and not g.has_lexeme(node.token, node.cat):
                out.append(Violation("lexicon", i, f"{node.token!r} is not a {node.cat}"))
            continue
        kids = [f.nodes[c] for c in node.children]
        if not kids:
            out.append(Violation("arity", i, "inner node without children"))
            continue
        if isinstance(node, Or):
            if len(kids) < 2:
                out.append(Violation("arity", i, "OR node with fewer than two children"))
            for c, k in zip(node.children, kids):
                if isinstance(k, Or):
                    out.append(Violation("or-child", i, f"child {c} is an OR node"))
                if k.cat != node.cat:
                    out.append(Violation("condition-1", i,
                                         f"child {c} has category {k.cat}, expected {node.cat}"))
                if tuple(k.span) != tuple(node.span):
                    out.append(Violation("condition-1", i,
                                         f"child {c} spans {k.span}, expected {node.span}"))
            ys = {_yield(f, c, yields) for c in node.children}
            if len(ys) > 1:
                out.append(Violation("condition-1", i, "OR children differ in terminal yield"))
            if len(set(node.children)) != len(node.children):
                out.append(Violation("condition-1", i, "duplicate OR children"))
        else:
            start = node.span[0]
            for c, k in zip(node.children, kids):
                if k.span[0] != start:
                    out.append(Violation("span", i, f"child {c} span {k.span} does not continue at {start}"))
                start = k.span[1]
            if start != node.span[1]:
                out.append(Violation("span", i, f"children end at {start}, node ends at {node.span[1]}"))
            if g is not None:
                rule = g.rule(node.rule)
                if rule is None:
                    out.append(Violation("condition-2", i, f"unknown rule {node.rule!r}"))
                elif rule.lhs != node.cat or tuple(rule.rhs) != tuple(k.cat for k in kids):
                    out.append(Violation("condition-2", i,
                                         f"{node.cat} -> {' '.join(k.cat for k in kids)} "
                                         f"does not match rule {node.rule}"))
    if g is not None and f.nodes[f.root].cat != g.start:
        out.append(Violation("condition-2", f.root,
                             f"root category {f.nodes[f.root].cat} is not {g.start}"))
    # AND nodes with equal label and yield must hang under one OR node
    groups: Dict[Tuple[str, Span], List[int]] = {}
    or_of: Dict[int, int] = {}
    for i in order:
        node = f.nodes[i]
        if isinstance(node, Or):
            for c in node.children:
                or_of[c] = i
        elif isinstance(node, And):
            groups.setdefault((node.cat, tuple(node.span)), []).append(i)
    for (cat, span), members in groups.items():
        owners = {or_of.get(m) for m in members}
        if len(members) > 1 and (None in owners or len(owners) > 1):
            out.append(Violation("condition-1", members[0],
                                 f"AND nodes {members} share label {cat} and span {span} "
                                 "but are not children of one OR node"))
    return out


def bottom_up_order(f: Forest) -> List[int]:
    """Nodes reachable from the root, every node after all its children."""
    order: List[int] = []
    state: Dict[int, int] = {}  # 1 = on stack, 2 = done
    stack: List[Tuple[int, int]] = [(f.root, 0)]
    state[f.root] = 1
    while stack:
        i, k = stack[-1]
        kids = f.nodes[i].children
        if k < len(kids):
            stack[-1] = (i, k + 1)
            c = kids[k]
            s = state.get(c)
            if s == 1:
                raise CycleError(f"cycle through node {c}")
            if s is None:
                state[c] = 1
                stack.append((c, 0))
        else:
            stack.pop()
            state[i] = 2
            order.append(i)
    return order


def readings_count(f: Forest, node: Optional[int] = None) -> int:
    """Number of trees: product over AND children, sum over OR children."""
    counts: Dict[int, int] = {}
    for i in bottom_up_order(f if node is None else Forest(f.nodes, node)):
        n = f.nodes[i]
        if isinstance(n, Leaf):
            counts[i] = 1
        elif isinstance(n, Or):
            counts[i] = sum(counts[c] for c in n.children)
        else:
            counts[i] = reduce(lambda a, c: a * counts[c], n.children, 1)
    return counts[f.root if node is None else node]


def enumerate_readings(f: Forest, cap: Optional[int] = None,
                       node: Optional[int] = None) -> Iterator[Reading]:
    """Yield each reading of the (sub)forest once, at most ``cap`` of them."""
    start = f.root if node is None else node

    def walk(pending: Tuple[int, ...], choice: Dict[int, int]):
        if not pending:
            yield dict(choice)
            return
        i, rest = pending[0], pending[1:]
        n = f.nodes[i]
        if isinstance(n, Leaf):
            yield from walk(rest, choice)
        elif isinstance(n, And):
            yield from walk(tuple(n.children) + rest, choice)
        else:
            for c in n.children:
                choice[i] = c
                yield from walk((c,) + rest, choice)
            del choice[i]

    for k, choice in enumerate(walk((start,), {})):
        if cap is not None and k >= cap:
            return
        yield Reading(choice)


def reading_nodes(f: Forest, r: Reading, node: Optional[int] = None) -> List[int]:
    """Nodes of the tree selected by ``r`` (OR nodes included), top-down."""
    out = []
    stack = [f.root if node is None else node]
    while stack:
        i = stack.pop()
        out.append(i)
        n = f.nodes[i]
        if isinstance(n, Or):
            stack.append(r.choice[i])
        else:
            stack.extend(reversed(n.children))
    return out


def must_occur(f: Forest, node: Optional[int] = None) -> Union[FrozenSet[int], Dict[int, FrozenSet[int]]]:
    """Strict descendants present in every reading of a node's subforest.

    With ``node`` given, returns that node's set; otherwise a dict for all
    reachable nodes.
    """
    table: Dict[int, FrozenSet[int]] = {}
    for i in bottom_up_order(f if node is None else Forest(f.nodes, node)):
        n = f.nodes[i]
        if isinstance(n, Leaf):
            table[i] = frozenset()
        elif isinstance(n, And):
            acc = set()
            for c in n.children:
                acc.add(c)
                acc |= table[c]
            table[i] = frozenset(acc)
        else:
            sets = [table[c] | {c} for c in n.children]
            table[i] = frozenset.intersection(*sets)
    if node is not None:
        return table[node]
    return table


def node_counts(f: Forest) -> Tuple[int, int, int]:
    """(AND nodes, OR nodes, leaves) among the nodes reachable from the root."""
    a = o = l = 0
    for i in bottom_up_order(f):
        n = f.nodes[i]
        if isinstance(n, Leaf):
            l += 1
        elif isinstance(n, Or):
            o += 1
        else:
            a += 1
    return a, o, l


# ---------------------------------------------------------------------------
# serialisation

def forest_to_json(f: Forest) -> dict:
    nodes = []
    for i, n in enumerate(f.nodes):
        d = {"id": i, "span": list(n.span), "cat": n.cat}
        if isinstance(n, Leaf):
            d.update(kind="leaf", token=n.token, children=[])
            if n.lexeme is not None:
                d["lexeme"] = n.lexeme
        elif isinstance(n, And):
            d.update(kind="and", rule=n.rule, children=list(n.children))
        else:
            d.update(kind="or", children=list(n.children))
        nodes.append(d)
    return {"root": f.root, "nodes": nodes}


class ForestFormatError(ValueError):
    pass


def forest_from_json(data: Union[dict, str]) -> Forest:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        raw = sorted(data["nodes"], key=lambda d: d["id"])
        if [d["id"] for d in raw] != list(range(len(raw))):
            raise ForestFormatError("node ids must be 0..N-1")
        nodes: List[Node] = []
        for d in raw:
            span = tuple(d["span"])
            kind = d["kind"]
            if kind == "leaf":
                nodes.append(Leaf(d["cat"], d["token"], span, d.get("lexeme")))
            elif kind == "and":
                nodes.append(And(d["cat"], d["rule"], tuple(d["children"]), span))
            elif kind == "or":
                kids = tuple(d["children"])
                cat = d.get("cat")
                if cat is None and kids:
                    cat = raw[kids[0]]["cat"]
                nodes.append(Or(cat, kids, span))
            else:
                raise ForestFormatError(f"node {d['id']}: unknown kind {kind!r}")
        return Forest(tuple(nodes), int(data["root"]))
    except (KeyError, TypeError, IndexError) as e:
        raise ForestFormatError(f"malformed forest JSON: {e!r}") from None


def forest_to_dot(f: Forest) -> str:
    """Graphviz rendering; each OR node is a box (cluster) around its
    children, and parents point at the box."""
    lines = ["digraph forest {", "  compound=true;", "  node [shape=circle, fontsize=10];"]
    or_of: Dict[int, int] = {}
    order = bottom_up_order(f)
    for i in order:
        n = f.nodes[i]
        if isinstance(n, Or):
            for c in n.children:
                or_of[c] = i
    for i in order:
        n = f.nodes[i]
        if isinstance(n, Or):
            lines.append(f"  subgraph cluster_{i} {{ label=\"{i}\"; style=solid;")
            for c in n.children:
                lines.append(f"    n{c};")
            lines.append(f"    or{i} [shape=point, style=invis];")
            lines.append("  }")
        elif isinstance(n, Leaf):
            lines.append(f"  n{i} [shape=plaintext, label=\"{n.token}\\n{i}\"];")
        else:
            lines.append(f"  n{i} [label=\"{n.cat}\\n{i}\"];")
    for i in order:
        n = f.nodes[i]
        if isinstance(n, Or):
            continue
        for c in n.children:
            if isinstance(f.nodes[c], Or):
                lines.append(f"  n{i} -> or{c} [lhead=cluster_{c}];")
            else:
                lines.append(f"  n{i} -> n{c};")
    lines.append("}")
    return "\n".join(lines) + "\n"

"""Semantic construction rules attached to a context-free backbone.

A grammar file has one entry per line::

    start S
    S -> NP VP : [[E,VL,DL,TL],Di,Do], [[X,VL,DL,TL],Di,D1], [[E,X,VL,DL,TL],D1,Do]
    lex saw : V : [[$e,X,Y,$l,TL],[ref($l,$e),cond($l,see($e,X,Y)),lt($l,TL)|Do],Do]

The patterns after a rule give the mother's semantic term followed by one
term per child; variables are shared across them (DCG style). Lexical
patterns describe the leaf's term. ``$name`` atoms stand for numbered
constants (``$l`` -> l1, l2, ...; ``$x`` -> x1, ...) handed out to leaves in
left-to-right order, one per distinct ``$name`` per leaf. ``%`` starts a
comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .constraint import Eq, SolvedForm
from .forest import And, Forest, Leaf, Or
from .parser import BackboneGrammar, GrammarError, Rule
from .term import App, Term, TermSyntaxError, Var, VarSupply, apply, list_items, parse_terms

__all__ = [
    "RuleTemplate", "LeafTemplate", "SemGrammar", "NodeVarMap", "MissingTemplate",
    "load_grammar", "parse_grammar", "demo_grammar", "resolve_grammar", "DEMO_GRAMMAR_PATH",
    "BUNDLED_GRAMMARS",
    "assign_vars", "lexical_constants", "leaf_constraint", "rule_constraint",
    "udrs_items", "pp_attachment_slots",
]

NodeVarMap = Dict[int, Var]


class MissingTemplate(KeyError):
    pass


@dataclass(frozen=True)
class RuleTemplate:
    rule_id: str
    mother: Term
    children: Tuple[Term, ...]


@dataclass(frozen=True)
class LeafTemplate:
    lexeme_id: str
    pattern: Term


@dataclass
class SemGrammar:
    backbone: BackboneGrammar
    rules: Dict[str, RuleTemplate] = field(default_factory=dict)
    leaves: Dict[str, LeafTemplate] = field(default_factory=dict)
    source: Optional[str] = None


_RULE = re.compile(r"^(?P<lhs>\S+)\s*->\s*(?P<rhs>[^:]*?)\s*(?::\s*(?P<sem>.*))?$")
_LEX = re.compile(r"^lex\s+(?P<tok>\S+)\s*:\s*(?P<cat>\S+)\s*(?::\s*(?P<sem>.*))?$")


def parse_grammar(text: str, source: Optional[str] = None) -> SemGrammar:
    rules: List[Rule] = []
    rule_templates: Dict[str, RuleTemplate] = {}
    lexicon: Dict[str, List[Tuple[str, str]]] = {}
    leaf_templates: Dict[str, LeafTemplate] = {}
    start = None
    where = source or "<grammar>"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("start "):
                start = line.split()[1]
                continue
            m = _LEX.match(line)
            if m:
                tok, cat = m["tok"], m["cat"]
                entries = lexicon.setdefault(tok, [])
                lex_id = f"{tok}/{cat}" + (f"/{len(entries)}" if entries else "")
                entries.append((cat, lex_id))
                if m["sem"]:
                    (pat,) = parse_terms(m["sem"])
                    leaf_templates[lex_id] = LeafTemplate(lex_id, pat)
                continue
            m = _RULE.match(line)
            if m:
                rhs = tuple(m["rhs"].split())
                rid = f"r{len(rules) + 1}"
                rules.append(Rule(m["lhs"], rhs, rid))
                if m["sem"]:
                    pats = parse_terms(m["sem"])
                    if len(pats) != 1 + len(rhs):
                        raise GrammarError(
                            f"rule {m['lhs']} -> {' '.join(rhs)} needs {1 + len(rhs)} "
                            f"semantic patterns, got {len(pats)}")
                    rule_templates[rid] = RuleTemplate(rid, pats[0], tuple(pats[1:]))
                continue
            raise GrammarError(f"cannot read line: {line!r}")
        except (GrammarError, TermSyntaxError, ValueError) as e:
            raise GrammarError(f"{where}:{lineno}: {e}") from None
    if not rules:
        raise GrammarError(f"{where}: no rules")
    backbone = BackboneGrammar(rules, lexicon, start or rules[0].lhs)
    return SemGrammar(backbone, rule_templates, leaf_templates, source)


def load_grammar(path: Union[str, Path]) -> SemGrammar:
    path = Path(path)
    return parse_grammar(path.read_text(), str(path))


DEMO_GRAMMAR_PATH = resources.files("packsem") / "data" / "demo.gr"
BUNDLED_GRAMMARS = ("demo", "demo-np")


def demo_grammar(name: str = "demo") -> SemGrammar:
    """A grammar shipped with the package: ``demo`` attaches PPs to nouns
    and clauses, ``demo-np`` to noun phrases and verb phrases."""
    if name not in BUNDLED_GRAMMARS:
        raise GrammarError(f"no bundled grammar {name!r}; choose from {BUNDLED_GRAMMARS}")
    path = resources.files("packsem") / "data" / f"{name}.gr"
    return parse_grammar(path.read_text(), f"{name}.gr")


def resolve_grammar(source: Union[str, Path]) -> SemGrammar:
    """Load a grammar file, or a bundled grammar by name."""
    if str(source) in BUNDLED_GRAMMARS and not Path(source).exists():
        return demo_grammar(str(source))
    return load_grammar(source)


# ---------------------------------------------------------------------------
# instantiation

def assign_vars(f: Forest, supply: VarSupply) -> NodeVarMap:
    """One variable per node, except that an OR node and all its children
    share a single variable."""
    out: NodeVarMap = {}
    for i, node in enumerate(f.nodes):
        if isinstance(node, Or):
            v = out.get(i)
            if v is None:
                v = out[i] = supply.fresh()
            for c in node.children:
                out[c] = v
    for i in range(len(f.nodes)):
        if i not in out:
            out[i] = supply.fresh()
    return out


def _generated_atoms(t: Term, acc: List[str]):
    if isinstance(t, App):
        if not t.args and t.functor.startswith("$"):
            if t.functor not in acc:
                acc.append(t.functor)
        for a in t.args:
            _generated_atoms(a, acc)


def lexical_constants(f: Forest, sem: SemGrammar) -> Dict[int, Dict[str, App]]:
    """Numbered constants for every leaf, assigned in token order."""
    counters: Dict[str, int] = {}
    out: Dict[int, Dict[str, App]] = {}
    leaves = sorted((n.span[0], i) for i, n in enumerate(f.nodes) if isinstance(n, Leaf))
    for _, i in leaves:
        tmpl = _leaf_template(sem, f.nodes[i])
        consts: Dict[str, App] = {}
        if tmpl is not None:
            atoms: List[str] = []
            _generated_atoms(tmpl.pattern, atoms)
            for a in atoms:
                kind = re.match(r"\$([a-z]*)", a).group(1) or "c"
                counters[kind] = counters.get(kind, 0) + 1
                consts[a] = App(f"{kind}{counters[kind]}")
        out[i] = consts
    return out


def _leaf_template(sem: SemGrammar, node: Leaf) -> Optional[LeafTemplate]:
    if node.lexeme is not None:
        return sem.leaves.get(node.lexeme)
    for cat, lex_id in sem.backbone.lexicon.get(node.token, ()):
        if cat == node.cat:
            return sem.leaves.get(lex_id)
    return None


def _substitute_atoms(t: Term, consts: Mapping[str, App]) -> Term:
    if isinstance(t, Var) or not consts:
        return t
    if not t.args:
        return consts.get(t.functor, t)
    return App(t.functor, [_substitute_atoms(a, consts) for a in t.args])


def leaf_constraint(leaf: int, vars: NodeVarMap, f: Forest, sem: SemGrammar,
                    supply: VarSupply, constants: Dict[int, Dict[str, App]]) -> SolvedForm:
    """The leaf's semantics as a solved form on its node variable, with
    fresh copies of the template's local variables."""
    node = f.nodes[leaf]
    tmpl = _leaf_template(sem, node)
    if tmpl is None:
        raise MissingTemplate(f"no semantic entry for {node.token!r} as {node.cat}")
    term = supply.rename(_substitute_atoms(tmpl.pattern, constants.get(leaf, {})))
    return SolvedForm(vars[leaf], {vars[leaf]: term})


def rule_constraint(node_id: int, vars: NodeVarMap, f: Forest, sem: SemGrammar,
                    supply: VarSupply) -> List[Eq]:
    """Equations tying the node's variable and its children's variables to
    one freshly renamed copy of the rule template."""
    node = f.nodes[node_id]
    if not isinstance(node, And):
        raise TypeError(f"node {node_id} is not an AND node")
    tmpl = sem.rules.get(node.rule)
    if tmpl is None:
        raise MissingTemplate(f"no semantic rule for {node.rule} ({node.cat})")
    if len(tmpl.children) != len(node.children):
        raise MissingTemplate(f"template for {node.rule} has wrong arity")
    renaming: Dict[Var, Var] = {}
    eqs = [Eq(vars[node_id], supply.rename(tmpl.mother, renaming))]
    for c, pat in zip(node.children, tmpl.children):
        eqs.append(Eq(vars[c], supply.rename(pat, renaming)))
    return eqs


# ---------------------------------------------------------------------------
# demo UDRS helpers

def udrs_items(sem_term: Term) -> List[Term]:
    """Items of the UDRS difference list ``[Roles, In, Out]`` up to ``Out``."""
    items, _ = list_items(sem_term)
    if len(items) != 3:
        raise ValueError("expected a [Roles, In, Out] semantic term")
    udrs, tail = list_items(items[1])
    return udrs


def pp_attachment_slots(sem_term: Term) -> List[Tuple[Term, Term]]:
    """(label, referent) that each preposition attaches to, left to right.

    Prepositional conditions look like ``cond(P, on(R, Y))`` together with
    ``lt(P, A)``; the slot is ``(A, R)``.
    """
    items = udrs_items(sem_term)
    slots = []
    for it in items:
        if (isinstance(it, App) and it.functor == "cond" and len(it.args) == 2
                and isinstance(it.args[1], App) and it.args[1].functor == "on"):
            p, (r, _) = it.args[0], it.args[1].args
            above = [x.args[1] for x in items
                     if isinstance(x, App) and x.functor == "lt" and x.args[0] == p]
            slots.append((above[0] if above else None, r))
    return slots

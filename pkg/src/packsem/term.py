"""First-order terms, substitutions, unification and anti-unification.

Terms are immutable. ``Var`` is a variable, ``App`` a functor application
(zero arguments for constants). Substitutions are plain dicts mapping
``Var`` to ``Term``; the functions here keep them idempotent.

Textual syntax (for fixtures and debugging)::

    lt(L1, L2)   drs(in(I), out(O))   [a, b | T]   []

Lowercase-led identifiers are functors/constants, uppercase- or
underscore-led identifiers are variables.
"""

from __future__ import annotations

import itertools
import re
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

__all__ = [
    "Var", "App", "Term", "Substitution", "VarSupply",
    "const", "mklist", "list_items", "NIL",
    "unify", "apply", "compose", "anti_unify", "anti_unify_n",
    "canonical_form", "term_size", "term_vars", "occurs",
    "parse_term", "parse_terms", "format_term", "TermSyntaxError",
]


class Var:
    """A logic variable; identity is its ``id`` (an int for fresh
    variables, a string for named ones)."""

    __slots__ = ("id", "_hash")

    def __init__(self, id: Union[int, str]):
        self.id = id
        self._hash = hash(("V", id))

    def __eq__(self, other):
        return self is other or (isinstance(other, Var) and self.id == other.id)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return format_term(self)

    @property
    def ground(self) -> bool:
        return False

    @property
    def size(self) -> int:
        return 1


class App:
    """Functor application. Hash, size and groundness are cached."""

    __slots__ = ("functor", "args", "_hash", "size", "ground")

    def __init__(self, functor: str, args: Sequence["Term"] = ()):
        if not functor:
            raise ValueError("functor symbol must be nonempty")
        args = tuple(args)
        self.functor = functor
        self.args = args
        self._hash = hash((functor, len(args)) + tuple(a._hash for a in args))
        self.size = 1 + sum(a.size for a in args)
        self.ground = all(a.ground for a in args)

    @property
    def arity(self) -> int:
        return len(self.args)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, App) or self._hash != other._hash:
            return False
        if self.functor != other.functor or len(self.args) != len(other.args):
            return False
        return all(a == b for a, b in zip(self.args, other.args))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return format_term(self)


Term = Union[Var, App]
Substitution = Dict[Var, Term]

NIL = App("[]")
CONS = "."


def const(name: str) -> App:
    return App(name)


def mklist(items: Iterable[Term], tail: Term = NIL) -> Term:
    out = tail
    for item in reversed(list(items)):
        out = App(CONS, (item, out))
    return out


def list_items(t: Term) -> Tuple[List[Term], Term]:
    """Split a (possibly partial) list into its items and its tail."""
    items = []
    while isinstance(t, App) and t.functor == CONS and len(t.args) == 2:
        items.append(t.args[0])
        t = t.args[1]
    return items, t


class VarSupply:
    """Monotone source of fresh variables. Not thread-safe; use one per
    thread or guard it externally."""

    def __init__(self, start: int = 0):
        self._counter = itertools.count(start)

    def fresh(self) -> Var:
        return Var(next(self._counter))

    def rename(self, t: Term, mapping: Optional[Dict[Var, Var]] = None) -> Term:
        """Copy ``t`` with every variable replaced by a fresh one.
        ``mapping`` is filled in place so several terms can share a renaming."""
        if mapping is None:
            mapping = {}

        def walk(u):
            if isinstance(u, Var):
                v = mapping.get(u)
                if v is None:
                    v = mapping[u] = self.fresh()
                return v
            if u.ground:
                return u
            return App(u.functor, [walk(a) for a in u.args])

        return walk(t)


# ---------------------------------------------------------------------------
# substitution application

def apply(s: Substitution, t: Term) -> Term:
    """Apply an idempotent substitution. Unchanged subterms are returned
    as the same objects, so structure sharing survives."""
    if not s:
        return t
    memo: Dict[int, Term] = {}
    return _apply(s, t, memo)


def _apply(s, t, memo):
    if isinstance(t, Var):
        return s.get(t, t)
    if t.ground:
        return t
    key = id(t)
    hit = memo.get(key)
    if hit is not None:
        return hit
    args = t.args
    new = [_apply(s, a, memo) for a in args]
    if all(a is b for a, b in zip(args, new)):
        out = t
    else:
        out = App(t.functor, new)
    memo[key] = out
    return out


def _resolve(bindings, t, memo):
    """Fully dereference ``t`` through triangular ``bindings``."""
    if isinstance(t, Var):
        b = bindings.get(t)
        if b is None:
            return t
        key = ("v", t)
        hit = memo.get(key)
        if hit is not None:
            return hit
        out = _resolve(bindings, b, memo)
        memo[key] = out
        return out
    if t.ground:
        return t
    key = id(t)
    hit = memo.get(key)
    if hit is not None:
        return hit
    args = t.args
    new = [_resolve(bindings, a, memo) for a in args]
    if all(a is b for a, b in zip(args, new)):
        out = t
    else:
        out = App(t.functor, new)
    memo[key] = out
    return out


def compose(s1: Substitution, s2: Substitution) -> Substitution:
    """Substitution equivalent to applying ``s1`` first, then ``s2``."""
    out = {v: apply(s2, t) for v, t in s1.items()}
    for v, t in s2.items():
        out.setdefault(v, t)
    return {v: t for v, t in out.items() if t != v}


# ---------------------------------------------------------------------------
# unification

def _walk(bindings, t):
    while isinstance(t, Var):
        b = bindings.get(t)
        if b is None:
            return t
        t = b
    return t


def _occurs(bindings, v, t) -> bool:
    stack = [t]
    seen = set()
    while stack:
        u = _walk(bindings, stack.pop())
        if isinstance(u, Var):
            if u == v:
                return True
            continue
        if u.ground or id(u) in seen:
            continue
        seen.add(id(u))
        stack.extend(u.args)
    return False


def unify_into(bindings: Dict[Var, Term], t1: Term, t2: Term,
               trail: Optional[List[Var]] = None) -> bool:
    """Unify in place on triangular ``bindings`` (occurs check on).

    Returns False on clash. Variables bound here are appended to ``trail``
    when given, so callers can undo a failed or finished branch; on failure
    ``bindings`` may be partially extended unless undone via the trail.
    """
    stack = [(t1, t2)]
    while stack:
        a, b = stack.pop()
        a = _walk(bindings, a)
        b = _walk(bindings, b)
        if a is b:
            continue
        if isinstance(a, Var):
            if isinstance(b, Var) and a == b:
                continue
            if _occurs(bindings, a, b):
                return False
            bindings[a] = b
            if trail is not None:
                trail.append(a)
            continue
        if isinstance(b, Var):
            if _occurs(bindings, b, a):
                return False
            bindings[b] = a
            if trail is not None:
                trail.append(b)
            continue
        if a._hash == b._hash and a == b:
            continue
        if a.functor != b.functor or len(a.args) != len(b.args):
            return False
        stack.extend(zip(a.args, b.args))
    return True


def resolve_bindings(bindings: Dict[Var, Term],
                     keep: Optional[Iterable[Var]] = None) -> Substitution:
    """Turn triangular bindings into an idempotent substitution, optionally
    restricted to the variables in ``keep``."""
    memo: dict = {}
    domain = bindings.keys() if keep is None else [v for v in keep if v in bindings]
    out = {}
    for v in domain:
        t = _resolve(bindings, v, memo)
        if t != v:
            out[v] = t
    return out


def unify(t1: Term, t2: Term, seed: Optional[Substitution] = None) -> Optional[Substitution]:
    """Most general unifier of ``t1`` and ``t2`` extending ``seed``, or
    None when the terms do not unify."""
    bindings = dict(seed) if seed else {}
    if not unify_into(bindings, t1, t2):
        return None
    return resolve_bindings(bindings)


def occurs(v: Var, t: Term) -> bool:
    return _occurs({}, v, t)


# ---------------------------------------------------------------------------
# anti-unification

def anti_unify(t1: Term, t2: Term, supply: Optional[VarSupply] = None
               ) -> Tuple[Term, Substitution, Substitution]:
    """Least general generalisation of two terms.

    Returns ``(g, s1, s2)`` with ``apply(s1, g) == t1`` and
    ``apply(s2, g) == t2``. Equal disagreement pairs share one variable.
    """
    g, (s1, s2) = anti_unify_n([t1, t2], supply)
    return g, s1, s2


def anti_unify_n(ts: Sequence[Term], supply: Optional[VarSupply] = None
                 ) -> Tuple[Term, List[Substitution]]:
    """n-ary least general generalisation in one simultaneous traversal."""
    if not ts:
        raise ValueError("anti_unify_n needs at least one term")
    if supply is None:
        supply = VarSupply()
    ts = tuple(ts)
    k = len(ts)
    table: Dict[Tuple[Term, ...], Var] = {}
    subs: List[Substitution] = [{} for _ in range(k)]
    memo: Dict[Tuple[int, ...], Term] = {}

    def gen(us):
        first = us[0]
        if all(u is first for u in us[1:]):
            return first
        h = first._hash
        if all(u._hash == h for u in us[1:]) and all(u == first for u in us[1:]):
            return first
        key = tuple(map(id, us))
        hit = memo.get(key)
        if hit is not None:
            return hit
        if (isinstance(first, App)
                and all(isinstance(u, App) and u.functor == first.functor
                        and len(u.args) == len(first.args) for u in us[1:])):
            out = App(first.functor, [gen(col) for col in zip(*(u.args for u in us))])
        else:
            out = table.get(us)
            if out is None:
                out = table[us] = supply.fresh()
                for s, u in zip(subs, us):
                    s[out] = u
        memo[key] = out
        return out

    return gen(ts), subs


# ---------------------------------------------------------------------------
# inspection

def term_size(t: Term) -> int:
    return t.size


def term_vars(t: Term) -> List[Var]:
    """Variables of ``t`` in first-occurrence, depth-first order."""
    out: Dict[Var, None] = {}
    seen = set()

    def walk(u):
        if isinstance(u, Var):
            out.setdefault(u)
        elif not u.ground and id(u) not in seen:
            seen.add(id(u))
            for a in u.args:
                walk(a)

    walk(t)
    return list(out)


def canonical_form(t: Term) -> Term:
    """Rename variables to V0, V1, ... in first-occurrence order."""
    mapping = {v: Var(f"V{i}") for i, v in enumerate(term_vars(t))}
    return apply(mapping, t)


# ---------------------------------------------------------------------------
# textual syntax

class TermSyntaxError(ValueError):
    pass


_TOKEN = re.compile(r"""
    \s*(?:
      (?P<num>-?\d+)
    | (?P<var>[A-Z_][A-Za-z0-9_]*)
    | (?P<atom>\$?[a-z][A-Za-z0-9_]*|'[^']*')
    | (?P<punct>\[\]|[()\[\],|])
    )""", re.VERBOSE)


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise TermSyntaxError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        val = m.group(kind)
        if kind == "atom" and val.startswith("'"):
            val = val[1:-1]
        out.append((kind, val, m.start(kind)))
        pos = m.end()
    return out


class _TermReader:
    def __init__(self, tokens, text):
        self.tokens = tokens
        self.i = 0
        self.text = text
        self.names: Dict[str, Var] = {}

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def take(self, val=None):
        tok = self.peek()
        if tok[0] is None or (val is not None and tok[1] != val):
            raise TermSyntaxError(f"expected {val or 'token'} at {tok[2]} in {self.text!r}")
        self.i += 1
        return tok

    def var(self, name):
        v = self.names.get(name)
        if v is None:
            v = self.names[name] = Var(name)
        return v

    def term(self) -> Term:
        kind, val, pos = self.take()
        if kind == "var":
            return self.var(val)
        if kind in ("atom", "num"):
            if self.peek()[1] == "(":
                self.take("(")
                args = self.seq(")")
                return App(val, args)
            return App(val)
        if val == "[]":
            return NIL
        if val == "[":
            if self.peek()[1] == "]":
                self.take("]")
                return NIL
            items = [self.term()]
            while self.peek()[1] == ",":
                self.take(",")
                items.append(self.term())
            tail = NIL
            if self.peek()[1] == "|":
                self.take("|")
                tail = self.term()
            self.take("]")
            return mklist(items, tail)
        raise TermSyntaxError(f"unexpected {val!r} at {pos} in {self.text!r}")

    def seq(self, close):
        items = [self.term()]
        while self.peek()[1] == ",":
            self.take(",")
            items.append(self.term())
        self.take(close)
        return items


def parse_terms(text: str) -> List[Term]:
    """Parse a comma-separated sequence of terms. Variable names are shared
    across the whole sequence."""
    r = _TermReader(_tokenize(text), text)
    items = [r.term()]
    while r.peek()[1] == ",":
        r.take(",")
        items.append(r.term())
    if r.peek()[0] is not None:
        raise TermSyntaxError(f"trailing input at {r.peek()[2]} in {text!r}")
    return items


def parse_term(text: str) -> Term:
    (t,) = parse_terms(text)
    return t


def _fmt_atom(name: str) -> str:
    if re.fullmatch(r"\$?[a-z][A-Za-z0-9_]*|-?\d+|\[\]", name):
        return name
    return "'" + name + "'"


def format_term(t: Term) -> str:
    parts: List[str] = []
    _fmt(t, parts)
    return "".join(parts)


def _fmt(t, out):
    if isinstance(t, Var):
        out.append(t.id if isinstance(t.id, str) else f"_G{t.id}")
        return
    if t.functor == CONS and len(t.args) == 2:
        items, tail = list_items(t)
        out.append("[")
        for i, item in enumerate(items):
            if i:
                out.append(",")
            _fmt(item, out)
        if tail != NIL:
            out.append("|")
            _fmt(tail, out)
        out.append("]")
        return
    out.append(_fmt_atom(t.functor))
    if t.args:
        out.append("(")
        for i, a in enumerate(t.args):
            if i:
                out.append(",")
            _fmt(a, out)
        out.append(")")

"""Packed semantics construction over shared parse forests."""

from .forest import Forest, readings_count
from .packer import PackedResult, pack
from .parser import parse, pp_sentence
from .semgrammar import SemGrammar, demo_grammar, load_grammar
from .unfolder import enumerate_solutions, equiv_check, oracle_per_tree, query_bindings

__all__ = [
    "Forest", "PackedResult", "SemGrammar", "demo_grammar", "enumerate_solutions",
    "equiv_check", "load_grammar", "oracle_per_tree", "pack", "parse", "pp_sentence",
    "query_bindings", "readings_count",
]

"""Hierarchical pointed hypergraphs, rule rewriting, predicate evaluation
with backtracking, shape grammars, a textual language, and a CLI."""

from .graph import (ARG_LABEL, CALL, DCALL, FRAME, PLAIN, VARIABLE,
                    ArityMismatch, Edge, Graph, GraphError, Node, WrongKind,
                    copy_into, fresh_copy, isomorphic, validate)
from .subst import (Context, Substitution, expand_splats, instantiate, plug,
                    variables_of)
from .rules import (Match, Rule, apply, check_rule, enumerate_matches,
                    premise_union, rewrite)
from .engine import (Budget, EvalState, Outcome, check_visibility, disguise,
                     evaluate, undisguise)
from .shapes import (PI, Derivation, ParamSpec, ShapeGrammar, ShapeType,
                     Signature, check_program, monomorphize, parse)
from .program import ClassDecl, Predicate, Program
from .report import Finding, Report
from .dsl import (DuplicateDeclaration, ParseError, UnresolvedName, export_dot,
                  parse_graph, parse_program, parse_rule, print_graph)
from .cli import load_program, main, stdlib_program

__all__ = [
    "ARG_LABEL", "CALL", "DCALL", "FRAME", "PLAIN", "VARIABLE",
    "ArityMismatch", "Edge", "Graph", "GraphError", "Node", "WrongKind",
    "copy_into", "fresh_copy", "isomorphic", "validate",
    "Context", "Substitution", "expand_splats", "instantiate", "plug",
    "variables_of",
    "Match", "Rule", "apply", "check_rule", "enumerate_matches",
    "premise_union", "rewrite",
    "Budget", "EvalState", "Outcome", "check_visibility", "disguise",
    "evaluate", "undisguise",
    "PI", "Derivation", "ParamSpec", "ShapeGrammar", "ShapeType", "Signature",
    "check_program", "monomorphize", "parse",
    "ClassDecl", "Predicate", "Program",
    "Finding", "Report",
    "DuplicateDeclaration", "ParseError", "UnresolvedName", "export_dot",
    "parse_graph", "parse_program", "parse_rule", "print_graph",
    "load_program", "main", "stdlib_program",
]

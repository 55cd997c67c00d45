"""The program model: predicates, classes, signatures, shapes, named graphs."""
from __future__ import annotations

from typing import Optional

from .graph import Graph
from .rules import Rule
from .shapes import ParamSpec, ShapeGrammar, Signature

OTHERWISE = ("fail", "succeed", "raise")


class Predicate:
    def __init__(self, name: str, params: ParamSpec, rules: list[Rule],
                 otherwise: str = "fail", owner: Optional[str] = None,
                 visibility: str = "public"):
        if otherwise not in OTHERWISE:
            raise ValueError(f"unknown otherwise marker {otherwise!r}")
        self.name = name
        self.params = params
        self.rules = rules
        self.otherwise = otherwise
        self.owner = owner
        self.visibility = visibility

    def __repr__(self) -> str:
        return f"Predicate({self.name}, {len(self.rules)} rules, otherwise {self.otherwise})"


class ClassDecl:
    def __init__(self, name: str, content_type: Optional[str],
                 methods: dict[str, str]):
        self.name = name
        self.content_type = content_type
        self.methods = methods  # predicate name -> "public" | "private"

    def __repr__(self) -> str:
        return f"ClassDecl({self.name}, content={self.content_type}, methods={self.methods})"


class Program:
    def __init__(self) -> None:
        self.shapes = ShapeGrammar()
        self.classes: dict[str, ClassDecl] = {}
        self.predicates: dict[str, Predicate] = {}
        self.signatures: dict[str, Signature] = {}
        self.named_graphs: dict[str, Graph] = {}

    def signature_of(self, name: str) -> Optional[Signature]:
        """Explicit signature, or one derived from the predicate's header."""
        sig = self.signatures.get(name)
        if sig is not None:
            return sig
        pred = self.predicates.get(name)
        if pred is not None:
            return Signature(name, pred.params)
        return None

    def link(self) -> None:
        """Attach class ownership to predicates; classes win name conflicts."""
        for cls in self.classes.values():
            for m, vis in cls.methods.items():
                pred = self.predicates.get(m)
                if pred is not None:
                    pred.owner = cls.name
                    pred.visibility = vis

    def copy(self) -> "Program":
        """Shallow copy: fresh maps over the same declaration objects."""
        out = Program()
        out.shapes = self.shapes.copy()
        out.classes = dict(self.classes)
        out.predicates = dict(self.predicates)
        out.signatures = dict(self.signatures)
        out.named_graphs = dict(self.named_graphs)
        return out

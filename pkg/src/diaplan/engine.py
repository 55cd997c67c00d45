"""Predicate evaluation: chronological backtracking over rule and match
choices, conditional rules via premise splicing, otherwise fallbacks,
disguised calls, and class visibility checking.

Evaluating a goal builds a choice frame holding all (rule, match) candidates
against a host snapshot. Trying a conditional rule rewrites the host to
C[(A ⊕ R)σ] up front and queues the premise goals, a completion sentinel,
then the replacement goals; reaching the sentinel marks the rule applied.
Failures restore the most recent frame with remaining candidates. When a
frame runs out without ever applying, its predicate's otherwise fires.
"""
from __future__ import annotations

from collections import deque
from typing import Optional

from .graph import (ARG_LABEL, CALL, DCALL, Edge, FRAME, Graph, VARIABLE,
                    WrongKind, copy_into)
from .report import Report
from .rules import Match, Rule, rewrite
from .subst import expand_splats

FAIL, SUCCEED, RAISE = "fail", "succeed", "raise"


class Budget:
    def __init__(self, max_steps: int = 100000, max_depth: int = 1000):
        if max_steps <= 0 or max_depth <= 0:
            raise ValueError("budget values must be strictly positive")
        self.max_steps = max_steps
        self.max_depth = max_depth


class Outcome:
    SUCCESS = "success"
    FAILURE = "failure"
    EXCEPTION = "exception"
    BUDGET = "budget-exhausted"

    def __init__(self, kind: str, graph: Optional[Graph] = None,
                 info: str = "", trace: Optional[list[str]] = None):
        self.kind = kind
        self.graph = graph
        self.info = info
        self.trace = trace or []

    @property
    def is_success(self) -> bool:
        return self.kind == Outcome.SUCCESS

    def __repr__(self) -> str:
        return f"Outcome({self.kind}{', ' + self.info if self.info else ''})"


def undisguise(e: Edge) -> Edge:
    """Turn a disguised call into a callable one (in place)."""
    if e.kind != DCALL:
        raise WrongKind(f"cannot undisguise a {e.kind} edge")
    e.kind = CALL
    return e


def disguise(e: Edge) -> Edge:
    """Turn a call into inert data (in place)."""
    if e.kind != CALL:
        raise WrongKind(f"cannot disguise a {e.kind} edge")
    e.kind = DCALL
    return e


class Sentinel:
    """Agenda marker: the owning frame's current rule finished its premise."""
    __slots__ = ("frame", "rule", "summary")

    def __init__(self, frame: "ChoiceFrame", rule: Rule, summary: str):
        self.frame = frame
        self.rule = rule
        self.summary = summary


class ChoiceFrame:
    __slots__ = ("goal_id", "pred", "candidates", "next_idx", "any_applicable",
                 "snap_host", "snap_agenda")

    def __init__(self, goal_id: int, pred, candidates: list[tuple[Rule, Match]],
                 snap_host: Graph, snap_agenda: list):
        self.goal_id = goal_id
        self.pred = pred
        self.candidates = candidates
        self.next_idx = 0
        self.any_applicable = False
        self.snap_host = snap_host
        self.snap_agenda = snap_agenda


class EvalState:
    """One evaluation; single-threaded ownership."""

    def __init__(self, program, host: Graph, budget: Optional[Budget] = None,
                 goals: Optional[list[int]] = None):
        self.program = program
        self.host = host.copy()
        self.budget = budget or Budget()
        self.trail: list[ChoiceFrame] = []
        self.steps = 0
        self.trace: list[str] = []
        if goals is None:
            goals = [e.id for e in self.host.edges_sorted() if e.kind == CALL]
        self.agenda: deque = deque(goals)

    # -- tracing -------------------------------------------------------------

    def emit(self, pred: str, rule: str, action: str, summary: str) -> None:
        self.trace.append(f"{len(self.trace) + 1} {pred} {rule} {action} {summary}")

    # -- helpers -------------------------------------------------------------

    def _typed_vars(self, g: Graph) -> Optional[dict[str, str]]:
        out = {e.label: e.var_type for _, lvl in g.walk()
               for e in lvl.edges.values()
               if e.kind == VARIABLE and e.var_type is not None}
        return out or None

    def _candidates(self, goal: Edge, pred) -> list[tuple[Rule, Match]]:
        from .rules import enumerate_matches
        out: list[tuple[Rule, Match]] = []
        for rule in pred.rules:
            p = rule.p_edge(pred.name)
            if p is None:
                continue
            ms = enumerate_matches(self.host, rule.pattern,
                                   anchor=(p.id, goal.id),
                                   var_types=self._typed_vars(rule.pattern),
                                   grammar=self.program.shapes)
            out.extend((rule, m) for m in ms)
        return out

    def _goal_ids(self, source: Graph, bmap: dict[int, int],
                  expmap: dict[int, list[int]], result: Graph,
                  idmap=None) -> list[int]:
        """Root goals contributed by source's edges, in declaration order."""
        ids: list[int] = []
        for e in source.edges_sorted():
            key = idmap[e.id] if idmap else e.id
            if e.kind == CALL and key in bmap:
                ids.append(bmap[key])
            elif e.kind == VARIABLE and e.undisguise:
                for i in expmap.get(key, ()):
                    if i in result.edges and result.edges[i].kind == CALL:
                        ids.append(i)
        return ids

    def _trial(self, f: ChoiceFrame) -> str:
        """Try the frame's next candidate; returns the next mode."""
        rule, match = f.candidates[f.next_idx]
        f.next_idx += 1
        sizes = match.splat_sizes()
        if rule.premise is None:
            f.any_applicable = True
            self.emit(f.pred.name, rule.name, "apply", match.summary())
            if rule.fails:
                return "backtrack"
            result, bmap, expmap = rewrite(rule.replacement, match)
            goals = self._goal_ids(rule.replacement, bmap, expmap, result)
            self.host = result
            self.agenda = deque(goals + list(f.snap_agenda))
            return "advance"
        aexp = expand_splats(rule.premise, sizes, match.substitution)
        if rule.replacement is None:
            body = aexp
            rmap = None
            rexp = None
        else:
            rexp = expand_splats(rule.replacement, sizes, match.substitution)
            body = aexp.copy()
            rmap, _remap = copy_into(body, rexp)
            _rpoints = [rmap[p] for p in rexp.points]
            for pa, pr in zip(list(body.points), _rpoints):
                if pa != pr:
                    body.merge_nodes(pa, pr)
            rmap = _remap
        result, bmap, expmap = rewrite(body, match)
        a_goals = self._goal_ids(aexp, bmap, expmap, result)
        r_goals = (self._goal_ids(rexp, bmap, expmap, result, idmap=rmap)
                   if rexp is not None else [])
        self.host = result
        self.agenda = deque(a_goals + [Sentinel(f, rule, match.summary())]
                            + r_goals + list(f.snap_agenda))
        return "advance"

    def _succeed_otherwise(self, f: ChoiceFrame) -> None:
        """Delete the goal edge and clean up orphaned argument frames."""
        host = f.snap_host
        goal = host.edges[f.goal_id]
        atts = list(dict.fromkeys(goal.attachments))
        host.remove_edge(f.goal_id)
        for n in atts:
            incident = [e for e in host.edges_sorted() if n in e.attachments]
            if all(e.kind == FRAME and e.label == ARG_LABEL for e in incident):
                for e in incident:
                    host.remove_edge(e.id)
                if n not in host.points and not any(
                        n in e.attachments for e in host.edges.values()):
                    host.remove_node(n)
        self.host = host
        self.agenda = deque(f.snap_agenda)

    # -- main loop -----------------------------------------------------------

    def run(self) -> Outcome:
        mode = "advance"
        while True:
            self.steps += 1
            if self.steps > self.budget.max_steps:
                return Outcome(Outcome.BUDGET, info="step limit", trace=self.trace)
            if len(self.trail) > self.budget.max_depth:
                return Outcome(Outcome.BUDGET, info="depth limit", trace=self.trace)

            if mode == "advance":
                if not self.agenda:
                    if self.host.has_meta():
                        mode = "backtrack"  # impure result; silent retreat
                        continue
                    return Outcome(Outcome.SUCCESS, graph=self.host, trace=self.trace)
                head = self.agenda[0]
                if isinstance(head, Sentinel):
                    self.agenda.popleft()
                    head.frame.any_applicable = True
                    self.emit(head.frame.pred.name, head.rule.name, "apply",
                              head.summary)
                    if head.rule.fails:
                        mode = "backtrack"
                    continue
                if head not in self.host.edges:
                    self.agenda.popleft()  # consumed by a side effect
                    continue
                goal = self.host.edges[head]
                pred = self.program.predicates.get(goal.label)
                if pred is None:
                    self.emit(goal.label, "-", "exception", f"e{head}")
                    return Outcome(Outcome.EXCEPTION,
                                   info=f"undeclared predicate {goal.label}",
                                   trace=self.trace)
                frame = ChoiceFrame(head, pred, self._candidates(goal, pred),
                                    self.host.copy(), list(self.agenda)[1:])
                self.trail.append(frame)
                mode = self._resume(frame, fresh=True)
            elif mode == "backtrack":
                if not self.trail:
                    return Outcome(Outcome.FAILURE, trace=self.trace)
                frame = self.trail[-1]
                mode = self._resume(frame, fresh=False)
            if mode == "raise":
                return Outcome(Outcome.EXCEPTION, info="otherwise raise",
                               trace=self.trace)

    def _resume(self, f: ChoiceFrame, fresh: bool) -> str:
        if f.next_idx < len(f.candidates):
            if not fresh:
                self.emit(f.pred.name, "-", "backtrack", f"e{f.goal_id}")
            return self._trial(f)
        self.trail.pop()
        if f.any_applicable:
            return "backtrack"
        if f.pred.otherwise == FAIL:
            self.emit(f.pred.name, "-", "otherwise-fail", f"e{f.goal_id}")
            return "backtrack"
        if f.pred.otherwise == SUCCEED:
            self.emit(f.pred.name, "-", "otherwise-succeed", f"e{f.goal_id}")
            self._succeed_otherwise(f)
            return "advance"
        self.emit(f.pred.name, "-", "exception", f"e{f.goal_id}")
        return "raise"


def evaluate(program, host: Graph, budget: Optional[Budget] = None,
             goals: Optional[list[int]] = None) -> Outcome:
    """Evaluate all pending calls of host (or the given goal edge ids)."""
    state = EvalState(program, host, budget, goals)
    outcome = state.run()
    return outcome


# ---------------------------------------------------------------------------
# class visibility
# ---------------------------------------------------------------------------

def _opened_labels(g: Graph) -> set[str]:
    """Frame labels whose contents this graph inspects or builds literally.

    Contents consisting purely of variable edges (plus their nodes) pass the
    contents through unexamined and do not open the frame.
    """
    out: set[str] = set()
    for _, lvl in g.walk():
        for e in lvl.edges.values():
            if e.kind != FRAME or e.label == ARG_LABEL:
                continue
            kinds = [x.kind for x in e.contents.edges.values()]
            if any(k != VARIABLE for k in kinds) or not kinds:
                out.add(e.label)
    return out


def _calls_of(g: Graph) -> set[str]:
    return {e.label for _, lvl in g.walk() for e in lvl.edges.values()
            if e.kind in (CALL, DCALL)}


def check_visibility(program) -> Report:
    """Class encapsulation: only a class's methods may open its frames, and
    private methods may only be called from the owning class's predicates."""
    rep = Report()
    private_owner = {m: cls.name for cls in program.classes.values()
                     for m, vis in cls.methods.items() if vis == "private"}
    for pred in program.predicates.values():
        for rule in pred.rules:
            graphs = [g for g in (rule.pattern, rule.premise, rule.replacement)
                      if g is not None]
            opened = set().union(*map(_opened_labels, graphs))
            for label in sorted(opened):
                cls = program.classes.get(label)
                if cls is not None and pred.name not in cls.methods:
                    rep.error("frame access outside class",
                              f"rule {pred.name}/{rule.name} opens a {label} "
                              f"frame but {pred.name} is not a method of {label}")
            called = set().union(*map(_calls_of, graphs))
            for callee in sorted(called):
                owner = private_owner.get(callee)
                if owner is not None and pred.name not in program.classes[owner].methods:
                    rep.error("private method call",
                              f"rule {pred.name}/{rule.name} calls private "
                              f"method {callee} of class {owner}")
    for name, g in program.named_graphs.items():
        for callee in sorted(_calls_of(g)):
            owner = private_owner.get(callee)
            if owner is not None:
                rep.error("private method call",
                          f"graph {name} calls private method {callee} of class {owner}")
    return rep

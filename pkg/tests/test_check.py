"""Static checks: rule sanity, call-site typing, class visibility."""
from diaplan import Report, check_program, check_rule, check_visibility


def full_check(prog) -> Report:
    rep = Report()
    for pred in prog.predicates.values():
        for rule in pred.rules:
            rep.extend(check_rule(rule))
    rep.extend(check_visibility(prog))
    rep.extend(check_program(prog))
    return rep


def test_list_module_is_clean(list_prog):
    assert full_check(list_prog).ok

def test_coloring_module_is_clean(coloring_prog):
    assert full_check(coloring_prog).ok

def test_stdlib_is_clean(stdlib_prog):
    assert full_check(stdlib_prog).ok


# -- seeded violations: each trips exactly one targeted diagnostic ----------------------

NON_LINEAR = """
pred dup(x, y) {
  rule r {
    pattern { node x y; call dup(x, y); var C(x); var C(y); }
    => { node x y; var C(x); }
  }
} otherwise fail
"""

UNBOUND_REPL = """
pred drop(x) {
  rule r {
    pattern { node x; call drop(x); }
    => { node x; var C(x); }
  }
} otherwise fail
"""

PRIVATE_CALL = """
shape I(2) ::= { node u v; edge (u, v); points u v; }

class Vault {
  content I;
  public peek;
  private stash;
}

pred peek(a, b) {
  rule r { pattern { node a b; call peek(a, b); } => { node a b; } }
} otherwise fail

pred stash(a, b) {
  rule r { pattern { node a b; call stash(a, b); } => { node a b; } }
} otherwise fail

pred thief(a, b) {
  rule r {
    pattern { node a b; call thief(a, b); }
    => { node a b; call stash(a, b); }
  }
} otherwise fail
"""

ARITY_WRONG = """
pred go(x) {
  rule r { pattern { node x; call go(x); } => { node x; } }
} otherwise fail

graph main { node a b c; call go(a, b, c); points a; }
"""

FOREIGN_FRAME = """
shape I(2) ::= { node u v; edge (u, v); points u v; }

class Vault {
  content I;
  public peek;
}

pred peek(a, b) {
  rule r { pattern { node a b; call peek(a, b); } => { node a b; } }
} otherwise fail

pred snoop(a, b) {
  rule r {
    pattern {
      node a b;
      call snoop(a, b);
      frame Vault(a, b) = { node u v; edge (u, v); points u v; };
    }
    => { node a b; }
  }
} otherwise fail
"""

SEEDS = {
    "non-linear pattern": NON_LINEAR,
    "unbound variable in replacement": UNBOUND_REPL,
    "private method call": PRIVATE_CALL,
    "arity-wrong call": ARITY_WRONG,
    "frame access outside class": FOREIGN_FRAME,
}


def seeded_errors(text: str) -> list[str]:
    from diaplan import parse_program
    return [f.code for f in full_check(parse_program(text)).errors]


def test_seeded_non_linear_pattern():
    assert seeded_errors(NON_LINEAR) == ["non-linear pattern"]

def test_seeded_unbound_replacement_variable():
    assert seeded_errors(UNBOUND_REPL) == ["unbound variable in replacement"]

def test_seeded_private_method_call():
    assert seeded_errors(PRIVATE_CALL) == ["private method call"]

def test_seeded_arity_wrong_call():
    assert seeded_errors(ARITY_WRONG) == ["arity-wrong call"]

def test_seeded_foreign_frame_access():
    assert seeded_errors(FOREIGN_FRAME) == ["frame access outside class"]

def test_findings_accumulate_across_layers():
    errs = seeded_errors(NON_LINEAR + ARITY_WRONG)
    assert sorted(errs) == ["arity-wrong call", "non-linear pattern"]

def test_finding_messages_name_the_culprit():
    from diaplan import parse_program
    rep = full_check(parse_program(PRIVATE_CALL))
    assert "stash" in rep.errors[0].message

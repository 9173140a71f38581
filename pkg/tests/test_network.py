import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bcn_bisim import BcnModel, PbcnModel, one_step_reachability
from bcn_bisim.network import (Binary, Const, Not, ParseError, Var, assemble, compile_function, format_expr,
                               format_source, parse, parse_index_target, parse_target, target_members)

from conftest import data_path, load_example


def py_eval(expr, env):
    """Reference evaluator over Python bools."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        return env[expr.name]
    if isinstance(expr, Not):
        return not py_eval(expr.operand, env)
    a, b = py_eval(expr.left, env), py_eval(expr.right, env)
    return {"&": a and b, "|": a or b, "->": (not a) or b, "<->": a == b}[expr.op]


def index_of(bits):
    """delta index of a tuple of truth values: all-true is 1."""
    return 1 + sum((0 if b else 1) << (len(bits) - 1 - k) for k, b in enumerate(bits))


def test_parse_simple_network():
    src = parse("state A B\ninput U\nA' = U & !B\nB' = A\n")
    assert src.state_vars == ("A", "B") and src.input_vars == ("U",)
    assert src.rules["A"] == Binary("&", Var("U"), Not(Var("B")))


def test_precedence_and_associativity():
    src = parse("state A B C\nA' = A | B & C\nB' = A -> B -> C\nC' = A <-> B <-> C\n")
    assert format_expr(src.rules["A"]) == "A | B & C"
    assert src.rules["B"] == Binary("->", Var("A"), Binary("->", Var("B"), Var("C")))
    assert src.rules["C"] == Binary("<->", Binary("<->", Var("A"), Var("B")), Var("C"))


names = st.sampled_from(["A", "B", "C", "U"])
exprs = st.recursive(
    st.one_of(names.map(Var), st.booleans().map(Const)),
    lambda sub: st.one_of(sub.map(Not), st.tuples(st.sampled_from(["&", "|", "->", "<->"]), sub, sub)
                          .map(lambda t: Binary(*t))),
    max_leaves=8)


@given(exprs)
def test_format_parse_roundtrip(expr):
    src = parse(f"state A B C\ninput U\nA' = {format_expr(expr)}\nB' = B\nC' = C\n")
    assert src.rules["A"] == expr


@given(exprs)
def test_compile_function_matches_truth_table(expr):
    order = ["U", "A", "B", "C"]
    L = compile_function(expr, order)
    for bits in itertools.product((True, False), repeat=4):
        expected = 1 if py_eval(expr, dict(zip(order, bits))) else 2
        assert L.column(index_of(bits)) == expected


def test_assembled_F_matches_rule_simulation():
    text = data_path("apoptosis.bcn").read_text()
    src = parse(text)
    model = assemble(src)
    for u_bits in itertools.product((True, False), repeat=4):
        for x_bits in itertools.product((True, False), repeat=6):
            env = dict(zip(src.input_vars, u_bits)) | dict(zip(src.state_vars, x_bits))
            nxt = tuple(py_eval(src.rules[v], env) for v in src.state_vars)
            assert model.successor(index_of(x_bits), index_of(u_bits)) == index_of(nxt)


# one-step reachability blocks of the 64-state example, per group of four columns
BETA = {1: [25, 29, 57, 61], 2: [26, 30, 58, 62], 3: [27, 31, 59, 63], 4: [20, 24, 52, 56],
        9: [25, 29, 41, 45, 57, 61], 10: [26, 30, 42, 46, 58, 62], 11: [27, 31, 43, 47, 59, 63],
        12: [20, 24, 36, 40, 52, 56]}
for _k in list(BETA):
    BETA[_k + 4] = BETA[_k]


def test_example_reachability_matches_beta_blocks():
    model, _ = load_example("apoptosis_as_computed.bcn")
    psi1 = one_step_reachability(model)
    for i in range(1, 65):
        assert list(psi1.column_set(i)) == BETA[(i - 1) // 4 + 1], i


def test_example_as_written_differs_only_in_x2_dependence():
    model, _ = load_example("apoptosis.bcn")
    psi1 = one_step_reachability(model)
    mismatched = {(i - 1) // 4 + 1 for i in range(1, 65) if list(psi1.column_set(i)) != BETA[(i - 1) // 4 + 1]}
    # exactly the groups with X4 = 0 and X2 != X3, where !X2 & !X4 and !X3 & !X4 disagree
    assert mismatched == {6, 14, 4, 12}


def test_example_target_predicate_equals_index_set():
    model, A = load_example("apoptosis.bcn")
    src = parse(data_path("apoptosis.bcn").read_text())
    assert A == parse_target("{1:4, 29:36, 61:64}", src)
    assert (model.N, model.M, model.F.cols) == (64, 16, 1024)


def test_pbcn_parse_and_assemble():
    model, A = load_example("two_mode.bcn")
    assert isinstance(model, PbcnModel)
    assert model.probabilities == (Fraction(2, 3), Fraction(1, 3))
    assert A.members == (1, 2, 3, 4)


def test_deterministic_model_type():
    model, _ = load_example("apoptosis.bcn")
    assert isinstance(model, BcnModel)


def test_format_source_roundtrip():
    for name in ("apoptosis.bcn", "two_mode.bcn"):
        src = parse(data_path(name).read_text())
        again = parse(format_source(src))
        assert again.rules == src.rules and again.target == src.target
        assert [m.rules for m in again.modes] == [m.rules for m in src.modes]


def test_no_inputs_gives_single_input():
    model = assemble(parse("state A B\nA' = B\nB' = A\n"))
    assert (model.N, model.M) == (4, 1)
    assert model.F.delta == [1, 3, 2, 4]


@pytest.mark.parametrize("text, line, col", [
    ("", 1, 1),
    ("state A\nA' = A &\n", 2, 9),
    ("state A\nA' = B\n", 2, 6),
    ("state A\nstate A\n", 2, 7),
    ("state A B\nA' = A\n", 1, 1),
    ("state A\ninput U\nU' = A\nA' = A\n", 3, 1),
    ("state A\nA' = (A\n", 2, 8),
    ("state A\nA' = A $ A\n", 2, 8),
    ("state A\nmode p=1/2:\nA' = A\nmode p=1/3:\nA' = !A\n", 4, 1),
    ("state A\nA' = A\ntarget = {3}\n", 3, 1),
    ("state A\ninput U\nA' = A\ntarget = U\n", 4, 10),
])
def test_parse_errors_report_positions(text, line, col):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert (info.value.line, info.value.col) == (line, col), info.value


def test_rule_outside_mode_in_probabilistic_network():
    with pytest.raises(ParseError, match="outside a mode"):
        parse("state A\nA' = A\nmode p=1:\nA' = !A\n")


def test_parse_target_predicate_and_ranges():
    src = parse("state A B\nA' = A\nB' = B\n")
    assert parse_target("A & !B", src).members == (2,)
    assert parse_target("{1, 3:4}", src).members == (1, 3, 4)
    with pytest.raises(ParseError):
        parse_target("C", src)
    assert parse_index_target("{2:3}", 5).members == (2, 3)


def test_target_members_none_without_target():
    src = parse("state A\nA' = A\n")
    assert target_members(src) is None

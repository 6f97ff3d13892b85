import pytest
from hypothesis import given, settings, strategies as st

from conftest import read
from underverify.cfront.ast import BinOp, IntLit, Name
from underverify.cfront.parser import parse_spec_expr, parse_translation_unit
from underverify.cfront.printer import print_program
from underverify.errors import ParseError, SubsetViolation


@pytest.mark.parametrize("name", ["two_results.c", "global_effect.c", "fib.c"])
def test_corpus_parses_and_round_trips(name):
    p = parse_translation_unit(read(name))
    assert parse_translation_unit(print_program(p)) == p


def test_fib_program_structure():
    p = parse_translation_unit(read("fib.c"))
    names = [f.name for f in p.functions]
    assert names == ["id_set_x", "one_or_two", "pred_or_id", "one_to_fib"]
    assert [g.name for g in p.globals] == ["x"]
    assert p.model_fn_defs and "fib" in p.model_fn_defs[0]


def test_contract_clauses():
    p = parse_translation_unit(read("global_effect.c"))
    f = {fn.name: fn for fn in p.functions}
    assert f["id_set_x"].contract.requires is not None
    assert f["main"].contract.ensures is not None
    assert f["main"].contract.requires is None


@pytest.mark.parametrize(
    "src, fragment",
    [
        ("int f(int a){ return -a; }", "unary operator"),
        ("int tmp_1; int main(void){ return 0; }", "reserved"),
        ("int x; int f(int a){ int x = 1; return x; }", "shadows"),
        ("int *p;", "only 'int' is supported"),
        ("int f(void){ for(;;){} return 0; }", "'for'"),
        ("int x;\nint f(void)\n/*@ ensures \\result == x; @*/ { return 0; }", "mentions global"),
    ],
)
def test_subset_violations(src, fragment):
    with pytest.raises(SubsetViolation) as info:
        parse_translation_unit(src)
    assert fragment in str(info.value)
    d = info.value.diagnostics[0]
    assert d.line >= 1 and d.col >= 1


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as info:
        parse_translation_unit("int f( { }")
    assert info.value.line == 1


def test_assigns_clause_warns():
    p = parse_translation_unit("int x;\nint f(void)\n/*@ assigns x; @*/ { return 0; }")
    assert [w.severity for w in p.warnings] == ["warning"]


def test_line_annotations_merge():
    src = "int x;\nint f(int a)\n//@ requires a > 0;\n//@ ensures \\result == a;\n{ return a; }"
    p = parse_translation_unit(src)
    c = p.functions[0].contract
    assert c.requires is not None and c.ensures is not None


def test_spec_expression():
    e = parse_spec_expr("a + 1 < 3")
    assert isinstance(e, BinOp) and e.op == "<"


@settings(max_examples=40, deadline=None)
@given(st.recursive(
    st.one_of(st.integers(min_value=0, max_value=99).map(IntLit), st.sampled_from(["a", "b"]).map(Name)),
    lambda sub: st.tuples(st.sampled_from(["+", "-", "*", "<", "=="]), sub, sub).map(lambda t: BinOp(t[0], t[1], t[2])),
    max_leaves=8,
))
def test_expression_round_trip(e):
    from underverify.cfront.printer import print_expr

    src = f"int f(int a, int b){{ return {print_expr(e)}; }}"
    p = parse_translation_unit(src)
    assert parse_translation_unit(print_program(p)) == p

import pytest
from hypothesis import given, settings, strategies as st

from conftest import read
from underverify.absir import normalize, parse_expr, parse_model, print_expr, print_model, typecheck
from underverify.absir.compare import alpha_equivalent
from underverify.absir.ir import Bin, BoolC, FieldRef, IfE, IntC, Var
from underverify.extractor import extract_source
from underverify.interpreter import explore


def _corpus():
    return [
        parse_model(read("fib_golden.abs")),
        parse_model(read("fold.abs")),
        extract_source(read("two_results.c")),
        extract_source(read("global_effect.c")),
        extract_source(read("fib.c")),
    ]


@pytest.mark.parametrize("idx", range(5))
def test_print_parse_round_trip(idx):
    m = _corpus()[idx]
    text = print_model(m)
    again = parse_model(text)
    assert again == m or print_model(again) == text
    assert print_model(again) == text


@pytest.mark.parametrize("idx", range(5))
def test_normalize_idempotent(idx):
    m = normalize(_corpus()[idx])
    assert print_model(normalize(m)) == print_model(m)


def test_normalize_splits_sync_call():
    m = normalize(parse_model("""
        interface I { Int a(); Int b(); }
        class C implements I { Int a(){ Int r = this.b(); return r; } Int b(){ return 1; } }
        { }
    """))
    text = print_model(m)
    assert "Fut<Int> tmp_1 = this!b();" in text
    assert "Int r = tmp_1.get;" in text


def test_normalization_preserves_fold_semantics():
    raw = parse_model(read("fold.abs"))
    assert explore(raw, "main").results == explore(normalize(raw), "main").results == {10}


def test_alpha_equivalence_modulo_tmp_numbers():
    a = parse_model("""
        interface I { Int a(); }
        class C implements I { Int a(){ Int tmp_3 = 1; Int tmp_9 = tmp_3 + 1; return tmp_9; } }
        { }
    """)
    b = parse_model("""
        interface I { Int a(); }
        class C implements I { Int a(){ Int tmp_1 = 1; Int tmp_2 = tmp_1 + 1; return tmp_2; } }
        { }
    """)
    c = parse_model("""
        interface I { Int a(); }
        class C implements I { Int a(){ Int tmp_1 = 1; Int tmp_2 = tmp_1 + 2; return tmp_2; } }
        { }
    """)
    assert alpha_equivalent(a, b)
    assert not alpha_equivalent(a, c)


def test_typecheck_reports_errors():
    m = parse_model("""
        interface I { Int a(); }
        class C implements I { Int a(){ Bool b = 1; return b; } }
        { }
    """)
    assert any(d.severity == "error" for d in typecheck(m))


def test_typecheck_clean_corpus():
    for m in _corpus():
        assert [d for d in typecheck(m) if d.severity == "error"] == []


exprs = st.recursive(
    st.one_of(
        st.integers(min_value=-20, max_value=20).map(IntC),
        st.sampled_from(["a", "b", "result"]).map(Var),
        st.just(FieldRef("x")),
    ),
    lambda sub: st.one_of(
        st.tuples(st.sampled_from(["+", "-", "*", "<", "<=", "==", "!="]), sub, sub).map(lambda t: Bin(*t)),
        st.tuples(sub, sub, sub).map(lambda t: IfE(Bin("<", t[0], IntC(0)), t[1], t[2])),
    ),
    max_leaves=10,
)


@settings(max_examples=100, deadline=None)
@given(exprs)
def test_expression_round_trip(e):
    assert parse_expr(print_expr(e)) == e


def test_bool_literals_round_trip():
    assert parse_expr(print_expr(BoolC(True))) == BoolC(True)

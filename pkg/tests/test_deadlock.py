from hypothesis import given, strategies as st

from underverify.absir import normalize, parse_model
from underverify.deadlock import analyze

NINE_UNRESOLVED = {
    "C_one_to_fib.call_pred_or_id_fut_0",
    "C_one_or_two.op_plus_fut_fut",
    "C_pred_or_id.op_minus_val_fut",
    "C_pred_or_id.op_plus_fut_fut",
    "C_one_to_fib.op_plus_fut_fut",
    "C_id_set_x.call",
    "C_one_or_two.call",
    "C_pred_or_id.call",
    "C_one_to_fib.call",
}


def test_golden_unresolved_list(fib_norm):
    rep = analyze(fib_norm)
    assert set(rep.unresolved_methods) == NINE_UNRESOLVED
    assert rep.unresolved_methods["C_one_or_two.op_plus_fut_fut"] == "takes future parameter"


def test_partition(fib_norm):
    rep = analyze(fib_norm)
    everything = {f"{c.name}.{m.name}" for c in fib_norm.classes for m in c.methods}
    assert rep.free_methods | set(rep.unresolved_methods) == everything
    assert not rep.free_methods & set(rep.unresolved_methods)


def test_fold_all_free(fold_norm):
    rep = analyze(fold_norm)
    assert {"CompC.op", "FoldC.fold"} <= rep.free_methods
    assert rep.unresolved_methods == {}


def test_sync_free_model():
    m = normalize(parse_model("""
        interface I { Int a(); Int b(); }
        class C implements I { Int a(){ return 0; } Int b(){ return 0; } }
        { }
    """))
    assert analyze(m).free_methods == {"C.a", "C.b"}


def test_self_get_cycle_unresolved():
    m = normalize(parse_model("""
        interface I { Int a(); }
        class C implements I { Int a(){ Fut<Int> f = this!a(); Int r = f.get; return r; } }
        { }
    """))
    rep = analyze(m)
    assert "C.a" in rep.unresolved_methods


def test_await_on_self_call_to_sync_free():
    m = normalize(parse_model("""
        interface I { Int a(); Int b(); }
        class C implements I { Int a(){ Fut<Int> f = this!b(); await f?; return 1; } Int b(){ return 0; } }
        { }
    """))
    assert analyze(m).free_methods == {"C.a", "C.b"}


@given(st.integers(min_value=1, max_value=4))
def test_monotonicity(k):
    base = """
        interface I { Int a(); Int b(); %s }
        class C implements I {
          Int a(){ Fut<Int> f = this!b(); Int r = f.get; return r; }
          Int b(){ return 0; }
          %s
        }
        { }
    """
    extra_sig = " ".join(f"Int e{i}();" for i in range(k))
    extra = " ".join(f"Int e{i}(){{ return {i}; }}" for i in range(k))
    before = analyze(normalize(parse_model(base % ("", "")))).free_methods
    after = analyze(normalize(parse_model(base % (extra_sig, extra)))).free_methods
    assert before <= after

import pytest

from conftest import read
from underverify.absir import normalize, parse_model
from underverify.errors import UnknownStatementForm
from underverify.logic import INT, App, Sym, pretty, val
from underverify.prover import (
    NOT_VALID,
    UNKNOWN,
    VALID,
    generate_obligations,
    symbolic_execute,
    verdict_of,
    verify_model,
)
from underverify.smt import SolverConfig


def _po(model, name):
    return next(p for p in generate_obligations(model) if p.name == name)


def test_fold_obligation_shape(fold_norm):
    po = _po(fold_norm, "FoldC.fold")
    assert po.kind == "MethodContract"
    text = pretty(po.antecedent)
    assert "select(heap_Ref, FoldC.comp)" in text
    for c in ("(a > 0)", "(b > 0)", "(c > 0)"):
        assert c in text
    assert pretty(po.contract.inv) == "!(select(heap_Ref, FoldC.comp) = null)"
    assert pretty(po.contract.phi) == "(result > 0)"
    symbolic_execute(fold_norm, po)
    pre, post = po.contract.M[("Comp", "op")]
    assert pretty(pre) == "((a > 0) & (b > 0))"
    assert pretty(post) == "(result > 0)"


def test_global_init_obligation(fib_norm):
    po = _po(fib_norm, "Global.<init>")
    assert po.kind == "ClassInitialization"
    assert pretty(po.antecedent) == "(select(heap_Int, Global.x) = 0)"
    goals = symbolic_execute(fib_norm, po)
    assert len(goals) == 1
    assert pretty(goals[0].delta[0]) == "((select(heap_Int, Global.x) = 0) | (select(heap_Int, Global.x) = 1))"


def test_unannotated_model_has_trivial_obligations():
    m = normalize(parse_model("""
        interface I { Int m(Int a); }
        class C implements I { Int m(Int a){ Int b = a + 1; return b; } }
        { }
    """))
    pos = generate_obligations(m)
    assert [p.name for p in pos] == ["C.m", "C.<init>"]
    assert pretty(pos[0].antecedent) == "true"
    assert all(symbolic_execute(m, p) == [] for p in pos)


def test_op_plus_goal_is_sum_of_future_values(fib_norm):
    po = _po(fib_norm, "C_one_or_two.op_plus_fut_fut")
    goals = symbolic_execute(fib_norm, po)
    assert len(goals) == 1
    f1, f2 = Sym("fut_arg1", "Fut_Int"), Sym("fut_arg2", "Fut_Int")
    s = App("+", (val(f1), val(f2)), INT)
    assert pretty(goals[0].delta[0]) == pretty(App("=", (s, s), "Bool"))


def test_return_goal_with_literal_binding():
    m = normalize(parse_model("""
        interface I { [Spec : Ensures(( result == 1 ) || ( result == 2 ))] Int m(); }
        class C implements I { Int m(){ Int funcResult = 2; return funcResult; } }
        { }
    """))
    goals = symbolic_execute(m, _po(m, "C.m"))
    assert [pretty(g.delta[0]) for g in goals] == ["((2 = 1) | (2 = 2))"]
    assert verify_model(m)[0].verdict == VALID


def test_division_guard():
    src = """
        interface I { Int m(Int a, Int b); }
        class C implements I { Int m(Int a, Int b){ Int q = a / b; return q; } }
        { }
    """
    m = normalize(parse_model(src))
    goals = symbolic_execute(m, _po(m, "C.m"))
    assert any(g.label == "division guard" for g in goals)
    assert verify_model(m)[0].verdict == NOT_VALID
    guarded = normalize(parse_model(src.replace("Int m(Int a, Int b);", "[Spec : Requires(b != 0)] Int m(Int a, Int b);")))
    assert verify_model(guarded)[0].verdict == VALID


def test_loop_rule():
    src = """
        interface I { [Spec : Requires(n >= 0)] [Spec : Ensures(result == n)] Int m(Int n); }
        class C implements I {
          Int m(Int n){
            Int i = 0;
            [Spec : WhileInv(( i <= n ) && ( i >= 0 ))]
            while (i < n) { i = i + 1; }
            return i;
          }
        }
        { }
    """
    m = normalize(parse_model(src))
    assert verify_model(m)[0].verdict == VALID
    weak = normalize(parse_model(src.replace("WhileInv(( i <= n ) && ( i >= 0 ))", "WhileInv(i >= 0)")))
    assert verify_model(weak)[0].verdict == NOT_VALID


def test_await_anonymizes_heap():
    src = """
        interface I { [Spec : Ensures(result == 0)] Int m(); Unit n(); }
        class C implements I {
          Int x = 0;
          Int m(){ this.x = 0; Fut<Unit> f = this!n(); await f?; return this.x; }
          Unit n(){ }
        }
        { }
    """
    m = normalize(parse_model(src))
    verdicts = {r.po.name: r.verdict for r in verify_model(m)}
    assert verdicts["C.m"] == NOT_VALID
    inv = normalize(parse_model(src.replace("class C implements I", "[Spec : ObjInv(this.x == 0)]\n class C implements I")))
    assert {r.po.name: r.verdict for r in verify_model(inv)}["C.m"] == VALID


def test_call_precondition_checked():
    src = """
        interface I { [Spec : Requires(a > 0)] Int m(Int a); Int k(); }
        class C implements I { Int m(Int a){ return a; } Int k(){ Fut<Int> f = this!m(0); Int r = f.get; return r; } }
        { }
    """
    m = normalize(parse_model(src))
    assert {r.po.name: r.verdict for r in verify_model(m)}["C.k"] == NOT_VALID


def test_creation_precondition_checked():
    src = """
        interface I { Int m(); }
        [Spec : Requires(this.g > 0)]
        class C(Int g) implements I { Int m(){ return this.g; } }
        { I o = new C(0); }
    """
    m = normalize(parse_model(src))
    assert {r.po.name: r.verdict for r in verify_model(m)}["<main>.main"] == NOT_VALID


def test_golden_model_all_valid(fib_norm):
    results = verify_model(fib_norm, SolverConfig(jobs=4))
    assert all(r.verdict == VALID for r in results), [r.line() for r in results if r.verdict != VALID]
    kinds = {r.po.kind for r in results}
    assert kinds == {"MethodContract", "ClassInitialization"}


def test_mutated_contract_not_valid():
    text = read("fib_golden.abs").replace(
        "[Spec : Ensures(( ( result == 1 ) || ( result == 2 ) ))]\n  Int call();",
        "[Spec : Ensures(( result == 2 ))]\n  Int call();",
    )
    results = verify_model(normalize(parse_model(text)))
    bad = [r.po.name for r in results if r.verdict == NOT_VALID]
    assert "C_one_or_two.call" in bad


def test_verdict_mapping():
    assert verdict_of(["unsat", "unsat"]) == VALID
    assert verdict_of([]) == VALID
    assert verdict_of(["unsat", "sat", "unknown"]) == NOT_VALID
    assert verdict_of(["unsat", "unknown"]) == UNKNOWN


def test_report_line_format(fold_norm):
    line = verify_model(fold_norm)[0].line()
    assert line.startswith("CompC.op: VALID (1 goals, ")
    assert line.endswith(" ms)")


def test_unknown_method_rejected():
    m = parse_model("""
        interface I { Int m(); }
        class C implements I { Int m(){ return 0; } }
        { }
    """)
    m = normalize(m)
    m.classes[0].methods[0].body.insert(0, object())
    with pytest.raises(UnknownStatementForm):
        symbolic_execute(m, _po(m, "C.m"))

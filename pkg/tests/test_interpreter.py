import pytest
from hypothesis import given, settings, strategies as st

from conftest import read
from oracles import one_to_fib
from underverify.absir import normalize, parse_model
from underverify.extractor import extract_source
from underverify.interpreter import (
    Entry,
    EntryError,
    Machine,
    explore,
    format_trace,
    monitor,
    parse_entry,
    run_random,
)


def test_two_results_main(two_results_norm):
    ex = explore(two_results_norm, "main")
    assert ex.results == {1, 2}
    assert ex.exhausted
    assert ex.deadlocked == 0 and ex.stuck == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_one_to_fib_results(fib_norm, n):
    ex = explore(fib_norm, f"one_to_fib({n})")
    assert ex.results == set(one_to_fib(n))
    assert ex.exhausted
    assert ex.violations == []


def test_entry_forms(fib_norm, two_results_norm):
    assert parse_entry("one_to_fib(3)", fib_norm) == Entry("C_one_to_fib", "call", (3,))
    assert parse_entry("C_one_to_fib.call(3)", fib_norm) == Entry("C_one_to_fib", "call", (3,))
    assert parse_entry("main", two_results_norm) == Entry("C_main", "call", ())
    with pytest.raises(EntryError):
        parse_entry("nope(1)", fib_norm)
    with pytest.raises(EntryError):
        parse_entry("C_one_to_fib.nope()", fib_norm)


def _reachable(machine, limit=10_000):
    seen = {machine.initial()}
    stack = [machine.initial()]
    while stack and len(seen) < limit:
        cfg = stack.pop()
        yield cfg
        for _, new, _ in machine.step_choices(cfg):
            if new not in seen:
                seen.add(new)
                stack.append(new)


def test_fig1_two_choices_after_first_await(two_results_norm):
    m = Machine(two_results_norm, parse_entry("main", two_results_norm))
    code_call = m.prog.code_index[("C_main", "call")]
    found = False
    for cfg in _reachable(m):
        for oid, o in cfg.objs:
            if o.cls != "C_main" or o.active is not None:
                continue
            waiting = [p for p in o.pool if p.code == code_call and p.started]
            if not waiting or waiting[0].pc == 2:
                continue
            mine = [c for c in m.choices(cfg) if c[0] == oid]
            if len(o.pool) == 4 and len(mine) == 2:
                found = True
                assert len(m.choices(cfg)) == 2
    assert found


def test_single_runnable_process_single_choice(fold_norm):
    m = Machine(fold_norm, Entry(None))
    assert len(m.step_choices(m.initial())) == 1


EXAMPLE9 = """
interface I { Int m(Fut<Int> x); Int k(); }
class C implements I {
  Int f = 0;
  Int k(){ return 0; }
  Int m(Fut<Int> x){ await x?; this.f = this.f * this.f; return this.f; }
}
{ I o = new C(); Fut<Int> a = o!k(); Int v = a.get; Fut<Int> r = o!m(a); Int w = r.get; }
"""


def test_resume_then_local_step_then_resolution():
    model = normalize(parse_model(EXAMPLE9))
    m = Machine(model, Entry(None), record=True)
    cfg = m.initial()
    segments = []
    while True:
        chs = m.choices(cfg)
        if not chs:
            break
        cfg, events = m.step(cfg, chs[0])
        segments.append(events)
    resumed = [seg for seg in segments if seg and seg[0].kind == "suspREv" and seg[0].method == "m"]
    assert len(resumed) == 1
    assert [e.kind for e in resumed[0]] == ["suspREv", "noEv", "futEv"]
    assert resumed[0][-1].value == 0


def test_run_random_within_explored(two_results_norm, fib_norm):
    full = explore(two_results_norm, "main").results
    for seed in range(10):
        r, trace = run_random(two_results_norm, "main", seed)
        assert r in full
        assert run_random(two_results_norm, "main", seed)[0] == r
    for seed in range(5):
        assert run_random(fib_norm, "one_to_fib(3)", seed)[0] in {1, 2}


def test_single_choice_model_seed_independent(fold_norm):
    assert {run_random(fold_norm, "main", s)[0] for s in range(5)} == {10}


def test_trace_resolution_order(fib_norm):
    ex = explore(fib_norm, "one_to_fib(3)", traces=True)
    assert ex.traces
    for _, trace in ex.traces:
        resolved = {}
        for ev in trace:
            if ev.kind == "futEv":
                assert ev.fut not in resolved
                resolved[ev.fut] = ev.value
            if ev.kind == "futREv":
                assert resolved[ev.fut] == ev.value


def test_object_exclusivity(fib_norm):
    ex = explore(fib_norm, "one_to_fib(3)", traces=True)
    for _, trace in ex.traces:
        running = {}
        for ev in trace:
            if ev.kind in ("invREv", "suspREv"):
                assert ev.obj not in running or running[ev.obj] == ev.fut
                running[ev.obj] = ev.fut
            elif ev.kind in ("suspEv", "futEv"):
                running.pop(ev.obj, None)


def test_monitor_empty_trace(fib_norm):
    assert monitor([], fib_norm) == []


def test_monitor_flags_mutated_fig2():
    src = read("global_effect.c").replace("ensures \\result == 1 || \\result == 2;", "ensures \\result == 2;")
    model = normalize(extract_source(src))
    ex = explore(model, "main", traces=True)
    assert ex.results == {1, 2}
    assert any(v.where == "C_main.call" for v in ex.violations)
    offline = [monitor(t, model) for _, t in ex.traces]
    assert any(any(v.where == "C_main.call" for v in vs) for vs in offline)
    assert any(vs == [] for vs in offline)


def test_monitor_checks_invariant_and_requires():
    model = normalize(parse_model("""
        interface I { [Spec : Requires(a > 0)] Int m(Int a); Unit s(); }
        [Spec : ObjInv(this.x == 0)]
        class C implements I {
          Int x = 0;
          Int m(Int a){ Fut<Unit> f = this!s(); await f?; return a; }
          Unit s(){ this.x = 1; }
        }
        { I o = new C(); Fut<Int> r = o!m(0); await r?; }
    """))
    ex = explore(model, "main")
    kinds = {v.annotation.split("(")[0] for v in ex.violations}
    assert kinds == {"Requires", "ObjInv"}


def test_division_by_zero_is_stuck():
    model = normalize(parse_model("""
        interface I { Int m(Int a); }
        class C implements I { Int m(Int a){ Int q = 1 / a; return q; } }
        { }
    """))
    ex = explore(model, "C.m(0)")
    assert ex.results == set()
    assert ex.stuck == 1
    assert explore(model, "C.m(1)").results == {1}


def test_get_deadlock_reported():
    model = normalize(parse_model("""
        interface I { Int a(); }
        class C implements I { Int a(){ Fut<Int> f = this!a(); Int r = f.get; return r; } }
        { }
    """))
    ex = explore(model, "C.a()")
    assert ex.results == set()
    assert ex.deadlocked == 1


def test_depth_bound():
    model = normalize(parse_model("""
        interface I { Int a(Int n); }
        class C implements I { Int a(Int n){ Fut<Int> f = this!a(n + 1); await f?; Int r = f.get; return r; } }
        { }
    """))
    ex = explore(model, "C.a(0)", max_depth=20)
    assert not ex.exhausted


def test_format_trace(two_results_norm):
    _, trace = run_random(two_results_norm, "main", 0)
    text = format_trace(trace)
    assert any(line.startswith("invEv(o0, ") for line in text.splitlines())
    assert "futEv(" in text


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=1, max_value=4))
def test_normalization_preserves_results(n):
    raw = extract_source(read("fib.c"))
    assert explore(raw, f"one_to_fib({n})").results == explore(normalize(raw), f"one_to_fib({n})").results

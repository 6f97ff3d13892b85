"""Acceptance criteria, one test per criterion.

A summary line per criterion is printed at the end of the pytest run.
"""

import filecmp
import os
import re
import resource
import subprocess
import sys
import time

import pytest

from conftest import data_path, read
from oracles import fib, one_to_fib
from underverify.absir import normalize, parse_model, print_model
from underverify.absir.compare import differences
from underverify.deadlock import analyze
from underverify.extractor import extract_source
from underverify.interpreter import explore
from underverify.logic import (
    FIELD,
    INT,
    Elementary,
    IntV,
    Parallel,
    Sym,
    UpdApp,
    apply_updates,
    eq,
    select,
    store,
)
from underverify.prover import NOT_VALID, VALID, verify_model
from underverify.smt import SolverConfig

pytestmark = pytest.mark.acceptance

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


def _verify_all(model):
    t0 = time.perf_counter()
    results = verify_model(normalize(model), SolverConfig(jobs=os.cpu_count() or 1))
    elapsed = time.perf_counter() - t0
    return results, elapsed


@pytest.mark.criterion(1, "golden extraction of the fib program")
def test_criterion_1_golden_extraction():
    t0 = time.perf_counter()
    model = extract_source(read("fib.c"))
    elapsed = time.perf_counter() - t0
    assert differences(model, parse_model(read("fib_golden.abs"))) == []
    assert "[Spec : Ensures(( ( result >= 1 ) && ( result <= fib(n) ) ))]" in print_model(model)
    assert elapsed < 1.0


@pytest.mark.criterion(2, "all obligations of the fib program close")
def test_criterion_2_fib_verifies():
    results, elapsed = _verify_all(extract_source(read("fib.c")))
    assert {r.po.kind for r in results} == {"MethodContract", "ClassInitialization"}
    assert all(r.verdict == VALID for r in results), [r.line() for r in results if r.verdict != VALID]
    assert elapsed < 60


@pytest.mark.criterion(3, "all obligations of the global-side-effect example close")
def test_criterion_3_global_effect_verifies():
    results, elapsed = _verify_all(extract_source(read("global_effect.c")))
    by_name = {r.po.name: r for r in results}
    assert by_name["C_main.call"].verdict == VALID
    assert all(r.verdict == VALID for r in results), [r.line() for r in results if r.verdict != VALID]
    assert elapsed < 10


@pytest.mark.criterion(4, "hand-written fold model verifies")
def test_criterion_4_fold_verifies():
    results, elapsed = _verify_all(parse_model(read("fold.abs")))
    assert {r.po.name for r in results} >= {"FoldC.fold", "CompC.op"}
    assert all(r.verdict == VALID for r in results), [r.line() for r in results if r.verdict != VALID]
    assert elapsed < 10


@pytest.mark.criterion(5, "deadlock analysis reports exactly the nine methods")
def test_criterion_5_deadlock_list():
    rep = analyze(normalize(extract_source(read("fib.c"))))
    assert set(rep.unresolved_methods) == NINE_UNRESOLVED


@pytest.mark.criterion(6, "exhaustive exploration result sets, n <= 5")
def test_criterion_6_exploration():
    two_results = normalize(extract_source(read("two_results.c")))
    ex = explore(two_results, "main")
    assert ex.results == {1, 2} and ex.exhausted
    model = normalize(extract_source(read("fib.c")))
    expected = {1: {1}, 2: {1}, 3: {1, 2}, 4: {1, 2, 3}, 5: {1, 2, 3, 4, 5}}
    for n, want in expected.items():
        assert want == set(one_to_fib(n)) == set(range(1, fib(n) + 1))
        t0 = time.perf_counter()
        ex = explore(model, f"one_to_fib({n})")
        elapsed = time.perf_counter() - t0
        assert ex.exhausted, n
        assert ex.results == want, (n, ex.results)
        assert elapsed < 300
    rss_kib = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    assert rss_kib < 4 * 1024 * 1024


def _mutations():
    """Every Ensures of the two C programs, strengthened by excluding a reachable result."""
    out = []
    for name, entries in (("fib.c", [f"one_to_fib({n})" for n in range(1, 5)]), ("global_effect.c", ["main"])):
        src = read(name)
        model = normalize(extract_source(src))
        observed: dict = {}
        for e in entries:
            ex = explore(model, e, traces=True)
            for _, trace in ex.traces:
                for ev in trace:
                    if ev.kind == "futEv" and ev.method == "call":
                        observed.setdefault(ev.cls, set()).add(ev.value)
        for m in re.finditer(r"ensures (.*?);", src):
            clause = m.group(1)
            fn = _function_of(src, m.start())
            k = min(observed[f"C_{fn}"])
            mutated = src[: m.start()] + f"ensures ({clause}) && \\result != {k};" + src[m.end():]
            out.append((name, fn, mutated, entries))
    return out


def _function_of(src: str, pos: int) -> str:
    """The function a contract belongs to: the header it follows directly, else the next one."""
    before = list(re.finditer(r"int\s+(\w+)\s*\(", src[:pos]))
    if before and "{" not in src[before[-1].end():pos]:
        return before[-1].group(1)
    return re.search(r"int\s+(\w+)\s*\(", src[pos:]).group(1)


@pytest.mark.criterion(7, "strengthened false contracts are rejected and witnessed")
def test_criterion_7_mutations():
    muts = _mutations()
    assert len(muts) == 6
    one_or_two = read("fib.c").replace("ensures \\result == 1 || \\result == 2;", "ensures \\result == 2;")
    muts.append(("fib.c", "one_or_two", one_or_two, [f"one_to_fib({n})" for n in range(1, 5)]))
    for name, fn, src, entries in muts:
        model = normalize(extract_source(src))
        results = verify_model(model, SolverConfig(jobs=os.cpu_count() or 1))
        assert any(r.verdict == NOT_VALID for r in results), (name, fn)
        witnessed = False
        for e in entries:
            ex = explore(model, e)
            if any(v.where == f"C_{fn}.call" and v.annotation.startswith("Ensures") for v in ex.violations):
                witnessed = True
                break
        assert witnessed, (name, fn)


@pytest.mark.criterion(8, "property suites")
def test_criterion_8_properties():
    corpus = [
        ("fib.c", extract_source(read("fib.c")), [f"one_to_fib({n})" for n in range(1, 5)]),
        ("two_results.c", extract_source(read("two_results.c")), ["main"]),
        ("global_effect.c", extract_source(read("global_effect.c")), ["main"]),
        ("fold.abs", parse_model(read("fold.abs")), ["main"]),
    ]
    for name, raw, entries in corpus:
        text = print_model(raw)
        assert print_model(parse_model(text)) == text, name
        norm = normalize(raw)
        assert print_model(normalize(norm)) == print_model(norm), name
        results = verify_model(norm)
        valid = {r.po.name for r in results if r.verdict == VALID}
        for e in entries:
            a, b = explore(raw, e), explore(norm, e)
            assert a.results == b.results, (name, e)
            for v in b.violations:
                assert v.where not in valid, (name, e, v)
    v, w = Sym("v", INT), Sym("w", INT)
    assert apply_updates(UpdApp(Elementary(v, IntV(1)), eq(v, IntV(1)))) == eq(IntV(1), IntV(1))
    h, fx = Sym("heap_Int", "Heap_Int"), Sym("C.x", FIELD, "field")
    assert apply_updates(UpdApp(Elementary(h, store(h, fx, IntV(0))), select(h, fx))) == IntV(0)
    assert apply_updates(UpdApp(Parallel(Elementary(v, IntV(1)), Elementary(v, IntV(2))), v)) == IntV(2)
    assert apply_updates(UpdApp(Parallel(Elementary(v, w), Elementary(w, v)), eq(v, w))) == eq(w, v)


def _cli(args, seed):
    env = dict(os.environ, PYTHONHASHSEED=str(seed))
    return subprocess.run([sys.executable, "-m", "underverify", *args], capture_output=True, env=env, check=False)


@pytest.mark.criterion(9, "byte-identical model text and SMT scripts across runs")
def test_criterion_9_determinism(tmp_path):
    a = _cli(["extract", data_path("fib.c")], 1)
    b = _cli(["extract", data_path("fib.c")], 2)
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout and a.stdout
    d1, d2 = tmp_path / "r1", tmp_path / "r2"
    assert _cli(["verify", data_path("fib.c"), "--dump-smt", str(d1)], 1).returncode == 0
    assert _cli(["verify", data_path("fib.c"), "--dump-smt", str(d2)], 2).returncode == 0
    files = sorted(os.listdir(d1))
    assert files and files == sorted(os.listdir(d2))
    match, mismatch, errors = filecmp.cmpfiles(d1, d2, files, shallow=False)
    assert mismatch == [] and errors == []

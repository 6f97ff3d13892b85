import io
import json
import os

from conftest import data_path, read
from underverify.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_extract_prints_model():
    code, text = run("extract", data_path("fib.c"))
    assert code == 0
    assert text.startswith("module TestModule;")


def test_verify_c_and_model():
    code, text = run("verify", data_path("fib.c"))
    assert code == 0
    assert "25/25 obligations valid" in text
    code, text = run("verify", data_path("fold.abs"))
    assert code == 0


def test_verify_extract_equivalence(tmp_path):
    model = tmp_path / "fib.abs"
    assert run("extract", data_path("fib.c"), "-o", str(model))[0] == 0
    a = run("verify", data_path("fib.c"), "--json", "--jobs", "1")[1]
    b = run("verify", str(model), "--json", "--jobs", "1")[1]
    strip = lambda s: [{k: v for k, v in o.items() if k != "ms"} for o in json.loads(s)["obligations"]]
    assert strip(a) == strip(b)


def test_verify_failure_exit_code(tmp_path):
    bad = tmp_path / "bad.abs"
    bad.write_text(read("fib_golden.abs").replace(
        "[Spec : Ensures(( ( result == 1 ) || ( result == 2 ) ))]\n  Int call();",
        "[Spec : Ensures(( result == 2 ))]\n  Int call();"))
    code, text = run("verify", str(bad), "-v")
    assert code == 1
    assert "C_one_or_two.call: NOT_VALID" in text


def test_input_error_exit_code(tmp_path):
    src = tmp_path / "bad.c"
    src.write_text("int f(int a){ return -a; }")
    assert run("verify", str(src))[0] == 2
    assert run("extract", str(tmp_path / "missing.c"))[0] == 2


def test_solver_error_exit_code():
    assert run("verify", data_path("fold.abs"), "--solver", "/nonexistent/z3")[0] == 3


def test_deadlock_report():
    code, text = run("deadlock", data_path("fib.c"))
    assert code == 1
    assert "11 free, 9 unresolved" in text
    assert run("deadlock", data_path("fold.abs"))[0] == 0


def test_explore_summary_and_traces(tmp_path):
    code, text = run("explore", data_path("two_results.c"), "--entry", "main", "--emit-traces", str(tmp_path))
    assert code == 0
    assert "results: {1, 2}" in text
    assert "exhausted: true" in text
    files = sorted(os.listdir(tmp_path))
    assert files and all(f.endswith(".txt") for f in files)


def test_explore_random():
    code, text = run("explore", data_path("fib.c"), "--entry", "one_to_fib(3)", "--random", "7", "--runs", "50")
    assert code == 0
    assert text.startswith("results: {")


def test_json_report_and_dump_smt(tmp_path):
    code, text = run("all", data_path("global_effect.c"), "--json", "--dump-smt", str(tmp_path))
    assert code == 0
    rep = json.loads(text)
    assert rep["stages"]["verify"] == "ok"
    assert all(o["verdict"] == "VALID" for o in rep["obligations"])
    assert "C_main.call" in rep["deadlock"]["unresolved"]
    assert "C_main.call.goal1.smt2" in os.listdir(tmp_path)


def test_env_precedence(monkeypatch):
    monkeypatch.setenv("UV_SOLVER", "/nonexistent/z3")
    assert run("verify", data_path("fold.abs"))[0] == 3
    assert run("verify", data_path("fold.abs"), "--solver", "z3")[0] == 0


def test_pipeline_determinism():
    a = run("verify", data_path("fib.c"), "--json")[1]
    b = run("verify", data_path("fib.c"), "--json")[1]
    drop = lambda s: [{k: v for k, v in o.items() if k != "ms"} for o in json.loads(s)["obligations"]]
    assert drop(a) == drop(b)

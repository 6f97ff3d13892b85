import pytest

from conftest import read
from underverify.absir import parse_model
from underverify.errors import MalformedSolverOutput, SolverUnavailable, UnencodableTerm
from underverify.logic import BOOL, INT, App, Elementary, IntV, Sequent, Sym, UpdApp, eq, or_, val
from underverify.prover import model_defs
from underverify.smt import encode, parse_output, run_solver

X = Sym("x", INT)
F1 = Sym("f1", "Fut_Int", "const")
F2 = Sym("f2", "Fut_Int", "const")


@pytest.fixture(scope="module")
def defs():
    return model_defs(parse_model(read("fib_golden.abs")))


def test_future_sum_tautology_unsat():
    s = App("+", (val(F1), val(F2)), INT)
    r = run_solver(encode(Sequent([], [eq(s, s)])), 10)
    assert r.status == "unsat"


def test_global_init_goal_unsat():
    goal = or_(eq(IntV(0), IntV(0)), eq(IntV(0), IntV(1)))
    assert run_solver(encode(Sequent([], [goal])), 10).status == "unsat"


def test_contradiction_and_satisfiable():
    # asserting the negation of x == x is a contradiction
    assert run_solver(encode(Sequent([], [eq(X, X)])), 10).status == "unsat"
    # the negation of x == 1 is satisfiable, with a model
    r = run_solver(encode(Sequent([], [eq(X, IntV(1))])), 10)
    assert r.status == "sat"
    assert "x" in r.model


def test_fib_definition_encoded(defs):
    text = encode(Sequent([], [eq(App("fn_fib", (IntV(6),), INT), IntV(8))]), defs).text()
    assert "(define-funs-rec ((fn_fib ((|n| Int)) Int))" in text
    assert "(ite (<= |n| 2) 1 (+ (fn_fib (- |n| 1)) (fn_fib (- |n| 2))))" in text


def test_fib_values(defs):
    goal = eq(App("fn_fib", (IntV(10),), INT), IntV(55))
    assert run_solver(encode(Sequent([], [goal]), defs), 10).status == "unsat"


def test_quantified_axiom_fallback(defs):
    goal = eq(App("fn_fib", (IntV(5),), INT), IntV(5))
    s = encode(Sequent([], [goal]), defs, recursive_defs=False)
    assert "forall" in s.text()
    assert run_solver(s, 10).status == "unsat"


def test_timeout_gives_unknown(defs):
    n = Sym("n", INT)
    seq = Sequent([App(">=", (n, IntV(5)), BOOL)], [App(">=", (App("fn_fib", (n,), INT), n), BOOL)])
    assert run_solver(encode(seq, defs), 0.001).status == "unknown"


def test_encoding_is_deterministic(defs):
    seq = Sequent([eq(X, val(F1)), eq(Sym("y", INT), val(F2))], [eq(App("fn_fib", (X,), INT), IntV(1))])
    assert encode(seq, defs).text() == encode(seq, defs).text()


def test_fields_are_pairwise_distinct():
    from underverify.logic import FIELD, store

    h = Sym("heap_Int", "Heap_Int")
    fx, fy = Sym("C.x", FIELD, "field"), Sym("C.y", FIELD, "field")
    # store and select with opaque heap argument, so the solver must use distinctness
    goal = eq(App("select", (store(h, fx, IntV(1)), fy), INT), App("select", (h, fy), INT))
    text = encode(Sequent([], [goal])).text()
    assert "(assert (distinct |C.x| |C.y|))" in text
    assert run_solver(text, 10).status == "unsat"


def test_unapplied_update_rejected():
    with pytest.raises(UnencodableTerm):
        encode(Sequent([], [UpdApp(Elementary(X, IntV(1)), eq(X, IntV(1)))]))


def test_missing_solver():
    with pytest.raises(SolverUnavailable):
        run_solver("(check-sat)\n", 1, path="/nonexistent/solver")


def test_parse_output():
    assert parse_output("unsat\n").status == "unsat"
    assert parse_output("sat\n(model)\n").model == "(model)"
    with pytest.raises(MalformedSolverOutput):
        parse_output("(error \"boom\")\n")
    with pytest.raises(MalformedSolverOutput):
        parse_output("")

import pytest

from conftest import read
from underverify.absir import normalize, parse_model, print_model, typecheck
from underverify.absir.compare import alpha_equivalent, differences
from underverify.errors import InvariantError, SubsetViolation
from underverify.extractor import extract_source
from underverify.interpreter import explore


def test_golden_fib_model(fib_model):
    golden = parse_model(read("fib_golden.abs"))
    assert differences(fib_model, golden) == []
    assert alpha_equivalent(fib_model, golden)


def test_golden_annotations_verbatim(fib_model):
    text = print_model(fib_model)
    for spec in [
        "[Spec : Ensures(( ( result >= 1 ) && ( result <= fib(n) ) ))]",
        "[Spec : ObjInv(( ( this.x == 0 ) || ( this.x == 1 ) ))]",
        "[Spec : Ensures(( result == ( valueOf(fut_arg1) + valueOf(fut_arg2) ) ))]",
        "[Spec : Requires(( this.global != null ))]",
    ]:
        assert spec in text


def test_extraction_deterministic():
    a = print_model(extract_source(read("fib.c")))
    b = print_model(extract_source(read("fib.c")))
    assert a == b


@pytest.mark.parametrize("name", ["two_results.c", "global_effect.c", "fib.c"])
def test_extracted_models_typecheck(name):
    m = extract_source(read(name))
    assert [d for d in typecheck(m) if d.severity == "error"] == []
    assert [d for d in typecheck(normalize(m)) if d.severity == "error"] == []


def test_global_effect_contracts():
    text = print_model(extract_source(read("global_effect.c")))
    assert "[Spec : Ensures(( ( result == 1 ) || ( result == 2 ) ))]\n  Int call();" in text
    assert "[Spec : Requires(( arg1 == 1 ))]" in text
    assert "[Spec : Ensures(( result == 1 ))]\n  Int call_id_set_x_val_0(Int arg1);" in text


def test_two_results_main_block():
    m = extract_source(read("two_results.c"))
    text = print_model(m)
    assert "Global g = new Global();" in text
    assert "I_main m = new C_main(g);" in text
    assert m.class_("C_main").method("op_plus_fut_fut") is not None


def test_no_main_gives_empty_block(fib_model):
    assert fib_model.main == []


def test_strong_invariant_checked_at_initialization():
    with pytest.raises(InvariantError):
        extract_source("int x = 2; //@ strong global invariant x == 0 || x == 1;\nint main(void){ return 0; }")


def test_contract_over_global_rejected():
    with pytest.raises(SubsetViolation):
        extract_source("int x;\nint f(void)\n/*@ ensures \\result == x; @*/ { return 0; }")


# Expected values are plain C results, computed by hand.
PROGRAMS = [
    ("int f(int n){ int s = 0; int i = 0; while (i < n) { s = s + i; i = i + 1; } return s; }\n"
     "int main(void){ return f(4); }", {6}),
    ("int main(void){ return (0-7)/2; }", {-3}),
    ("int x;\nint t(void){ x = x + 1; return 1; }\n"
     "int main(void){ int r = 0; if (0 && t()) { r = 1; } return r + x; }", {0}),
    ("int x;\nint t(void){ x = x + 1; return 1; }\n"
     "int main(void){ int r = 0; r = (1 || t()); return r * 10 + x; }", {10}),
    ("int f(int n){ while (n > 0) { if (n == 3) { return 7; } n = n - 1; } return 0; }\n"
     "int main(void){ return f(5); }", {7}),
    ("int x; int y;\nint main(void){ x = (y = 2) + 1; return x * 10 + y; }", {32}),
    ("int x;\nvoid s(int v){ x = v; }\nint main(void){ s(4); return x; }", {4}),
    ("int f(int n){ if (n <= 1) { return 1; } return n * f(n - 1); }\nint main(void){ return f(5); }", {120}),
    ("int x;\nint inc(void){ x = x + 1; return x; }\nint main(void){ x = 0; return inc() - inc(); }", {-1, 1}),
]


@pytest.mark.parametrize("src, expected", PROGRAMS)
def test_extracted_semantics(src, expected):
    ex = explore(normalize(extract_source(src)), "main")
    assert ex.exhausted
    assert ex.results == expected

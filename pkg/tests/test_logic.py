from hypothesis import given, strategies as st

from underverify.logic import (
    BOOL,
    FIELD,
    INT,
    App,
    Compose,
    Const,
    Elementary,
    Exists,
    IntV,
    Parallel,
    Sequent,
    Sym,
    TRUE,
    UpdApp,
    and_,
    apply_updates,
    eq,
    free_syms,
    select,
    store,
    substitute,
)

V = Sym("v", INT)
W = Sym("w", INT)
HEAP = Sym("heap_Int", "Heap_Int")
FX = Sym("C.x", FIELD, "field")
FY = Sym("C.y", FIELD, "field")

ints = st.integers(min_value=-50, max_value=50)
names = st.sampled_from(["a", "b", "c", "v", "w"])


@st.composite
def terms(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        if draw(st.booleans()):
            return IntV(draw(ints))
        return Sym(draw(names), INT)
    op = draw(st.sampled_from(["+", "-", "*"]))
    return App(op, (draw(terms(depth - 1)), draw(terms(depth - 1))), INT)


def test_elementary_update_substitutes():
    t = UpdApp(Elementary(V, IntV(1)), eq(V, IntV(1)))
    assert apply_updates(t) == eq(IntV(1), IntV(1))


def test_select_over_store_same_field():
    t = UpdApp(Elementary(HEAP, store(HEAP, FX, IntV(0))), select(HEAP, FX))
    assert apply_updates(t) == IntV(0)


def test_select_over_store_distinct_field():
    h = store(store(HEAP, FX, IntV(3)), FY, IntV(4))
    assert apply_updates(select(h, FX)) == IntV(3)
    assert apply_updates(select(h, FY)) == IntV(4)


def test_parallel_update_right_override():
    t = UpdApp(Parallel(Elementary(V, IntV(1)), Elementary(V, IntV(2))), V)
    assert apply_updates(t) == IntV(2)


def test_parallel_update_is_simultaneous():
    swap = Parallel(Elementary(V, W), Elementary(W, V))
    assert apply_updates(UpdApp(swap, App("-", (V, W), INT))) == App("-", (W, V), INT)


def test_composed_update_sequential():
    u = Compose(Elementary(V, IntV(1)), Elementary(W, App("+", (V, IntV(1)), INT)))
    assert apply_updates(UpdApp(u, W)) == App("+", (IntV(1), IntV(1)), INT)
    assert apply_updates(UpdApp(u, V)) == IntV(1)


def test_substitution_is_capture_avoiding():
    x = Sym("x", INT, "logic")
    body = Exists(x, eq(x, App("+", (V, IntV(1)), INT)))
    out = substitute(body, {V: x})
    assert isinstance(out, Exists)
    assert out.var != x
    assert x in free_syms(out)


@given(terms(), terms(), names)
def test_apply_updates_idempotent(t, value, name):
    v = Sym(name, INT)
    once = apply_updates(UpdApp(Elementary(v, value), t))
    assert apply_updates(once) == once


@given(terms(), ints, names)
def test_elementary_update_removes_variable(t, k, name):
    v = Sym(name, INT)
    out = apply_updates(UpdApp(Elementary(v, IntV(k)), t))
    assert v not in free_syms(out)


@given(st.lists(st.tuples(st.sampled_from([FX, FY]), ints), min_size=1, max_size=6), st.sampled_from([FX, FY]))
def test_select_store_chain_reads_last_write(writes, f):
    h = HEAP
    for g, k in writes:
        h = store(h, g, IntV(k))
    expected = next((IntV(k) for g, k in reversed(writes) if g == f), select(HEAP, f))
    assert apply_updates(select(h, f)) == expected


@given(ints, ints, names)
def test_right_override_property(a, b, name):
    v = Sym(name, INT)
    assert apply_updates(UpdApp(Parallel(Elementary(v, IntV(a)), Elementary(v, IntV(b))), v)) == IntV(b)


def test_sequent_formula_shape():
    s = Sequent([eq(V, IntV(1))], [eq(V, IntV(1))])
    f = s.formula()
    assert f.op == "=>"
    assert Sequent([], [TRUE]).formula() == TRUE
    assert and_(TRUE, TRUE) == TRUE
    assert Const(True, BOOL) == TRUE

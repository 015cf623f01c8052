"""Recursion engine: node values, memoization, degree handling."""

import pytest

from hhh4.engine import Engine, FamilyKey, InvalidDegrees, MemoConflict, MemoStore
from hhh4.series import GradedSeries, ONE_MINUS_Q, mono
from hhh4.torus_base import EvalMode, TorusBases, closure_factor, ft2, u_series

FULL = EvalMode.FULL_A
A0 = EvalMode.A0


def tp(i):
    return mono(1, t=i) + mono(1, a=1)


OPA = tp(0)


@pytest.fixture()
def engine():
    return Engine()


# -- family keys and memo -----------------------------------------------------


def test_family_key_validation():
    with pytest.raises(ValueError):
        FamilyKey("D", (1, 2))
    with pytest.raises(ValueError):
        FamilyKey("A", (1, 2))
    with pytest.raises(ValueError):
        FamilyKey.B(-1, 0)
    assert str(FamilyKey.A(1, 2, 0)) == "A(1,2,0)"


def test_memo_write_once():
    memo = MemoStore()
    k = FamilyKey.B(0, 0)
    memo.put(k, FULL, GradedSeries(mono(1)))
    memo.put(k, FULL, GradedSeries(mono(1)))  # identical re-put is a no-op
    with pytest.raises(MemoConflict):
        memo.put(k, FULL, GradedSeries(mono(2)))


def test_memo_determinism_across_orderings():
    b = TorusBases()
    e1, e2 = Engine(b), Engine(b)
    key = FamilyKey.A(0, 2, 1)
    first = e1.eval(key, FULL).to_text()
    e2.eval(FamilyKey.Btw2(0, 1), FULL)
    e2.eval(FamilyKey.JMC(1, 1), FULL)
    assert e2.eval(key, FULL).to_text() == first


# -- node values against closed forms ----------------------------------------


def test_k4_closed(engine):
    k4 = engine.k4_closed(FULL)
    assert k4 == GradedSeries(tp(3) * tp(2) * tp(1) * OPA)
    assert len(k4.numerator) == 15
    assert k4.numerator.coefficient(0, 3, 2) == 2  # the one doubled monomial
    assert engine.k4_closed(A0) == GradedSeries(mono(1, t=6))


def test_ctw3_base_and_step(engine):
    c00 = engine.eval(FamilyKey.Ctw3(0, 0), FULL)
    assert c00 == GradedSeries(tp(2) * tp(1) * OPA * OPA, 1)
    c10 = engine.eval(FamilyKey.Ctw3(1, 0), FULL)
    assert c10 == mono(1, t=-3) * engine.k4_closed(FULL) + mono(1, q=1, t=-3) * c00
    c02 = engine.eval(FamilyKey.Ctw3(0, 2), FULL)
    assert c02 == GradedSeries(tp(2) * tp(1)) * ONE_MINUS_Q * ft2(2, FULL)


def test_jmc_values(engine):
    for k in range(3):
        base = engine.eval(FamilyKey.JMC(0, k), FULL)
        bracket = GradedSeries(tp(2) * tp(1) * OPA) + mono(1, q=1) * tp(1) * u_series(k, FULL)
        assert base == mono(1, t=-2) * tp(2) * bracket
        step = engine.eval(FamilyKey.JMC(1, k), FULL)
        assert step == mono(1, t=-3) * engine.k4_closed(FULL) + mono(1, q=1, t=-3) * base
    # substituting ft2(0) and cancelling one (1-q) by hand
    jmc00 = mono(1, t=-2) * GradedSeries(tp(2) * tp(1)) * (
        GradedSeries(tp(2) * OPA) + GradedSeries(mono(1, q=1) * OPA * OPA, 1)
    )
    assert engine.eval(FamilyKey.JMC(0, 0), FULL) == jmc00


def test_btw3_values(engine):
    for k in range(3):
        assert engine.eval(FamilyKey.Btw3(0, k), FULL) == GradedSeries(tp(1) * OPA) * ft2(k, FULL)
    b10 = engine.eval(FamilyKey.Btw3(1, 0), FULL)
    expected = (
        mono(1, t=-2) * engine.eval(FamilyKey.Ctw3(1, 0), FULL)
        + mono(1, q=1, t=-4) * engine.eval(FamilyKey.Ctw3(0, 1), FULL)
        + mono(1, q=2, t=-4) * GradedSeries(tp(1) * OPA) * ft2(1, FULL)
    )
    assert b10 == expected
    assert engine.eval(FamilyKey.Btw3(0, 0), FULL) == GradedSeries(tp(1) * OPA * OPA * OPA, 2)


def test_btw23_values(engine):
    wrap = GradedSeries(tp(1)) * ONE_MINUS_Q + GradedSeries(mono(1, q=1) * OPA)
    for j in range(3):
        assert (
            engine.eval(FamilyKey.Btw23(0, j), FULL)
            == mono(1, t=-1) * tp(1) * wrap * ft2(j, FULL)
        )
    lhs = engine.eval(FamilyKey.Btw23(1, 0), FULL)
    rhs = (
        mono(1, t=-2) * engine.eval(FamilyKey.Ctw3(1, 0), FULL)
        + mono(1, q=1, t=-4) * engine.eval(FamilyKey.JMC(0, 0), FULL)
        + mono(1, q=2, t=-4) * engine.eval(FamilyKey.Btw23(0, 1), FULL)
    )
    assert lhs == rhs


def test_b_family(engine):
    b00 = engine.eval(FamilyKey.B(0, 0), FULL)
    assert b00 == GradedSeries(tp(1) * OPA * OPA * OPA, 2)
    assert b00 == engine.eval(FamilyKey.Btw3(0, 0), FULL)
    b01 = engine.eval(FamilyKey.B(0, 1), FULL)
    assert b01 == mono(1, t=-2) * GradedSeries(tp(2) * tp(1) * OPA * OPA, 1) + mono(
        1, q=1, t=-2
    ) * b00
    for n in range(3):
        assert engine.eval(FamilyKey.B(n, 0), FULL) == engine.eval(FamilyKey.Btw3(n, 0), FULL)


def test_btw2_family(engine):
    for n in range(3):
        assert engine.eval(FamilyKey.Btw2(n, 0), FULL) == engine.eval(
            FamilyKey.Btw23(n, 0), FULL
        )
    lhs = engine.eval(FamilyKey.Btw2(0, 1), FULL)
    rhs = mono(1, t=-2) * engine.eval(FamilyKey.Ctw3(0, 0), FULL) + mono(
        1, q=1, t=-2
    ) * engine.eval(FamilyKey.Btw23(0, 0), FULL)
    assert lhs == rhs
    wrap = GradedSeries(tp(1)) * ONE_MINUS_Q + GradedSeries(mono(1, q=1) * OPA)
    assert engine.eval(FamilyKey.Btw2(0, 0), FULL) == mono(1, t=-1) * tp(1) * wrap * GradedSeries(
        OPA * OPA, 2
    )


def test_a_family(engine):
    a000 = engine.eval(FamilyKey.A(0, 0, 0), FULL)
    assert a000 == GradedSeries(OPA ** 4, 3)
    a001 = engine.eval(FamilyKey.A(0, 0, 1), FULL)
    assert a001 == mono(1, t=-1) * GradedSeries(tp(1) * OPA ** 3, 2) + mono(
        1, q=1, t=-1
    ) * a000
    a010 = engine.eval(FamilyKey.A(0, 1, 0), FULL)
    expected = (
        mono(1, t=-1) * engine.eval(FamilyKey.B(0, 1), FULL)
        + mono(1, q=1, t=-2) * engine.eval(FamilyKey.Btw2(0, 0), FULL)
        + mono(1, q=2, t=-3) * engine.eval(FamilyKey.B(0, 0), FULL)
        + mono(1, q=3, t=-3) * a000
    )
    assert a010 == expected


# -- hhh of Coxeter braids -----------------------------------------------------


def test_hhh_unlink(engine):
    assert engine.hhh_coxeter((0, 0, 0, 0), FULL) == GradedSeries(OPA ** 4, 4)
    assert engine.hhh_coxeter((0, 0, 0, 0), FULL) == engine.bases.ft4(0, FULL)


def test_hhh_split_union(engine):
    unknots = GradedSeries(OPA * OPA, 2)
    for k in range(9):
        assert engine.hhh_coxeter((0, 0, k, k), FULL) == ft2(k, FULL) * unknots


def test_hhh_rejects_unsorted(engine):
    with pytest.raises(InvalidDegrees):
        engine.hhh_coxeter((2, 1, 3, 3), FULL)
    with pytest.raises(InvalidDegrees):
        engine.hhh_coxeter((0, 1, 2), FULL)
    with pytest.raises(InvalidDegrees):
        engine.hhh_coxeter((-1, 0, 0, 0), FULL)


def test_d4_never_enters():
    b = TorusBases()
    e1, e2 = Engine(b), Engine(b)
    s1 = e1.hhh_coxeter((0, 1, 2, 2), FULL)
    s2 = e2.hhh_coxeter((0, 1, 2, 9), FULL)
    assert s1.to_text() == s2.to_text()
    assert e1.memo.keys() == e2.memo.keys()


def test_a0_mode_commutes_with_specialization():
    b = TorusBases()
    engine = Engine(b)
    engine.hhh_coxeter((0, 4, 4, 4), FULL)
    engine.hhh_coxeter((0, 4, 4, 4), A0)
    full_keys = [(k, m) for (k, m) in engine.memo.keys() if m is FULL]
    assert full_keys
    for key, _ in full_keys:
        full_value = engine.eval(key, FULL)
        assert full_value.specialize_a0() == engine.eval(key, A0), str(key)

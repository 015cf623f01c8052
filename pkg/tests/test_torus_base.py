"""Full-twist inputs: 2-strand series, base-case tables, a0 reconstruction."""

import pytest

from hhh4.engine import Engine
from hhh4.ideal_oracle import hilb_table
from hhh4.series import GradedSeries, ONE_MINUS_Q, mono
from hhh4.torus_base import (
    BaseCaseTable,
    ChecksumMismatch,
    ConventionMismatch,
    EvalMode,
    MissingBaseCase,
    NotStabilized,
    ParseError,
    PositivityViolation,
    TorusBases,
    closure_factor,
    derive_ft4_a0,
    derive_ft4_a0_auto,
    ft2,
    make_entry,
    reconstruct_numerator,
    u_series,
)

FULL = EvalMode.FULL_A
A0 = EvalMode.A0


def tp(i):
    return mono(1, t=i) + mono(1, a=1)


OPA = tp(0)


# -- ft2 -----------------------------------------------------------------------


def test_ft2_unlink():
    assert ft2(0, FULL) == GradedSeries(OPA * OPA, 2)
    assert ft2(0, A0) == GradedSeries(mono(1), 2)


def test_ft2_one_twist():
    num = mono(1, t=-1) * tp(1) * OPA * ONE_MINUS_Q.numerator + mono(1, q=1, t=-1) * OPA * OPA
    assert ft2(1, FULL) == GradedSeries(num, 2)


def test_ft2_matches_closure_base():
    # (t^2+a)(t+a)(1-q) ft2(0) equals the closed 3-strand diagram value
    lhs = GradedSeries(tp(2) * tp(1)) * ONE_MINUS_Q * ft2(0, FULL)
    assert lhs == GradedSeries(tp(2) * tp(1) * OPA * OPA, 1)


def test_u_series_recursion():
    step = GradedSeries(mono(1, t=-1) * tp(1) * OPA)
    for k in range(1, 11):
        assert u_series(k, FULL) == step + mono(1, q=1, t=-1) * u_series(k - 1, FULL)
    assert u_series(0, FULL) == GradedSeries(OPA * OPA, 1)


def test_ft2_a0_specializes():
    for k in range(6):
        assert ft2(k, FULL).specialize_a0() == ft2(k, A0)


# -- ft4 supply ----------------------------------------------------------------


def test_ft4_unlink_matches_engine():
    bases = TorusBases()
    engine = Engine(bases)
    assert bases.ft4(0, FULL) == engine.hhh_coxeter((0, 0, 0, 0), FULL)
    assert bases.ft4(0, A0) == GradedSeries(mono(1), 4)


def test_ft4_full_requires_table():
    bases = TorusBases()
    with pytest.raises(MissingBaseCase):
        bases.ft4(1, FULL)


def test_ft4_a0_derived_and_reused():
    bases = TorusBases()
    s1 = bases.ft4(1, A0)
    s2 = bases.ft4(1, A0)
    assert s1 is s2  # memoized
    engine = Engine(bases)
    assert engine.hhh_coxeter((1, 1, 1, 1), A0) == s1


# -- base-case files ------------------------------------------------------------


def _synthetic_full_entry(n=1):
    """Machinery fixture: a0 layer is the honest derived value, a-layer invented."""
    bases = TorusBases()
    a0 = bases.ft4(n, A0)
    fake_a_part = GradedSeries(mono(1, t=-1, a=1) * OPA, 4)
    return make_entry(n, FULL, a0 + fake_a_part, "synthetic test fixture")


def test_table_round_trip():
    table = BaseCaseTable()
    table.add(_synthetic_full_entry())
    text = table.to_text()
    back = BaseCaseTable.from_text(text)
    assert back.to_text() == text
    assert back.get(1, FULL) == table.get(1, FULL)


def test_checksum_tamper_detected():
    table = BaseCaseTable()
    table.add(_synthetic_full_entry())
    lines = table.to_text().splitlines()
    tampered = []
    flipped = False
    for line in lines:
        if line.startswith("term ") and not flipped:
            parts = line.split()
            parts[1] = str(int(parts[1]) + 1)
            tampered.append(" ".join(parts))
            flipped = True
        else:
            tampered.append(line)
    with pytest.raises(ChecksumMismatch):
        BaseCaseTable.from_text("\n".join(tampered) + "\n")


def test_positivity_violation_rejected():
    bad = GradedSeries(mono(1) - mono(1, q=1, t=1), 0)
    entry = make_entry(1, FULL, bad, "bad")
    table = BaseCaseTable()
    with pytest.raises(PositivityViolation):
        table.add(entry)


def test_a0_entry_must_be_a_free():
    entry = make_entry(1, A0, GradedSeries(OPA, 4), "bad")
    table = BaseCaseTable()
    with pytest.raises(ParseError):
        table.add(entry)


def test_header_required():
    with pytest.raises(ParseError):
        BaseCaseTable.from_text("family FT4\n")


def test_imported_full_entry_feeds_engine_and_specializes():
    entry = _synthetic_full_entry()
    table = BaseCaseTable()
    table.add(entry)
    bases = TorusBases(table=table)
    assert bases.ft4(1, FULL) == entry.series
    # a0 layer of any imported full entry must match the derived a0 value
    assert entry.series.specialize_a0() == bases.ft4(1, A0)
    engine = Engine(bases)
    series = engine.hhh_coxeter((1, 1, 1, 1), FULL)
    assert series == entry.series


# -- a0 reconstruction -----------------------------------------------------------


def test_reconstruct_whole_ring():
    table = hilb_table((0, 0, 0, 0), 6)
    assert reconstruct_numerator(table.dims, 6) == {(0, 0): 1}
    series, shift = derive_ft4_a0(0, table.dims, 6)
    assert series == GradedSeries(mono(1), 4)
    assert shift == 0


def test_reconstruct_single_pair_matches_engine():
    # the same pipeline on J(0,0,1) gives (q + t - qt), match after shift t^-1
    table = hilb_table((0, 0, 1, 1), 8)
    num = reconstruct_numerator(table.dims, 8)
    assert num == {(1, 0): 1, (0, 1): 1, (1, 1): -1}
    shifted = GradedSeries(
        sum((mono(c, q=i, t=j - 1) for (i, j), c in num.items()), mono(0)), 4
    )
    engine = Engine()
    assert shifted == engine.hhh_coxeter((0, 0, 1, 1), A0)


def test_derive_requires_stabilization():
    table = hilb_table((1, 1, 1, 1), 8)
    with pytest.raises(NotStabilized):
        derive_ft4_a0(1, table.dims, 8)  # numerator has degree 9


def test_derive_needs_full_coverage():
    table = hilb_table((1, 1, 1, 1), 6)
    with pytest.raises(ValueError):
        derive_ft4_a0(1, table.dims, 12)


def test_derive_convention_anchor_guard():
    from math import comb

    table = hilb_table((1, 1, 1, 1), 12)
    # overlay a full t^6/((1-q)^4 (1-t)^4) series: the reconstruction stays
    # stabilized but its q^0 layer becomes {6: 2}, which must be rejected
    doctored = {
        (p, r): v + (comb(p + 3, 3) * comb(r - 6 + 3, 3) if r >= 6 else 0)
        for (p, r), v in table.dims.items()
    }
    with pytest.raises(ConventionMismatch):
        derive_ft4_a0(1, doctored, 12)


def test_derive_auto_stabilizes_and_is_idempotent():
    series, shift, order = derive_ft4_a0_auto(1)
    assert shift == 6
    assert order == 12
    bigger = hilb_table((1, 1, 1, 1), order + 2)
    series2, shift2 = derive_ft4_a0(1, bigger.dims, order + 2)
    assert series2 == series and shift2 == shift


def test_derived_value_is_positive_and_a_free():
    series, _, _ = derive_ft4_a0_auto(1)
    assert series.expand(12).min_coefficient() >= 0
    assert all(a == 0 for (_, _, a), _ in series.numerator)

"""Cross-checks between the recursion engine and the ideal oracle.

The bigraded Hilbert series of J(d1..d4) equals the a = 0 homology series
of the Coxeter braid closure divided by (1-t)^4, up to one overall
monomial in q and t: the grading normalization of the closure is not
pinned down, so the shift is detected from the data, reported, and
required to be a single monomial consistent over the whole comparison
range.  On every case computed here it comes out as t^-(3d1 + 2d2 + d3),
the sum of the six pairwise ideal exponents.

Positivity reports are the computational shadow of parity: the recursion
only ever adds, so a correctly computed series expands with nonnegative
coefficients.

All comparisons are exact integer equality; there are no tolerances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb

from .engine import Engine, EvalMode, FamilyKey, validate_degrees
from .ideal_oracle import BidegreeTable, hilb_table
from .series import GradedSeries, ONE_MINUS_Q, geom_sum, mono
from .torus_base import closure_factor, ft2

__all__ = [
    "AmbiguousShift",
    "PositivityReport",
    "MatchReport",
    "CrossCheckReport",
    "positivity_check",
    "engine_over_one_minus_t4",
    "compare_with_ideal",
    "closed_form_cross_checks",
]


class AmbiguousShift(RuntimeError):
    """No single monomial aligns the engine and oracle tables."""


@dataclass
class PositivityReport:
    """Minimum expanded coefficient of a series; pass iff nonnegative."""

    label: str
    order: int
    min_coefficient: int

    @property
    def passed(self) -> bool:
        return self.min_coefficient >= 0

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "order": self.order,
            "min_coefficient": self.min_coefficient,
            "verdict": "pass" if self.passed else "fail",
        }


@dataclass
class MatchReport:
    """Entrywise engine-vs-oracle comparison with the detected shift.

    The shift (sq, st) satisfies  oracle(p, r) = engine_side(p - sq, r - st)
    where engine_side is the a = 0 series divided by (1-t)^4.
    """

    d: tuple[int, int, int, int]
    max_total: int
    shift: tuple[int, int]
    mismatches: list[tuple[tuple[int, int], int, int]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.mismatches

    def to_json_dict(self) -> dict:
        return {
            "d": list(self.d),
            "max_total": self.max_total,
            "shift": {"q": self.shift[0], "t": self.shift[1]},
            "verdict": "pass" if self.passed else "fail",
            "mismatches": [
                {"p": p, "r": r, "oracle": o, "engine": e}
                for ((p, r), o, e) in self.mismatches
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), separators=(",", ":")) + "\n"

    def to_text(self) -> str:
        d = ",".join(map(str, self.d))
        lines = [
            f"match d {d} max {self.max_total} shift q^{self.shift[0]} t^{self.shift[1]} "
            f"verdict {'pass' if self.passed else 'fail'}"
        ]
        for (p, r), o, e in self.mismatches:
            lines.append(f"mismatch {p} {r} oracle {o} engine {e}")
        lines.append("end")
        return "\n".join(lines) + "\n"


def positivity_check(series: GradedSeries, order: int, label: str = "") -> PositivityReport:
    """Expand to the given q-order and report the minimum coefficient."""
    return PositivityReport(label, order, series.expand(order).min_coefficient())


def engine_over_one_minus_t4(
    series: GradedSeries, q_order: int, t_upper: int
) -> dict[tuple[int, int], int]:
    """Coefficients of series/(1-t)^4 on q^i t^j for i <= q_order, j <= t_upper.

    The series must be an a = 0 value; t exponents may be negative, and
    every j from the t-valuation up to t_upper is produced.
    """
    ct = series.expand(q_order)
    rows: dict[int, dict[int, int]] = {}
    for (q, t, a), c in ct.entries.items():
        if a:
            raise ValueError("series has a-terms; specialize to a = 0 first")
        rows.setdefault(q, {})[t] = c
    out: dict[tuple[int, int], int] = {}
    for q, row in rows.items():
        for j in range(min(row), t_upper + 1):
            v = sum(c * comb(3 + j - t, 3) for t, c in row.items() if t <= j)
            if v:
                out[(q, j)] = v
    return out


def _min_cell(entries: dict[tuple[int, int], int]) -> tuple[int, int] | None:
    live = [(p + r, p, r) for (p, r), v in entries.items() if v]
    if not live:
        return None
    _, p, r = min(live)
    return (p, r)


def compare_with_ideal(
    d,
    max_total: int,
    engine: Engine | None = None,
    oracle_table: BidegreeTable | None = None,
    threads: int = 1,
    cache=None,
    method: str = "auto",
) -> MatchReport:
    """Compare the a = 0 engine series against the ideal Hilbert table.

    Propagates MissingBaseCase when d1 >= 1 and no a0 base can be obtained.
    Raises AmbiguousShift when even the minimal nonzero entries of the two
    tables cannot be aligned by a single monomial.
    """
    degrees = validate_degrees(d)
    engine = engine if engine is not None else Engine()
    if oracle_table is None:
        oracle_table = hilb_table(degrees, max_total, threads=threads, cache=cache, method=method)
    if oracle_table.max_total < max_total:
        raise ValueError("oracle table does not cover the requested range")
    series = engine.hhh_coxeter(degrees, EvalMode.A0)

    O = {k: v for k, v in oracle_table.dims.items() if k[0] + k[1] <= max_total}
    E = engine_over_one_minus_t4(series, max_total, max_total)
    o_min = _min_cell(O)
    e_min = _min_cell(E)
    if o_min is None or e_min is None:
        raise AmbiguousShift(
            f"d={degrees}: a table is identically zero up to total degree {max_total}"
        )
    shift = (o_min[0] - e_min[0], o_min[1] - e_min[1])
    if O[o_min] != E[e_min]:
        raise AmbiguousShift(
            f"d={degrees}: minimal entries differ ({O[o_min]} vs {E[e_min]}); "
            f"no monomial aligns the tables"
        )
    if shift[0] < 0 or shift[1] < 0:
        E = engine_over_one_minus_t4(
            series, max_total + max(0, -shift[0]), max_total + max(0, -shift[1])
        )

    mismatches: list[tuple[tuple[int, int], int, int]] = []
    for (p, r), v in sorted(O.items(), key=lambda kv: (kv[0][0] + kv[0][1], kv[0][0])):
        ev = E.get((p - shift[0], r - shift[1]), 0)
        if ev != v:
            mismatches.append(((p, r), v, ev))
    # engine support must not stick out of the oracle's quadrant
    for (i, j), ev in sorted(E.items(), key=lambda kv: (kv[0][0] + kv[0][1], kv[0][0])):
        p, r = i + shift[0], j + shift[1]
        if p + r <= max_total and (p < 0 or r < 0):
            mismatches.append(((p, r), 0, ev))
    return MatchReport(oracle_table.d, max_total, shift, mismatches)


# ---------------------------------------------------------------------------
# internal closed-form consistency
# ---------------------------------------------------------------------------


@dataclass
class CrossCheckReport:
    checks: list[tuple[str, bool]] = field(default_factory=list)
    failures: list[tuple[str, str, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)

    def record(self, name: str, lhs: GradedSeries, rhs: GradedSeries) -> None:
        ok = lhs == rhs
        self.checks.append((name, ok))
        if not ok:
            self.failures.append((name, lhs.to_text(), rhs.to_text()))

    def to_text(self) -> str:
        lines = [f"cross-checks {len(self.checks)} verdict {'pass' if self.passed else 'fail'}"]
        for name, ok in self.checks:
            if not ok:
                lines.append(f"fail {name}")
        lines.append("end")
        return "\n".join(lines) + "\n"


def closed_form_cross_checks(
    n_max: int = 6, k_max: int = 6, mode: EvalMode = EvalMode.FULL_A
) -> CrossCheckReport:
    """Exact identities between closed forms and unrolled recursions.

    (i)   the twisted closed form equals the unrolled one-step recursion
          with twisted base, for all n <= n_max, k <= k_max;
    (ii)  the untwisted closed form (explicit (1+a)^2/(1-q) tail) equals
          the k = 0 twisted value;
    (iii) the one-step and two-step expansions of the twisted B(n, 0)
          recursion agree after collecting powers.
    """
    engine = Engine()
    report = CrossCheckReport()
    k4 = engine.k4_closed(mode)

    def ctw3_unrolled(n: int, k: int) -> GradedSeries:
        if n == 0:
            base = GradedSeries(closure_factor(2, mode) * closure_factor(1, mode))
            return base * ONE_MINUS_Q * ft2(k, mode)
        return mono(1, t=-3) * k4 + mono(1, q=1, t=-3) * ctw3_unrolled(n - 1, k)

    for n in range(n_max + 1):
        for k in range(k_max + 1):
            report.record(
                f"twisted-closed-vs-recursion n={n} k={k}",
                engine.eval(FamilyKey.Ctw3(n, k), mode),
                ctw3_unrolled(n, k),
            )

    opa = closure_factor(0, mode)
    for n in range(n_max + 1):
        closed = mono(1, t=-3) * geom_sum((1, -3, 0), n) * k4 + mono(
            1, q=n, t=-3 * n
        ) * GradedSeries(
            closure_factor(2, mode) * closure_factor(1, mode) * opa * opa
        ).over_one_minus_q()
        report.record(
            f"untwisted-closed-form n={n}",
            engine.eval(FamilyKey.Ctw3(n, 0), mode),
            closed,
        )

    for n in range(1, n_max + 1):
        for k in range(k_max + 1):
            one_step = mono(1, t=-2) * engine.eval(FamilyKey.Ctw3(n, k), mode) + mono(
                1, q=1, t=-2
            ) * (
                mono(1, t=-2) * engine.eval(FamilyKey.Ctw3(n - 1, k + 1), mode)
                + mono(1, q=1, t=-2) * engine.eval(FamilyKey.Btw3(n - 1, k + 1), mode)
            )
            two_step = (
                mono(1, t=-2) * engine.eval(FamilyKey.Ctw3(n, k), mode)
                + mono(1, q=1, t=-4) * engine.eval(FamilyKey.Ctw3(n - 1, k + 1), mode)
                + mono(1, q=2, t=-4) * engine.eval(FamilyKey.Btw3(n - 1, k + 1), mode)
            )
            report.record(f"twisted-B-one-vs-two-step n={n} k={k}", one_step, two_step)

    return report

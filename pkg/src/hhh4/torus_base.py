"""Full-twist homology inputs for the four-strand recursion.

Two external series feed the recursion engine:

* ``ft2(k)`` -- the series of the closed 2-strand full twist FT2^k.  It is
  derived here from the local calculus: insert a K1 (cost 1/(1-q)), grow it
  through one wrap (K1 JM2 = t^-1 K2 + q t^-1 K1), let K2 absorb the
  remaining twists, and close up (factor t + a per strand).  Writing
  u(k) = (1-q) ft2(k) this gives u(0) = (1+a)^2/(1-q) and
  u(k) = t^-1 (t+a)(1+a) + q t^-1 u(k-1).

* ``ft4(n)`` -- the series of the closed 4-strand full twist FT4^n.  For
  n >= 1 the recursion cannot reduce it internally, so full-a values are
  imported from a checksummed base-case table, while the a = 0 layer is
  reconstructed exactly from the Hilbert series of the intersection ideal
  J(n, n, n, n) computed by the ideal oracle.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Mapping

from .series import (
    ONE_MINUS_Q,
    GradedSeries,
    LaurentPoly,
    mono,
)

__all__ = [
    "EvalMode",
    "MissingBaseCase",
    "ParseError",
    "ChecksumMismatch",
    "PositivityViolation",
    "NotStabilized",
    "NegativeCoefficient",
    "ConventionMismatch",
    "closure_factor",
    "ft2",
    "u_series",
    "BaseCaseEntry",
    "BaseCaseTable",
    "TorusBases",
    "reconstruct_numerator",
    "derive_ft4_a0",
    "derive_ft4_a0_auto",
]

FORMAT_HEADER = "hhh-basecase v1"


class EvalMode(str, Enum):
    """Evaluation mode: full three-variable series, or the a = 0 layer."""

    FULL_A = "fullA"
    A0 = "a0"

    @classmethod
    def parse(cls, text: str) -> "EvalMode":
        for m in cls:
            if m.value == text:
                return m
        raise ValueError(f"unknown evaluation mode {text!r}")


class MissingBaseCase(Exception):
    """FT4^n requested in full-a mode with no table entry for n."""

    def __init__(self, n: int, mode: "EvalMode"):
        self.n = n
        self.mode = mode
        super().__init__(
            f"no base case for FT4^{n} in mode {mode.value}; import a base-case "
            f"table or use the a0 mode"
        )


class ParseError(ValueError):
    """Malformed base-case file."""


class ChecksumMismatch(ValueError):
    """Base-case block content does not match its checksum line."""


class PositivityViolation(ValueError):
    """A base-case entry expands with a negative coefficient."""


class NotStabilized(RuntimeError):
    """Numerator reconstruction changed between two successive orders."""


class NegativeCoefficient(RuntimeError):
    """Reconstructed series violates positivity; convention or oracle bug."""


class ConventionMismatch(RuntimeError):
    """Reconstructed numerator has an unexpected q^0 layer."""


def closure_factor(i: int, mode: EvalMode = EvalMode.FULL_A) -> LaurentPoly:
    """Closure multiplier t^i + a of one strand through K_{i+1} (t^i at a=0)."""
    if i < 0:
        raise ValueError("closure factor index must be nonnegative")
    if mode is EvalMode.A0:
        return mono(1, t=i)
    return mono(1, t=i) + mono(1, a=1)


@lru_cache(maxsize=None)
def u_series(k: int, mode: EvalMode = EvalMode.FULL_A) -> GradedSeries:
    """u(k) = (1-q) ft2(k), the closed 2-strand twist with one K1 inserted."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    opa = closure_factor(0, mode)
    if k == 0:
        return GradedSeries(opa * opa, 1)
    step = GradedSeries(mono(1, t=-1) * closure_factor(1, mode) * opa, 0)
    return step + GradedSeries(mono(1, q=1, t=-1), 0) * u_series(k - 1, mode)


def ft2(k: int, mode: EvalMode = EvalMode.FULL_A) -> GradedSeries:
    """Series of the closed 2-strand full twist FT2^k (torus link T(2, 2k))."""
    return u_series(k, mode).over_one_minus_q()


def _ft4_unlink(mode: EvalMode) -> GradedSeries:
    opa = closure_factor(0, mode)
    return GradedSeries(opa ** 4, 4)


# ---------------------------------------------------------------------------
# base-case table (import / export / validation)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BaseCaseEntry:
    n: int
    mode: EvalMode
    series: GradedSeries
    provenance: str
    checksum: str

    def canonical_lines(self) -> list[str]:
        lines = [
            "family FT4",
            f"n {self.n}",
            f"mode {self.mode.value}",
            f"denom-exponent {self.series.denom_exp}",
        ]
        for (q, t, a), c in self.series.numerator.sorted_terms():
            lines.append(f"term {c} {q} {t} {a}")
        return lines


def _block_checksum(lines: list[str]) -> str:
    return hashlib.sha256(("\n".join(lines) + "\n").encode()).hexdigest()


def make_entry(n: int, mode: EvalMode, series: GradedSeries, provenance: str = "") -> BaseCaseEntry:
    entry = BaseCaseEntry(n, mode, series, provenance, "")
    return BaseCaseEntry(n, mode, series, provenance, _block_checksum(entry.canonical_lines()))


@dataclass
class BaseCaseTable:
    """Validated FT4^n series, keyed by (n, mode)."""

    entries: dict[tuple[int, EvalMode], BaseCaseEntry] = field(default_factory=dict)

    def add(self, entry: BaseCaseEntry, validate: bool = True) -> None:
        if validate:
            _validate_entry(entry)
        self.entries[(entry.n, entry.mode)] = entry

    def get(self, n: int, mode: EvalMode) -> GradedSeries | None:
        e = self.entries.get((n, mode))
        return e.series if e else None

    def to_text(self) -> str:
        lines = [FORMAT_HEADER]
        for key in sorted(self.entries, key=lambda k: (k[0], k[1].value)):
            entry = self.entries[key]
            block = entry.canonical_lines()
            lines.extend(block)
            lines.append(f"checksum {_block_checksum(block)}")
            lines.append("end")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, validate: bool = True) -> "BaseCaseTable":
        lines = text.splitlines()
        if not lines or lines[0] != FORMAT_HEADER:
            raise ParseError(f"missing header {FORMAT_HEADER!r}")
        table = cls()
        i = 1
        while i < len(lines):
            if not lines[i].strip():
                i += 1
                continue
            if lines[i] != "family FT4":
                raise ParseError(f"expected 'family FT4' at line {i + 1}, got {lines[i]!r}")
            block_start = i
            fields: dict[str, str] = {}
            terms: dict[tuple[int, int, int], int] = {}
            while i < len(lines) and not lines[i].startswith("checksum "):
                parts = lines[i].split(maxsplit=1)
                if parts[0] == "term":
                    nums = parts[1].split()
                    if len(nums) != 4:
                        raise ParseError(f"bad term line: {lines[i]!r}")
                    c, q, t, a = (int(x) for x in nums)
                    if (q, t, a) in terms:
                        raise ParseError(f"duplicate term {(q, t, a)}")
                    terms[(q, t, a)] = c
                elif parts[0] in ("family", "n", "mode", "denom-exponent"):
                    fields[parts[0]] = parts[1] if len(parts) > 1 else ""
                else:
                    raise ParseError(f"unexpected line in block: {lines[i]!r}")
                i += 1
            if i >= len(lines):
                raise ParseError("block missing checksum line")
            stated = lines[i].split()[1]
            block_lines = lines[block_start:i]
            if _block_checksum(block_lines) != stated:
                raise ChecksumMismatch(
                    f"checksum mismatch for FT4^{fields.get('n', '?')} block"
                )
            i += 1
            if i >= len(lines) or lines[i] != "end":
                raise ParseError("block missing 'end' line")
            i += 1
            try:
                n = int(fields["n"])
                mode = EvalMode.parse(fields["mode"])
                denom = int(fields["denom-exponent"])
            except KeyError as exc:
                raise ParseError(f"block missing field {exc}") from exc
            series = GradedSeries(LaurentPoly(terms), denom)
            if series.numerator.terms != terms or series.denom_exp != denom:
                raise ParseError(f"FT4^{n} block is not in canonical form")
            entry = BaseCaseEntry(n, mode, series, "imported", stated)
            table.add(entry, validate=validate)
        return table


def _validate_entry(entry: BaseCaseEntry, order: int = 10) -> None:
    if entry.n < 1:
        raise ParseError("base-case entries are for n >= 1 only")
    if entry.mode is EvalMode.A0:
        for (_, _, a), _c in entry.series.numerator:
            if a:
                raise ParseError(f"a0 entry for n={entry.n} contains a-terms")
    table = entry.series.expand(order)
    if table.min_coefficient() < 0:
        raise PositivityViolation(
            f"FT4^{entry.n} ({entry.mode.value}) has a negative coefficient "
            f"in its order-{order} expansion"
        )


# ---------------------------------------------------------------------------
# a0 reconstruction from the ideal oracle
# ---------------------------------------------------------------------------


def reconstruct_numerator(
    dims: Mapping[tuple[int, int], int], order: int
) -> dict[tuple[int, int], int]:
    """Numerator N(q, t) = H(q, t) (1-q)^4 (1-t)^4 truncated to total degree order.

    ``dims`` must cover every bidegree with p + r <= order; the returned
    coefficients are exact for all monomials q^i t^j with i + j <= order.
    """
    binom4 = (1, -4, 6, -4, 1)
    out: dict[tuple[int, int], int] = {}
    for (p, r), dim in dims.items():
        if p + r > order or not dim:
            continue
        for i, ci in enumerate(binom4):
            for j, cj in enumerate(binom4):
                key = (p + i, r + j)
                if key[0] + key[1] > order:
                    continue
                v = out.get(key, 0) + dim * ci * cj
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
    return out


def _numerator_to_series(num: dict[tuple[int, int], int], t_shift: int) -> GradedSeries:
    poly = LaurentPoly({(i, j - t_shift, 0): c for (i, j), c in num.items()})
    return GradedSeries(poly, 4)


def derive_ft4_a0(
    n: int,
    oracle_table: "Mapping[tuple[int, int], int] | object",
    order: int,
) -> tuple[GradedSeries, int]:
    """Reconstruct the a = 0 series of FT4^n from ideal Hilbert dimensions.

    The Hilbert series of J(n, n, n, n) equals the a = 0 homology series of
    the closed braid divided by (1-t)^4, up to one overall monomial.  The
    reconstruction multiplies the tabulated dimensions by (1-q)^4 (1-t)^4,
    accepts the numerator once it is unchanged between orders order-2 and
    order, and normalizes by the t-power of its q^0 layer.  The q^0 layer of
    the numerator is always the single monomial t^s with s the sum of the
    six pairwise exponents (here s = 6n): the x-degree-zero slice of the
    ideal is the principal ideal generated by the product of the pairwise
    y-differences.

    Returns the normalized series together with the recorded t-shift s.

    Raises NotStabilized when the truncations disagree, NegativeCoefficient
    when the result violates positivity, and ConventionMismatch when the
    q^0 layer is not the expected single monomial.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if order < 2:
        raise ValueError("order must be at least 2")
    dims = _dims_mapping(oracle_table)
    covered = {pr for pr in dims if pr[0] + pr[1] <= order}
    need = {(p, r) for p in range(order + 1) for r in range(order + 1 - p)}
    missing = need - covered
    if missing:
        raise ValueError(f"oracle table does not cover bidegrees {sorted(missing)[:4]}...")

    full = reconstruct_numerator(dims, order)
    trunc = {k: v for k, v in full.items() if k[0] + k[1] <= order - 2}
    if full != trunc:
        extra = sorted(set(full) - set(trunc))
        raise NotStabilized(
            f"numerator for FT4^{n} gained terms at total degrees "
            f"{sorted({i + j for i, j in extra})} between orders {order - 2} and {order}"
        )

    q0_layer = {j: c for (i, j), c in full.items() if i == 0}
    expected_shift = 6 * n
    if q0_layer != {expected_shift: 1}:
        raise ConventionMismatch(
            f"q^0 layer of the FT4^{n} numerator is {q0_layer}, "
            f"expected {{{expected_shift}: 1}}"
        )

    series = _numerator_to_series(full, expected_shift)
    check = series.expand(max(10, order)).min_coefficient()
    if check < 0:
        raise NegativeCoefficient(
            f"reconstructed FT4^{n} series has a negative coefficient ({check})"
        )
    return series, expected_shift


def _dims_mapping(oracle_table: object) -> Mapping[tuple[int, int], int]:
    if isinstance(oracle_table, Mapping):
        return oracle_table
    dims = getattr(oracle_table, "dims", None)
    if dims is None:
        raise TypeError("oracle table must be a mapping or have a .dims attribute")
    return dims


def derive_ft4_a0_auto(
    n: int,
    *,
    threads: int = 1,
    cache=None,
    start_order: int | None = None,
    max_order: int | None = None,
    method: str = "auto",
) -> tuple[GradedSeries, int, int]:
    """Derive ft4(n, a0), raising the truncation order until stabilized.

    Returns (series, t_shift, order_used).
    """
    from . import ideal_oracle

    if n == 0:
        return _ft4_unlink(EvalMode.A0), 0, 0
    order = start_order if start_order is not None else 6 * n + 2
    if order % 2:
        order += 1
    cap = max_order if max_order is not None else 6 * n + 12
    d = (n, n, n, n)
    while True:
        table = ideal_oracle.hilb_table(d, order, threads=threads, cache=cache, method=method)
        try:
            series, shift = derive_ft4_a0(n, table.dims, order)
            return series, shift, order
        except NotStabilized:
            if order + 2 > cap:
                raise
            order += 2


# ---------------------------------------------------------------------------
# combined supply used by the engine
# ---------------------------------------------------------------------------


class TorusBases:
    """Supplies ft2 and ft4 to the engine, with optional persistent cache.

    Full-a values of FT4^n, n >= 1, come only from an imported base-case
    table (or a cache populated by one); requesting them otherwise raises
    MissingBaseCase.  a0 values for n >= 1 are derived from the ideal oracle
    on first use and then reused.
    """

    def __init__(
        self,
        table: BaseCaseTable | None = None,
        cache=None,
        threads: int = 1,
        a0_deriver: Callable[[int], GradedSeries] | None = None,
    ):
        self.table = table if table is not None else BaseCaseTable()
        self.cache = cache
        self.threads = threads
        self._a0_deriver = a0_deriver
        self._derived: dict[int, GradedSeries] = {}
        self.derivation_orders: dict[int, int] = {}

    def ft2(self, k: int, mode: EvalMode) -> GradedSeries:
        return ft2(k, mode)

    def ft4(self, n: int, mode: EvalMode) -> GradedSeries:
        if n < 0:
            raise ValueError("n must be nonnegative")
        if n == 0:
            return _ft4_unlink(mode)
        hit = self.table.get(n, mode)
        if hit is not None:
            return hit
        if mode is EvalMode.FULL_A:
            cached = self._cache_get(n, mode)
            if cached is not None:
                return cached
            raise MissingBaseCase(n, mode)
        return self._ft4_a0(n)

    def _ft4_a0(self, n: int) -> GradedSeries:
        if n in self._derived:
            return self._derived[n]
        cached = self._cache_get(n, EvalMode.A0)
        if cached is not None:
            self._derived[n] = cached
            return cached
        if self._a0_deriver is not None:
            series = self._a0_deriver(n)
        else:
            series, _shift, order = derive_ft4_a0_auto(
                n, threads=self.threads, cache=self.cache
            )
            self.derivation_orders[n] = order
        self._derived[n] = series
        self._cache_put(n, EvalMode.A0, series)
        return series

    def _cache_key(self, n: int, mode: EvalMode) -> str:
        return f"ft4 {n} {mode.value}"

    def _cache_get(self, n: int, mode: EvalMode) -> GradedSeries | None:
        if self.cache is None:
            return None
        text = self.cache.get(self._cache_key(n, mode))
        if text is None:
            return None
        return GradedSeries.from_text(text)

    def _cache_put(self, n: int, mode: EvalMode, series: GradedSeries) -> None:
        if self.cache is not None:
            self.cache.put(self._cache_key(n, mode), series.to_text())

    def import_table(self, table: BaseCaseTable) -> None:
        """Merge imported entries and mirror them into the persistent cache."""
        for entry in table.entries.values():
            self.table.add(entry, validate=False)
            if self.cache is not None:
                self.cache.put(self._cache_key(entry.n, entry.mode), entry.series.to_text())

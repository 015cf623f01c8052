"""Exact arithmetic for graded homology series.

Every homology value computed by this package lives in the ring

    R = Z[q, a][t, t^-1][(1-q)^-1],

represented as a Laurent-polynomial numerator over a denominator (1-q)^e.
A value is *canonical* when either e = 0 or (1-q) does not divide the
numerator; two values are equal iff their canonical forms coincide, so
equality testing is purely syntactic.

Monomials are triples (q_exp, t_exp, a_exp) with q_exp >= 0, a_exp >= 0
and t_exp of any sign.  Coefficients are arbitrary-precision integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterable, Iterator, Mapping

Mono = tuple[int, int, int]

__all__ = [
    "Mono",
    "LaurentPoly",
    "GradedSeries",
    "CoeffTable",
    "mono",
    "geom_sum",
    "to_qta",
    "ZERO",
    "ONE",
    "Q",
    "T",
    "TINV",
    "A",
    "ONE_MINUS_Q",
]


def _check_mono(m: Mono) -> Mono:
    q, t, a = m
    if q < 0 or a < 0:
        raise ValueError(f"monomial {m} has a negative q or a exponent")
    return (int(q), int(t), int(a))


class LaurentPoly:
    """Element of Z[q, a][t, t^-1] as a sparse exponent -> coefficient map."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Mono, int] | None = None):
        clean: dict[Mono, int] = {}
        if terms:
            for m, c in terms.items():
                if c:
                    clean[_check_mono(m)] = int(c)
        self._terms = clean

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def term(coef: int, q: int = 0, t: int = 0, a: int = 0) -> "LaurentPoly":
        return LaurentPoly({(q, t, a): coef})

    # -- basic queries ---------------------------------------------------------

    @property
    def terms(self) -> dict[Mono, int]:
        return dict(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[Mono, int]]:
        return iter(self._terms.items())

    def sorted_terms(self) -> list[tuple[Mono, int]]:
        """Terms in the canonical (q_exp, t_exp, a_exp) lexicographic order."""
        return sorted(self._terms.items())

    def coefficient(self, q: int, t: int, a: int) -> int:
        return self._terms.get((q, t, a), 0)

    def q_degree(self) -> int:
        """Largest q exponent; -1 for the zero polynomial."""
        return max((m[0] for m in self._terms), default=-1)

    def t_valuation(self) -> int:
        """Smallest t exponent; 0 for the zero polynomial."""
        return min((m[1] for m in self._terms), default=0)

    def t_degree(self) -> int:
        return max((m[1] for m in self._terms), default=0)

    # -- ring operations ---------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LaurentPoly) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __neg__(self) -> "LaurentPoly":
        out = LaurentPoly()
        out._terms = {m: -c for m, c in self._terms.items()}
        return out

    def __add__(self, other: "LaurentPoly | int"):
        if not isinstance(other, (LaurentPoly, int)):
            return NotImplemented
        other = _as_poly(other)
        res = dict(self._terms)
        for m, c in other._terms.items():
            s = res.get(m, 0) + c
            if s:
                res[m] = s
            else:
                res.pop(m, None)
        out = LaurentPoly()
        out._terms = res
        return out

    __radd__ = __add__

    def __sub__(self, other: "LaurentPoly | int"):
        if not isinstance(other, (LaurentPoly, int)):
            return NotImplemented
        return self + (-_as_poly(other))

    def __rsub__(self, other: "LaurentPoly | int"):
        if not isinstance(other, (LaurentPoly, int)):
            return NotImplemented
        return _as_poly(other) + (-self)

    def __mul__(self, other: "LaurentPoly | int"):
        if not isinstance(other, (LaurentPoly, int)):
            return NotImplemented
        if isinstance(other, int):
            out = LaurentPoly()
            if other:
                out._terms = {m: c * other for m, c in self._terms.items()}
            return out
        res: dict[Mono, int] = {}
        for (q1, t1, a1), c1 in self._terms.items():
            for (q2, t2, a2), c2 in other._terms.items():
                m = (q1 + q2, t1 + t2, a1 + a2)
                s = res.get(m, 0) + c1 * c2
                if s:
                    res[m] = s
                else:
                    res.pop(m, None)
        out = LaurentPoly()
        out._terms = res
        return out

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LaurentPoly":
        if n < 0:
            raise ValueError("negative power of a Laurent polynomial")
        result = ONE_POLY
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- specializations -----------------------------------------------------

    def specialize_a0(self) -> "LaurentPoly":
        """Drop every term with a positive a exponent."""
        out = LaurentPoly()
        out._terms = {m: c for m, c in self._terms.items() if m[2] == 0}
        return out

    def divide_one_minus_q(self) -> "LaurentPoly | None":
        """Exact quotient by (1 - q), or None when not divisible.

        Viewing the polynomial in q with coefficients in Z[a][t, t^-1],
        f = (1-q) g holds iff the prefix sums of the q-coefficients of f
        telescope to zero; the prefix sums are then the coefficients of g.
        """
        groups: dict[tuple[int, int], dict[int, int]] = {}
        for (q, t, a), c in self._terms.items():
            groups.setdefault((t, a), {})[q] = c
        res: dict[Mono, int] = {}
        for (t, a), qs in groups.items():
            if sum(qs.values()) != 0:
                return None
            acc = 0
            for q in range(max(qs)):
                acc += qs.get(q, 0)
                if acc:
                    res[(q, t, a)] = acc
        out = LaurentPoly()
        out._terms = res
        return out

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        bits = []
        for (q, t, a), c in self.sorted_terms():
            factors = []
            if c != 1 or (q, t, a) == (0, 0, 0):
                factors.append(str(c))
            for name, e in (("q", q), ("t", t), ("a", a)):
                if e == 1:
                    factors.append(name)
                elif e:
                    factors.append(f"{name}^{e}")
            bits.append("*".join(factors))
        return " + ".join(bits)


def _as_poly(x: "LaurentPoly | int") -> LaurentPoly:
    if isinstance(x, LaurentPoly):
        return x
    return LaurentPoly.term(x)


def mono(coef: int, q: int = 0, t: int = 0, a: int = 0) -> LaurentPoly:
    """Single-term polynomial coef * q^q t^t a^a."""
    return LaurentPoly.term(coef, q, t, a)


ZERO_POLY = LaurentPoly()
ONE_POLY = LaurentPoly.term(1)
Q_POLY = LaurentPoly.term(1, q=1)
ONE_MINUS_Q_POLY = ONE_POLY - Q_POLY


@dataclass(frozen=True)
class CoeffTable:
    """Truncated expansion of a series: (q, t, a) exponents -> coefficient.

    Complete for every q exponent up to ``q_order``; an absent key means the
    coefficient is zero.  For a fixed q exponent only finitely many (t, a)
    entries occur.
    """

    entries: dict[Mono, int]
    q_order: int

    def coefficient(self, q: int, t: int, a: int) -> int:
        if q > self.q_order:
            raise ValueError(f"q^{q} is beyond the truncation order {self.q_order}")
        return self.entries.get((q, t, a), 0)

    def min_coefficient(self) -> int:
        return min(self.entries.values(), default=0)

    def sorted_items(self) -> list[tuple[Mono, int]]:
        return sorted(self.entries.items())

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, CoeffTable)
            and self.q_order == other.q_order
            and self.entries == other.entries
        )


class GradedSeries:
    """Canonical element numerator / (1-q)^denom_exp of the value ring R.

    Instances are immutable; every operation returns a new canonical value,
    so series are safe to share between threads and to use as dict keys.
    """

    __slots__ = ("_num", "_denom_exp")

    def __init__(self, numerator: LaurentPoly | int, denom_exp: int = 0):
        num = _as_poly(numerator)
        if denom_exp < 0:
            raise ValueError("denominator exponent must be nonnegative")
        while denom_exp > 0:
            reduced = num.divide_one_minus_q()
            if reduced is None:
                break
            num = reduced
            denom_exp -= 1
        if not num:
            denom_exp = 0
        self._num = num
        self._denom_exp = denom_exp

    # -- queries -------------------------------------------------------------

    @property
    def numerator(self) -> LaurentPoly:
        return self._num

    @property
    def denom_exp(self) -> int:
        return self._denom_exp

    def is_zero(self) -> bool:
        return not self._num

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, GradedSeries)
            and self._denom_exp == other._denom_exp
            and self._num == other._num
        )

    def __hash__(self) -> int:
        return hash((self._num, self._denom_exp))

    def __repr__(self) -> str:
        if self._denom_exp == 0:
            return f"({self._num!r})"
        return f"({self._num!r}) / (1-q)^{self._denom_exp}"

    # -- arithmetic ------------------------------------------------------------

    def __add__(self, other: "GradedSeries | LaurentPoly | int") -> "GradedSeries":
        other = _as_series(other)
        e = max(self._denom_exp, other._denom_exp)
        left = self._num * ONE_MINUS_Q_POLY ** (e - self._denom_exp)
        right = other._num * ONE_MINUS_Q_POLY ** (e - other._denom_exp)
        return GradedSeries(left + right, e)

    __radd__ = __add__

    def __neg__(self) -> "GradedSeries":
        out = GradedSeries.__new__(GradedSeries)
        out._num = -self._num
        out._denom_exp = self._denom_exp
        return out

    def __sub__(self, other: "GradedSeries | LaurentPoly | int") -> "GradedSeries":
        return self + (-_as_series(other))

    def __rsub__(self, other: "GradedSeries | LaurentPoly | int") -> "GradedSeries":
        return _as_series(other) + (-self)

    def __mul__(self, other: "GradedSeries | LaurentPoly | int") -> "GradedSeries":
        other = _as_series(other)
        return GradedSeries(self._num * other._num, self._denom_exp + other._denom_exp)

    __rmul__ = __mul__

    def over_one_minus_q(self, k: int = 1) -> "GradedSeries":
        """Divide by (1-q)^k, staying in the ring."""
        if k < 0:
            raise ValueError("k must be nonnegative")
        return GradedSeries(self._num, self._denom_exp + k)

    def specialize_a0(self) -> "GradedSeries":
        """Set a = 0 and re-canonicalize."""
        return GradedSeries(self._num.specialize_a0(), self._denom_exp)

    def expand(self, q_order: int) -> CoeffTable:
        """Exact coefficients of q^i for all i <= q_order.

        Uses 1/(1-q)^e = sum_j binom(e-1+j, j) q^j, so every coefficient is an
        exact integer.
        """
        if q_order < 0:
            raise ValueError("q_order must be nonnegative")
        e = self._denom_exp
        entries: dict[Mono, int] = {}
        for (q0, t0, a0), c in self._num:
            if q0 > q_order:
                continue
            if e == 0:
                entries[(q0, t0, a0)] = entries.get((q0, t0, a0), 0) + c
            else:
                for j in range(q_order - q0 + 1):
                    key = (q0 + j, t0, a0)
                    v = entries.get(key, 0) + c * comb(e - 1 + j, j)
                    if v:
                        entries[key] = v
                    else:
                        entries.pop(key, None)
        entries = {m: c for m, c in entries.items() if c}
        return CoeffTable(entries, q_order)

    # -- canonical text serialization ----------------------------------------

    def to_text(self) -> str:
        """Canonical text form; bit-exact round trip with :meth:`from_text`."""
        lines = [f"series v1 denom {self._denom_exp}"]
        for (q, t, a), c in self._num.sorted_terms():
            lines.append(f"{c} {q} {t} {a}")
        lines.append("end")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GradedSeries":
        lines = text.splitlines()
        if not lines:
            raise ValueError("empty series text")
        head = lines[0].split()
        if len(head) != 4 or head[0] != "series" or head[1] != "v1" or head[2] != "denom":
            raise ValueError(f"bad series header: {lines[0]!r}")
        denom_exp = int(head[3])
        terms: dict[Mono, int] = {}
        closed = False
        for line in lines[1:]:
            if line == "end":
                closed = True
                break
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"bad series term line: {line!r}")
            c, q, t, a = (int(p) for p in parts)
            key = (q, t, a)
            if key in terms:
                raise ValueError(f"duplicate monomial {key} in series text")
            if c == 0:
                raise ValueError(f"explicit zero coefficient at {key}")
            terms[key] = c
        if not closed:
            raise ValueError("series text not terminated by 'end'")
        value = cls(LaurentPoly(terms), denom_exp)
        if value.numerator.terms != terms or value.denom_exp != denom_exp:
            raise ValueError("series text is not in canonical form")
        return value


def _as_series(x: "GradedSeries | LaurentPoly | int") -> GradedSeries:
    if isinstance(x, GradedSeries):
        return x
    return GradedSeries(_as_poly(x), 0)


def geom_sum(m: Mono, n: int) -> GradedSeries:
    """Finite geometric sum 1 + x + ... + x^(n-1) for the monomial x.

    Kept as an explicit polynomial so values never leave the ring; the empty
    sum is 0 and geom_sum(x, 1) = 1.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    q, t, a = _check_mono(m)
    terms = {(q * i, t * i, a * i): 1 for i in range(n)}
    return GradedSeries(LaurentPoly(terms), 0)


def to_qta(m: Mono) -> tuple[int, int, int]:
    """Exponents of a (q, t, a) monomial in the (Q, T, A) grading presentation.

    The gradings are related by q = Q^2, t = T^2 Q^-2, a = A Q^-2, so a
    monomial q^i t^j a^k has Q exponent 2i - 2j - 2k, T exponent 2j and A
    exponent k.  The T exponent is even by construction.
    """
    q, t, a = _check_mono(m)
    return (2 * q - 2 * t - 2 * a, 2 * t, a)


ZERO = GradedSeries(ZERO_POLY, 0)
ONE = GradedSeries(ONE_POLY, 0)
Q = GradedSeries(Q_POLY, 0)
T = GradedSeries(LaurentPoly.term(1, t=1), 0)
TINV = GradedSeries(LaurentPoly.term(1, t=-1), 0)
A = GradedSeries(LaurentPoly.term(1, a=1), 0)
ONE_MINUS_Q = GradedSeries(ONE_MINUS_Q_POLY, 0)

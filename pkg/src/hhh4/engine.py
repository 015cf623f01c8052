"""Memoized evaluator for the four-strand full-twist recursion families.

The engine computes the graded homology series of the closed diagrams

    A(n, m, l) = K1 FT2^l FT3^m FT4^n
    B(n, m)    = K2 FT3^m FT4^n
    C(n)       = K3 FT4^n

together with the twisted variants needed to close the recursion system:

    Ctw3(n, k)  = sigma_3^{2k} C(n)          (C(n) itself is Ctw3(n, 0))
    Btw3(n, k)  = sigma_3^{2k} B(n, 0)
    Btw2(n, m)  = sigma_2^2 B(n, m)
    Btw23(n, j) = sigma_2^2 sigma_3^{2j} B(n, 0)
    JMC(n, k)   = JMt_3 sigma_3^{2k} C(n),   JMt_3 = sigma_3 sigma_2^2 sigma_3.

Every recursion step multiplies by monomials in q, t and adds; parity of
all nodes makes the additions cancellation-free, which surfaces as the
positivity of every expanded series.  A Coxeter braid

    beta(d1, d2, d3, d4) = FT2^(d3-d2) FT3^(d2-d1) FT4^(d1)

has homology series eval(A(d1, d2-d1, d3-d2)) / (1-q); the largest degree
d4 never enters the computation.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable

from .series import ONE_MINUS_Q, GradedSeries, geom_sum, mono
from .torus_base import EvalMode, MissingBaseCase, TorusBases, closure_factor, u_series

__all__ = [
    "EvalMode",
    "MissingBaseCase",
    "InvalidDegrees",
    "MemoConflict",
    "FamilyKey",
    "MemoStore",
    "Engine",
    "validate_degrees",
]

_ARITY = {
    "A": 3,
    "B": 2,
    "Btw2": 2,
    "Btw3": 2,
    "Btw23": 2,
    "Ctw3": 2,
    "JMC": 2,
}


class InvalidDegrees(ValueError):
    """Input degrees are not a sorted tuple of four nonnegative integers."""


class MemoConflict(RuntimeError):
    """Two different values were produced for the same memo key."""


@dataclass(frozen=True)
class FamilyKey:
    """Symbolic identifier of a recursion node; the memoization key."""

    kind: str
    params: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in _ARITY:
            raise ValueError(f"unknown family {self.kind!r}")
        if len(self.params) != _ARITY[self.kind]:
            raise ValueError(f"family {self.kind} takes {_ARITY[self.kind]} parameters")
        if any(p < 0 for p in self.params):
            raise ValueError(f"family parameters must be nonnegative: {self.params}")

    def __str__(self) -> str:
        return f"{self.kind}({','.join(map(str, self.params))})"

    @classmethod
    def A(cls, n: int, m: int, l: int) -> "FamilyKey":
        return cls("A", (n, m, l))

    @classmethod
    def B(cls, n: int, m: int) -> "FamilyKey":
        return cls("B", (n, m))

    @classmethod
    def Btw2(cls, n: int, m: int) -> "FamilyKey":
        return cls("Btw2", (n, m))

    @classmethod
    def Btw3(cls, n: int, k: int) -> "FamilyKey":
        return cls("Btw3", (n, k))

    @classmethod
    def Btw23(cls, n: int, j: int) -> "FamilyKey":
        return cls("Btw23", (n, j))

    @classmethod
    def Ctw3(cls, n: int, k: int) -> "FamilyKey":
        return cls("Ctw3", (n, k))

    @classmethod
    def JMC(cls, n: int, k: int) -> "FamilyKey":
        return cls("JMC", (n, k))


class MemoStore:
    """Write-once mapping (FamilyKey, EvalMode) -> GradedSeries.

    Concurrent readers are safe; a second write to a key must carry the
    identical value, otherwise MemoConflict signals nondeterminism.
    """

    def __init__(self):
        self._data: dict[tuple[FamilyKey, EvalMode], GradedSeries] = {}
        self._lock = threading.Lock()

    def get(self, key: FamilyKey, mode: EvalMode) -> GradedSeries | None:
        return self._data.get((key, mode))

    def put(self, key: FamilyKey, mode: EvalMode, value: GradedSeries) -> GradedSeries:
        with self._lock:
            existing = self._data.get((key, mode))
            if existing is None:
                self._data[(key, mode)] = value
                return value
            if existing != value:
                raise MemoConflict(f"conflicting values for {key} [{mode.value}]")
            return existing

    def keys(self) -> set[tuple[FamilyKey, EvalMode]]:
        return set(self._data)

    def __len__(self) -> int:
        return len(self._data)


def validate_degrees(d: Iterable[int]) -> tuple[int, int, int, int]:
    """Check 0 <= d1 <= d2 <= d3 <= d4 and return the tuple."""
    try:
        degrees = tuple(int(x) for x in d)
    except (TypeError, ValueError) as exc:
        raise InvalidDegrees(f"degrees must be integers: {d!r}") from exc
    if len(degrees) != 4:
        raise InvalidDegrees(f"expected four degrees, got {len(degrees)}")
    if degrees[0] < 0:
        raise InvalidDegrees(f"degrees must be nonnegative: {degrees}")
    if any(degrees[i] > degrees[i + 1] for i in range(3)):
        raise InvalidDegrees(f"degrees must be sorted ascending: {degrees}")
    return degrees


class Engine:
    """Evaluates recursion nodes with write-once memoization.

    Evaluation is pure given the memo store; results are immutable values,
    and identical inputs produce identical canonical series regardless of
    evaluation order or interleaving.
    """

    def __init__(
        self,
        bases: TorusBases | None = None,
        memo: MemoStore | None = None,
        value_cache=None,
    ):
        self.bases = bases if bases is not None else TorusBases()
        self.memo = memo if memo is not None else MemoStore()
        self.value_cache = value_cache

    # -- public surface ------------------------------------------------------

    def hhh_coxeter(
        self, d: Iterable[int], mode: EvalMode = EvalMode.FULL_A
    ) -> GradedSeries:
        """Homology series of the Coxeter braid closure beta(d1, d2, d3, d4)."""
        d1, d2, d3, _d4 = validate_degrees(d)
        top = self.eval(FamilyKey.A(d1, d2 - d1, d3 - d2), mode)
        return top.over_one_minus_q()

    def k4_closed(self, mode: EvalMode = EvalMode.FULL_A) -> GradedSeries:
        """Fully closed K4: the product of the four closure factors."""
        value = closure_factor(3, mode) * closure_factor(2, mode)
        value = value * closure_factor(1, mode) * closure_factor(0, mode)
        return GradedSeries(value, 0)

    def eval(self, key: FamilyKey, mode: EvalMode = EvalMode.FULL_A) -> GradedSeries:
        hit = self.memo.get(key, mode)
        if hit is not None:
            return hit
        cached = self._cache_get(key, mode)
        if cached is not None:
            return self.memo.put(key, mode, cached)
        value = self._compute(key, mode)
        value = self.memo.put(key, mode, value)
        self._cache_put(key, mode, value)
        return value

    # -- recursion steps ----------------------------------------------------

    def _compute(self, key: FamilyKey, mode: EvalMode) -> GradedSeries:
        kind = key.kind
        if kind == "Ctw3":
            return self._ctw3(*key.params, mode)
        if kind == "JMC":
            return self._jmc(*key.params, mode)
        if kind == "Btw3":
            return self._btw3(*key.params, mode)
        if kind == "Btw23":
            return self._btw23(*key.params, mode)
        if kind == "B":
            return self._b(*key.params, mode)
        if kind == "Btw2":
            return self._btw2(*key.params, mode)
        if kind == "A":
            return self._a(*key.params, mode)
        raise AssertionError(kind)

    def _ctw3(self, n: int, k: int, mode: EvalMode) -> GradedSeries:
        # closed form: t^-3 (1 + qt^-3 + ... + (qt^-3)^(n-1)) K4
        #              + (qt^-3)^n (t^2+a)(t+a) u(k),  u(k) = (1-q) ft2(k)
        head = mono(1, t=-3) * geom_sum((1, -3, 0), n) * self.k4_closed(mode)
        tail_poly = closure_factor(2, mode) * closure_factor(1, mode)
        tail = mono(1, q=n, t=-3 * n) * tail_poly * self.bases_u(k, mode)
        return head + tail

    def _jmc(self, n: int, k: int, mode: EvalMode) -> GradedSeries:
        if n == 0:
            bracket = GradedSeries(
                closure_factor(2, mode) * closure_factor(1, mode) * closure_factor(0, mode)
            ) + mono(1, q=1) * closure_factor(1, mode) * self.bases_u(k, mode)
            return mono(1, t=-2) * closure_factor(2, mode) * bracket
        return mono(1, t=-3) * self.k4_closed(mode) + mono(1, q=1, t=-3) * self.eval(
            FamilyKey.JMC(n - 1, k), mode
        )

    def _btw3(self, n: int, k: int, mode: EvalMode) -> GradedSeries:
        if n == 0:
            poly = closure_factor(1, mode) * closure_factor(0, mode)
            return poly * self.bases.ft2(k, mode)
        return (
            mono(1, t=-2) * self.eval(FamilyKey.Ctw3(n, k), mode)
            + mono(1, q=1, t=-4) * self.eval(FamilyKey.Ctw3(n - 1, k + 1), mode)
            + mono(1, q=2, t=-4) * self.eval(FamilyKey.Btw3(n - 1, k + 1), mode)
        )

    def _btw23(self, n: int, j: int, mode: EvalMode) -> GradedSeries:
        if n == 0:
            wrap = GradedSeries(closure_factor(1, mode)) * ONE_MINUS_Q + mono(
                1, q=1
            ) * closure_factor(0, mode)
            return (
                mono(1, t=-1) * closure_factor(1, mode) * wrap * self.bases.ft2(j, mode)
            )
        return (
            mono(1, t=-2) * self.eval(FamilyKey.Ctw3(n, j), mode)
            + mono(1, q=1, t=-4) * self.eval(FamilyKey.JMC(n - 1, j), mode)
            + mono(1, q=2, t=-4) * self.eval(FamilyKey.Btw23(n - 1, j + 1), mode)
        )

    def _b(self, n: int, m: int, mode: EvalMode) -> GradedSeries:
        if m == 0:
            return self.eval(FamilyKey.Btw3(n, 0), mode)
        return mono(1, t=-2) * self.eval(FamilyKey.Ctw3(n, 0), mode) + mono(
            1, q=1, t=-2
        ) * self.eval(FamilyKey.B(n, m - 1), mode)

    def _btw2(self, n: int, m: int, mode: EvalMode) -> GradedSeries:
        if m == 0:
            return self.eval(FamilyKey.Btw23(n, 0), mode)
        return mono(1, t=-2) * self.eval(FamilyKey.Ctw3(n, 0), mode) + mono(
            1, q=1, t=-2
        ) * self.eval(FamilyKey.Btw2(n, m - 1), mode)

    def _a(self, n: int, m: int, l: int, mode: EvalMode) -> GradedSeries:
        if l >= 1:
            return mono(1, t=-1) * self.eval(FamilyKey.B(n, m), mode) + mono(
                1, q=1, t=-1
            ) * self.eval(FamilyKey.A(n, m, l - 1), mode)
        if m >= 1:
            return (
                mono(1, t=-1) * self.eval(FamilyKey.B(n, m), mode)
                + mono(1, q=1, t=-2) * self.eval(FamilyKey.Btw2(n, m - 1), mode)
                + mono(1, q=2, t=-3) * self.eval(FamilyKey.B(n, m - 1), mode)
                + mono(1, q=3, t=-3) * self.eval(FamilyKey.A(n, m - 1, 0), mode)
            )
        return ONE_MINUS_Q * self.bases.ft4(n, mode)

    # -- helpers ---------------------------------------------------------------

    def bases_u(self, k: int, mode: EvalMode) -> GradedSeries:
        return u_series(k, mode)

    def _cache_key(self, key: FamilyKey, mode: EvalMode) -> str:
        return f"hhh {key.kind} {' '.join(map(str, key.params))} {mode.value}"

    def _cache_get(self, key: FamilyKey, mode: EvalMode) -> GradedSeries | None:
        if self.value_cache is None:
            return None
        text = self.value_cache.get(self._cache_key(key, mode))
        if text is None:
            return None
        return GradedSeries.from_text(text)

    def _cache_put(self, key: FamilyKey, mode: EvalMode, value: GradedSeries) -> None:
        if self.value_cache is not None:
            self.value_cache.put(self._cache_key(key, mode), value.to_text())

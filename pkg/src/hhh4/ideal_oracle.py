"""Exact bigraded Hilbert functions of the intersection ideals J(d1..d4).

For strand degrees 0 <= d1 <= d2 <= d3 <= d4 the ideal is

    J = cap_{i<j} (x_i - x_j, y_i - y_j)^{e_ij},   e_ij = d_min(i,j),

inside C[x1..x4, y1..y4]; the largest degree d4 never appears.  The
dimension of the bidegree (p, r) slice of J is computed by per-bidegree
linear algebra: after the invertible change of coordinates u = x_i - x_j,
v = y_i - y_j (completed with untouched variables), a polynomial lies in
(u, v)^e iff every coefficient on a monomial with deg_u + deg_v < e
vanishes.  Stacking the vanishing conditions of all six pairs gives an
integer constraint matrix whose kernel is the slice of J.

The ideal is generated inside the subring of difference variables
a_i = x_i - x_4, b_i = y_i - y_4, and the full ring is a free module over
that subring with basis the monomials in x_4, y_4.  Intersections commute
with free extensions, so the full-ring dimensions are running 2-D prefix
sums of the reduced-ring ones; production tables are computed in the
6-variable reduced ring (225 columns at bidegree (4, 4) instead of 1225)
and the direct full-ring path is kept for cross-checks.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from . import linalg
from .engine import validate_degrees

__all__ = [
    "PAIRS",
    "Bidegree",
    "pair_exponents",
    "ConstraintSystem",
    "pair_constraints",
    "dim_j",
    "dim_j_direct",
    "reduced_dim",
    "BidegreeTable",
    "hilb_table",
    "monomials",
]

PAIRS: tuple[tuple[int, int], ...] = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))


def pair_exponents(d) -> dict[tuple[int, int], int]:
    """Exponent of each pair ideal: the degree attached to the smaller strand."""
    degrees = validate_degrees(d)
    return {(i, j): degrees[i - 1] for (i, j) in PAIRS}


@dataclass(frozen=True)
class Bidegree:
    """x-degree p and y-degree r of a slice of the polynomial ring."""

    p: int
    r: int

    def __post_init__(self):
        if self.p < 0 or self.r < 0:
            raise ValueError("bidegree components must be nonnegative")

    def space_dim(self) -> int:
        """Dimension of the full-ring monomial space at this bidegree."""
        return comb(self.p + 3, 3) * comb(self.r + 3, 3)


@lru_cache(maxsize=None)
def monomials(nvars: int, deg: int) -> tuple[tuple[int, ...], ...]:
    """Exponent tuples of the monomials of total degree deg, in lexicographic order."""
    if nvars == 1:
        return ((deg,),)
    out = []
    for first in range(deg + 1):
        for rest in monomials(nvars - 1, deg - first):
            out.append((first,) + rest)
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def _mono_index(nvars: int, deg: int) -> dict[tuple[int, ...], int]:
    return {m: i for i, m in enumerate(monomials(nvars, deg))}


def _subst_matrices(
    nvars: int, pos_i: int, pos_j: int | None, deg: int, max_u: int
) -> list[np.ndarray]:
    """Coefficient-extraction matrices after substituting one difference variable.

    With u = (var at pos_i) - (var at pos_j) the substitution var_i = u + var_j
    is triangular, so monomials expand with binomial coefficients; for
    pos_j None the variable at pos_i is u itself.  The s-th matrix maps a
    coefficient vector on the degree-deg monomials to the coefficients of
    u^s times the degree-(deg - s) monomials in the remaining variables.
    """
    cols = monomials(nvars, deg)
    rest_positions = [k for k in range(nvars) if k != pos_i]
    mats = []
    for s in range(min(max_u, deg) + 1):
        rows = _mono_index(nvars - 1, deg - s)
        mat = np.zeros((len(rows), len(cols)), dtype=np.int64)
        for ci, e in enumerate(cols):
            ei = e[pos_i]
            if pos_j is None:
                if ei == s:
                    key = tuple(e[k] for k in rest_positions)
                    mat[rows[key], ci] = 1
            else:
                if ei >= s:
                    shifted = list(e)
                    shifted[pos_j] += ei - s
                    key = tuple(shifted[k] for k in rest_positions)
                    mat[rows[key], ci] += comb(ei, s)
        mats.append(mat)
    # degrees below s have empty row spaces
    for s in range(len(mats), max_u + 1):
        mats.append(np.zeros((0, len(cols)), dtype=np.int64))
    return mats


def _reduced_positions(pair: tuple[int, int]) -> tuple[int, int | None]:
    """Positions of u in the difference coordinates a_i = x_i - x_4."""
    i, j = pair
    if j == 4:
        return i - 1, None
    return i - 1, j - 1


def _full_positions(pair: tuple[int, int]) -> tuple[int, int]:
    i, j = pair
    return i - 1, j - 1


@lru_cache(maxsize=None)
def _reduced_pair_mats(pair: tuple[int, int], deg: int, max_u: int) -> tuple[np.ndarray, ...]:
    pos_i, pos_j = _reduced_positions(pair)
    return tuple(_subst_matrices(3, pos_i, pos_j, deg, max_u))


def _reduced_constraint_blocks(
    exps: dict[tuple[int, int], int], p: int, r: int
) -> list[np.ndarray]:
    blocks = []
    for pair in PAIRS:
        e = exps[pair]
        if e == 0:
            continue
        xm = _reduced_pair_mats(pair, p, e - 1)
        ym = _reduced_pair_mats(pair, r, e - 1)
        for sx in range(e):
            for sy in range(e - sx):
                if xm[sx].shape[0] and ym[sy].shape[0]:
                    blocks.append(np.kron(xm[sx], ym[sy]))
    return blocks


def reduced_dim(d, p: int, r: int, method: str = "auto") -> int:
    """Dimension of the bidegree (p, r) slice of J in the reduced 6-variable ring."""
    exps = pair_exponents(d)
    ncols = len(monomials(3, p)) * len(monomials(3, r))
    blocks = _reduced_constraint_blocks(exps, p, r)
    if not blocks:
        return ncols
    matrix = np.vstack(blocks)
    return linalg.kernel_dim(matrix, ncols=ncols, method=method)


# ---------------------------------------------------------------------------
# full-ring constraint surface (direct path, used for cross-checks)
# ---------------------------------------------------------------------------


@dataclass
class ConstraintSystem:
    """Stacked linear conditions on a full-ring bidegree slice.

    Row i carries provenance (pair, (s_x, s_y)): it extracts the coefficient
    of u^{s_x} v^{s_y} times the provenance monomial after the pair's change
    of coordinates.
    """

    bidegree: Bidegree
    rows: np.ndarray
    provenance: list[tuple[tuple[int, int], tuple[int, int]]] = field(default_factory=list)

    @property
    def ncols(self) -> int:
        return self.rows.shape[1] if self.rows.size else self.bidegree.space_dim()

    def solution_dim(self, method: str = "auto") -> int:
        if self.rows.shape[0] == 0:
            return self.bidegree.space_dim()
        return linalg.kernel_dim(self.rows, ncols=self.ncols, method=method)

    @classmethod
    def stack(cls, systems: "list[ConstraintSystem]") -> "ConstraintSystem":
        if not systems:
            raise ValueError("nothing to stack")
        bd = systems[0].bidegree
        if any(s.bidegree != bd for s in systems):
            raise ValueError("bidegree mismatch")
        rows = np.vstack([s.rows for s in systems if s.rows.shape[0]]) if any(
            s.rows.shape[0] for s in systems
        ) else np.zeros((0, bd.space_dim()), dtype=np.int64)
        prov = [p for s in systems for p in s.provenance]
        return cls(bd, rows, prov)


def pair_constraints(i: int, j: int, d: int, bd: Bidegree) -> ConstraintSystem:
    """Vanishing conditions for membership in (x_i - x_j, y_i - y_j)^d.

    d = 0 yields an empty system (the whole space).
    """
    if not (1 <= i < j <= 4):
        raise ValueError(f"bad pair ({i}, {j})")
    if d < 0:
        raise ValueError("pair exponent must be nonnegative")
    ncols = bd.space_dim()
    if d == 0:
        return ConstraintSystem(bd, np.zeros((0, ncols), dtype=np.int64), [])
    pos_i, pos_j = _full_positions((i, j))
    xm = _subst_matrices(4, pos_i, pos_j, bd.p, d - 1)
    ym = _subst_matrices(4, pos_i, pos_j, bd.r, d - 1)
    blocks = []
    prov = []
    for sx in range(d):
        for sy in range(d - sx):
            if xm[sx].shape[0] and ym[sy].shape[0]:
                block = np.kron(xm[sx], ym[sy])
                blocks.append(block)
                prov.extend([((i, j), (sx, sy))] * block.shape[0])
    rows = np.vstack(blocks) if blocks else np.zeros((0, ncols), dtype=np.int64)
    return ConstraintSystem(bd, rows, prov)


def dim_j_direct(d, bd: Bidegree, method: str = "auto") -> int:
    """Full-ring dimension by the stacked system, no reduction."""
    exps = pair_exponents(d)
    systems = [pair_constraints(i, j, exps[(i, j)], bd) for (i, j) in PAIRS]
    return ConstraintSystem.stack(systems).solution_dim(method=method)


def dim_j(d, bd: Bidegree, method: str = "auto", cache=None) -> int:
    """Dimension of the bidegree slice of J in the full 8-variable ring.

    Computed as the prefix sum of reduced-ring dimensions over the rectangle
    below the bidegree, which is exactly the stacked-system answer.
    """
    degrees = validate_degrees(d)
    total = 0
    for pp in range(bd.p + 1):
        for rr in range(bd.r + 1):
            total += _cached_reduced_dim(degrees, pp, rr, method, cache)
    return total


def _reduced_cache_key(degrees, p: int, r: int) -> str:
    return f"dimj0 {degrees[0]} {degrees[1]} {degrees[2]} {p} {r}"


def _cached_reduced_dim(degrees, p: int, r: int, method: str, cache) -> int:
    if cache is not None:
        hit = cache.get(_reduced_cache_key(degrees, p, r))
        if hit is not None:
            return int(hit)
    value = reduced_dim(degrees, p, r, method=method)
    if cache is not None:
        cache.put(_reduced_cache_key(degrees, p, r), str(value))
    return value


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------


@dataclass
class BidegreeTable:
    """Full-ring dimensions of J for every bidegree with p + r <= max_total.

    The degrees are stored with d4 normalized to d3: the ideal does not
    depend on the largest degree, and the canonical serialization must not
    either.
    """

    d: tuple[int, int, int, int]
    max_total: int
    dims: dict[tuple[int, int], int]

    def __getitem__(self, key: tuple[int, int]) -> int:
        return self.dims[key]

    def is_symmetric(self) -> bool:
        return all(
            self.dims[(p, r)] == self.dims[(r, p)] for (p, r) in self.dims
        )

    def to_text(self) -> str:
        d1, d2, d3, d4 = self.d
        lines = [f"hilb v1 d {d1} {d2} {d3} {d4} max {self.max_total}"]
        for (p, r) in sorted(self.dims, key=lambda pr: (pr[0] + pr[1], pr[0])):
            lines.append(f"{p} {r} {self.dims[(p, r)]}")
        lines.append("end")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BidegreeTable":
        lines = text.splitlines()
        head = lines[0].split() if lines else []
        if (
            len(head) != 9
            or head[:3] != ["hilb", "v1", "d"]
            or head[7] != "max"
        ):
            raise ValueError(f"bad table header: {lines[0] if lines else ''!r}")
        d = (int(head[3]), int(head[4]), int(head[5]), int(head[6]))
        max_total = int(head[8])
        dims = {}
        closed = False
        for line in lines[1:]:
            if line == "end":
                closed = True
                break
            p, r, v = (int(x) for x in line.split())
            dims[(p, r)] = v
        if not closed:
            raise ValueError("table not terminated by 'end'")
        return cls(d, max_total, dims)

    def to_json_dict(self) -> dict:
        return {
            "format": "hilb",
            "version": 1,
            "d": list(self.d),
            "max_total": self.max_total,
            "entries": [
                [p, r, self.dims[(p, r)]]
                for (p, r) in sorted(self.dims, key=lambda pr: (pr[0] + pr[1], pr[0]))
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=None, separators=(",", ":")) + "\n"


def _triangle(max_total: int) -> list[tuple[int, int]]:
    return [(p, r) for s in range(max_total + 1) for p in range(s + 1) for r in [s - p]]


def _reduced_job(args) -> tuple[tuple[int, int], int]:
    degrees, p, r, method = args
    return (p, r), reduced_dim(degrees, p, r, method=method)


def hilb_table(
    d,
    max_total: int,
    threads: int = 1,
    cache=None,
    method: str = "auto",
) -> BidegreeTable:
    """Full-ring dimension table for all bidegrees with p + r <= max_total.

    Each bidegree is an independent job; with threads > 1 the reduced-ring
    kernels are computed in a process pool.  Results are deterministic and
    independent of scheduling.
    """
    degrees = validate_degrees(d)
    norm = (degrees[0], degrees[1], degrees[2], degrees[2])
    if max_total < 0:
        raise ValueError("max_total must be nonnegative")
    grid = _triangle(max_total)
    reduced: dict[tuple[int, int], int] = {}
    missing = []
    for (p, r) in grid:
        if cache is not None:
            hit = cache.get(_reduced_cache_key(degrees, p, r))
            if hit is not None:
                reduced[(p, r)] = int(hit)
                continue
        missing.append((p, r))
    if missing:
        if threads > 1:
            from concurrent.futures import ProcessPoolExecutor

            jobs = [(degrees, p, r, method) for (p, r) in missing]
            with ProcessPoolExecutor(max_workers=threads) as pool:
                for (pr, value) in pool.map(_reduced_job, jobs):
                    reduced[pr] = value
        else:
            for (p, r) in missing:
                reduced[(p, r)] = reduced_dim(degrees, p, r, method=method)
        if cache is not None:
            for (p, r) in missing:
                cache.put(_reduced_cache_key(degrees, p, r), str(reduced[(p, r)]))
    # full-ring dims are 2-D prefix sums of the reduced dims
    dims: dict[tuple[int, int], int] = {}
    prefix: dict[tuple[int, int], int] = {}
    for (p, r) in sorted(grid):
        val = reduced[(p, r)]
        acc = (
            val
            + prefix.get((p - 1, r), 0)
            + prefix.get((p, r - 1), 0)
            - prefix.get((p - 1, r - 1), 0)
        )
        prefix[(p, r)] = acc
        dims[(p, r)] = acc
    return BidegreeTable(norm, max_total, dims)

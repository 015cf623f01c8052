"""Ideal oracle: constraint systems, dimensions, tables."""

import json
from math import comb

import numpy as np
import pytest

from hhh4.engine import InvalidDegrees
from hhh4.ideal_oracle import (
    PAIRS,
    Bidegree,
    BidegreeTable,
    ConstraintSystem,
    dim_j,
    dim_j_direct,
    hilb_table,
    monomials,
    pair_constraints,
    pair_exponents,
    reduced_dim,
)
from hhh4.linalg import kernel_dim


def test_pair_exponents_use_smaller_index():
    exps = pair_exponents((0, 1, 2, 5))
    assert exps == {(1, 2): 0, (1, 3): 0, (1, 4): 0, (2, 3): 1, (2, 4): 1, (3, 4): 2}
    with pytest.raises(InvalidDegrees):
        pair_exponents((2, 1, 1, 1))


def test_bidegree_space_dim():
    assert Bidegree(0, 0).space_dim() == 1
    assert Bidegree(2, 1).space_dim() == comb(5, 3) * comb(4, 3)
    with pytest.raises(ValueError):
        Bidegree(-1, 0)


def test_monomials_enumeration():
    assert monomials(3, 0) == ((0, 0, 0),)
    assert len(monomials(3, 4)) == comb(6, 2)
    assert monomials(2, 2) == ((0, 2), (1, 1), (2, 0))


# -- pair constraint systems --------------------------------------------------


def test_zeroth_power_is_whole_space():
    cs = pair_constraints(1, 2, 0, Bidegree(2, 1))
    assert cs.rows.shape[0] == 0
    assert cs.solution_dim() == Bidegree(2, 1).space_dim()


def test_single_pair_linear_solutions():
    cs = pair_constraints(3, 4, 1, Bidegree(1, 0))
    assert cs.solution_dim() == 1  # spanned by x3 - x4
    cs2 = pair_constraints(3, 4, 2, Bidegree(1, 0))
    assert cs2.solution_dim() == 0  # no linear form lies in the square


def test_provenance_rows():
    cs = pair_constraints(1, 3, 2, Bidegree(1, 1))
    assert cs.rows.shape[0] == len(cs.provenance)
    assert all(pair == (1, 3) for pair, _ in cs.provenance)
    assert {orders for _, orders in cs.provenance} == {(0, 0), (1, 0), (0, 1)}


# -- dimensions ---------------------------------------------------------------


def test_whole_ring_dimensions():
    for p, r in [(0, 0), (1, 2), (3, 1)]:
        bd = Bidegree(p, r)
        assert dim_j((0, 0, 0, 0), bd) == bd.space_dim()


def test_vandermonde_is_the_only_sextic():
    assert dim_j((1, 1, 1, 1), Bidegree(6, 0)) == 1
    assert dim_j((1, 1, 1, 1), Bidegree(1, 0)) == 0


def test_reduced_equals_direct():
    for d in [(0, 0, 1, 1), (0, 1, 1, 1), (1, 1, 1, 1), (0, 1, 2, 2), (1, 1, 2, 2)]:
        for p in range(4):
            for r in range(4 - p):
                assert dim_j(d, Bidegree(p, r)) == dim_j_direct(d, Bidegree(p, r)), (d, p, r)


def _brute_force_dim(d, p, r):
    """Independent oracle: derivative conditions via sympy, sympy's rank."""
    import sympy

    xs = sympy.symbols("x1:5")
    ys = sympy.symbols("y1:5")
    basis = []
    for ex in monomials(4, p):
        for ey in monomials(4, r):
            m = sympy.Integer(1)
            for v, e in zip(xs, ex):
                m *= v**e
            for v, e in zip(ys, ey):
                m *= v**e
            basis.append(m)
    exps = pair_exponents(d)
    rows = []
    for (i, j), dd in exps.items():
        if dd == 0:
            continue
        for a in range(dd):
            for b in range(dd - a):
                images = []
                for m in basis:
                    g = sympy.diff(m, xs[i - 1], a, ys[i - 1], b)
                    g = g.subs({xs[i - 1]: xs[j - 1], ys[i - 1]: ys[j - 1]})
                    images.append(sympy.expand(g))
                # collect coefficients of each monomial across the basis images
                all_monoms = set()
                polys = []
                for g in images:
                    pd = g.as_poly(*xs, *ys).as_dict() if g != 0 else {}
                    polys.append(pd)
                    all_monoms.update(pd)
                for mono_key in sorted(all_monoms):
                    rows.append([pd.get(mono_key, 0) for pd in polys])
    if not rows:
        return len(basis)
    M = sympy.Matrix(rows)
    return len(basis) - M.rank()


@pytest.mark.parametrize(
    "d,p,r",
    [
        ((0, 0, 1, 1), 1, 1),
        ((0, 0, 2, 2), 2, 0),
        ((0, 1, 1, 1), 2, 1),
        ((1, 1, 1, 1), 3, 0),
        ((1, 1, 1, 1), 2, 1),
        ((0, 1, 2, 2), 2, 1),
    ],
)
def test_brute_force_agreement(d, p, r):
    assert dim_j(d, Bidegree(p, r)) == _brute_force_dim(d, p, r)


def test_product_witness_satisfies_constraints():
    # the product of the pairwise x-differences to the pair exponents lies in J
    import sympy

    xs = sympy.symbols("x1:5")
    for d in [(0, 0, 1, 1), (0, 1, 1, 1), (1, 1, 1, 1), (0, 1, 2, 2)]:
        exps = pair_exponents(d)
        poly = sympy.Integer(1)
        for (i, j), e in exps.items():
            poly *= (xs[i - 1] - xs[j - 1]) ** e
        total = sum(exps.values())
        basis = monomials(4, total)
        index = {m: k for k, m in enumerate(basis)}
        vec = np.zeros(len(basis) * 1, dtype=np.int64)
        pd = poly.as_poly(*xs).as_dict()
        for m, c in pd.items():
            vec[index[tuple(m)]] = int(c)
        systems = [pair_constraints(i, j, exps[(i, j)], Bidegree(total, 0)) for (i, j) in PAIRS]
        stacked = ConstraintSystem.stack(systems)
        if stacked.rows.shape[0]:
            assert not (stacked.rows @ vec).any(), d


# -- tables --------------------------------------------------------------------


def test_hilb_table_single_pair_closed_form():
    table = hilb_table((0, 0, 1, 1), 8)

    def closed(p, r):
        def c4(n):
            return comb(n + 3, 3) if n >= 0 else 0

        return c4(p - 1) * c4(r) + c4(p) * c4(r - 1) - c4(p - 1) * c4(r - 1)

    assert all(table[(p, r)] == closed(p, r) for (p, r) in table.dims)


def test_table_symmetry_and_monotonicity():
    t112 = hilb_table((1, 1, 2, 2), 6)
    assert t112.is_symmetric()
    t011 = hilb_table((0, 1, 1, 1), 6)
    t111 = hilb_table((1, 1, 1, 1), 6)
    assert all(t011[k] >= t111[k] for k in t111.dims)


def test_ambient_bound_and_equality_iff_trivial():
    t = hilb_table((0, 0, 1, 1), 4)
    for (p, r), v in t.dims.items():
        bound = Bidegree(p, r).space_dim()
        assert v <= bound
    t0 = hilb_table((0, 0, 0, 0), 4)
    assert all(t0[(p, r)] == Bidegree(p, r).space_dim() for (p, r) in t0.dims)


def test_row_order_invariance():
    from hhh4.ideal_oracle import _reduced_constraint_blocks

    exps = pair_exponents((1, 1, 2, 2))
    blocks = _reduced_constraint_blocks(exps, 3, 2)
    M = np.vstack(blocks)
    base = kernel_dim(M, method="exact")
    rng = np.random.default_rng(0)
    for _ in range(3):
        perm = rng.permutation(M.shape[0])
        assert kernel_dim(M[perm], method="exact") == base
        assert kernel_dim(M[perm], method="certified") == base


def test_methods_agree_on_acceptance_grid():
    # the optional certified engine must match the fraction-free default on
    # every acceptance-grid case
    grid = [(0, 0, 0, 0), (0, 0, 1, 1), (0, 1, 1, 1), (0, 1, 2, 2), (0, 2, 2, 2), (1, 1, 1, 1), (1, 1, 2, 2)]
    for d in grid:
        for (p, r) in [(2, 2), (3, 1), (4, 0)]:
            a = reduced_dim(d, p, r, method="exact")
            b = reduced_dim(d, p, r, method="certified")
            assert a == b, (d, p, r)


def test_table_serialization_round_trip():
    table = hilb_table((0, 1, 2, 2), 5)
    back = BidegreeTable.from_text(table.to_text())
    assert back.dims == table.dims
    assert back.d == table.d
    assert back.max_total == table.max_total
    payload = json.loads(table.to_json())
    assert payload["d"] == [0, 1, 2, 2]
    assert payload["entries"][0] == [0, 0, 0]  # constants are not in a proper ideal


def test_table_normalizes_largest_degree():
    a = hilb_table((0, 1, 2, 2), 4)
    b = hilb_table((0, 1, 2, 17), 4)
    assert a.to_text() == b.to_text()


def test_parallel_equals_serial():
    a = hilb_table((0, 1, 2, 2), 6, threads=1)
    b = hilb_table((0, 1, 2, 2), 6, threads=2)
    assert a.to_text() == b.to_text()

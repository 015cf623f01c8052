"""Exact triply graded homology series of 4-strand Coxeter braids.

The package has two independent computational halves that cross-verify
each other:

* a memoized recursion engine (:mod:`hhh4.engine`) evaluating homology
  series of Coxeter braid closures over Z[q, a][t, t^-1][(1-q)^-1], and
* an exact linear-algebra oracle (:mod:`hhh4.ideal_oracle`) for the
  bigraded Hilbert series of the intersection ideals
  J(d1, ..., d4) = cap_{i<j} (x_i - x_j, y_i - y_j)^{d_i}.

At a = 0 the two sides agree up to one overall monomial and the factor
1/(1-t)^4, which :mod:`hhh4.verify` checks entry by entry.
"""

__version__ = "0.1.0"

from .series import CoeffTable, GradedSeries, LaurentPoly, geom_sum, mono, to_qta
from .torus_base import (
    BaseCaseTable,
    EvalMode,
    MissingBaseCase,
    TorusBases,
    closure_factor,
    derive_ft4_a0,
    derive_ft4_a0_auto,
    ft2,
    u_series,
)
from .engine import Engine, FamilyKey, InvalidDegrees, MemoStore, validate_degrees

__all__ = [
    "__version__",
    "CoeffTable",
    "GradedSeries",
    "LaurentPoly",
    "geom_sum",
    "mono",
    "to_qta",
    "BaseCaseTable",
    "EvalMode",
    "MissingBaseCase",
    "TorusBases",
    "closure_factor",
    "derive_ft4_a0",
    "derive_ft4_a0_auto",
    "ft2",
    "u_series",
    "Engine",
    "FamilyKey",
    "InvalidDegrees",
    "MemoStore",
    "validate_degrees",
]

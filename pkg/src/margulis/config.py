"""Numerical tolerances shared by every operation."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    orth: float = 1e-10       # m^T J m = J, relative to |m|^2
    eig: float = 1e-10
    trace: float = 1e-9       # hyperbolic iff trace > 3 + trace
    ident: float = 1e-9
    null: float = 1e-9        # relative to the Euclidean norm squared
    hyp_margin: float = 1e-6  # trace margin demanded by hyperbolize
    elliptic_margin: float = 1e-6
    near_parabolic: float = 1e-4
    cond: float = 1e12

    def with_(self, **kw) -> "Tolerances":
        return replace(self, **kw)


DEFAULT = Tolerances()

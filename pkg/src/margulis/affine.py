"""Affine Lorentzian isometries, invariant lines and the Margulis invariant.

Points of affine Minkowski space are coordinate triples in one fixed origin
chart, so an isometry is ``x -> linear(x) + trans``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import UnknownGenerator
from .lorentz import (
    IDENTITY,
    LorentzMap,
    lorentz_dot,
    mvec,
    null_frame,
)


@dataclass(frozen=True, eq=False)
class AffineIso:
    linear: LorentzMap
    trans: np.ndarray

    def __post_init__(self):
        if not isinstance(self.linear, LorentzMap):
            object.__setattr__(self, "linear", LorentzMap(self.linear))
        t = mvec(self.trans)
        t.flags.writeable = False
        object.__setattr__(self, "trans", t)

    def __call__(self, x) -> np.ndarray:
        return apply(self, x)

    def __matmul__(self, other: "AffineIso") -> "AffineIso":
        return compose(self, other)

    def inverse(self) -> "AffineIso":
        return inverse(self)

    def __pow__(self, n: int) -> "AffineIso":
        base = self if n >= 0 else inverse(self)
        out = AFFINE_IDENTITY
        for _ in range(abs(n)):
            out = compose(out, base)
        return out

    def homogeneous(self) -> np.ndarray:
        """4x4 matrix acting on (x, 1)."""
        h = np.eye(4)
        h[:3, :3] = self.linear.m
        h[:3, 3] = self.trans
        return h

    def __repr__(self):
        return f"AffineIso(linear={self.linear.m.tolist()!r}, trans={self.trans.tolist()!r})"


AFFINE_IDENTITY = AffineIso(IDENTITY, np.zeros(3))


def translation(v) -> AffineIso:
    return AffineIso(IDENTITY, mvec(v))


def apply(gamma: AffineIso, x) -> np.ndarray:
    return gamma.linear(mvec(x)) + gamma.trans


def compose(gamma: AffineIso, eta: AffineIso) -> AffineIso:
    """gamma after eta."""
    return AffineIso(gamma.linear @ eta.linear, gamma.trans + gamma.linear(eta.trans))


def inverse(gamma: AffineIso) -> AffineIso:
    g_inv = gamma.linear.inverse()
    return AffineIso(g_inv, -g_inv(gamma.trans))


def conjugate(phi: AffineIso, gamma: AffineIso) -> AffineIso:
    """phi . gamma . phi^{-1}"""
    return compose(compose(phi, gamma), inverse(phi))


def operator_distance(a: AffineIso, b: AffineIso) -> float:
    """Spectral norm of the difference of the homogeneous 4x4 matrices."""
    return float(np.linalg.norm(a.homogeneous() - b.homogeneous(), 2))


@dataclass(frozen=True, eq=False)
class InvariantLine:
    point: np.ndarray
    dir: np.ndarray

    def contains(self, x, tol: float = 1e-9) -> bool:
        d = mvec(x) - self.point
        off = d - np.dot(d, self.dir) / np.dot(self.dir, self.dir) * self.dir
        return float(np.linalg.norm(off)) <= tol * max(1.0, float(np.linalg.norm(d)))


def invariant_line(gamma: AffineIso, tol: Tolerances = DEFAULT) -> InvariantLine:
    """The unique spacelike gamma-invariant line C_gamma.

    The translation is split as ``a x0 + w_m xm + w_p xp``; the point
    ``p = b xm + c xp`` solving ``(g - I) p = -(w_m xm + w_p xp)`` lies on
    the line because ``g - I`` is invertible on span{xm, xp}.
    """
    fr = null_frame(gamma.linear, tol)
    v = gamma.trans
    a = lorentz_dot(v, fr.x0)
    w = v - a * fr.x0
    mp = lorentz_dot(fr.xm, fr.xp)
    w_m = lorentz_dot(w, fr.xp) / mp
    w_p = lorentz_dot(w, fr.xm) / mp
    b = -w_m / (fr.lam - 1.0)
    c = -w_p / (1.0 / fr.lam - 1.0)
    return InvariantLine(b * fr.xm + c * fr.xp, fr.x0.copy())


def margulis(gamma: AffineIso, tol: Tolerances = DEFAULT) -> float:
    """Margulis invariant <gamma(x) - x, x0(gamma)> evaluated at the origin."""
    fr = null_frame(gamma.linear, tol)
    return float(lorentz_dot(gamma.trans, fr.x0))


def margulis_at(gamma: AffineIso, x, tol: Tolerances = DEFAULT) -> float:
    fr = null_frame(gamma.linear, tol)
    return float(lorentz_dot(apply(gamma, x) - mvec(x), fr.x0))


def radiance_residual(gens: Sequence[AffineIso]) -> tuple[np.ndarray, float]:
    """Least-squares common fixed point and its residual.

    Solves the stacked system ``(I - g_i) x = v_i``.  The residual is the
    largest per-generator mismatch relative to ``max(1, |v|)``.
    """
    a = np.vstack([np.eye(3) - g.linear.m for g in gens])
    b = np.concatenate([g.trans for g in gens])
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    r = (a @ x - b).reshape(-1, 3)
    scale = max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)
    return x, float(np.max(np.linalg.norm(r, axis=1))) / scale


def is_radiant(gens: Sequence[AffineIso], tol: float = 1e-9) -> np.ndarray | None:
    """Common fixed point of all generators, or None."""
    if not gens:
        raise ValueError("need at least one generator")
    x, res = radiance_residual(gens)
    return x if res < tol else None


@dataclass(frozen=True)
class Cocycle:
    gen_trans: tuple

    def __post_init__(self):
        object.__setattr__(self, "gen_trans", tuple(mvec(v) for v in self.gen_trans))


def cocycle_extend(u: Cocycle, word, gens: Sequence[LorentzMap]) -> np.ndarray:
    """Translational part of the word, built letter by letter from
    ``v_{gh} = v_g + g(v_h)`` and ``v_{g^-1} = -g^{-1}(v_g)``."""
    m = np.eye(3)
    v = np.zeros(3)
    for idx, sign in word.letters():
        if not 0 <= idx < len(gens) or idx >= len(u.gen_trans):
            raise UnknownGenerator(f"generator index {idx} out of range")
        g = gens[idx].m
        if sign > 0:
            v = v + m @ u.gen_trans[idx]
            m = m @ g
        else:
            g_inv = gens[idx].inverse().m
            v = v - m @ (g_inv @ u.gen_trans[idx])
            m = m @ g_inv
    return v


def coboundary(v, g: LorentzMap) -> np.ndarray:
    v = mvec(v)
    return v - g(v)

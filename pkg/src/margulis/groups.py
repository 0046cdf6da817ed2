"""Presentations, word evaluation, Schottky construction and hyperbolization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .affine import AFFINE_IDENTITY, AffineIso, compose, conjugate, inverse
from .config import DEFAULT, Tolerances
from .errors import (
    FailedToSeparate,
    HyperbolizationFailed,
    MargulisError,
    NonElementaryViolated,
    NotHyperbolic,
    UnknownGenerator,
)
from .lorentz import (
    IDENTITY,
    LorentzMap,
    boost,
    boundary_angle,
    boundary_point,
    hyperbolic_from_frame,
    is_hyperbolic,
    null_frame,
    projective_action,
    random_isometry,
    rotation,
)
from .words import Word, gen, reduce_word

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class Presentation:
    gens: tuple
    orders: tuple = field(default=None)

    def __post_init__(self):
        gens = tuple(g if isinstance(g, AffineIso) else AffineIso(*g) for g in self.gens)
        orders = self.orders if self.orders is not None else (None,) * len(gens)
        orders = tuple(None if o is None else int(o) for o in orders)
        if len(orders) != len(gens):
            raise ValueError("one order entry per generator")
        for g, m in zip(gens, orders):
            if m is not None:
                if m < 2:
                    raise ValueError(f"finite order must be >= 2, got {m}")
                err = float(np.max(np.abs((g ** m).homogeneous() - np.eye(4))))
                if err > 1e-9:
                    raise MargulisError(f"generator does not have order {m} (error {err:.2e})")
        object.__setattr__(self, "gens", gens)
        object.__setattr__(self, "orders", orders)

    @property
    def rank(self) -> int:
        return len(self.gens)

    @property
    def linear_gens(self) -> list[LorentzMap]:
        return [g.linear for g in self.gens]

    @property
    def translations(self) -> list[np.ndarray]:
        return [g.trans for g in self.gens]

    @classmethod
    def from_linear(cls, linear: Sequence[LorentzMap], trans=None, orders=None) -> "Presentation":
        if trans is None:
            trans = [np.zeros(3)] * len(linear)
        return cls(tuple(AffineIso(g, v) for g, v in zip(linear, trans)), orders)

    def with_translations(self, trans) -> "Presentation":
        return Presentation.from_linear(self.linear_gens, trans, self.orders)


def evaluate_word(p: Presentation, w: Word) -> AffineIso:
    out = AFFINE_IDENTITY
    for i, e in w.syllables:
        if not 0 <= i < p.rank:
            raise UnknownGenerator(f"generator index {i} out of range")
        out = compose(out, p.gens[i] ** e)
    return out


def evaluate_linear(gens: Sequence[LorentzMap], w: Word) -> LorentzMap:
    m = np.eye(3)
    for i, e in w.syllables:
        if not 0 <= i < len(gens):
            raise UnknownGenerator(f"generator index {i} out of range")
        m = m @ (gens[i] ** e).m
    return LorentzMap(m)


def conjugate_presentation(p: Presentation, phi: AffineIso) -> Presentation:
    """Generators phi . g . phi^{-1}."""
    return Presentation(tuple(conjugate(phi, g) for g in p.gens), p.orders)


def random_affine(
    rng: np.random.Generator,
    max_boost: float = 1.0,
    trans_scale: float = 1.0,
    orientation_reversing: bool = False,
    time_reversing: bool = False,
) -> AffineIso:
    f = random_isometry(rng, max_boost, orientation_reversing, time_reversing)
    return AffineIso(f, rng.normal(scale=trans_scale, size=3))


# --------------------------------------------------------------------------
# Schottky intervals


def _angle(v) -> float:
    return math.atan2(v[1], v[0]) % TWO_PI


def _circle_map(g: LorentzMap, a: float) -> float:
    return _angle(g.m @ boundary_point(a))


@dataclass(frozen=True)
class Arc:
    """Closed arc starting at ``start`` running counter-clockwise for ``length``."""

    start: float
    length: float

    def contains(self, a: float, slack: float = 0.0) -> bool:
        return (a - self.start + slack) % TWO_PI <= self.length + 2 * slack

    @property
    def center(self) -> float:
        return (self.start + self.length / 2) % TWO_PI


def arcs_disjoint(a: Arc, b: Arc, margin: float) -> bool:
    return ((b.start - a.start) % TWO_PI >= a.length + margin
            and (a.start - b.start) % TWO_PI >= b.length + margin)


def _arc_pair(g: LorentzMap, m_ang: float, r: float) -> tuple[Arc, Arc]:
    # A- centred at the repelling point; A+ = g(closure of the complement of A-)
    a_minus = Arc((m_ang - r) % TWO_PI, 2 * r)
    s = _circle_map(g, m_ang + r)
    e = _circle_map(g, m_ang - r)
    return a_minus, Arc(s, (e - s) % TWO_PI)


def _balanced_radius(g: LorentzMap, m_ang: float, p_ang: float, ratio: float,
                     iters: int = 40) -> float | None:
    d = abs((p_ang - m_ang + math.pi) % TWO_PI - math.pi)
    lo, hi = 0.0, d * (1 - 1e-9)

    def excess(r):
        _, ap = _arc_pair(g, m_ang, r)
        return ap.length - ratio * 2 * r

    if excess(hi) > 0:
        return None
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def _mapping_holds(g: LorentzMap, a_minus: Arc, a_plus: Arc, samples: int) -> bool:
    # sampled check of g(S^1 \ A-) inside A+
    comp_len = TWO_PI - a_minus.length
    ts = a_minus.start + a_minus.length + comp_len * (np.arange(samples) + 0.5) / samples
    return all(a_plus.contains(_circle_map(g, t), slack=1e-9) for t in ts)


def schottky_intervals(
    gens: Sequence[LorentzMap],
    margin: float = 1e-3,
    ratios: Sequence[float] = (1.0, 0.5, 2.0, 0.25, 4.0),
    samples: int = 256,
    tol: Tolerances = DEFAULT,
) -> list[tuple[Arc, Arc]] | None:
    """Ping-pong arcs (A-_i, A+_i) in boundary-angle coordinates, or None.

    For each generator, A- is centred at the repelling direction and A+ is
    the image of its complement; the radius is bisected so that the two arcs
    have a fixed length ratio.  A few ratios are tried.
    """
    frames = []
    for g in gens:
        fr = null_frame(g, tol)
        frames.append((_angle(fr.xm), _angle(fr.xp)))
    for ratio in ratios:
        arcs = []
        for g, (m_ang, p_ang) in zip(gens, frames):
            r = _balanced_radius(g, m_ang, p_ang, ratio)
            if r is None:
                break
            arcs.append(_arc_pair(g, m_ang, r))
        else:
            flat = [a for pair in arcs for a in pair]
            ok = all(arcs_disjoint(flat[i], flat[j], margin)
                     for i in range(len(flat)) for j in range(i + 1, len(flat)))
            if ok and all(_mapping_holds(g, am, ap, samples) for g, (am, ap) in zip(gens, arcs)):
                return arcs
    return None


def verify_schottky(gens: Sequence[LorentzMap], margin: float = 1e-3,
                    tol: Tolerances = DEFAULT) -> bool:
    for g in gens:
        if not is_hyperbolic(g, tol.trace):
            raise NotHyperbolic("Schottky test needs hyperbolic generators")
    return schottky_intervals(gens, margin, tol=tol) is not None


def share_fixed_points(g: LorentzMap, h: LorentzMap, eps: float = 1e-8,
                       tol: Tolerances = DEFAULT) -> bool:
    a, b = null_frame(g, tol), null_frame(h, tol)
    pts_a = (a.xm, a.xp)
    return any(np.linalg.norm(x - y) < eps for x in pts_a for y in (b.xm, b.xp))


def make_schottky_pair(t1: float, t2: float, theta: float, margin: float = 1e-3,
                       max_power: int = 64) -> Presentation:
    """boost(t1) and its rotated copy, raised to the smallest common power
    that passes the ping-pong test."""
    if t1 <= 0 or t2 <= 0:
        raise ValueError("boost parameters must be positive")
    r = rotation(theta)
    g = boost(t1)
    h = r @ boost(t2) @ r.inverse()
    if share_fixed_points(g, h):
        raise FailedToSeparate("generators share a fixed point (elementary group)")
    for k in range(1, max_power + 1):
        gens = [g ** k, h ** k]
        if verify_schottky(gens, margin):
            return Presentation.from_linear(gens)
    raise FailedToSeparate(f"no common power <= {max_power} separates the generators")


def make_schottky(
    rank: int,
    rng: np.random.Generator,
    t_range: tuple[float, float] = (0.6, 1.2),
    theta_jitter: float = 0.25,
    margin: float = 1e-3,
    max_power: int = 64,
) -> Presentation:
    """Rank-n Schottky group with axes spread around the circle.

    Axis i is rotated by ``(i + u_i) pi / rank`` with ``|u_i| <= theta_jitter``.
    """
    if rank < 1:
        raise ValueError("rank must be >= 1")
    base = []
    for i in range(rank):
        t = rng.uniform(*t_range)
        th = (i + rng.uniform(-theta_jitter, theta_jitter)) * math.pi / rank
        r = rotation(th)
        base.append(r @ boost(t) @ r.inverse())
    for k in range(1, max_power + 1):
        gens = [g ** k for g in base]
        if verify_schottky(gens, margin):
            return Presentation.from_linear(gens)
    raise FailedToSeparate(f"no common power <= {max_power} separates the generators")


def random_deformation(p: Presentation, rng: np.random.Generator, scale: float = 1.0) -> Presentation:
    return p.with_translations([rng.normal(scale=scale, size=3) for _ in p.gens])


PERTURBATIONS = ("eigenvalue", "angle", "translation")


def coboundary_complement(linear_gens: Sequence[LorentzMap]) -> np.ndarray:
    """Orthonormal basis (columns) of the complement of the coboundary range."""
    b = np.vstack([np.eye(3) - g.m for g in linear_gens])
    u, s, _ = np.linalg.svd(b, full_matrices=True)
    r = int(np.sum(s > 1e-10 * s[0]))
    return u[:, r:]


def perturb(p: Presentation, kind: str, size: float, rng: np.random.Generator,
            index: int | None = None, tol: Tolerances = DEFAULT) -> Presentation:
    """Change one parameter of one (hyperbolic) generator by ``size``.

    ``eigenvalue`` scales lambda by ``1 + size``; ``angle`` moves the
    attracting boundary point by ``size`` radians; ``translation`` adds a
    cocycle of norm ``size`` orthogonal to the coboundaries.
    """
    if index is None:
        index = int(rng.integers(p.rank))
    gens = list(p.gens)
    if kind == "translation":
        q = coboundary_complement(p.linear_gens)
        du = (q @ rng.normal(size=q.shape[1])).reshape(-1, 3)
        du *= size / np.linalg.norm(du)
        return p.with_translations([u + d for u, d in zip(p.translations, du)])
    g = gens[index]
    fr = null_frame(g.linear, tol)
    if kind == "eigenvalue":
        lin = hyperbolic_from_frame(fr.xm, fr.xp, fr.lam * (1.0 + size))
    elif kind == "angle":
        sign = 1.0 if rng.random() < 0.5 else -1.0
        xp = boundary_point(boundary_angle(fr.xp) + sign * size)
        lin = hyperbolic_from_frame(fr.xm, xp, fr.lam)
    else:
        raise ValueError(f"unknown perturbation {kind!r}")
    gens[index] = AffineIso(lin, g.trans)
    return Presentation(tuple(gens), p.orders)


# --------------------------------------------------------------------------
# hyperbolization


def _k_sequence(k_max: int):
    for k in range(1, k_max + 1):
        yield k
        yield -k


def _power(w: Word, k: int, orders) -> Word:
    base = w if k > 0 else w.inverse(orders)
    out: tuple = ()
    for _ in range(abs(k)):
        out = out + base.syllables
    return reduce_word(out, orders)


def _hyp_in_all(ps: Sequence[Presentation], w: Word, tol: Tolerances) -> bool:
    return bool(w) and all(
        is_hyperbolic(evaluate_linear(p.linear_gens, w), tol.hyp_margin) for p in ps
    )


def _elliptic_safe(p: Presentation, w: Word, tol: Tolerances) -> bool:
    # fixed-point set of w must not be invariant under any elliptic generator
    fr = null_frame(evaluate_linear(p.linear_gens, w), tol)
    for g, m in zip(p.linear_gens, p.orders):
        if m is None and is_hyperbolic(g, tol.trace):
            continue
        for x in (fr.xm, fr.xp):
            y = projective_action(g, x)
            if min(np.linalg.norm(y - fr.xm), np.linalg.norm(y - fr.xp)) <= tol.elliptic_margin:
                return False
    return True


def hyperbolize(
    p1: Presentation,
    p2: Presentation,
    k_max: int = 32,
    tol: Tolerances = DEFAULT,
) -> tuple[Presentation, Presentation, list[Word]]:
    """Generating words that are hyperbolic under both presentations.

    The first word is g1, or g1 g2^k; every other word is gj or w1^k gj.
    Search order is k = 1, -1, 2, -2, ... up to k_max.
    """
    if p1.rank != p2.rank or p1.orders != p2.orders:
        raise ValueError("presentations must share rank and orders")
    orders = p1.orders
    ps = (p1, p2)

    def good_base(w):
        return _hyp_in_all(ps, w, tol) and all(_elliptic_safe(p, w, tol) for p in ps)

    candidates = [gen(0)]
    if p1.rank > 1:
        candidates += [reduce_word(((0, 1), (1, k)), orders) for k in _k_sequence(k_max)]
    base = next((w for w in candidates if good_base(w)), None)
    if base is None:
        raise HyperbolizationFailed("no hyperbolic replacement for the first generator")

    words = [base]
    for j in range(1, p1.rank):
        gj = gen(j)
        if orders[j] is None and _hyp_in_all(ps, gj, tol):
            cands = [gj]
        else:
            cands = [reduce_word(_power(base, k, orders).syllables + gj.syllables, orders)
                     for k in _k_sequence(k_max)]
        found = None
        saw_shared = False
        for w in cands:
            if not _hyp_in_all(ps, w, tol):
                continue
            if any(share_fixed_points(evaluate_linear(p.linear_gens, base),
                                      evaluate_linear(p.linear_gens, w), tol=tol) for p in ps):
                saw_shared = True
                continue
            found = w
            break
        if found is None:
            if saw_shared:
                raise NonElementaryViolated(f"every candidate for generator {j + 1} shares fixed points")
            raise HyperbolizationFailed(f"no hyperbolic word for generator {j + 1} with |k| <= {k_max}")
        words.append(found)

    q1 = Presentation(tuple(evaluate_word(p1, w) for w in words))
    q2 = Presentation(tuple(evaluate_word(p2, w) for w in words))
    return q1, q2, words

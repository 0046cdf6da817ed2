"""Lorentzian linear algebra on R^{2,1}.

Vectors are plain float arrays of shape ``(3,)`` (or ``(..., 3)`` for the
batched helpers ``lorentz_dot``, ``box`` and ``euclid_norm``).  Linear
isometries are wrapped in :class:`LorentzMap`.

The scalar product is ``<x, y> = x1 y1 + x2 y2 - x3 y3`` and the Lorentzian
cross-product ``box`` is characterised by ``<u, box(v, w)> = det[u v w]``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import (
    DegenerateTriple,
    MargulisError,
    NotHyperbolic,
    NotInIdentityComponent,
    ZeroImage,
)

J = np.diag([1.0, 1.0, -1.0])
J.flags.writeable = False

_PAIRS = np.array(list(combinations(range(6), 2)))


def mvec(x) -> np.ndarray:
    """Coerce ``x`` to a finite float vector of shape (3,)."""
    v = np.array(x, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector {v}")
    return v


def lorentz_dot(v, w):
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    return v[..., 0] * w[..., 0] + v[..., 1] * w[..., 1] - v[..., 2] * w[..., 2]


def box(v, w) -> np.ndarray:
    """Lorentzian cross-product.

    ``<e_i, z> = det[e_i v w]`` gives ``z = J (v x w)``.
    """
    c = np.cross(np.asarray(v, dtype=float), np.asarray(w, dtype=float))
    c[..., 2] *= -1.0
    return c


def euclid_norm(v):
    return np.linalg.norm(np.asarray(v, dtype=float), axis=-1)


class CausalClass(str, enum.Enum):
    ZERO = "zero"
    SPACELIKE = "spacelike"
    TIMELIKE_FUTURE = "timelike-future"
    TIMELIKE_PAST = "timelike-past"
    NULL_FUTURE = "null-future"
    NULL_PAST = "null-past"


def causal_class(v, eps: float = DEFAULT.null) -> CausalClass:
    v = mvec(v)
    n = float(np.linalg.norm(v))
    if n <= eps:
        return CausalClass.ZERO
    q = float(lorentz_dot(v, v))
    if abs(q) <= eps * n * n:
        return CausalClass.NULL_FUTURE if v[2] > 0 else CausalClass.NULL_PAST
    if q > 0:
        return CausalClass.SPACELIKE
    return CausalClass.TIMELIKE_FUTURE if v[2] > 0 else CausalClass.TIMELIKE_PAST


@dataclass(frozen=True, eq=False)
class LorentzMap:
    """A linear isometry of the Lorentzian form (an element of O(2,1))."""

    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float).reshape(3, 3)
        if not np.all(np.isfinite(m)):
            raise ValueError("non-finite matrix entries")
        m.flags.writeable = False
        object.__setattr__(self, "m", m)

    @classmethod
    def checked(cls, m, tol: Tolerances = DEFAULT) -> "LorentzMap":
        g = cls(m)
        if not is_lorentz(g.m, tol):
            raise MargulisError("matrix does not preserve the Lorentzian form")
        return g

    @property
    def det_sign(self) -> int:
        # For Lorentz m the cofactor matrix is det(m) * J m J.  Reading the
        # sign off that identity survives the cancellation that ruins
        # np.linalg.det on very long words.
        m = self.m
        cof = np.stack([np.cross(m[1], m[2]), np.cross(m[2], m[0]), np.cross(m[0], m[1])])
        return 1 if float(np.sum(cof * (J @ m @ J))) > 0 else -1

    @property
    def time_sign(self) -> int:
        # |m33| >= 1 for any element of O(2,1)
        return 1 if self.m[2, 2] > 0 else -1

    @property
    def in_identity_component(self) -> bool:
        return self.det_sign == 1 and self.time_sign == 1

    def inverse(self) -> "LorentzMap":
        return LorentzMap(J @ self.m.T @ J)

    def __call__(self, v) -> np.ndarray:
        return self.m @ np.asarray(v, dtype=float)

    def __matmul__(self, other: "LorentzMap") -> "LorentzMap":
        return LorentzMap(self.m @ other.m)

    def __pow__(self, n: int) -> "LorentzMap":
        if n < 0:
            return LorentzMap(np.linalg.matrix_power(self.inverse().m, -n))
        return LorentzMap(np.linalg.matrix_power(self.m, n))

    def trace(self) -> float:
        return float(np.trace(self.m))

    def __repr__(self):
        return f"LorentzMap({self.m.tolist()!r})"


IDENTITY = LorentzMap(np.eye(3))


def is_lorentz(m, tol: Tolerances = DEFAULT) -> bool:
    m = np.asarray(m, dtype=float)
    scale = max(1.0, float(np.linalg.norm(m)) ** 2)
    return float(np.max(np.abs(m.T @ J @ m - J))) <= tol.orth * scale


def require_identity_component(g: LorentzMap, tol: Tolerances = DEFAULT) -> None:
    if not is_lorentz(g.m, tol):
        raise NotInIdentityComponent("matrix does not preserve the Lorentzian form")
    if not g.in_identity_component:
        raise NotInIdentityComponent(
            f"det sign {g.det_sign}, time sign {g.time_sign}: not in SO(2,1)^0"
        )


class IsometryClass(str, enum.Enum):
    IDENTITY = "identity"
    HYPERBOLIC = "hyperbolic"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"


def classify(g: LorentzMap, tol: Tolerances = DEFAULT) -> IsometryClass:
    require_identity_component(g, tol)
    if float(np.max(np.abs(g.m - np.eye(3)))) <= tol.ident:
        return IsometryClass.IDENTITY
    tr = g.trace()
    if tr > 3.0 + tol.trace:
        return IsometryClass.HYPERBOLIC
    if tr < 3.0 - tol.trace:
        return IsometryClass.ELLIPTIC
    return IsometryClass.PARABOLIC


def is_hyperbolic(g: LorentzMap, margin: float = DEFAULT.trace) -> bool:
    return g.in_identity_component and g.trace() > 3.0 + margin


@dataclass(frozen=True, eq=False)
class NullFrame:
    x0: np.ndarray
    xm: np.ndarray
    xp: np.ndarray
    lam: float
    ill_conditioned: bool = False

    def as_matrix(self) -> np.ndarray:
        """Columns x0, xm, xp."""
        return np.column_stack([self.x0, self.xm, self.xp])


_SIGN = np.array([1.0, 1.0, -1.0])
_LJ = _SIGN[:, None] * _SIGN[None, :]


def _kernels(a: np.ndarray, a_inv: np.ndarray, k: np.ndarray) -> np.ndarray:
    # The k-eigenvector of a is the 1/k-eigenvector of a_inv, so it is
    # orthogonal to every row of both shifted matrices.  Rows are
    # normalised and the best-separated pair wins; this stays accurate
    # when one of the two matrices is dominated by a rank-one part.
    eye = np.eye(3)
    rows = np.concatenate(
        [a - k[:, None, None] * eye, a_inv - eye / k[:, None, None]], axis=1
    )
    norms = np.linalg.norm(rows, axis=2, keepdims=True)
    rows = rows / np.where(norms > 0, norms, 1.0)
    crosses = np.cross(rows[:, _PAIRS[:, 0]], rows[:, _PAIRS[:, 1]])
    best = np.argmax(np.einsum("kij,kij->ki", crosses, crosses), axis=1)
    return crosses[np.arange(len(k)), best]


def frames_of_matrices(ms: np.ndarray, tol: Tolerances = DEFAULT):
    """Batched null frames of matrices already known to lie in SO(2,1)^0.

    Returns ``(x0, xm, xp, lam)`` with shapes (K,3), (K,3), (K,3), (K,).
    The membership test is skipped: its determinant is unreliable for
    the very large matrices of long words.
    """
    ms = np.asarray(ms, dtype=float)
    tr = np.trace(ms, axis1=1, axis2=2)
    if not np.all(tr > 3.0 + tol.trace):
        raise NotHyperbolic(f"trace {tr.min()!r} does not exceed 3")
    mu = tr - 1.0
    big = 0.5 * (mu + np.sqrt((mu - 2.0) * (mu + 2.0)))
    m_inv = np.swapaxes(ms, 1, 2) * _LJ
    ones = np.ones_like(big)

    xp = _kernels(ms, m_inv, big)
    xm = _kernels(m_inv, ms, big)
    x0 = _kernels(ms, m_inv, ones)

    xp = xp / np.linalg.norm(xp, axis=1, keepdims=True)
    xp = xp * np.sign(xp[:, 2:3])
    xm = xm / np.linalg.norm(xm, axis=1, keepdims=True)
    xm = xm * np.sign(xm[:, 2:3])
    q = lorentz_dot(x0, x0)
    if not np.all(q > 0):
        raise NotHyperbolic("fixed vector is not spacelike")
    x0 = x0 / np.sqrt(q)[:, None]
    orient = np.einsum("ki,ki->k", x0, np.cross(xm, xp))
    x0 = x0 * np.where(orient < 0, -1.0, 1.0)[:, None]
    return x0, xm, xp, 1.0 / big


def null_frame(g: LorentzMap, tol: Tolerances = DEFAULT) -> NullFrame:
    """Null frame {x0, x-, x+} and contracting eigenvalue of a hyperbolic map.

    Eigenvalues come from the trace (``trace = 1 + lam + 1/lam``), eigenvectors
    from cross-products of rows of the shifted matrices.
    """
    if classify(g, tol) is not IsometryClass.HYPERBOLIC:
        raise NotHyperbolic(f"trace {g.trace()!r} does not exceed 3")
    return frame_of_matrix(g.m, tol)


def frame_of_matrix(m: np.ndarray, tol: Tolerances = DEFAULT) -> NullFrame:
    x0, xm, xp, lam = frames_of_matrices(np.asarray(m, dtype=float)[None], tol)
    tr = float(np.trace(m))
    return NullFrame(x0[0], xm[0], xp[0], float(lam[0]), (tr - 3.0) < tol.near_parabolic)


def x0_from_null_pair(xm, xp) -> np.ndarray:
    """Unit-spacelike vector ``-(xm box xp) / <xm, xp>``."""
    return -box(xm, xp) / lorentz_dot(xm, xp)[..., None]


def boost(t: float) -> LorentzMap:
    """One-parameter hyperbolic subgroup fixing e1; [0,1,1] has eigenvalue e^t."""
    c, s = math.cosh(t), math.sinh(t)
    return LorentzMap([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, s, c]])


def rotation(theta: float) -> LorentzMap:
    """Elliptic subgroup fixing e3."""
    c, s = math.cos(theta), math.sin(theta)
    return LorentzMap([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def canonical_isometry(kind: str, param: float) -> LorentzMap:
    if kind == "boost":
        return boost(param)
    if kind == "rotation":
        return rotation(param)
    raise ValueError(f"unknown kind {kind!r}")


REFLECTION = LorentzMap(np.diag([-1.0, 1.0, 1.0]))
TIME_REVERSAL = LorentzMap(np.diag([1.0, 1.0, -1.0]))


def hyperbolic_from_frame(xm, xp, lam: float) -> LorentzMap:
    """The hyperbolic map with the given null eigendirections and eigenvalue lam."""
    xm = mvec(xm)
    xp = mvec(xp)
    x0 = x0_from_null_pair(xm, xp)
    p = np.column_stack([x0, xm, xp])
    return LorentzMap(p @ np.diag([1.0, lam, 1.0 / lam]) @ np.linalg.inv(p))


def boundary_point(angle: float) -> np.ndarray:
    """Future-pointing Euclidean-unit null vector over the given angle."""
    return np.array([math.cos(angle), math.sin(angle), 1.0]) / math.sqrt(2.0)


def boundary_angle(v) -> float:
    v = np.asarray(v, dtype=float)
    return math.atan2(v[1] / v[2], v[0] / v[2])


def triple_conjugator(src: Sequence, dst: Sequence, tol: Tolerances = DEFAULT) -> LorentzMap:
    """f in O(2,1) sending the null directions src[i] to dst[i].

    The three scale factors c_i > 0 are pinned down by requiring
    ``c_i c_j <dst_i, dst_j> = <src_i, src_j>``; then ``f = D S^{-1}``
    preserves the Gram matrix of a basis and is therefore an isometry.
    """
    s = np.column_stack([_unit_null(v, tol) for v in src])
    d = np.column_stack([_unit_null(v, tol) for v in dst])
    for frame in (s, d):
        for i, j in combinations(range(3), 2):
            if np.linalg.norm(frame[:, i] - frame[:, j]) <= math.sqrt(tol.null):
                raise DegenerateTriple(f"directions {i} and {j} coincide")
    gs = lorentz_dot(s.T[:, None, :], s.T[None, :, :])
    gd = lorentz_dot(d.T[:, None, :], d.T[None, :, :])
    a12 = gs[0, 1] / gd[0, 1]
    a13 = gs[0, 2] / gd[0, 2]
    a23 = gs[1, 2] / gd[1, 2]
    c = np.array([
        math.sqrt(a12 * a13 / a23),
        math.sqrt(a12 * a23 / a13),
        math.sqrt(a13 * a23 / a12),
    ])
    f = np.linalg.solve(s.T, (d * c).T).T
    return LorentzMap(f)


def _unit_null(v, tol: Tolerances) -> np.ndarray:
    v = mvec(v)
    if causal_class(v, tol.null) is not CausalClass.NULL_FUTURE:
        # allow slightly-off null vectors produced by normalisation round-off
        if not (v[2] > 0 and abs(lorentz_dot(v, v)) <= 1e-7 * v.dot(v)):
            raise DegenerateTriple(f"{v} is not a future-pointing null vector")
    return v / np.linalg.norm(v)


def projective_action(g: LorentzMap, v) -> np.ndarray:
    """g(v) / |g(v)| on future-pointing rays."""
    w = g(mvec(v))
    n = float(np.linalg.norm(w))
    if n == 0.0:
        raise ZeroImage("isometry sent a nonzero vector to zero")
    return w / n


def random_isometry(
    rng: np.random.Generator,
    max_boost: float = 1.0,
    orientation_reversing: bool = False,
    time_reversing: bool = False,
) -> LorentzMap:
    """rotation . boost . rotation, then diag(o*t, 1, t) for the requested signs."""
    g = rotation(rng.uniform(0, 2 * math.pi)) @ boost(rng.uniform(-max_boost, max_boost))
    g = g @ rotation(rng.uniform(0, 2 * math.pi))
    o = -1.0 if orientation_reversing else 1.0
    t = -1.0 if time_reversing else 1.0
    return LorentzMap(np.diag([o * t, 1.0, t])) @ g

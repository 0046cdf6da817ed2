"""Marked Margulis spectra, the limit vector x0(g, h), kappa, and
convergence-rate reports for eigendirections.

Word invariants are computed from the cocycle one letter at a time: for
``w = L_0 ... L_{k-1}`` with prefix products ``P_k``,

    alpha(w) = sum_k <P_k t_k, x0(w)> = sum_k <t_k, x0(P_k^{-1} w P_k)>,

and ``P_k^{-1} w P_k`` is a cyclic shift of ``w``.  Every term is a
translation paired with a unit vector, so nothing of size |w| is ever
cancelled; the naive ``<trans(w), x0(w)>`` loses all accuracy once the
word's matrix entries reach 1e16.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .affine import AffineIso, invariant_line, margulis
from .config import DEFAULT, Tolerances
from .errors import (
    DegeneratePair,
    NonHyperbolicWord,
    NotHyperbolic,
    ParallelNoIntersect,
    StartAtRepeller,
)
from .groups import Presentation
from .lorentz import (
    J,
    LorentzMap,
    NullFrame,
    frame_of_matrix,
    frames_of_matrices,
    hyperbolic_from_frame,
    lorentz_dot,
    mvec,
    null_frame,
    projective_action,
    x0_from_null_pair,
)
from .words import Word, cyclic_reduce, enumerate_words

BETA = math.sqrt(2.0) / 2.0


@dataclass(frozen=True)
class SpectrumEntry:
    word: Word
    alpha: float
    skipped: bool = False


@dataclass(frozen=True)
class Spectrum:
    entries: tuple

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def alphas(self) -> np.ndarray:
        return np.array([e.alpha for e in self.entries])

    def words(self) -> list[Word]:
        return [e.word for e in self.entries]


def _letter_mats(gens: Sequence[LorentzMap], word: Word):
    cache = {}
    idx, mats = [], []
    for i, s in word.letters():
        if (i, s) not in cache:
            cache[i, s] = gens[i].m if s > 0 else gens[i].inverse().m
        idx.append((i, s))
        mats.append(cache[i, s])
    return idx, mats


def _shift_matrices(gens: Sequence[LorentzMap], word: Word):
    idx, mats = _letter_mats(gens, word)
    n = len(mats)
    if n == 0:
        raise NonHyperbolicWord("empty word")
    prefix = [np.eye(3)]
    for a in mats:
        prefix.append(prefix[-1] @ a)
    suffix = [np.eye(3)] * (n + 1)
    for k in range(n - 1, -1, -1):
        suffix[k] = mats[k] @ suffix[k + 1]
    return idx, np.stack([suffix[k] @ prefix[k] for k in range(n)])


def word_frames(gens: Sequence[LorentzMap], word: Word, tol: Tolerances = DEFAULT):
    """Letters and frames ``(x0, xm, xp, lam)`` of all cyclic shifts
    ``S_k P_k`` of the word, k = 0..len-1."""
    idx, shifts = _shift_matrices(gens, word)
    try:
        return idx, frames_of_matrices(shifts, tol)
    except NotHyperbolic as exc:
        raise NonHyperbolicWord(f"{word} is not hyperbolic") from exc


def alpha_row(gens: Sequence[LorentzMap], word: Word, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Coefficients of alpha(word) as a linear form in the stacked translations.

    Block j collects ``J x0(shift_k)`` for letters g_j and
    ``-J x0(shift_{k+1})`` for letters g_j^{-1}; the row dotted with the
    concatenated generator translations is the Margulis invariant.

    alpha is a class function, so the word is cyclically reduced first:
    frames of long conjugates are badly conditioned.
    """
    word = cyclic_reduce(word)
    idx, (x0s, _, _, _) = word_frames(gens, word, tol)
    n = len(idx)
    jx0 = x0s * np.array([1.0, 1.0, -1.0])
    row = np.zeros(3 * len(gens))
    for k, (i, s) in enumerate(idx):
        if s > 0:
            row[3 * i:3 * i + 3] += jx0[k]
        else:
            row[3 * i:3 * i + 3] -= jx0[(k + 1) % n]
    return row


def word_alpha(p: Presentation, word: Word, tol: Tolerances = DEFAULT) -> float:
    return float(alpha_row(p.linear_gens, word, tol) @ np.concatenate(p.translations))


def word_frame(p_or_gens, word: Word, tol: Tolerances = DEFAULT) -> NullFrame:
    gens = p_or_gens.linear_gens if isinstance(p_or_gens, Presentation) else p_or_gens
    return frame_of_matrix(_shift_matrices(gens, word)[1][0], tol)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("MARGULIS_THREADS", "1")))
    except ValueError:
        return 1


def spectrum_of_words(p: Presentation, words: Sequence[Word], tol: Tolerances = DEFAULT) -> Spectrum:
    u = np.concatenate(p.translations)
    gens = p.linear_gens

    def one(w):
        try:
            return SpectrumEntry(w, float(alpha_row(gens, w, tol) @ u))
        except NonHyperbolicWord:
            return SpectrumEntry(w, math.nan, True)

    workers = _workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            entries = list(ex.map(one, words))
    else:
        entries = [one(w) for w in words]
    return Spectrum(tuple(entries))


def marked_spectrum(p: Presentation, max_len: int, tol: Tolerances = DEFAULT) -> Spectrum:
    """Margulis invariant of every word up to max_len letters; non-hyperbolic
    words are kept in order but flagged as skipped."""
    return spectrum_of_words(p, enumerate_words(p.rank, p.orders, max_len), tol)


def alpha_functional_matrix(linear_gens: Sequence[LorentzMap], words: Sequence[Word],
                            tol: Tolerances = DEFAULT) -> np.ndarray:
    if not words:
        return np.zeros((0, 3 * len(linear_gens)))
    return np.vstack([alpha_row(linear_gens, w, tol) for w in words])


# --------------------------------------------------------------------------
# asymptotics of alpha(eta^n gamma^m)


def x0_limit(g: LorentzMap, h: LorentzMap, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Common limit of x0(h^n g^m): ``-(xm(g) box xp(h)) / <xm(g), xp(h)>``."""
    fg, fh = null_frame(g, tol), null_frame(h, tol)
    d = lorentz_dot(fg.xm, fh.xp)
    if abs(d) < math.sqrt(tol.null):
        raise DegeneratePair("xm(g) and xp(h) are the same boundary point")
    return x0_from_null_pair(fg.xm, fh.xp)


@dataclass(frozen=True, eq=False)
class AsymptoticData:
    x0_gh: np.ndarray
    kappa: float
    lambda_g: float
    lambda_h: float
    alpha_g: float
    alpha_h: float
    inner_xm_h: float


def kappa(gamma: AffineIso, eta: AffineIso, tol: Tolerances = DEFAULT) -> AsymptoticData:
    """Intersect C_gamma with the plane E-(eta) = C_eta + span{xm(h)}.

    Writing the intersection point as ``q = r + kappa xm(h)`` with r on
    C_eta gives kappa.
    """
    fg = null_frame(gamma.linear, tol)
    fh = null_frame(eta.linear, tol)
    x0gh = x0_limit(gamma.linear, eta.linear, tol)
    cg = invariant_line(gamma, tol)
    ch = invariant_line(eta, tol)
    a = np.column_stack([fg.x0, -fh.x0, -fh.xm])
    if np.linalg.cond(a) > tol.cond:
        raise ParallelNoIntersect("C_gamma is parallel to E-(eta)")
    _, _, k = np.linalg.solve(a, ch.point - cg.point)
    return AsymptoticData(
        x0_gh=x0gh,
        kappa=float(k),
        lambda_g=fg.lam,
        lambda_h=fh.lam,
        alpha_g=margulis(gamma, tol),
        alpha_h=margulis(eta, tol),
        inner_xm_h=float(lorentz_dot(fh.xm, x0gh)),
    )


def asymptotic_alpha(data: AsymptoticData, m: int, n: int) -> float:
    """m alpha(gamma) + n alpha(eta) + kappa (lambda_h^n - 1) <xm(h), x0(g,h)>"""
    return (m * data.alpha_g + n * data.alpha_h
            + data.kappa * (data.lambda_h ** n - 1.0) * data.inner_xm_h)


def family_word(n: int, m: int, eta: int = 1, gamma: int = 0) -> Word:
    """eta^n gamma^m as a word."""
    syl = []
    if n:
        syl.append((eta, n))
    if m:
        syl.append((gamma, m))
    return Word(tuple(syl))


def family_alphas(p: Presentation, ns: Sequence[int], ms: Sequence[int],
                  tol: Tolerances = DEFAULT) -> np.ndarray:
    """alpha(eta^n gamma^m) on a grid, gamma = gens[0], eta = gens[1]."""
    out = np.empty((len(ns), len(ms)))
    for a, n in enumerate(ns):
        for b, m in enumerate(ms):
            out[a, b] = word_alpha(p, family_word(n, m), tol)
    return out


def estimate_kappa(data: AsymptoticData, alphas: np.ndarray, ns: Sequence[int],
                   ms: Sequence[int]) -> float:
    """Least-squares kappa from exact alpha(eta^n gamma^m) values."""
    n_grid, m_grid = np.meshgrid(np.asarray(ns), np.asarray(ms), indexing="ij")
    y = alphas - m_grid * data.alpha_g - n_grid * data.alpha_h
    x = (data.lambda_h ** n_grid - 1.0) * data.inner_xm_h
    return float(np.sum(x * y) / np.sum(x * x))


def fit_log_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Slope of log(y) against x."""
    slope, _ = np.polyfit(np.asarray(xs, dtype=float), np.log(np.asarray(ys, dtype=float)), 1)
    return float(slope)


@dataclass(frozen=True, eq=False)
class DecayReport:
    ks: np.ndarray
    envelope: np.ndarray
    used: np.ndarray
    slope: float
    rate: float
    kappa: float
    kappa_estimate: float

    @property
    def slope_ratio(self) -> float:
        """Fitted slope over log max(lambda_g, lambda_h); 1 is the prediction."""
        return self.slope / math.log(self.rate)


def residual_decay(p: Presentation, ns: Sequence[int] = range(2, 13), fit_from: int = 6,
                   tail_from: int = 10, floor: float = 1e-11,
                   tol: Tolerances = DEFAULT) -> DecayReport:
    """Decay of |alpha(eta^n gamma^m) - asymptote| as min(n, m) grows.

    The residual is summarised by its envelope over each shell min(n, m) = k
    and log(envelope) is fitted against k for k >= fit_from, skipping points
    at the rounding floor ``floor * max(1, max|alpha|)``.  kappa is also
    estimated by least squares from the tail n, m >= tail_from.
    """
    ns = list(ns)
    data = kappa(p.gens[0], p.gens[1], tol)
    alphas = family_alphas(p, ns, ns, tol)
    pred = np.array([[asymptotic_alpha(data, m, n) for m in ns] for n in ns])
    r = np.abs(alphas - pred)
    idx = np.arange(len(ns))
    shell = np.minimum.outer(idx, idx)
    env = np.array([r[shell == i].max() for i in idx])
    ks = np.array(ns)
    used = (ks >= fit_from) & (env > floor * max(1.0, float(np.abs(alphas).max())))
    slope = fit_log_slope(ks[used], env[used]) if used.sum() >= 2 else math.nan
    tail = [i for i, n in enumerate(ns) if n >= tail_from]
    k_est = estimate_kappa(data, alphas[np.ix_(tail, tail)], [ns[i] for i in tail],
                           [ns[i] for i in tail])
    return DecayReport(ks, env, used, slope, max(data.lambda_g, data.lambda_h),
                       data.kappa, k_est)


# --------------------------------------------------------------------------
# convergence of eigendirections


def convergence_report(g: LorentzMap, v, n_max: int, eps: float = 1e-12,
                       tol: Tolerances = DEFAULT) -> list[tuple[int, float]]:
    """Euclidean distance from the n-th projective iterate of v to xp(g)."""
    fr = null_frame(g, tol)
    v = mvec(v)
    v = v / np.linalg.norm(v)
    if np.linalg.norm(v - fr.xm) < eps:
        raise StartAtRepeller("starting point is the repelling direction")
    out = []
    for n in range(n_max + 1):
        out.append((n, float(np.linalg.norm(v - fr.xp))))
        v = projective_action(g, v)
    return out


def canonical_contraction(lam: float) -> tuple[LorentzMap, np.ndarray]:
    """Hyperbolic map with xm = [0, b, b], xp = [0, -b, b] and start [b, 0, b]."""
    g = hyperbolic_from_frame([0.0, BETA, BETA], [0.0, -BETA, BETA], lam)
    return g, np.array([BETA, 0.0, BETA])


def contraction_closed_form(lam: float, n: int) -> float:
    ln2 = lam ** (2 * n)
    return lam ** n * math.sqrt(1.0 + ln2) / (BETA * (1.0 + ln2))


def frame_distance_report(g: LorentzMap, h: LorentzMap,
                          tol: Tolerances = DEFAULT) -> tuple[float, float]:
    fg, fh = null_frame(g, tol), null_frame(h, tol)
    d_pm = max(float(np.linalg.norm(fg.xm - fh.xm)), float(np.linalg.norm(fg.xp - fh.xp)))
    return d_pm, float(np.linalg.norm(fg.x0 - fh.x0))


def canonical_delta_pair(delta: float, lam: float = 0.5) -> tuple[LorentzMap, LorentzMap]:
    """Two hyperbolic maps sharing xm = [0, b, b]; xp(h) is xp(g) turned by delta."""
    xm = [0.0, BETA, BETA]
    g = hyperbolic_from_frame(xm, [0.0, -BETA, BETA], lam)
    h = hyperbolic_from_frame(xm, [BETA * math.sin(delta), -BETA * math.cos(delta), BETA], lam)
    return g, h


def frame_distance_closed_form(delta: float) -> tuple[float, float]:
    return (math.sqrt(1.0 - math.cos(delta)),
            math.sqrt(2.0) * abs(math.sin(delta)) / (1.0 + math.cos(delta)))

"""Reconstruction of affine conjugacies from marked Margulis spectra.

Two entry points:

* :func:`weak_recover_translation` -- shared linear part; the conjugacy is a
  pure translation solved from the coboundary equations.
* :func:`strong_reconstruct` -- unknown linear parts; normalise a rank-two
  pair, match eigendirections and eigenvalues, recover the translation, then
  verify the single candidate conjugator on every original generator.

A ``conjugate`` verdict is only ever issued for an explicit conjugator that
has been checked against the generators.

Conjugating by a map with negative determinant negates every Margulis
invariant, so spectra are compared up to one global sign.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .affine import (
    AffineIso,
    compose,
    conjugate,
    invariant_line,
    inverse,
    is_radiant,
    margulis,
    operator_distance,
    translation,
)
from .config import DEFAULT, Tolerances
from .errors import (
    DegeneratePair,
    DegenerateTriple,
    ElementaryGroup,
    ElementaryInput,
    MargulisError,
    NonElementaryViolated,
    NonHyperbolicWord,
    NotHyperbolic,
    NotParallel,
    ParallelNoIntersect,
    RadiantInput,
    SharedLinearPartViolated,
)
from .groups import Presentation, conjugate_presentation, hyperbolize
from .lorentz import IDENTITY, LorentzMap, lorentz_dot, null_frame, triple_conjugator
from .spectrum import (
    Spectrum,
    alpha_functional_matrix,
    family_word,
    kappa,
    marked_spectrum,
    spectrum_of_words,
    word_alpha,
    word_frame,
)
from .words import Word, enumerate_words, reduce_word

_GUARD_ERRORS = (DegenerateTriple, ParallelNoIntersect, DegeneratePair, NotParallel,
                 NonHyperbolicWord, NotHyperbolic)


class Verdict(str, enum.Enum):
    CONJUGATE = "conjugate"
    MISMATCH = "mismatch"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True, eq=False)
class ConjugacyCertificate:
    """Outcome of a conjugacy search.

    ``conjugator`` carries the first group onto the second:
    ``p2.gens[i] ~ conjugator . p1.gens[i] . conjugator^{-1}`` with relative
    operator-norm mismatch ``residual``.
    """

    f: LorentzMap
    tau: np.ndarray
    residual: float
    words_checked: int
    verdict: Verdict
    witness: Word | None = None
    delta_alpha: float | None = None
    note: str = ""

    @property
    def conjugator(self) -> AffineIso:
        return AffineIso(self.f, self.tau)


def generator_residual(p1: Presentation, p2: Presentation, phi: AffineIso) -> float:
    """max_i |phi p1_i phi^-1 - p2_i| / max(1, |p2_i|) in the 4x4 spectral norm."""
    worst = 0.0
    for a, b in zip(p1.gens, p2.gens):
        scale = max(1.0, float(np.linalg.norm(b.homogeneous(), 2)))
        worst = max(worst, operator_distance(conjugate(phi, a), b) / scale)
    return worst


# --------------------------------------------------------------------------
# spectra comparison


@dataclass(frozen=True)
class SpectrumComparison:
    sign: int
    words_checked: int
    witness: Word | None
    delta_alpha: float | None

    @property
    def agree(self) -> bool:
        return self.witness is None


def compare_spectra(s1: Spectrum, s2: Spectrum, tol: float) -> SpectrumComparison:
    """Compare two spectra on their common hyperbolic words, up to a global sign.

    The sign with fewer violations wins; the witness is the first word (in
    enumeration order) whose invariants still differ by more than ``tol``.
    """
    common = [(a.word, a.alpha, b.alpha) for a, b in zip(s1, s2)
              if not a.skipped and not b.skipped]
    if not common:
        return SpectrumComparison(1, 0, None, None)
    a1 = np.array([c[1] for c in common])
    a2 = np.array([c[2] for c in common])
    bad = {s: np.abs(a2 - s * a1) > tol for s in (1, -1)}
    sign = 1 if bad[1].sum() <= bad[-1].sum() else -1
    idx = np.flatnonzero(bad[sign])
    if idx.size == 0:
        return SpectrumComparison(sign, len(common), None, None)
    k = int(idx[0])
    return SpectrumComparison(sign, len(common), common[k][0], float(abs(a2[k] - sign * a1[k])))


def _spectral_witness(p1: Presentation, p2: Presentation, max_len: int, tol: float):
    words = enumerate_words(p1.rank, p1.orders, max_len)
    cmp = compare_spectra(spectrum_of_words(p1, words), spectrum_of_words(p2, words), tol)
    if cmp.witness is not None:
        return cmp.witness, cmp.delta_alpha, cmp.words_checked
    # no violation: report the largest deviation for the record
    return None, None, cmp.words_checked


# --------------------------------------------------------------------------
# weak isospectrality


def _same_linear_parts(p1: Presentation, p2: Presentation, rel: float = 1e-10) -> bool:
    for a, b in zip(p1.linear_gens, p2.linear_gens):
        scale = max(1.0, float(np.max(np.abs(a.m))))
        if float(np.max(np.abs(a.m - b.m))) > rel * scale:
            return False
    return True


def weak_recover_translation(p1: Presentation, p2: Presentation, tol: float = 1e-8,
                             witness_len: int = 3) -> ConjugacyCertificate:
    """Translation v with ``p2 = T_v p1 T_v^{-1}`` for a shared linear part.

    Stacks ``(I - g_i) v = u2(g_i) - u1(g_i)`` and solves by least squares;
    the solution is unique because a non-elementary linear group fixes no
    nonzero vector.
    """
    if p1.rank != p2.rank or not _same_linear_parts(p1, p2):
        raise SharedLinearPartViolated("presentations do not share their linear parts")
    a = np.vstack([np.eye(3) - g.m for g in p1.linear_gens])
    b = np.concatenate([u2 - u1 for u1, u2 in zip(p1.translations, p2.translations)])
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise ElementaryGroup("linear group fixes a nonzero vector")
    v, *_ = np.linalg.lstsq(a, b, rcond=None)
    residual = float(np.max(np.linalg.norm((a @ v - b).reshape(-1, 3), axis=1)))
    if residual < tol:
        return ConjugacyCertificate(IDENTITY, v, residual, 0, Verdict.CONJUGATE)
    witness, delta, checked = _spectral_witness(p1, p2, witness_len, tol)
    if witness is None:
        return ConjugacyCertificate(IDENTITY, v, residual, checked, Verdict.INCONCLUSIVE,
                                    note="translation residual above tol but no spectral witness")
    return ConjugacyCertificate(IDENTITY, v, residual, checked, Verdict.MISMATCH, witness, delta)


def spectrum_map_rank(linear_gens: Sequence[LorentzMap], words: Sequence[Word],
                      cutoff: float = 1e-8) -> int:
    """Rank of the spectrum map on H^1 = Z^1 / B^1 (free groups).

    The alpha-functional matrix is restricted to the orthogonal complement of
    the coboundary directions ``(v - g_1 v, ..., v - g_n v)``.
    """
    a = alpha_functional_matrix(linear_gens, words)
    b = np.vstack([np.eye(3) - g.m for g in linear_gens])
    u, s, _ = np.linalg.svd(b, full_matrices=True)
    r = int(np.sum(s > 1e-10 * s[0]))
    q = u[:, r:]
    if a.shape[0] == 0 or q.shape[1] == 0:
        return 0
    sv = np.linalg.svd(a @ q, compute_uv=False)
    return int(np.sum(sv > cutoff * max(sv[0], 1e-300)))


# --------------------------------------------------------------------------
# strong isospectrality, rank-two steps


def _alpha_sign(p1: Presentation, p2: Presentation, tol: Tolerances) -> int:
    a1 = np.array([margulis(g, tol) for g in p1.gens[:2]])
    a2 = np.array([margulis(g, tol) for g in p2.gens[:2]])
    return 1 if np.sum(np.abs(a2 - a1)) <= np.sum(np.abs(a2 + a1)) else -1


def normalize_pair(p1: Presentation, p2: Presentation, tol: Tolerances = DEFAULT,
                   sign: int | None = None) -> tuple[Presentation, LorentzMap, np.ndarray]:
    """Conjugate p2 so that x+(eta), x-(eta), x-(gamma) and C_eta match p1.

    gamma = gens[0], eta = gens[1].  Returns the normalised presentation, the
    linear normaliser f and the translation applied after it; together they
    form the affine map ``x -> f x + tau``.

    The null triple fixes f only up to -f.  Conjugation by f multiplies every
    Margulis invariant by det f, so f is chosen with ``det f`` equal to
    ``sign`` (alpha(p2) = sign * alpha(p1)); by default the sign is read off
    the two generators.
    """
    g1, h1 = (null_frame(p1.gens[i].linear, tol) for i in (0, 1))
    g2, h2 = (null_frame(p2.gens[i].linear, tol) for i in (0, 1))
    f = triple_conjugator([h2.xp, h2.xm, g2.xm], [h1.xp, h1.xm, g1.xm], tol)
    if sign is None:
        sign = _alpha_sign(p1, p2, tol)
    if f.det_sign != sign:
        f = LorentzMap(-f.m)
    p2f = conjugate_presentation(p2, AffineIso(f, np.zeros(3)))
    c1 = invariant_line(p1.gens[1], tol)
    c2 = invariant_line(p2f.gens[1], tol)
    if abs(abs(float(lorentz_dot(c1.dir, c2.dir))) - 1.0) > 1e-8:
        raise NotParallel("invariant lines of eta are not parallel after normalisation")
    d = c1.point - c2.point
    tau = d - lorentz_dot(d, c1.dir) * c1.dir
    return conjugate_presentation(p2f, translation(tau)), f, tau


_GHG = Word(((0, 1), (1, 1), (0, -1)))
_HGH = Word(((1, 1), (0, 1), (1, -1)))


@dataclass(frozen=True)
class PairMatch:
    ok: bool
    witness: Word | None = None
    delta_alpha: float | None = None
    kappa_gap: float = math.nan
    direction_gap: float = math.nan


def _family_words(n_max: int) -> list[Word]:
    return [family_word(n, m) for n in range(n_max + 1) for m in range(n_max + 1) if n or m]


def eigendirection_match(p1: Presentation, p2n: Presentation, n_max: int = 8,
                         tol: float = 1e-8, cfg: Tolerances = DEFAULT) -> PairMatch:
    words = _family_words(n_max)
    a1 = np.array([word_alpha(p1, w, cfg) for w in words])
    a2 = np.array([word_alpha(p2n, w, cfg) for w in words])
    diff = np.abs(a1 - a2)
    k1 = kappa(p1.gens[0], p1.gens[1], cfg).kappa
    k2 = kappa(p2n.gens[0], p2n.gens[1], cfg).kappa
    xp1 = null_frame(p1.gens[0].linear, cfg).xp
    xp2 = null_frame(p2n.gens[0].linear, cfg).xp
    gap = float(np.linalg.norm(xp1 - xp2))
    bad = np.flatnonzero(diff > tol)
    witness = words[int(bad[0])] if bad.size else None
    delta = float(diff[int(bad[0])]) if bad.size else None
    ok = witness is None and abs(k1 - k2) <= tol and gap <= tol
    return PairMatch(ok, witness, delta, abs(k1 - k2), gap)


def match_remaining_eigendirection(p1: Presentation, p2n: Presentation, n_max: int = 8,
                                   tol: float = 1e-8, cfg: Tolerances = DEFAULT) -> bool:
    """Equal alpha on eta^n gamma^m, equal kappa, then equal x+(gamma)."""
    return eigendirection_match(p1, p2n, n_max, tol, cfg).ok


def match_eigenvalues(p1: Presentation, p2n: Presentation, tol: float = 1e-8,
                      cfg: Tolerances = DEFAULT, verify_traces: bool = True) -> bool:
    """x+ of gamma eta gamma^-1 pins lambda_gamma once the eigendirections agree;
    likewise eta gamma eta^-1 for lambda_eta."""
    for w in (_GHG, _HGH):
        f1, f2 = word_frame(p1, w, cfg), word_frame(p2n, w, cfg)
        if np.linalg.norm(f1.xp - f2.xp) > tol or np.linalg.norm(f1.xm - f2.xm) > tol:
            return False
    if verify_traces:
        for a, b in zip(p1.linear_gens[:2], p2n.linear_gens[:2]):
            la, lb = null_frame(a, cfg).lam, null_frame(b, cfg).lam
            if abs(la - lb) > tol * max(la, lb):
                return False
    return True


def fixed_point_isospectrality_check(p1: Presentation, p2: Presentation, max_len: int = 3,
                                     tol: float = 1e-8, cfg: Tolerances = DEFAULT) -> bool:
    """True iff (x+(w), x-(w)) agree for every word up to max_len.

    Words come in enumeration order, so generators and length-two words are
    tested before anything longer.
    """
    for w in enumerate_words(p1.rank, p1.orders, max_len):
        try:
            f1, f2 = word_frame(p1, w, cfg), word_frame(p2, w, cfg)
        except NonHyperbolicWord as exc:
            raise NotHyperbolic(str(exc)) from exc
        if np.linalg.norm(f1.xp - f2.xp) > tol or np.linalg.norm(f1.xm - f2.xm) > tol:
            return False
    return True


# --------------------------------------------------------------------------
# full pipeline


def _substitute(w: Word, words: Sequence[Word], index: Sequence[int], orders) -> Word:
    out: tuple = ()
    for i, e in w.syllables:
        base = words[index[i]]
        piece = base if e > 0 else base.inverse(orders)
        out = out + piece.syllables * abs(e)
    return reduce_word(out, orders)


def _sub(p: Presentation, i: int, j: int) -> Presentation:
    return Presentation((p.gens[i], p.gens[j]))


def strong_reconstruct(
    p1: Presentation,
    p2: Presentation,
    max_len: int = 3,
    tol: float = 1e-8,
    family_max: int = 8,
    k_max: int = 32,
    radiance_tol: float = 1e-9,
    cfg: Tolerances = DEFAULT,
) -> ConjugacyCertificate:
    """Decide affine conjugacy of two presentations of the same abstract group."""
    if p1.rank != p2.rank or p1.orders != p2.orders:
        raise ValueError("presentations must share rank and orders")
    for name, p in (("first", p1), ("second", p2)):
        if is_radiant(p.gens, radiance_tol) is not None:
            raise RadiantInput(f"{name} group fixes a point")
    if p1.rank < 2:
        raise ElementaryInput("rank-one groups are elementary")
    try:
        q1, q2, hwords = hyperbolize(p1, p2, k_max, cfg)
    except NonElementaryViolated as exc:
        raise ElementaryInput(str(exc)) from exc

    s1 = marked_spectrum(p1, max_len, cfg)
    s2 = marked_spectrum(p2, max_len, cfg)
    cmp = compare_spectra(s1, s2, tol)
    checked = cmp.words_checked
    if not cmp.agree:
        return ConjugacyCertificate(IDENTITY, np.zeros(3), math.inf, checked, Verdict.MISMATCH,
                                    cmp.witness, cmp.delta_alpha)

    candidates = []
    for j in range(1, q1.rank):
        sub1, sub2 = _sub(q1, 0, j), _sub(q2, 0, j)
        try:
            sub2n, f, tau = normalize_pair(sub1, sub2, cfg, cmp.sign)
            eig = eigendirection_match(sub1, sub2n, family_max, tol, cfg)
            checked += 2 * family_max * (family_max + 2)
            vals = eig.ok and match_eigenvalues(sub1, sub2n, tol, cfg)
        except _GUARD_ERRORS as exc:
            return ConjugacyCertificate(IDENTITY, np.zeros(3), math.inf, checked,
                                        Verdict.INCONCLUSIVE, note=f"pair (1,{j + 1}): {exc}")
        if eig.witness is not None:
            w = _substitute(eig.witness, hwords, (0, j), p1.orders)
            return ConjugacyCertificate(f, tau, math.inf, checked, Verdict.MISMATCH,
                                        w, eig.delta_alpha)
        if not vals:
            return ConjugacyCertificate(f, tau, math.inf, checked, Verdict.INCONCLUSIVE,
                                        note=f"pair (1,{j + 1}): frames disagree without a spectral witness")
        try:
            weak = weak_recover_translation(sub1, sub2n, tol)
        except (SharedLinearPartViolated, ElementaryGroup) as exc:
            return ConjugacyCertificate(f, tau, math.inf, checked, Verdict.INCONCLUSIVE,
                                        note=f"pair (1,{j + 1}): {exc}")
        candidates.append(compose(translation(-weak.tau), AffineIso(f, tau)))

    # candidates carry p2 onto p1; the certificate reports the inverse
    phi = inverse(candidates[0])
    residual = generator_residual(p1, p2, phi)
    if residual < tol:
        return ConjugacyCertificate(phi.linear, phi.trans, residual, checked, Verdict.CONJUGATE)
    witness, delta, more = _spectral_witness(p1, p2, max_len + 2, tol)
    if witness is not None:
        return ConjugacyCertificate(phi.linear, phi.trans, residual, checked + more,
                                    Verdict.MISMATCH, witness, delta)
    return ConjugacyCertificate(phi.linear, phi.trans, residual, checked, Verdict.INCONCLUSIVE,
                                note="candidate conjugator fails on a generator")

"""Affine deformations of Schottky groups in Minkowski (2+1)-space and their
marked Margulis spectra."""

from __future__ import annotations

__version__ = "0.1.0"

from .affine import AffineIso, invariant_line, is_radiant, margulis, margulis_at
from .config import DEFAULT, Tolerances
from .groups import (
    Presentation,
    conjugate_presentation,
    evaluate_word,
    hyperbolize,
    make_schottky,
    make_schottky_pair,
    random_deformation,
    verify_schottky,
)
from .isospectral import (
    ConjugacyCertificate,
    Verdict,
    spectrum_map_rank,
    strong_reconstruct,
    weak_recover_translation,
)
from .lorentz import LorentzMap, box, lorentz_dot, null_frame
from .spectrum import Spectrum, kappa, marked_spectrum, word_alpha
from .words import Word, enumerate_words, reduce_word

__all__ = [
    "AffineIso", "ConjugacyCertificate", "DEFAULT", "LorentzMap", "Presentation",
    "Spectrum", "Tolerances", "Verdict", "Word", "box", "conjugate_presentation",
    "enumerate_words", "evaluate_word", "hyperbolize", "invariant_line", "is_radiant",
    "kappa", "lorentz_dot", "make_schottky", "make_schottky_pair", "margulis",
    "margulis_at", "marked_spectrum", "null_frame", "random_deformation", "reduce_word",
    "spectrum_map_rank", "strong_reconstruct", "verify_schottky", "weak_recover_translation",
    "word_alpha",
]

"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

from __future__ import annotations

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from margulis.affine import AffineIso, conjugate, inverse, margulis, margulis_at, translation
from margulis.groups import (
    PERTURBATIONS,
    coboundary_complement,
    conjugate_presentation,
    make_schottky,
    make_schottky_pair,
    perturb,
    random_affine,
    random_deformation,
)
from margulis.isospectral import Verdict, spectrum_map_rank, strong_reconstruct, weak_recover_translation
from margulis.lorentz import (
    J,
    boost,
    box,
    frames_of_matrices,
    lorentz_dot,
    random_isometry,
    rotation,
    x0_from_null_pair,
)
from margulis.spectrum import (
    canonical_contraction,
    canonical_delta_pair,
    contraction_closed_form,
    convergence_report,
    frame_distance_closed_form,
    frame_distance_report,
    marked_spectrum,
    residual_decay,
)
from margulis.words import enumerate_words

from conftest import random_hyperbolic, record


def _rel(err, scale):
    return float(np.max(err / np.maximum(1.0, scale)))


def test_criterion_1_lorentz_identities():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    u, v, w = rng.normal(scale=3.0, size=(3, 1000, 3))
    nv, nw, nu = (np.linalg.norm(x, axis=1) for x in (v, w, u))
    e1 = _rel(np.abs(lorentz_dot(u, box(v, w)) - lorentz_dot(v, box(w, u))), nu * nv * nw)
    e2 = _rel(np.abs(lorentz_dot(v, box(v, w))), nv * nv * nw)
    lhs = lorentz_dot(box(v, w), box(v, w))
    rhs = lorentz_dot(v, w) ** 2 - lorentz_dot(v, v) * lorentz_dot(w, w)
    e3 = _rel(np.abs(lhs - rhs), (nv * nw) ** 2)
    ms = np.stack([random_hyperbolic(rng).m for _ in range(1000)])
    x0, xm, xp, _ = frames_of_matrices(ms)
    e4 = float(np.max(np.abs(x0_from_null_pair(xm, xp) - x0)) / np.abs(x0).max())
    e5 = float(np.max(np.abs(box(x0, xp) - xp)))
    e6 = float(np.max(np.abs(box(xm, x0) - xm)))
    dt = time.perf_counter() - t0
    worst = max(e1, e2, e3, e4, e5, e6)
    ok = worst <= 1e-10 and dt < 1.0
    record(1, ok, f"box/frame identities worst rel err {worst:.2e} (tol 1e-10), {dt:.2f}s (< 1s)")
    assert ok


def test_criterion_2_projective_contraction():
    worst, ratios = 0.0, {}
    for lam in (0.9, 0.5, 0.1):
        g, v = canonical_contraction(lam)
        rep = convergence_report(g, v, 20)
        worst = max(worst, max(abs(d - contraction_closed_form(lam, n)) for n, d in rep))
        ratios[lam] = abs(rep[16][1] / rep[15][1] - lam)
    ok_dist = worst <= 1e-10
    ok_ratio = all(r <= 1e-3 for r in ratios.values())
    detail = ", ".join(f"lam={k}: |d16/d15 - lam|={r:.2e}" for k, r in ratios.items())
    record(2, ok_dist and ok_ratio,
           f"distances match closed form to {worst:.1e} (tol 1e-10); ratio tol 1e-3: {detail}")
    assert ok_dist
    assert ok_ratio, detail


def test_criterion_3_frame_distances():
    worst = 0.0
    for delta in np.geomspace(1e-4, 3.0, 40):
        got = frame_distance_report(*canonical_delta_pair(delta))
        worst = max(worst, float(np.max(np.abs(np.subtract(got, frame_distance_closed_form(delta))))))
    d_pm, d_0 = frame_distance_report(*canonical_delta_pair(1e-3))
    ratio = abs(d_0 / d_pm - 1)
    ok = worst <= 1e-10 and ratio <= 1e-5
    record(3, ok, f"closed forms matched to {worst:.1e} (tol 1e-10); |ratio - 1| at 1e-3 = {ratio:.1e} (tol 1e-5)")
    assert ok


def test_criterion_4_margulis_suite():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(200):
        gamma = AffineIso(random_hyperbolic(rng), rng.normal(size=3))
        a = margulis(gamma)
        errs = [abs(margulis_at(gamma, x) - a) for x in rng.normal(scale=5, size=(5, 3))]
        eta = AffineIso(random_isometry(rng), rng.normal(size=3))
        errs.append(abs(margulis(conjugate(eta, gamma)) - a))
        errs += [abs(margulis(gamma ** n) - abs(n) * a) / abs(n) for n in range(-5, 6) if n]
        errs.append(abs(margulis(inverse(gamma)) - a))
        worst = max(worst, max(errs) / max(1.0, abs(a)))
    ok = worst <= 1e-9
    record(4, ok, f"point independence, conjugation, power law, inverse: worst {worst:.1e} (tol 1e-9)")
    assert ok


def test_criterion_5_asymptotic_expansion():
    t0 = time.perf_counter()
    slopes, kap = [], 0.0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        p = random_deformation(make_schottky(2, rng, t_range=(0.6, 0.7), theta_jitter=0.1), rng)
        r = residual_decay(p)
        slopes.append(r.slope_ratio)
        kap = max(kap, abs(r.kappa - r.kappa_estimate))
    dt = time.perf_counter() - t0
    dev = float(np.max(np.abs(np.array(slopes) - 1)))
    ok = dev <= 0.1 and kap <= 1e-6 and dt < 10
    record(5, ok, f"slope / log max(lam) off by at most {dev:.3f} (tol 0.1); kappa gap {kap:.1e} "
                  f"(tol 1e-6); {dt:.1f}s (< 10s)")
    assert ok


def test_criterion_6_weak_isospectrality():
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(600 + seed)
        p = random_deformation(make_schottky(2 + seed % 2, rng), rng)
        q = conjugate_presentation(p, translation(rng.normal(scale=2.0, size=3)))
        cert = weak_recover_translation(p, q)
        worst = max(worst, cert.residual)
    ranks = {}
    for n in (2, 3):
        lin = make_schottky(n, np.random.default_rng(n))
        ranks[n] = spectrum_map_rank(lin.linear_gens, enumerate_words(n, None, 3))
    ok = worst < 1e-11 and all(ranks[n] == 3 * n - 3 for n in ranks)
    record(6, ok, f"translation residual {worst:.1e} (tol 1e-11); ranks {ranks} (expect 3n-3)")
    assert ok


def test_criterion_7_strong_round_trip():
    t0 = time.perf_counter()
    worst, verdicts = 0.0, []
    for seed in range(50):
        rng = np.random.default_rng(seed)
        p1 = random_deformation(make_schottky(2 + seed % 2, rng), rng)
        phi = random_affine(rng, orientation_reversing=seed % 4 >= 2, time_reversing=seed % 3 == 0)
        cert = strong_reconstruct(p1, conjugate_presentation(p1, phi))
        verdicts.append(cert.verdict)
        worst = max(worst, cert.residual)
    dt = time.perf_counter() - t0
    n_ok = sum(v is Verdict.CONJUGATE for v in verdicts)
    ok = n_ok == 50 and worst < 1e-7 and dt < 60
    record(7, ok, f"{n_ok}/50 conjugate, worst residual {worst:.1e} (tol 1e-7), {dt:.1f}s (< 60s)")
    assert ok


def test_criterion_8_falsification():
    good = false_conj = 0
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        p1 = random_deformation(make_schottky(2 + seed % 2, rng), rng)
        phi = random_affine(rng, orientation_reversing=bool(rng.random() < 0.5),
                            time_reversing=bool(rng.random() < 0.5))
        p2 = conjugate_presentation(perturb(p1, PERTURBATIONS[seed % 3], 1e-3, rng), phi)
        cert = strong_reconstruct(p1, p2)
        if cert.verdict is Verdict.MISMATCH and len(cert.witness) <= 3:
            good += 1
        elif cert.verdict is Verdict.CONJUGATE:
            false_conj += 1
    ok = good >= 95 and false_conj == 0
    record(8, ok, f"{good}/100 mismatch with witness length <= 3 (need 95); {false_conj} false conjugate")
    assert ok


def _cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "margulis", *map(str, args)],
                          capture_output=True, cwd=cwd)


def test_criterion_9_radiance(tmp_path):
    lin = make_schottky_pair(math.log(2), math.log(2), math.pi / 2)
    moved = conjugate_presentation(lin, translation([1.0, -2.0, 0.5]))
    worst = max(float(np.max(np.abs(marked_spectrum(p, 5).alphas()))) for p in (lin, moved))
    from margulis.serialize import write_group
    codes = []
    for name, p in (("lin", lin), ("moved", moved)):
        path = tmp_path / f"{name}.json"
        write_group(path, p)
        codes.append(_cli("reconstruct", path, path).returncode)
    ok = worst < 1e-10 and codes == [2, 2]
    record(9, ok, f"max |alpha| on words <= 5: {worst:.1e} (tol 1e-10); reconstruct exit codes {codes}")
    assert ok


def test_criterion_10_determinism(tmp_path):
    runs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        d.mkdir()
        outs = [
            _cli("generate", "--rank", 3, "--seed", 7, "--out", "a.json", cwd=d),
            _cli("conjugate", "a.json", "--seed", 8, "--orientation-reversing", "--out", "b.json", cwd=d),
            _cli("conjugate", "a.json", "--seed", 9, "--perturb", "eigenvalue", "--out", "c.json", cwd=d),
            _cli("spectrum", "a.json", "--out", "s.tsv", cwd=d),
            _cli("reconstruct", "a.json", "b.json", cwd=d),
            _cli("reconstruct", "a.json", "c.json", "--format", "json", cwd=d),
            _cli("rank", "a.json", cwd=d),
            _cli("converge", cwd=d),
            _cli("converge", "--kind", "frames", cwd=d),
        ]
        files = {f.name: f.read_bytes() for f in sorted(d.iterdir())}
        runs.append(([(o.returncode, o.stdout, o.stderr) for o in outs], files))
    ok = runs[0] == runs[1]
    record(10, ok, f"{len(runs[0][0])} CLI invocations and {len(runs[0][1])} files byte-identical across two runs")
    assert ok

"""Command-line interface.

Every command is a pure function of its input files, flags and seed, so two
runs with the same arguments write identical bytes.

Exit codes: 0 success / conjugate, 1 mismatch, 2 malformed input or violated
precondition, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .affine import radiance_residual
from .errors import FailedToSeparate, MalformedGroupFile, MargulisError
from .groups import (
    PERTURBATIONS,
    conjugate_presentation,
    make_schottky,
    perturb,
    random_affine,
    random_deformation,
    schottky_intervals,
)
from .isospectral import Verdict, spectrum_map_rank, strong_reconstruct
from .serialize import (
    dumps_certificate,
    dumps_group,
    dumps_spectrum,
    fmt,
    read_group,
)
from .spectrum import (
    canonical_contraction,
    canonical_delta_pair,
    contraction_closed_form,
    convergence_report,
    frame_distance_closed_form,
    frame_distance_report,
    marked_spectrum,
)
from .words import enumerate_words

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2
EXIT_INCONCLUSIVE = 3

_VERDICT_EXIT = {
    Verdict.CONJUGATE: EXIT_OK,
    Verdict.MISMATCH: EXIT_MISMATCH,
    Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _table(header: list[str], rows) -> str:
    lines = ["\t".join(header)]
    lines += ["\t".join(c if isinstance(c, str) else fmt(c) if isinstance(c, float) else str(c)
                        for c in r) for r in rows]
    return "\n".join(lines) + "\n"


def cmd_generate(args) -> int:
    rng = np.random.default_rng(args.seed)
    try:
        lin = make_schottky(args.rank, rng, tuple(args.t_range), args.theta_jitter, args.margin)
    except FailedToSeparate as exc:
        _note(f"error: {exc}")
        return EXIT_INPUT
    p = random_deformation(lin, rng, args.cocycle_scale)
    arcs = schottky_intervals(p.linear_gens, args.margin)
    _, res = radiance_residual(p.gens)
    _note(f"schottky: verified with margin {args.margin:g} ({len(arcs)} interval pairs)")
    _note(f"radiance residual: {res:.3e}")
    if res < 1e-9:
        _note("warning: group is radiant (fixes a point); its spectrum vanishes identically")
    desc = (f"rank {args.rank} schottky deformation, t in [{args.t_range[0]:g}, "
            f"{args.t_range[1]:g}], cocycle scale {args.cocycle_scale:g}")
    _emit(dumps_group(p, seed=args.seed, description=desc), args.out)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    p, _ = read_group(args.group)
    _emit(dumps_spectrum(marked_spectrum(p, args.max_len)), args.out)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    p1, _ = read_group(args.file_a)
    p2, _ = read_group(args.file_b)
    try:
        cert = strong_reconstruct(p1, p2, args.max_len, args.tol)
    except (MargulisError, ValueError) as exc:
        _note(f"precondition violated: {type(exc).__name__}: {exc}")
        return EXIT_INPUT
    _emit(dumps_certificate(cert, args.format), args.out)
    return _VERDICT_EXIT[cert.verdict]


def cmd_converge(args) -> int:
    if args.kind == "projective":
        rows = []
        for lam in args.lam:
            g, v = canonical_contraction(lam)
            rep = convergence_report(g, v, args.n_max)
            prev = None
            for n, d in rep:
                ratio = d / prev if prev else float("nan")
                rows.append((lam, n, d, contraction_closed_form(lam, n), ratio))
                prev = d
        text = _table(["lambda", "n", "distance", "closed_form", "ratio"], rows)
    else:
        rows = []
        for delta in args.delta:
            g, h = canonical_delta_pair(delta)
            d_pm, d_0 = frame_distance_report(g, h)
            c_pm, c_0 = frame_distance_closed_form(delta)
            rows.append((delta, d_pm, d_0, c_pm, c_0))
        text = _table(["delta", "d_null", "d_x0", "closed_null", "closed_x0"], rows)
    _emit(text, args.out)
    return EXIT_OK


def cmd_rank(args) -> int:
    p, _ = read_group(args.group)
    words = enumerate_words(p.rank, p.orders, args.max_len)
    r = spectrum_map_rank(p.linear_gens, words)
    d = {"rank": r, "generators": p.rank, "words": len(words), "expected": 3 * p.rank - 3}
    if args.format == "json":
        text = json.dumps(d, indent=2) + "\n"
    else:
        text = "".join(f"{k}: {v}\n" for k, v in d.items())
    _emit(text, args.out)
    return EXIT_OK


def cmd_conjugate(args) -> int:
    p, meta = read_group(args.group)
    rng = np.random.default_rng(args.seed)
    if args.perturb:
        p = perturb(p, args.perturb, args.size, rng)
    phi = random_affine(rng, orientation_reversing=args.orientation_reversing,
                        time_reversing=args.time_reversing)
    q = conjugate_presentation(p, phi)
    desc = f"affine conjugate (seed {args.seed})"
    if args.perturb:
        desc += f" after {args.perturb} perturbation of size {args.size:g}"
    _emit(dumps_group(q, seed=args.seed, description=desc), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="margulis",
                                 description="Margulis spectra of affine Schottky groups")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, fmt_flag=False):
        sp.add_argument("--out", default=None, help="output file (default stdout)")
        if fmt_flag:
            sp.add_argument("--format", choices=("table", "json"), default="table")

    sp = sub.add_parser("generate", help="random Schottky group with a random deformation")
    sp.add_argument("--rank", type=int, default=2)
    sp.add_argument("--t-range", type=float, nargs=2, default=(0.6, 1.2), metavar=("LO", "HI"),
                    help="range of generator translation lengths before powering")
    sp.add_argument("--theta-jitter", type=float, default=0.25,
                    help="axis angle jitter, as a fraction of pi/rank")
    sp.add_argument("--cocycle-scale", type=float, default=1.0)
    sp.add_argument("--margin", type=float, default=1e-3, help="ping-pong interval margin")
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("spectrum", help="marked Margulis spectrum as TSV")
    sp.add_argument("group")
    sp.add_argument("--max-len", type=int, default=3)
    common(sp)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("reconstruct", help="decide affine conjugacy of two group files")
    sp.add_argument("file_a")
    sp.add_argument("file_b")
    sp.add_argument("--max-len", type=int, default=3)
    sp.add_argument("--tol", type=float, default=1e-8)
    common(sp, fmt_flag=True)
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("converge", help="eigendirection convergence data for plotting")
    sp.add_argument("--kind", choices=("projective", "frames"), default="projective")
    sp.add_argument("--lam", type=float, nargs="+", default=[0.9, 0.5, 0.1])
    sp.add_argument("--n-max", type=int, default=20)
    sp.add_argument("--delta", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3])
    common(sp)
    sp.set_defaults(func=cmd_converge)

    sp = sub.add_parser("rank", help="rank of the spectrum map on cohomology")
    sp.add_argument("group")
    sp.add_argument("--max-len", type=int, default=3)
    common(sp, fmt_flag=True)
    sp.set_defaults(func=cmd_rank)

    sp = sub.add_parser("conjugate", help="random affine conjugate, optionally perturbed")
    sp.add_argument("group")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--orientation-reversing", action="store_true")
    sp.add_argument("--time-reversing", action="store_true")
    sp.add_argument("--perturb", choices=PERTURBATIONS, default=None)
    sp.add_argument("--size", type=float, default=1e-3)
    common(sp)
    sp.set_defaults(func=cmd_conjugate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MalformedGroupFile as exc:
        _note(f"malformed input: {exc}")
        return EXIT_INPUT
    except MargulisError as exc:
        _note(f"error: {type(exc).__name__}: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: ``gen`` (write a tiling in the exchange format), ``match``
(emit matching/hatted graphs), ``duality-check`` (exhaustive or sampled
correspondence verification), ``sweep`` (Monte Carlo curves as CSV),
``pc`` (threshold estimation), ``run`` (named experiments from a
config), and ``list-experiments``.  Exit code 0 iff all checks pass.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .correspondence import correspondence_check, exhaustive_correspondence
from .errors import PercoplaneError
from .matching import (
    augmented_to_text,
    hatted_graphs,
    make_partition,
    matching_graph,
    matching_pair,
    partition_from_lines,
)
from .percolation import Method, Observable, estimate_pc, newman_ziff_sweep
from .planar_map import CombinatorialMap, Surface
from .rng import trial_rng
from .tilings import TilingSpec

STRATEGIES = ("all_f1", "all_f2", "checkerboard", "periodic3x3_a", "periodic3x3_b")

_OBSERVABLES = {
    "wrap": Observable.WRAP_PROBABILITY,
    "cross": Observable.CROSS_PROBABILITY,
    "maxfrac": Observable.MAX_CLUSTER_FRACTION,
}


def _parse_size(raw: str):
    if "x" in raw:
        a, b = raw.split("x", 1)
        return (int(a), int(b))
    return int(raw)


def _parse_pgrid(raw: str) -> list[float]:
    try:
        a, b, step = (float(tok) for tok in raw.split(":"))
    except ValueError as exc:
        raise PercoplaneError(f"pgrid must be a:b:step, got {raw!r}") from exc
    if step <= 0 or b < a:
        raise PercoplaneError("pgrid needs a <= b and step > 0")
    return [round(float(p), 10) for p in np.arange(a, b + step / 2, step)]


def _tiling_spec(args) -> TilingSpec:
    boundary = Surface.TORUS if args.boundary == "torus" else Surface.PLANE_PATCH
    fam = args.family
    if fam == "square":
        return TilingSpec.square(_parse_size(args.size), boundary)
    if fam == "triangular":
        return TilingSpec.triangular(_parse_size(args.size), boundary)
    if fam == "hexagonal":
        return TilingSpec.hexagonal(_parse_size(args.size))
    if fam == "hyperbolic":
        if args.p is None or args.q is None or args.radius is None:
            raise PercoplaneError("hyperbolic needs --p, --q, and --radius")
        return TilingSpec.hyperbolic(args.p, args.q, args.radius)
    if fam == "tree":
        return TilingSpec.tree(args.degree, int(args.size))
    if fam == "ladder":
        return TilingSpec.ladder(int(args.size))
    raise PercoplaneError(f"unknown family {fam!r}")


def _load_map(path: str) -> CombinatorialMap:
    return CombinatorialMap.from_text(Path(path).read_text())


def _partition_for(m: CombinatorialMap, raw: str):
    if raw in STRATEGIES:
        return make_partition(m, raw)
    return partition_from_lines(m, Path(raw).read_text().splitlines())


def _csv_header(spec_line: str, seed) -> str:
    return (
        f"# spec: {spec_line}\n"
        f"# seed: {seed}\n"
        f"# version: {__version__}\n"
    )


def _cmd_gen(args) -> int:
    from .tilings import generate

    m = generate(_tiling_spec(args))
    Path(args.out).write_text(m.to_text())
    print(f"wrote {args.out}: {m.vertex_count} vertices, {m.edge_count} edges")
    return 0


def _cmd_match(args) -> int:
    m = _load_map(getattr(args, "in"))
    if args.emit == "star":
        aug = matching_graph(m)
    else:
        part = _partition_for(m, args.partition)
        if args.emit in ("g1", "g2"):
            aug = matching_pair(m, part)[0 if args.emit == "g1" else 1]
        else:
            aug = hatted_graphs(m, part)[0 if args.emit == "ghat1" else 1]
    Path(args.out).write_text(augmented_to_text(aug))
    print(f"wrote {args.out}: {aug.n_vertices} vertices, {len(aug.edges)} edges")
    return 0


def _cmd_duality_check(args) -> int:
    m = _load_map(getattr(args, "in"))
    part = _partition_for(m, args.partition)
    h1, h2 = hatted_graphs(m, part)
    n = m.vertex_count
    if n <= args.exhaustive_max:
        mode = "exhaustive"
        configs, violations = exhaustive_correspondence(h1, h2)
        n_bad = len(violations)
    else:
        mode = "sampled"
        configs = args.trials
        n_bad = 0
        for t in range(args.trials):
            states = trial_rng(args.seed, t).integers(0, 2, n).tolist()
            rep = correspondence_check(h1, h2, None, states)
            if not rep.ok:
                n_bad += 1
    if args.out:
        Path(args.out).write_text(
            _csv_header(f"duality-check {args.partition} {mode}", args.seed)
            + "mode,configs,violations\n"
            + f"{mode},{configs},{n_bad}\n"
        )
    print(f"{mode}: {configs} configs, {n_bad} violations")
    return 0 if n_bad == 0 else 1


def _cmd_sweep(args) -> int:
    m = _load_map(getattr(args, "in"))
    curve = newman_ziff_sweep(
        m, args.trials, _OBSERVABLES[args.observable],
        _parse_pgrid(args.pgrid), args.seed, threads=args.threads,
    )
    lines = [
        _csv_header(
            f"sweep {args.observable} pgrid={args.pgrid} trials={args.trials}",
            args.seed,
        )
        + "p,mean,stderr,trials"
    ]
    for p, mean, stderr, trials in curve.points:
        lines.append(f"{p!r},{mean!r},{stderr!r},{trials}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"wrote {args.out}: {len(curve.points)} points")
    return 0


def _cmd_pc(args) -> int:
    boundary = Surface.TORUS if args.boundary == "torus" else Surface.PLANE_PATCH
    if args.family == "hyperbolic":
        spec = TilingSpec.hyperbolic(args.p, args.q, min(args.sizes))
    elif args.family == "tree":
        spec = TilingSpec.tree(args.degree, min(args.sizes))
    else:
        ns = argparse.Namespace(
            family=args.family, size=str(min(args.sizes)), boundary=args.boundary,
            p=args.p, q=args.q, radius=min(args.sizes), degree=args.degree,
        )
        spec = _tiling_spec(ns)
    method = None
    if args.method:
        method = Method.WRAP_CROSSING if args.method == "wrap" else Method.SIZE_SCALING
    est = estimate_pc(
        spec, args.sizes, args.trials, args.seed, method=method, threads=args.threads
    )
    print(
        f"pc = {est.pc:.5f} +/- {est.half_width:.5f} "
        f"({est.method.value}, sizes={list(est.sizes)}, trials={est.trials}, seed={est.seed})"
    )
    return 0


def _cmd_run(args) -> int:
    from .experiments import ExperimentConfig, run

    config = ExperimentConfig.from_file(args.config)
    result = run(config)
    for line in result.summary:
        print(line)
    for path in result.files:
        print(f"wrote {path}")
    return 0 if result.passed else 1


def _cmd_list_experiments(args) -> int:
    from .experiments import REGISTRY

    for name in sorted(REGISTRY):
        doc = (REGISTRY[name].__doc__ or "").strip().splitlines()
        print(f"{name}: {doc[0] if doc else ''}".rstrip(": "))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="percoplane")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a tiling and write the exchange format")
    p.add_argument("--family", required=True,
                   choices=["square", "triangular", "hexagonal", "hyperbolic", "tree", "ladder"])
    p.add_argument("--size", default="0", help="linear size, LxM shape, depth, or length")
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--radius", type=int)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--boundary", choices=["torus", "free"], default="torus")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("match", help="emit matching or facial-site graphs")
    p.add_argument("--in", required=True)
    p.add_argument("--partition", default="all_f1",
                   help=f"strategy ({', '.join(STRATEGIES)}) or a partition file")
    p.add_argument("--emit", required=True, choices=["g1", "g2", "ghat1", "ghat2", "star"])
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_match)

    p = sub.add_parser("duality-check", help="verify the cluster correspondence")
    p.add_argument("--in", required=True)
    p.add_argument("--partition", default="all_f1")
    p.add_argument("--exhaustive-max", type=int, default=12,
                   help="enumerate all configurations up to this many vertices")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_duality_check)

    p = sub.add_parser("sweep", help="Monte Carlo observable curve as CSV")
    p.add_argument("--in", required=True)
    p.add_argument("--observable", required=True, choices=sorted(_OBSERVABLES))
    p.add_argument("--pgrid", required=True, help="a:b:step")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("pc", help="estimate a critical density")
    p.add_argument("--family", required=True,
                   choices=["square", "triangular", "hexagonal", "hyperbolic", "tree"])
    p.add_argument("--sizes", required=True,
                   type=lambda s: tuple(int(t) for t in s.split(",")))
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--method", choices=["wrap", "scaling"])
    p.add_argument("--boundary", choices=["torus", "free"], default="torus")
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--degree", type=int, default=3)
    p.set_defaults(fn=_cmd_pc)

    p = sub.add_parser("run", help="run a named experiment from a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("list-experiments", help="list available experiments")
    p.set_defaults(fn=_cmd_list_experiments)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PercoplaneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Named experiments driven by INI-style configs.

Each experiment reads a line-oriented ``key = value`` config with
``[section]`` headers, runs deterministically from its seed, and writes
CSV tables plus a human-readable summary.  Every CSV carries a header
block with the experiment name, a hash of the canonical config, the
seed, and the package version, so outputs are byte-reproducible from
(config, seed, version).  The thread count only distributes work and is
deliberately excluded from the hash and the outputs.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import __version__
from .correspondence import exhaustive_correspondence
from .errors import ConfigError, PercoplaneError
from .matching import hatted_graphs, make_partition, matching_graph, matching_pair
from .percolation import (
    Method,
    Observable,
    ThresholdEstimate,
    boundary_cluster_count,
    boundary_connection_solve,
    estimate_pc,
    newman_ziff_sweep,
)
from .planar_map import CombinatorialMap, Surface
from .tilings import BallSpec, TilingSpec, ball, generate

EXPERIMENT_NAMES = (
    "SUM_RULE",
    "TRIANGULATION_IDENTITY",
    "DUALITY_EXHAUSTIVE",
    "HYPERBOLIC_NONUNIQUENESS",
    "ENDS_SANITY",
)

SUM_RULE_TOLERANCE = 0.015
TRIANGULAR_TOLERANCE = 0.005

# exact connection probability from the center of a 3-regular tree to
# depth 10 at the branching threshold p = 1/2 (see tree_reference_level)
_TREE_DEPTH_DEFAULT = 10


class ExperimentError(ConfigError):
    """Invalid experiment configuration or inner failure with context."""


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    seed: int
    threads: int
    output: Path
    params: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in EXPERIMENT_NAMES:
            raise ExperimentError(
                f"unknown experiment {self.name!r}; choose from {EXPERIMENT_NAMES}"
            )
        if self.threads <= 0:
            raise ExperimentError("thread count must be positive")

    @staticmethod
    def from_string(text: str) -> "ExperimentConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ExperimentError(f"bad config: {exc}") from exc
        if "experiment" not in parser:
            raise ExperimentError("config needs an [experiment] section")
        exp = parser["experiment"]
        name = exp.get("name", "")
        try:
            seed = int(exp.get("seed", "0"))
            threads = int(exp.get("threads", "1"))
        except ValueError as exc:
            raise ExperimentError(f"bad integer in [experiment]: {exc}") from exc
        output = Path(exp.get("output", "out"))
        params = dict(parser["params"]) if "params" in parser else {}
        return ExperimentConfig(name, seed, threads, output, params)

    @staticmethod
    def from_file(path: Union[str, Path]) -> "ExperimentConfig":
        return ExperimentConfig.from_string(Path(path).read_text())

    def hash(self) -> str:
        """Hash of the canonical config; thread count and output path are
        execution details and do not affect results, so they are
        excluded."""
        lines = [f"name={self.name}", f"seed={self.seed}"]
        lines += [f"{k}={v}" for k, v in sorted(self.params.items())]
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:16]

    def get_int(self, key: str, default: int) -> int:
        try:
            return int(self.params.get(key, default))
        except ValueError as exc:
            raise ExperimentError(f"param {key} must be an integer") from exc

    def get_float(self, key: str, default: float) -> float:
        try:
            return float(self.params.get(key, default))
        except ValueError as exc:
            raise ExperimentError(f"param {key} must be a number") from exc

    def get_ints(self, key: str, default: str) -> tuple[int, ...]:
        raw = self.params.get(key, default)
        try:
            return tuple(int(tok) for tok in raw.split(",") if tok.strip())
        except ValueError as exc:
            raise ExperimentError(f"param {key} must be comma-separated integers") from exc

    def get_str(self, key: str, default: str) -> str:
        return self.params.get(key, default)


@dataclass(frozen=True)
class Table:
    filename: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]


@dataclass(frozen=True)
class ExperimentResult:
    name: str
    passed: bool
    summary: tuple[str, ...]
    tables: tuple[Table, ...]
    files: tuple[Path, ...] = ()


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(config: ExperimentConfig, table: Table) -> str:
    buf = io.StringIO()
    buf.write(f"# experiment: {config.name}\n")
    buf.write(f"# config: {config.hash()}\n")
    buf.write(f"# seed: {config.seed}\n")
    buf.write(f"# version: {__version__}\n")
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def curve_table(filename: str, curve) -> Table:
    return Table(
        filename=filename,
        columns=("p", "mean", "stderr", "trials"),
        rows=tuple(curve.points),
    )


# ----------------------------------------------------------------------
# experiment bodies
# ----------------------------------------------------------------------


def _scaled_spec(family: str, size: int, boundary: Surface = Surface.TORUS) -> TilingSpec:
    if family == "square":
        return TilingSpec.square(size, boundary)
    if family == "triangular":
        return TilingSpec.triangular(size, boundary)
    if family == "hexagonal":
        return TilingSpec.hexagonal(size)
    raise ExperimentError(f"family {family!r} cannot be used here")


@dataclass(frozen=True)
class SumRuleReport:
    pc1: ThresholdEstimate
    pc2: ThresholdEstimate
    tolerance: float
    passed: bool

    @property
    def total(self) -> float:
        return self.pc1.pc + self.pc2.pc


def check_sum_rule(
    family: str,
    partition: str,
    sizes: Sequence[int],
    trials: int,
    seed: int,
    tolerance: float = SUM_RULE_TOLERANCE,
    threads: int = 1,
) -> SumRuleReport:
    """Estimate both thresholds of a matching pair and test whether they
    sum to 1.  Fails iff |p̂c(G1) + p̂c(G2) − 1| exceeds the tolerance
    plus both half-widths."""

    def graph_factory(which: int) -> Callable[[int], object]:
        def build(size: int):
            m = generate(_scaled_spec(family, size))
            pair = matching_pair(m, make_partition(m, partition))
            return pair[which]

        return build

    pc1 = estimate_pc(graph_factory(0), sizes, trials, seed, threads=threads)
    pc2 = estimate_pc(graph_factory(1), sizes, trials, seed + 1, threads=threads)
    gap = abs(pc1.pc + pc2.pc - 1.0)
    passed = gap <= tolerance + pc1.half_width + pc2.half_width
    return SumRuleReport(pc1, pc2, tolerance, passed)


def _run_sum_rule(config: ExperimentConfig) -> ExperimentResult:
    """Thresholds of a matching pair must sum to 1."""
    family = config.get_str("family", "square")
    partition = config.get_str("partition", "all_f1")
    sizes = config.get_ints("sizes", "12,24")
    trials = config.get_int("trials", 4000)
    tolerance = config.get_float("tolerance", SUM_RULE_TOLERANCE)
    report = check_sum_rule(
        family, partition, sizes, trials, config.seed, tolerance, config.threads
    )

    big = max(sizes)
    grid = [round(p, 4) for p in np.arange(0.05, 0.96, 0.05)]
    tables = []
    for idx, label in ((0, "g1"), (1, "g2")):
        m = generate(_scaled_spec(family, big))
        g = matching_pair(m, make_partition(m, partition))[idx]
        curve = newman_ziff_sweep(
            g, trials, Observable.WRAP_PROBABILITY, grid,
            seed=config.seed + idx, threads=config.threads,
        )
        tables.append(curve_table(f"{label}_wrap_curve.csv", curve))

    r = report
    summary = (
        f"experiment: SUM_RULE family={family} partition={partition} sizes={sizes}",
        f"pc(G1) = {r.pc1.pc:.5f} +/- {r.pc1.half_width:.5f}",
        f"pc(G2) = {r.pc2.pc:.5f} +/- {r.pc2.half_width:.5f}",
        f"sum = {r.total:.5f}  target 1 within {r.tolerance} + half-widths",
        f"result: {'PASS' if r.passed else 'FAIL'}",
    )
    return ExperimentResult("SUM_RULE", r.passed, summary, tuple(tables))


def _adjacency(m: CombinatorialMap) -> list[set[int]]:
    return [set(m.neighbors(v)) for v in range(m.vertex_count)]


def _run_triangulation_identity(config: ExperimentConfig) -> ExperimentResult:
    """Triangulations are self-matching with threshold 1/2."""
    identity_sizes = config.get_ints("identity_sizes", "3,4,5,6,7,8")
    pc_sizes = config.get_ints("sizes", "16,32")
    trials = config.get_int("trials", 10000)
    tolerance = config.get_float("tolerance", TRIANGULAR_TOLERANCE)

    identity_ok = True
    id_rows = []
    for L in identity_sizes:
        m = generate(TilingSpec.triangular(L))
        star = matching_graph(m)
        same = _adjacency(m) == [set(star.adjacency()[v]) for v in range(m.vertex_count)]
        identity_ok = identity_ok and same
        id_rows.append((L, m.vertex_count, int(same)))

    est = estimate_pc(
        TilingSpec.triangular(4), pc_sizes, trials, config.seed, threads=config.threads
    )
    pc_ok = abs(est.pc - 0.5) <= tolerance + est.half_width
    passed = identity_ok and pc_ok

    grid = [round(p, 4) for p in np.arange(0.3, 0.71, 0.02)]
    curve = newman_ziff_sweep(
        generate(TilingSpec.triangular(max(pc_sizes))),
        trials, Observable.WRAP_PROBABILITY, grid,
        seed=config.seed, threads=config.threads,
    )
    tables = (
        Table("self_matching.csv", ("size", "vertices", "identical"), tuple(id_rows)),
        curve_table("wrap_curve.csv", curve),
    )
    summary = (
        f"experiment: TRIANGULATION_IDENTITY sizes={identity_sizes}",
        f"matching graph equals input on every size: {identity_ok}",
        f"pc = {est.pc:.5f} +/- {est.half_width:.5f}  target 0.5 within {tolerance}",
        f"result: {'PASS' if passed else 'FAIL'}",
    )
    return ExperimentResult("TRIANGULATION_IDENTITY", passed, summary, tables)


def _run_duality_exhaustive(config: ExperimentConfig) -> ExperimentResult:
    """Exhaustive cluster-correspondence verification on small tori."""
    shapes = config.get_str("shapes", "3x3,3x4")
    partitions = [
        s.strip() for s in config.get_str("partitions", "all_f1,all_f2,checkerboard").split(",")
    ]
    rows = []
    passed = True
    for shape in shapes.split(","):
        lx, ly = (int(tok) for tok in shape.strip().split("x"))
        m = generate(TilingSpec.square((lx, ly)))
        for strat in partitions:
            h1, h2 = hatted_graphs(m, make_partition(m, strat))
            n_configs, violations = exhaustive_correspondence(h1, h2)
            rows.append((shape.strip(), strat, n_configs, len(violations)))
            passed = passed and not violations
    table = Table(
        "duality_report.csv", ("shape", "partition", "configs", "violations"), tuple(rows)
    )
    summary = (
        f"experiment: DUALITY_EXHAUSTIVE shapes={shapes}",
        *(f"{s} {p}: {n} configs, {v} violations" for s, p, n, v in rows),
        f"result: {'PASS' if passed else 'FAIL'}",
    )
    return ExperimentResult("DUALITY_EXHAUSTIVE", passed, summary, (table,))


def _run_hyperbolic_nonuniqueness(config: ExperimentConfig) -> ExperimentResult:
    """Boundary-cluster growth and low threshold on degree-7 balls."""
    p_tile = config.get_int("p", 3)
    q_tile = config.get_int("q", 7)
    radii = config.get_ints("radii", "4,5,6")
    density = config.get_float("density", 0.5)
    trials = config.get_int("trials", 10000)
    collar = config.get_int("core_collar", 2)
    count_floor = config.get_float("count_floor", 1.5)
    pc_sizes = config.get_ints("pc_sizes", "4,5,6")
    pc_trials = config.get_int("pc_trials", 4000)

    host = generate(TilingSpec.hyperbolic(p_tile, q_tile, max(radii) + 1))
    rows = []
    means = []
    for r in radii:
        bmap, _ = ball(host, BallSpec(0, r))
        mean, stderr, n = boundary_cluster_count(
            bmap, density, trials, config.seed, threads=config.threads,
            core_radius=max(r - collar, 0),
        )
        rows.append((r, mean, stderr, n))
        means.append(mean)

    monotone = all(b > a for a, b in zip(means, means[1:]))
    count_ok = means[-1] > count_floor

    est = estimate_pc(
        TilingSpec.hyperbolic(p_tile, q_tile, min(pc_sizes)),
        pc_sizes, pc_trials, config.seed, threads=config.threads,
    )
    pc_ok = est.pc < 0.5 - est.half_width
    passed = monotone and count_ok and pc_ok

    table = Table(
        "boundary_clusters.csv", ("radius", "mean", "stderr", "trials"), tuple(rows)
    )
    summary = (
        f"experiment: HYPERBOLIC_NONUNIQUENESS {{{p_tile},{q_tile}}} radii={radii}",
        *(f"radius {r}: mean boundary clusters {m:.4f} +/- {s:.4f}"
          for r, m, s, _ in rows),
        f"monotone increasing: {monotone}; final mean > {count_floor}: {count_ok}",
        f"pc = {est.pc:.4f} +/- {est.half_width:.4f}; below 0.5 - half-width: {pc_ok}",
        f"result: {'PASS' if passed else 'FAIL'}",
    )
    return ExperimentResult("HYPERBOLIC_NONUNIQUENESS", passed, summary, (table,))


def tree_reference_level(depth: int) -> float:
    """Exact probability that the center of a 3-regular tree reaches
    depth ``depth`` at density 1/2, from the branching recursion
    t_d = p (1 - (1 - t_{d-1})^2)."""
    t = 0.5
    for _ in range(depth - 1):
        t = 0.5 * (1 - (1 - t) ** 2)
    return 0.5 * (1 - (1 - t) ** 3)


def _run_ends_sanity(config: ExperimentConfig) -> ExperimentResult:
    """Strips never percolate below 1; trees branch at 1/2."""
    length = config.get_int("ladder_length", 1000)
    ladder_p = config.get_float("ladder_p", 0.95)
    ladder_trials = config.get_int("ladder_trials", 2000)
    min_no_span = config.get_float("min_no_span", 0.99)
    depth = config.get_int("tree_depth", _TREE_DEPTH_DEFAULT)
    tree_trials = config.get_int("tree_trials", 6000)
    tree_tol = config.get_float("tree_tolerance", 0.02)

    ladder = generate(TilingSpec.ladder(length))
    curve = newman_ziff_sweep(
        ladder, ladder_trials, Observable.CROSS_PROBABILITY,
        [0.5, 0.8, 0.9, ladder_p], seed=config.seed, threads=config.threads,
    )
    span = curve.points[-1][1]
    ladder_ok = 1.0 - span >= min_no_span

    tree = generate(TilingSpec.tree(3, depth))
    ref = tree_reference_level(depth)
    p_hat, hw = boundary_connection_solve(
        tree, ref, tree_trials, config.seed, threads=config.threads
    )
    tree_ok = abs(p_hat - 0.5) <= tree_tol
    passed = ladder_ok and tree_ok

    tables = (
        curve_table("ladder_span_curve.csv", curve),
        Table("tree_threshold.csv", ("p", "mean", "stderr", "trials"),
              ((p_hat, ref, hw, tree_trials),)),
    )
    summary = (
        f"experiment: ENDS_SANITY ladder_length={length} tree_depth={depth}",
        f"ladder span probability at p={ladder_p}: {span:.5f} "
        f"(no-span fraction {1-span:.5f}, need >= {min_no_span})",
        f"tree threshold from branching reference: {p_hat:.5f} +/- {hw:.5f} "
        f"(need within {tree_tol} of 0.5)",
        f"result: {'PASS' if passed else 'FAIL'}",
    )
    return ExperimentResult("ENDS_SANITY", passed, summary, tables)


REGISTRY: dict[str, Callable[[ExperimentConfig], ExperimentResult]] = {
    "SUM_RULE": _run_sum_rule,
    "TRIANGULATION_IDENTITY": _run_triangulation_identity,
    "DUALITY_EXHAUSTIVE": _run_duality_exhaustive,
    "HYPERBOLIC_NONUNIQUENESS": _run_hyperbolic_nonuniqueness,
    "ENDS_SANITY": _run_ends_sanity,
}

assert set(REGISTRY) == set(EXPERIMENT_NAMES)


def run(config: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Execute the named experiment; optionally write its CSV tables and
    summary.txt under the config's output directory."""
    try:
        result = REGISTRY[config.name](config)
    except PercoplaneError as exc:
        raise ExperimentError(f"{config.name}: {exc}") from exc
    files = []
    if write:
        outdir = config.output
        outdir.mkdir(parents=True, exist_ok=True)
        for table in result.tables:
            path = outdir / table.filename
            path.write_text(render_csv(config, table))
            files.append(path)
        summary_path = outdir / "summary.txt"
        summary_path.write_text("\n".join(result.summary) + "\n")
        files.append(summary_path)
        result = ExperimentResult(
            result.name, result.passed, result.summary, result.tables, tuple(files)
        )
    return result

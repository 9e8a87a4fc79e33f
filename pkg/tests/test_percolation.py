"""Monte Carlo engine, sweeps, thresholds, and uniqueness statistics."""

import random

import numpy as np
import pytest

from percoplane.configs import cluster_stats, site_config
from percoplane.engine import label_components
from percoplane.errors import CurvesDoNotCross, UnsupportedObservable
from percoplane.matching import make_partition, matching_pair
from percoplane.percolation import (
    Method,
    Observable,
    blocking_circuit_check,
    boundary_cluster_count,
    boundary_connection_solve,
    estimate_pc,
    ladder_spanning_probability,
    newman_ziff_sweep,
    sample_sites,
    unbounded_proxy_counts,
    uniqueness_fraction,
)
from percoplane.planar_map import Surface
from percoplane.rng import trial_bernoulli, trial_permutation, trial_rng
from percoplane.simgraph import build_sim_graph
from percoplane.tilings import BallSpec, TilingSpec, ball, generate


class TestRng:
    def test_keyed_streams_reproduce(self):
        a = trial_rng(7, 3).random(10)
        b = trial_rng(7, 3).random(10)
        assert np.array_equal(a, b)

    def test_distinct_trials_differ(self):
        assert not np.array_equal(trial_rng(7, 3).random(10), trial_rng(7, 4).random(10))
        assert not np.array_equal(trial_rng(7, 3).random(10), trial_rng(8, 3).random(10))

    def test_permutation_and_bernoulli(self):
        perm = trial_permutation(1, 2, 50)
        assert sorted(perm.tolist()) == list(range(50))
        bits = trial_bernoulli(1, 2, 10_000, 0.3)
        assert abs(bits.mean() - 0.3) < 0.02


class TestSimGraph:
    def test_torus_csr_matches_map(self):
        m = generate(TilingSpec.square(4))
        sg = build_sim_graph(m)
        assert sg.torus and sg.n == 16
        for v in range(16):
            row = sg.indices[sg.indptr[v] : sg.indptr[v + 1]].tolist()
            assert sorted(row) == sorted(set(m.neighbors(v)))

    def test_torus_displacements_cancel_locally(self):
        # displacement of (v -> u) is minus that of (u -> v)
        m = generate(TilingSpec.square(5))
        sg = build_sim_graph(m)
        disp = {}
        for v in range(sg.n):
            for k in range(sg.indptr[v], sg.indptr[v + 1]):
                disp[(v, int(sg.indices[k]))] = (int(sg.dispx[k]), int(sg.dispy[k]))
        for (v, u), (dx, dy) in disp.items():
            assert disp[(u, v)] == (-dx, -dy)

    def test_patch_side_marks(self):
        mp = generate(TilingSpec.square((4, 4), Surface.PLANE_PATCH))
        sg = build_sim_graph(mp)
        assert not sg.torus
        assert sg.side_a.sum() == 4 and sg.side_b.sum() == 4
        assert not (sg.side_a & sg.side_b).any()

    def test_forced_mask_from_facial_sites(self):
        from percoplane.matching import hatted_graphs

        m = generate(TilingSpec.square(4))
        h1, h2 = hatted_graphs(m, make_partition(m, "checkerboard"))
        sg1 = build_sim_graph(h1)
        assert (sg1.forced[:16] == -1).all()
        assert (sg1.forced[16:] == 1).all()
        sg2 = build_sim_graph(h2)
        assert (sg2.forced[16:] == 0).all()


class TestEngineAgainstOracle:
    @pytest.mark.parametrize(
        "spec",
        [
            TilingSpec.square(5),
            TilingSpec.square((4, 4), Surface.PLANE_PATCH),
            TilingSpec.triangular(4),
        ],
    )
    def test_partition_and_wrap_agree(self, spec):
        m = generate(spec)
        sg = build_sim_graph(m)
        rng = random.Random(17)
        for _ in range(300):
            states = [rng.randint(0, 1) for _ in range(m.vertex_count)]
            st = cluster_stats(m, site_config(m, states))
            mask = np.array(states, dtype=np.bool_)
            labels = np.empty(sg.n, dtype=np.int64)
            wraps = np.zeros(sg.n, dtype=np.bool_)
            count = label_components(
                sg.indptr, sg.indices, sg.dispx, sg.dispy, mask, labels, wraps
            )
            assert count == st.n_open
            groups = {}
            for v in range(sg.n):
                if mask[v]:
                    groups.setdefault(int(labels[v]), set()).add(v)
            assert set(map(frozenset, groups.values())) == {
                frozenset(c) for c in st.open_clusters
            }
            if sg.torus:
                engine_wrapping = {
                    frozenset(groups[r]) for r in groups if wraps[r]
                }
                oracle_wrapping = {
                    frozenset(c)
                    for c, u in zip(st.open_clusters, st.open_unbounded)
                    if u
                }
                assert engine_wrapping == oracle_wrapping


class TestSampling:
    def test_sample_respects_forced_states(self):
        from percoplane.matching import hatted_graphs

        m = generate(TilingSpec.square(4))
        h1, _ = hatted_graphs(m, make_partition(m, "checkerboard"))
        cfg = sample_sites(h1, 0.5, seed=3, trial_id=0)
        for w in h1.site_face:
            assert cfg.states[w] == 1

    def test_sample_rejects_bad_p(self):
        m = generate(TilingSpec.square(4))
        with pytest.raises(ValueError):
            sample_sites(m, 1.5, seed=0, trial_id=0)


class TestSweeps:
    def test_wrap_curve_monotone_and_bounded(self):
        m = generate(TilingSpec.square(8))
        curve = newman_ziff_sweep(
            m, 500, Observable.WRAP_PROBABILITY, np.linspace(0.3, 0.9, 13), seed=5
        )
        means = curve.means()
        assert (np.diff(means) >= -1e-12).all()
        assert means[0] < 0.05 and means[-1] > 0.95
        assert ((means >= 0) & (means <= 1)).all()

    def test_thread_count_does_not_change_results(self):
        m = generate(TilingSpec.square(8))
        grid = [0.4, 0.5, 0.6, 0.7]
        one = newman_ziff_sweep(m, 600, Observable.WRAP_PROBABILITY, grid, seed=9, threads=1)
        four = newman_ziff_sweep(m, 600, Observable.WRAP_PROBABILITY, grid, seed=9, threads=4)
        assert one == four

    def test_max_cluster_fraction_limits(self):
        m = generate(TilingSpec.square(6))
        curve = newman_ziff_sweep(
            m, 400, Observable.MAX_CLUSTER_FRACTION, [0.05, 0.98], seed=2
        )
        assert curve.points[0][1] < 0.2
        assert curve.points[1][1] > 0.9

    def test_cross_needs_patch(self):
        m = generate(TilingSpec.square(4))
        with pytest.raises(UnsupportedObservable):
            newman_ziff_sweep(m, 10, Observable.CROSS_PROBABILITY, [0.5], seed=1)

    def test_wrap_needs_torus(self):
        mp = generate(TilingSpec.square((4, 4), Surface.PLANE_PATCH))
        with pytest.raises(UnsupportedObservable):
            newman_ziff_sweep(mp, 10, Observable.WRAP_PROBABILITY, [0.5], seed=1)

    def test_counting_observables_are_not_sweeps(self):
        m = generate(TilingSpec.square(4))
        with pytest.raises(UnsupportedObservable):
            newman_ziff_sweep(m, 10, Observable.UNIQUENESS_FRACTION, [0.5], seed=1)


class TestThresholds:
    def test_square_torus_threshold(self):
        est = estimate_pc(TilingSpec.square(4), sizes=(12, 24), trials=2000, seed=11)
        assert est.method is Method.WRAP_CROSSING
        assert abs(est.pc - 0.5927) < 0.01
        assert 0 < est.half_width < 0.02

    def test_estimate_deterministic(self):
        a = estimate_pc(TilingSpec.square(4), sizes=(8, 12), trials=500, seed=4)
        b = estimate_pc(TilingSpec.square(4), sizes=(8, 12), trials=500, seed=4, threads=4)
        assert a == b

    def test_needs_two_sizes(self):
        with pytest.raises(ValueError):
            estimate_pc(TilingSpec.square(4), sizes=(12,), trials=100, seed=0)

    def test_hyperbolic_ball_scaling_runs(self):
        est = estimate_pc(
            TilingSpec.hyperbolic(3, 7, 3), sizes=(3, 4), trials=1500, seed=6
        )
        assert est.method is Method.SIZE_SCALING
        assert est.pc < 0.5

    def test_tree_threshold_from_branching_reference(self):
        # P(root reaches depth d) on the 3-regular tree obeys
        # t_d = p (1 - (1 - t_{d-1})^2), answer = p (1 - (1 - t)^3);
        # evaluating at p = 1/2 gives the exact critical reference level,
        # and solving the sampled curve for that level recovers p = 1/2
        t = 0.5
        for _ in range(9):
            t = 0.5 * (1 - (1 - t) ** 2)
        ref = 0.5 * (1 - (1 - t) ** 3)
        assert abs(ref - 0.18075208688635974) < 1e-15
        tree = generate(TilingSpec.tree(3, 10))
        p_hat, hw = boundary_connection_solve(tree, ref, trials=6000, seed=31, threads=2)
        assert abs(p_hat - 0.5) <= 0.02
        assert hw < 0.03

    def test_solve_rejects_bad_level(self):
        tree = generate(TilingSpec.tree(3, 4))
        with pytest.raises(ValueError):
            boundary_connection_solve(tree, 0.0, trials=100, seed=1)


class TestFixedDensity:
    def test_boundary_cluster_count_grows_supercritically(self):
        host = generate(TilingSpec.hyperbolic(3, 7, 5))
        b4, _ = ball(host, BallSpec(0, 4))
        mean, stderr, trials = boundary_cluster_count(
            b4, 0.5, 2000, seed=9, core_radius=2
        )
        assert trials == 2000
        assert abs(mean - 2.79) < 0.15
        assert stderr < 0.05

    def test_boundary_cluster_count_core_validation(self):
        host = generate(TilingSpec.hyperbolic(3, 7, 4))
        b3, _ = ball(host, BallSpec(0, 3))
        with pytest.raises(ValueError):
            boundary_cluster_count(b3, 0.5, 10, seed=0, core_radius=3)
        with pytest.raises(UnsupportedObservable):
            boundary_cluster_count(generate(TilingSpec.square(4)), 0.5, 10, seed=0)

    def test_uniqueness_on_supercritical_torus(self):
        m = generate(TilingSpec.square(16))
        frac, hits, eligible = uniqueness_fraction(m, 0.65, 2000, seed=13)
        assert eligible > 1800
        assert frac > 0.99

    def test_proxy_counts_ladder_subcritical(self):
        lad = generate(TilingSpec.ladder(500))
        counts = unbounded_proxy_counts(lad, 0.9, 500, seed=21)
        # the two-ended strip almost never spans at p = 0.9
        assert counts.max() <= 1
        assert (counts == 0).mean() > 0.95

    def test_ladder_long_strip_rarely_spans_near_one(self):
        lad = generate(TilingSpec.ladder(1000))
        curve = newman_ziff_sweep(
            lad, 2000, Observable.CROSS_PROBABILITY, [0.95], seed=3
        )
        exact = ladder_spanning_probability(1000, 0.95)
        assert curve.points[0][1] < 0.01
        assert abs(curve.points[0][1] - exact) < 4 * max(curve.points[0][2], 1e-4)


class TestLadderExact:
    def test_single_column(self):
        # spanning a length-1 strip just needs one open vertex
        for p in (0.2, 0.5, 0.9):
            assert abs(ladder_spanning_probability(1, p) - (1 - (1 - p) ** 2)) < 1e-15

    def test_degenerate_densities(self):
        assert ladder_spanning_probability(50, 1.0) == 1.0
        assert ladder_spanning_probability(50, 0.0) == 0.0

    def test_brute_force_small_lengths(self):
        import itertools

        def brute(length, p):
            total = 0.0
            for bits in itertools.product([0, 1], repeat=2 * length):
                nodes = {
                    (r, i)
                    for r in (0, 1)
                    for i in range(length)
                    if bits[r * length + i]
                }
                stack = [v for v in nodes if v[1] == 0]
                seen = set(stack)
                ok = False
                while stack:
                    r, i = stack.pop()
                    if i == length - 1:
                        ok = True
                        break
                    for u in ((1 - r, i), (r, i - 1), (r, i + 1)):
                        if u in nodes and u not in seen:
                            seen.add(u)
                            stack.append(u)
                if ok:
                    w = 1.0
                    for x in bits:
                        w *= p if x else 1 - p
                    total += w
            return total

        for length in (2, 3, 4):
            for p in (0.3, 0.7):
                assert abs(
                    brute(length, p) - ladder_spanning_probability(length, p)
                ) < 1e-12

    def test_decays_with_length(self):
        vals = [ladder_spanning_probability(n, 0.95) for n in (100, 500, 1000)]
        assert vals[0] > vals[1] > vals[2]

    def test_input_validation(self):
        with pytest.raises(ValueError):
            ladder_spanning_probability(0, 0.5)
        with pytest.raises(ValueError):
            ladder_spanning_probability(10, 1.5)


@pytest.fixture(scope="module")
def patch():
    return generate(TilingSpec.square((5, 5), Surface.PLANE_PATCH))


class TestBlockingCircuits:
    @pytest.mark.parametrize("strat", ["all_f1", "all_f2", "checkerboard"])
    def test_sampled_configs_consistent(self, patch, strat):
        g1, g2 = matching_pair(patch, make_partition(patch, strat))
        rng = random.Random(21)
        for _ in range(400):
            states = [rng.randint(0, 1) for _ in range(25)]
            rep = blocking_circuit_check(patch, g1, g2, states, BallSpec(12, 1))
            assert rep.consistent, states

    def test_extremes(self, patch):
        g1, g2 = matching_pair(patch, make_partition(patch, "all_f1"))
        open_rep = blocking_circuit_check(patch, g1, g2, [1] * 25, BallSpec(12, 1))
        assert open_rep.blocked and open_rep.circuit is not None
        closed_rep = blocking_circuit_check(patch, g1, g2, [0] * 25, BallSpec(12, 1))
        assert not closed_rep.blocked and closed_rep.circuit is None

    def test_circuit_winds_outside_ball(self, patch):
        from percoplane.tilings import distances_from

        g1, g2 = matching_pair(patch, make_partition(patch, "checkerboard"))
        rep = blocking_circuit_check(patch, g1, g2, [1] * 25, BallSpec(12, 1))
        dist = distances_from(patch, 12)
        assert all(dist[v] > 1 for v in rep.circuit)

    def test_larger_patch_radius_two(self):
        m = generate(TilingSpec.square((7, 7), Surface.PLANE_PATCH))
        g1, g2 = matching_pair(m, make_partition(m, "checkerboard"))
        rng = random.Random(8)
        for _ in range(150):
            states = [rng.randint(0, 1) for _ in range(49)]
            rep = blocking_circuit_check(m, g1, g2, states, BallSpec(24, 2))
            assert rep.consistent

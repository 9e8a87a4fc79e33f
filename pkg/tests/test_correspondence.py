"""Face / dual-component / 0-cluster correspondence, exact and exhaustive."""

import random

import pytest

from percoplane.correspondence import (
    correspondence_check,
    exhaustive_correspondence,
    one_dependence_probe,
)
from percoplane.matching import hatted_graphs, make_partition
from percoplane.planar_map import Surface
from percoplane.tilings import TilingSpec, generate


def pair(m, strat):
    return hatted_graphs(m, make_partition(m, strat))


class TestSingleConfigs:
    def test_all_open(self):
        m = generate(TilingSpec.square(3))
        h1, h2 = pair(m, "all_f1")
        rep = correspondence_check(h1, h2, None, [1] * 9)
        assert rep.ok
        # fully open triangulated host: every face is its own region,
        # every dual vertex isolated, no 0-clusters anywhere
        assert rep.n_regions == h1.map.face_count
        assert rep.n_dual_components == h1.map.face_count
        assert rep.n_zero_clusters == 0
        assert rep.n_open_clusters_site == 1

    def test_all_closed(self):
        m = generate(TilingSpec.square(3))
        h1, h2 = pair(m, "all_f1")
        rep = correspondence_check(h1, h2, None, [0] * 9)
        assert rep.ok
        # only the forced-open facial sites remain; they are isolated, so
        # every site is a singleton open cluster and the closed base
        # vertices form one 0-cluster filling one region
        assert rep.n_open_clusters_site == len(h1.site_face)
        assert rep.n_zero_clusters == 1
        assert rep.n_regions_with_interior == 1

    def test_reports_have_witnesses_only_on_failure(self):
        m = generate(TilingSpec.square(3))
        h1, h2 = pair(m, "checkerboard")
        rng = random.Random(5)
        for _ in range(50):
            base = [rng.randint(0, 1) for _ in range(9)]
            rep = correspondence_check(h1, h2, None, base)
            assert rep.ok and rep.violations == ()


class TestExhaustive:
    @pytest.mark.parametrize("strat", ["all_f1", "all_f2", "checkerboard"])
    def test_square_torus_l3(self, strat):
        m = generate(TilingSpec.square(3))
        h1, h2 = pair(m, strat)
        n, violations = exhaustive_correspondence(h1, h2)
        assert n == 512
        assert violations == ()

    def test_region_count_equals_dual_components_3x4(self):
        m = generate(TilingSpec.square((3, 4)))
        h1, h2 = pair(m, "checkerboard")
        dual = h1.map.dual()
        rng = random.Random(1)
        for _ in range(200):
            base = [rng.randint(0, 1) for _ in range(12)]
            rep = correspondence_check(h1, h2, dual, base)
            assert rep.ok
            assert rep.n_regions == rep.n_dual_components

    def test_free_patch_random(self):
        mp = generate(TilingSpec.square((4, 4), Surface.PLANE_PATCH))
        for strat in ("all_f1", "all_f2", "checkerboard"):
            h1, h2 = pair(mp, strat)
            dual = h1.map.dual()
            rng = random.Random(9)
            for _ in range(100):
                base = [rng.randint(0, 1) for _ in range(16)]
                rep = correspondence_check(h1, h2, dual, base)
                assert rep.ok, rep.violations


class TestConnectivityEquivalence:
    def test_hatted_matches_diagonal_graph(self):
        # connectivity between base vertices through forced-open facial
        # sites equals connectivity in the diagonal-augmented graph
        from percoplane.configs import cluster_stats, extend_config, site_config
        from percoplane.matching import matching_pair

        m = generate(TilingSpec.square(3))
        part = make_partition(m, "checkerboard")
        g1, _ = matching_pair(m, part)
        h1, _ = hatted_graphs(m, part)
        for code in range(512):
            base = [(code >> v) & 1 for v in range(9)]
            st_g = cluster_stats(g1, site_config(g1, base))
            st_h = cluster_stats(h1, extend_config(h1, base))
            proj = {
                frozenset(v for v in c if v < 9)
                for c in st_h.open_clusters
                if any(v < 9 for v in c)
            }
            assert {frozenset(c) for c in st_g.open_clusters} == proj


class TestDependenceProbe:
    def test_probe_statistics(self):
        m = generate(TilingSpec.square(6))
        h1, _ = pair(m, "checkerboard")
        rep = one_dependence_probe(h1, 0.5, 200_000, seed=42)
        assert rep.ok
        assert abs(rep.marginal - 0.25) < 0.005
        assert abs(rep.disjoint_corr) < 0.009
        assert abs(rep.adjacent_joint - 0.125) < 0.004

    def test_probe_deterministic(self):
        m = generate(TilingSpec.square(6))
        h1, _ = pair(m, "checkerboard")
        a = one_dependence_probe(h1, 0.3, 10_000, seed=7)
        b = one_dependence_probe(h1, 0.3, 10_000, seed=7)
        assert a == b

    def test_probe_rejects_bad_p(self):
        m = generate(TilingSpec.square(6))
        h1, _ = pair(m, "checkerboard")
        with pytest.raises(ValueError):
            one_dependence_probe(h1, 0.0, 100, seed=1)

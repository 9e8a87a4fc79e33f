"""Site/bond configurations, the bond rule, and cluster statistics."""

import itertools
import random

import pytest

from percoplane.configs import (
    BondConfig,
    SiteConfig,
    bond_from_sites,
    cluster_stats,
    dual_bond_config,
    extend_config,
    forced_mask,
    site_config,
)
from percoplane.errors import ForcedStateViolated, MissingDualLink
from percoplane.matching import hatted_graphs, make_partition
from percoplane.planar_map import Surface
from percoplane.tilings import TilingSpec, generate


def label_propagation_components(n, edges, keep):
    """Independent cluster oracle: repeated label minimization, no
    traversal, no union-find."""
    label = {v: v for v in range(n) if keep[v]}
    changed = True
    while changed:
        changed = False
        for u, v in edges:
            if u in label and v in label:
                lo = min(label[u], label[v])
                if label[u] != lo or label[v] != lo:
                    label[u] = label[v] = lo
                    changed = True
    groups = {}
    for v, l in label.items():
        groups.setdefault(l, set()).add(v)
    return {frozenset(g) for g in groups.values()}


class TestSiteConfig:
    def test_forced_state_respected(self):
        with pytest.raises(ForcedStateViolated):
            SiteConfig((1, 0), (1, 1))

    def test_complement_keeps_forced(self):
        c = SiteConfig((1, 0, 1), (-1, -1, 1))
        assert c.complement().states == (0, 1, 1)

    def test_extend_config_forces_sites(self):
        m = generate(TilingSpec.square(3))
        h1, h2 = hatted_graphs(m, make_partition(m, "checkerboard"))
        base = [0] * 9
        w1 = extend_config(h1, base)
        w2 = extend_config(h2, base)
        assert all(w1.states[w] == 1 for w in h1.site_face)
        assert all(w2.states[w] == 0 for w in h2.site_face)


class TestBondRule:
    def test_bond_rule_exhaustive_small_torus(self):
        m = generate(TilingSpec.square(3))
        h1, _ = hatted_graphs(m, make_partition(m, "all_f1"))
        mm = h1.map
        dual = mm.dual()
        for code in range(512):
            base = [(code >> v) & 1 for v in range(9)]
            om = extend_config(h1, base)
            beta = bond_from_sites(h1, om, dual=dual)
            for e in range(mm.edge_count):
                u, v = mm.edge_endpoints(e)
                assert beta.states[e] == om.states[u] * om.states[v]
            bp = dual_bond_config(beta)
            assert all(a + b == 1 for a, b in zip(beta.states, bp.states))
            assert dual_bond_config(bp).states == beta.states

    def test_all_closed_and_all_open(self):
        m = generate(TilingSpec.square(3))
        h1, _ = hatted_graphs(m, make_partition(m, "all_f1"))
        beta0 = bond_from_sites(h1, extend_config(h1, [0] * 9))
        # edges between two forced-open sites do not exist; every edge has
        # a base endpoint, so everything is closed
        assert set(beta0.states) == {0}
        beta1 = bond_from_sites(h1, extend_config(h1, [1] * 9))
        assert set(beta1.states) == {1}

    def test_missing_dual_link(self):
        m = generate(TilingSpec.square(3))
        with pytest.raises(MissingDualLink):
            dual_bond_config(BondConfig(m, (0,) * m.edge_count))


class TestClusterStats:
    def test_all_open_connected(self):
        m = generate(TilingSpec.square(4))
        st = cluster_stats(m, site_config(m, [1] * 16))
        assert st.n_open == 1 and st.n_closed == 0
        assert st.open_unbounded == (True,)  # wraps the torus

    def test_alternating_four_cycle(self):
        # single square face of a 2x2 patch: alternating open/closed
        m = generate(TilingSpec.square((2, 2), Surface.PLANE_PATCH))
        inner = [f for f in m.faces if not f.is_outer][0]
        a, b, c, d = inner.vertices
        states = [0] * 4
        states[a] = states[c] = 1
        st = cluster_stats(m, site_config(m, states))
        assert st.n_open == 2 and st.n_closed == 2

    def test_bounded_cluster_not_flagged(self):
        m = generate(TilingSpec.square(5))
        states = [0] * 25
        states[0] = states[5] = 1  # two adjacent vertices
        st = cluster_stats(m, site_config(m, states))
        assert st.n_open == 1 and st.open_unbounded == (False,)

    def test_wrap_detection_column(self):
        m = generate(TilingSpec.square(5))
        states = [1 if v // 5 == 2 else 0 for v in range(25)]
        st = cluster_stats(m, site_config(m, states))
        assert st.open_unbounded == (True,)

    def test_boundary_touching_on_patch(self):
        m = generate(TilingSpec.square((4, 4), Surface.PLANE_PATCH))
        interior = [v for v in range(16) if v not in m.boundary_vertices]
        states = [0] * 16
        for v in interior:
            states[v] = 1
        st = cluster_stats(m, site_config(m, states))
        assert st.n_open == 1 and st.open_unbounded == (False,)
        states[0] = 1  # corner vertex, disjoint from the interior block?
        st = cluster_stats(m, site_config(m, states))
        flagged = [u for u, f in zip(st.open_clusters, st.open_unbounded) if f]
        assert all(0 in c for c in flagged)

    def test_exhaustive_vs_label_propagation_oracle(self):
        m = generate(TilingSpec.square((3, 3), Surface.PLANE_PATCH))
        edges = [m.edge_endpoints(e) for e in range(m.edge_count)]
        for code in range(512):
            states = [(code >> v) & 1 for v in range(9)]
            st = cluster_stats(m, site_config(m, states))
            want_open = label_propagation_components(9, edges, [s == 1 for s in states])
            want_closed = label_propagation_components(9, edges, [s == 0 for s in states])
            assert {frozenset(c) for c in st.open_clusters} == want_open
            assert {frozenset(c) for c in st.closed_clusters} == want_closed

    def test_singleton_convention_matches_site_count(self):
        m = generate(TilingSpec.square(3))
        rng = random.Random(11)
        for strat in ("all_f1", "all_f2", "checkerboard"):
            h1, _ = hatted_graphs(m, make_partition(m, strat))
            dual = h1.map.dual()
            for _ in range(100):
                base = [rng.randint(0, 1) for _ in range(9)]
                om = extend_config(h1, base)
                beta = bond_from_sites(h1, om, dual=dual)
                assert cluster_stats(h1, om).n_open == cluster_stats(None, beta).n_open

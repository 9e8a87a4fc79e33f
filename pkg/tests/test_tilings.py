"""Lattice and tiling generators, balls, and boundary-to-volume ratios.

Closed-form expected values used here:
  - square torus L x L has L^2 faces of size 4;
  - {3,7} ball layer sizes follow a_{n+1} = 3 a_n - a_{n-1} starting 1, 7
    (so rings 1, 7, 21, 56, 147, 385 give |B_n| = 1, 8, 29, 85, 232, 617);
  - {4,4} ball of radius n has 2n^2 + 2n + 1 vertices;
  - boundary ratio of the square-torus ball of radius n is exactly
    4(2n+1) / (2n^2 + 2n + 1).
"""

from fractions import Fraction

import pytest

from percoplane.errors import BallClipped, EmptySet, SizeTooSmall, SphericalPair
from percoplane.planar_map import Surface
from percoplane.tilings import (
    BallSpec,
    TilingSpec,
    ball,
    cheeger_ratio,
    distances_from,
    generate,
)


class TestEuclideanTori:
    def test_square_torus_counts(self):
        m = generate(TilingSpec.square(4))
        assert (m.vertex_count, m.edge_count, m.face_count) == (16, 32, 16)
        assert all(f.size == 4 for f in m.faces)
        assert all(m.degree(v) == 4 for v in range(16))
        assert m.euler_characteristic() == 0
        assert m.is_simple()

    def test_square_torus_rectangular(self):
        m = generate(TilingSpec.square((3, 5)))
        assert m.vertex_count == 15
        assert m.face_count == 15

    def test_triangular_torus_counts(self):
        m = generate(TilingSpec.triangular(4))
        assert (m.vertex_count, m.edge_count, m.face_count) == (16, 48, 32)
        assert all(f.size == 3 for f in m.faces)
        assert all(m.degree(v) == 6 for v in range(16))

    def test_hexagonal_torus_counts(self):
        m = generate(TilingSpec.hexagonal(4))
        assert m.vertex_count == 16
        assert all(m.degree(v) == 3 for v in range(16))
        assert all(f.size == 6 for f in m.faces)
        assert m.face_count == 8

    def test_hexagonal_requires_even_sides(self):
        with pytest.raises(SizeTooSmall):
            generate(TilingSpec.hexagonal(5))

    def test_minimum_size_enforced(self):
        with pytest.raises(SizeTooSmall):
            generate(TilingSpec.square(2))

    def test_metadata_family_and_ends(self):
        m = generate(TilingSpec.square(4))
        assert m.metadata["family"] == "square"
        assert m.metadata["ends"] == "1"
        assert m.metadata["amenable"] == "true"


class TestPatches:
    def test_square_patch(self):
        m = generate(TilingSpec.square((4, 4), Surface.PLANE_PATCH))
        assert m.vertex_count == 16
        assert m.euler_characteristic() == 2
        inner = [f for f in m.faces if not f.is_outer]
        assert len(inner) == 9 and all(f.size == 4 for f in inner)
        assert len(m.boundary_vertices) == 12

    def test_triangular_patch(self):
        m = generate(TilingSpec.triangular((4, 4), Surface.PLANE_PATCH))
        inner = [f for f in m.faces if not f.is_outer]
        assert len(inner) == 18 and all(f.size == 3 for f in inner)

    def test_tree_patch(self):
        m = generate(TilingSpec.tree(3, 4))
        # 1 + 3 + 3*2 + 3*4 + 3*8 = 46 vertices, a tree has one face
        assert m.vertex_count == 46
        assert m.edge_count == 45
        assert m.face_count == 1
        assert m.euler_characteristic() == 2
        assert m.degree(0) == 3
        assert m.metadata["ends"] == "infinity"

    def test_ladder_patch(self):
        m = generate(TilingSpec.ladder(5))
        assert m.vertex_count == 10
        inner = [f for f in m.faces if not f.is_outer]
        assert len(inner) == 4 and all(f.size == 4 for f in inner)
        assert m.metadata["ends"] == "2"


class TestHyperbolic:
    def test_rejects_spherical_pair(self):
        with pytest.raises(SphericalPair):
            generate(TilingSpec.hyperbolic(3, 5, 2))

    def test_heptagonal_373_ball_sizes(self):
        # |B_n| for {3,7}: rings 1, 7, 21, 56, 147, 385
        expected = [1, 8, 29, 85, 232, 617]
        for r, total in enumerate(expected[1:4], start=1):
            m = generate(TilingSpec.hyperbolic(3, 7, r))
            assert m.vertex_count == total, (r, m.vertex_count)

    def test_373_radius5_structure(self):
        m = generate(TilingSpec.hyperbolic(3, 7, 5))
        assert m.vertex_count == 617
        assert m.is_simple()
        assert m.euler_characteristic() == 2
        dist = distances_from(m, 0)
        ring = [sum(1 for v in range(m.vertex_count) if dist[v] == r) for r in range(6)]
        assert ring == [1, 7, 21, 56, 147, 385]
        # interior vertices have full degree, interior faces are triangles
        interior = [v for v in range(m.vertex_count) if v not in m.boundary_vertices]
        assert all(m.degree(v) == 7 for v in interior)
        inner = [f for f in m.faces if not f.is_outer]
        assert all(f.size == 3 for f in inner)

    def test_73_ball(self):
        m = generate(TilingSpec.hyperbolic(7, 3, 3))
        assert m.is_simple()
        assert m.euler_characteristic() == 2
        interior = [v for v in range(m.vertex_count) if v not in m.boundary_vertices]
        assert all(m.degree(v) == 3 for v in interior)
        inner = [f for f in m.faces if not f.is_outer]
        assert all(f.size == 7 for f in inner)

    def test_45_ball(self):
        m = generate(TilingSpec.hyperbolic(4, 5, 3))
        assert m.is_simple()
        interior = [v for v in range(m.vertex_count) if v not in m.boundary_vertices]
        assert all(m.degree(v) == 5 for v in interior)

    def test_euclidean_names_via_schlafli(self):
        # {4,4} radius n ball has 2n^2+2n+1 vertices
        m = generate(TilingSpec.hyperbolic(4, 4, 3))
        assert m.vertex_count == 25
        # {3,6} radius n ball has 3n^2+3n+1 vertices
        m = generate(TilingSpec.hyperbolic(3, 6, 3))
        assert m.vertex_count == 37

    def test_deterministic(self):
        a = generate(TilingSpec.hyperbolic(3, 7, 4)).to_text()
        b = generate(TilingSpec.hyperbolic(3, 7, 4)).to_text()
        assert a == b


class TestBalls:
    def test_square_torus_ball_sizes(self):
        m = generate(TilingSpec.square(16))
        for n in (1, 2, 3):
            patch, sphere = ball(m, BallSpec(0, n))
            assert patch.vertex_count == 2 * n * n + 2 * n + 1
            assert len(sphere) == 4 * n
            assert patch.euler_characteristic() == 2

    def test_ball_clipped_on_small_torus(self):
        m = generate(TilingSpec.square(6))
        with pytest.raises(BallClipped):
            ball(m, BallSpec(0, 3))

    def test_ball_clipped_near_patch_boundary(self):
        m = generate(TilingSpec.hyperbolic(3, 7, 3))
        # centered at the origin the radius-3 ball is the whole (exact)
        # host; centered one step out it would need vertices past the
        # truncation boundary
        with pytest.raises(BallClipped):
            ball(m, BallSpec(1, 3))
        with pytest.raises(BallClipped):
            ball(m, BallSpec(0, 4))

    def test_ball_inside_hyperbolic_host(self):
        host = generate(TilingSpec.hyperbolic(3, 7, 5))
        patch, sphere = ball(host, BallSpec(0, 2))
        assert patch.vertex_count == 29
        assert len(sphere) == 21


class TestCheeger:
    def test_square_torus_ball_ratio_closed_form(self):
        # boundary edges of B_n leave through the 4n sphere vertices
        m = generate(TilingSpec.square(24))
        dist = distances_from(m, 0)
        for n in range(1, 7):
            K = {v for v in range(m.vertex_count) if dist[v] <= n}
            got = cheeger_ratio(m, K)
            assert got == Fraction(4 * (2 * n + 1), 2 * n * n + 2 * n + 1)

    def test_square_ratios_decrease(self):
        m = generate(TilingSpec.square(24))
        dist = distances_from(m, 0)
        ratios = []
        for n in range(1, 7):
            K = {v for v in range(m.vertex_count) if dist[v] <= n}
            ratios.append(cheeger_ratio(m, K))
        assert all(a > b for a, b in zip(ratios, ratios[1:]))

    def test_hyperbolic_ratios_bounded_below(self):
        # frozen exact values for {3,7} balls of radius 1..5
        host = generate(TilingSpec.hyperbolic(3, 7, 7))
        dist = distances_from(host, 0)
        expected = [
            Fraction(7, 2),
            Fraction(77, 29),
            Fraction(203, 85),
            Fraction(133, 58),
            Fraction(1393, 617),
        ]
        for n, want in enumerate(expected, start=1):
            K = {v for v in range(host.vertex_count) if dist[v] <= n}
            got = cheeger_ratio(host, K)
            assert got == want
            assert got > Fraction(1, 5)

    def test_empty_set_raises(self):
        m = generate(TilingSpec.square(4))
        with pytest.raises(EmptySet):
            cheeger_ratio(m, set())

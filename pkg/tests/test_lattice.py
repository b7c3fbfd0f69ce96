import numpy as np
import pytest

from gasketlab import lattice
from gasketlab.errors import CapacityError, ValidationError
from gasketlab.lattice import (TriangleSpec, build_ball, build_triangle,
                               mirror, subdivide, translation_map,
                               triangle_count)


def test_vertex_count_identity():
    for level in range(9):
        region = build_triangle(level)
        assert len(region) == (3 ** (level + 1) + 3) // 2
        assert len(region.edges) == 3 ** (level + 1)


def test_level_zero_triangle():
    region = build_triangle(0)
    assert len(region) == 3
    assert len(region.edges) == 3
    assert region.stats()["degree_histogram"] == {2: 3}


def test_level_three_count():
    assert len(build_triangle(3)) == 42


def test_truncated_level_one_is_the_midpoint_triangle():
    # enumerate by hand: drop (0,0), (2,0), (0,2) and incident edges
    region = build_triangle(TriangleSpec(1, truncated=True))
    assert sorted(region.vertices) == [(0, 1), (1, 0), (1, 1)]
    assert len(region.edges) == 3


def test_truncated_count_and_boundary():
    region = build_triangle(TriangleSpec(2, truncated=True))
    assert len(region) == 15 - 3
    assert len(region.interior_boundary) == 6


def test_truncated_level_zero_rejected():
    with pytest.raises(ValidationError):
        TriangleSpec(0, truncated=True)


def test_ball_counts():
    assert len(build_ball(0)) == 5
    assert len(build_ball(2)) == 2 * triangle_count(2) - 1
    ball = build_ball(1)
    assert ball.region_degree[(0, 0)] == 4
    assert ball.full_degree[(0, 0)] == 4


def test_ball_halves_share_only_the_origin():
    plain = set(build_triangle(3).vertices)
    flipped = set(build_triangle(TriangleSpec(3, mirrored=True)).vertices)
    assert plain & flipped == {(0, 0)}
    assert len(build_ball(3)) == len(plain) + len(flipped) - 1


def test_degree_invariants():
    region = build_triangle(4)
    extremes = set(region.spec.extreme_vertices())
    for v in region.vertices:
        assert region.full_degree[v] == 4
        if v in extremes:
            assert region.region_degree[v] == 2
        else:
            assert region.region_degree[v] == 4
    assert region.interior_boundary == frozenset(extremes)


def test_half_lattice_origin_degree():
    region = build_triangle(TriangleSpec(2), half_lattice=True)
    assert region.full_degree[(0, 0)] == 2
    assert all(region.full_degree[v] == 4
               for v in region.vertices if v != (0, 0))
    # the origin corner then agrees with its subgraph degree
    assert (0, 0) not in region.interior_boundary


def test_mirror_is_an_involution_and_preserves_adjacency():
    rng = np.random.default_rng(0)
    for _ in range(50):
        v = tuple(int(x) for x in rng.integers(-20, 20, 2))
        assert mirror(mirror(v)) == v
    for dp, dq in lattice.NEIGHBOR_OFFSETS:
        a, b = (3, 4), (3 + dp, 4 + dq)
        ma, mb = mirror(a), mirror(b)
        assert (mb[0] - ma[0], mb[1] - ma[1]) in lattice.NEIGHBOR_OFFSETS


def test_capacity_guardrail():
    with pytest.raises(CapacityError):
        build_triangle(13)
    # overridable
    spec = TriangleSpec(5)
    assert len(build_triangle(spec, max_level=5)) == triangle_count(5)


def test_subdivide_cover():
    region = build_triangle(3)
    part = subdivide(region, 2, "cover")
    assert len(part.pieces) == 3
    assert part.residual == frozenset()
    piece_sets = [set(build_triangle(p).vertices) for p in part.pieces]
    union = set().union(*piece_sets)
    assert union == set(region.vertices)
    for i in range(3):
        for j in range(i + 1, 3):
            assert len(piece_sets[i] & piece_sets[j]) == 1


def test_subdivide_cover_counts_with_multiplicity():
    region = build_triangle(4)
    part = subdivide(region, 2, "cover")
    sizes = sum(triangle_count(2) for _ in part.pieces)
    overlap = sizes - len(region)
    # every shared corner is counted once extra per extra piece
    counts = {}
    for p in part.pieces:
        for v in p.extreme_vertices():
            counts[v] = counts.get(v, 0) + 1
    assert overlap == sum(c - 1 for c in counts.values())


def test_subdivide_disjoint():
    region = build_triangle(4)
    part = subdivide(region, 2, "disjoint")
    assert len(part.pieces) == 9
    assert len(part.residual) == 15
    seen = set(part.residual)
    total = len(part.residual)
    for p in part.pieces:
        vs = set(build_triangle(p).vertices)
        assert not vs & seen
        seen |= vs
        total += len(vs)
    assert seen == set(region.vertices)
    assert total == len(region)


def test_residual_count_identity():
    for level, piece in [(3, 1), (4, 2), (5, 3), (5, 1)]:
        region = build_triangle(level)
        part = subdivide(region, piece, "disjoint")
        expected = len(region) - 3 ** (level - piece) * (triangle_count(piece) - 3)
        assert len(part.residual) == expected


def test_subdivide_identity_partition():
    region = build_triangle(3)
    part = subdivide(region, 3, "cover")
    assert len(part.pieces) == 1
    assert part.pieces[0] == region.spec


def test_subdivide_validation():
    region = build_triangle(3)
    with pytest.raises(ValidationError):
        subdivide(region, 4, "cover")
    with pytest.raises(ValidationError):
        subdivide(region, -1, "cover")
    with pytest.raises(ValidationError):
        subdivide(build_ball(2), 1, "cover")


def test_translation_map_identity():
    spec = TriangleSpec(2)
    mapping = translation_map(spec, spec)
    assert all(v == w for v, w in mapping.items())


def test_translation_map_preserves_edges():
    # exhaustive graph-isomorphism check for pieces up to side 2^4
    for piece_level in (1, 2, 3, 4):
        parent = build_triangle(piece_level + 1)
        pieces = subdivide(parent, piece_level, "cover").pieces
        for target_spec in pieces[1:]:
            mapping = translation_map(pieces[0], target_spec)
            source = build_triangle(pieces[0])
            target = build_triangle(target_spec)
            mapped_edges = {
                tuple(sorted((mapping[a], mapping[b]))) for a, b in source.edges}
            assert mapped_edges == {tuple(sorted(e)) for e in target.edges}


def test_translation_map_to_mirrored_triangle():
    a = TriangleSpec(2)
    b = TriangleSpec(2, mirrored=True)
    mapping = translation_map(a, b)
    target = build_triangle(b)
    assert set(mapping.values()) == set(target.vertices)
    back = translation_map(b, a)
    assert all(back[mapping[v]] == v for v in mapping)


def test_translation_map_level_mismatch():
    with pytest.raises(ValidationError):
        translation_map(TriangleSpec(1), TriangleSpec(2))
    with pytest.raises(ValidationError):
        translation_map(TriangleSpec(2), TriangleSpec(2, truncated=True))


def test_canonical_order_and_export(tmp_path):
    region = build_triangle(2)
    keys = [(q, p) for p, q in region.vertices]
    assert keys == sorted(keys)
    path = tmp_path / "region.edges"
    region.export_edge_list(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# gasket level=2 truncated=False mirrored=False"
    assert lines[1].split() == ["0", "0"]
    assert len(lines) == 1 + len(region) + len(region.edges)
    # byte-identical re-export
    path2 = tmp_path / "region2.edges"
    build_triangle(2).export_edge_list(path2)
    assert path.read_bytes() == path2.read_bytes()


def test_ball_export_carries_kind(tmp_path):
    path = tmp_path / "ball.edges"
    build_ball(1).export_edge_list(path)
    assert path.read_text().splitlines()[0].endswith("kind=ball")


def test_region_stats():
    assert lattice.region_stats(build_triangle(2))["vertex_count"] == 15
    stats = lattice.region_stats(build_triangle(TriangleSpec(2, truncated=True)))
    assert stats["interior_boundary_size"] == 6

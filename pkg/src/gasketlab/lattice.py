"""Finite Sierpinski gasket subgraphs on an exact integer triangular basis.

Vertices are integer pairs (p, q); the Euclidean position is
p*(1, 0) + q*(1/2, sqrt(3)/2).  All construction is integer arithmetic, so
vertex equality and hashing are exact.  The side-length-2^level triangle at
the origin is grown by the corner-gluing recursion: a level-(n+1) triangle
is a level-n triangle plus copies shifted by 2^n*(1, 0) and 2^n*(0, 1).
The mirrored half of the lattice is the reflection across the y-axis,
which in this basis is (p, q) -> (-p-q, q).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import CapacityError, ValidationError

Coord = tuple[int, int]

#: Difference vectors between adjacent vertices of the triangular lattice.
NEIGHBOR_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))

#: Default guardrail: level 12 is about 800k vertices.
MAX_LEVEL = 12

COVER = "cover"
DISJOINT = "disjoint"


def mirror(v: Coord) -> Coord:
    """Reflect a basis coordinate across the y-axis."""
    p, q = v
    return (-p - q, q)


def euclidean(v: Coord) -> tuple[float, float]:
    """Euclidean position of a basis coordinate."""
    p, q = v
    return (p + 0.5 * q, q * np.sqrt(3.0) / 2.0)


def _vkey(v: Coord):
    # canonical vertex order: lexicographic on (q, p)
    return (v[1], v[0])


def _canonical_edge(a: Coord, b: Coord):
    return (a, b) if _vkey(a) <= _vkey(b) else (b, a)


@dataclass(frozen=True)
class TriangleSpec:
    """A side-2^level gasket triangle: mirror first (optionally), then shift.

    ``anchor`` is the image of the origin corner.  ``truncated`` drops the
    3 extreme (corner) vertices and their incident edges.
    """

    level: int
    anchor: Coord = (0, 0)
    truncated: bool = False
    mirrored: bool = False

    def __post_init__(self):
        if self.level < 0:
            raise ValidationError(f"level must be >= 0, got {self.level}")
        if self.truncated and self.level == 0:
            raise ValidationError("a truncated level-0 triangle is empty")

    @property
    def side(self) -> int:
        return 2**self.level

    def place(self, v: Coord) -> Coord:
        """Map a coordinate of the standard origin triangle into this one."""
        if self.mirrored:
            v = mirror(v)
        return (v[0] + self.anchor[0], v[1] + self.anchor[1])

    def unplace(self, v: Coord) -> Coord:
        """Inverse of :meth:`place`."""
        v = (v[0] - self.anchor[0], v[1] - self.anchor[1])
        return mirror(v) if self.mirrored else v

    def extreme_vertices(self) -> tuple[Coord, Coord, Coord]:
        """The 3 corners of the (untruncated) triangle."""
        s = self.side
        return (self.place((0, 0)), self.place((s, 0)), self.place((0, s)))


@dataclass
class Partition:
    """Pieces of a subdivided triangle.

    ``cover`` pieces overlap pairwise in at most one corner; ``disjoint``
    pieces are the truncated triangles plus the residual set of all the
    removed corners.
    """

    kind: str
    pieces: list[TriangleSpec]
    residual: frozenset[Coord] = field(default_factory=frozenset)


class LatticeRegion:
    """A finite gasket subgraph with its boundary and degree data.

    Immutable after construction: vertices are sorted canonically
    (lexicographic on (q, p)), edges stored once with ordered endpoints.
    ``full_degree`` is the degree in the ambient infinite lattice: 4
    everywhere, except 2 at the origin when ``half_lattice`` is set (the
    one-sided lattice has a degree-2 corner there).
    """

    def __init__(self, vertices, edges, spec=None, kind="triangle",
                 half_lattice=False, level=None):
        self.vertices: list[Coord] = sorted(vertices, key=_vkey)
        self.index: dict[Coord, int] = {v: i for i, v in enumerate(self.vertices)}
        self.edges: list[tuple[Coord, Coord]] = sorted(
            (_canonical_edge(a, b) for a, b in edges),
            key=lambda e: (_vkey(e[0]), _vkey(e[1])),
        )
        self.spec = spec
        self.kind = kind
        self.half_lattice = half_lattice
        self.level = spec.level if spec is not None else level

        self.region_degree: dict[Coord, int] = {v: 0 for v in self.vertices}
        for a, b in self.edges:
            self.region_degree[a] += 1
            self.region_degree[b] += 1
        self.full_degree: dict[Coord, int] = {
            v: (2 if half_lattice and v == (0, 0) else 4) for v in self.vertices
        }
        self.interior_boundary: frozenset[Coord] = frozenset(
            v for v in self.vertices
            if self.full_degree[v] > self.region_degree[v]
        )
        self._adjacency = None

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, v) -> bool:
        return v in self.index

    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric 0/1 adjacency matrix in canonical vertex order."""
        if self._adjacency is None:
            n = len(self.vertices)
            rows, cols = [], []
            for a, b in self.edges:
                i, j = self.index[a], self.index[b]
                rows += [i, j]
                cols += [j, i]
            data = np.ones(len(rows))
            self._adjacency = sparse.csr_matrix(
                (data, (rows, cols)), shape=(n, n)
            )
        return self._adjacency

    def degree_arrays(self):
        """(region_degree, full_degree) as vectors in canonical order."""
        reg = np.array([self.region_degree[v] for v in self.vertices], dtype=float)
        full = np.array([self.full_degree[v] for v in self.vertices], dtype=float)
        return reg, full

    def stats(self) -> dict:
        """Counts consistent with the construction invariants."""
        hist: dict[int, int] = {}
        for v in self.vertices:
            d = self.region_degree[v]
            hist[d] = hist.get(d, 0) + 1
        return {
            "vertex_count": len(self.vertices),
            "edge_count": len(self.edges),
            "degree_histogram": dict(sorted(hist.items())),
            "interior_boundary_size": len(self.interior_boundary),
        }

    def export_edge_list(self, path) -> None:
        """Write the bit-exact edge-list text format."""
        spec = self.spec
        truncated = spec.truncated if spec is not None else False
        mirrored = spec.mirrored if spec is not None else False
        lines = [f"# gasket level={self.level} truncated={truncated} mirrored={mirrored}"
                 + ("" if self.kind == "triangle" else f" kind={self.kind}")]
        for p, q in self.vertices:
            lines.append(f"{p} {q}")
        for (p1, q1), (p2, q2) in self.edges:
            lines.append(f"{p1} {q1} {p2} {q2}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def triangle_count(level: int) -> int:
    """Number of vertices of the level-``level`` triangle."""
    return (3 ** (level + 1) + 3) // 2


def ball_count(level: int) -> int:
    """Number of vertices of the radius-2^level two-sided ball."""
    return 2 * triangle_count(level) - 1


def _check_capacity(level: int, max_level: int):
    if level > max_level:
        raise CapacityError(
            f"level {level} exceeds the guardrail {max_level} "
            f"({triangle_count(level)} vertices); raise max_level to override"
        )


def _unit_anchors(level: int) -> list[Coord]:
    # anchors of the 3^level unit up-triangles of the standard triangle
    anchors = [(0, 0)]
    for k in range(level):
        s = 2**k
        anchors = (anchors
                   + [(p + s, q) for p, q in anchors]
                   + [(p, q + s) for p, q in anchors])
    return anchors


def _cells(spec: TriangleSpec) -> list[Coord]:
    # unit up-triangle anchors of a placed (possibly mirrored) triangle;
    # the mirror image of the up-triangle at (p, q) is the one at (-p-q-1, q)
    out = []
    for p, q in _unit_anchors(spec.level):
        if spec.mirrored:
            p, q = -p - q - 1, q
        out.append((p + spec.anchor[0], q + spec.anchor[1]))
    return out


def _cell_graph(cell_anchors):
    vertices = set()
    edges = set()
    for p, q in cell_anchors:
        a, b, c = (p, q), (p + 1, q), (p, q + 1)
        vertices.update((a, b, c))
        edges.update((_canonical_edge(a, b), _canonical_edge(a, c),
                      _canonical_edge(b, c)))
    return vertices, edges


def build_triangle(spec, *, half_lattice=False, max_level=MAX_LEVEL) -> LatticeRegion:
    """Construct the gasket triangle described by ``spec``.

    ``spec`` may also be a bare level (int).  ``half_lattice`` marks the
    region as living in the one-sided lattice whose origin has ambient
    degree 2.
    """
    if isinstance(spec, int):
        spec = TriangleSpec(level=spec)
    _check_capacity(spec.level, max_level)
    vertices, edges = _cell_graph(_cells(spec))
    if spec.truncated:
        drop = set(spec.extreme_vertices())
        vertices -= drop
        edges = {e for e in edges if e[0] not in drop and e[1] not in drop}
    return LatticeRegion(vertices, edges, spec=spec, kind="triangle",
                         half_lattice=half_lattice)


def build_ball(level: int, *, max_level=MAX_LEVEL) -> LatticeRegion:
    """The radius-2^level ball at the origin: two mirror-image triangles
    glued at (0, 0)."""
    _check_capacity(level, max_level)
    cells = (_cells(TriangleSpec(level=level))
             + _cells(TriangleSpec(level=level, mirrored=True)))
    vertices, edges = _cell_graph(cells)
    return LatticeRegion(vertices, edges, spec=None, kind="ball", level=level)


def subdivide(region: LatticeRegion, level: int, kind: str) -> Partition:
    """Split a triangle into its side-2^level sub-triangles.

    ``cover`` keeps the full overlapping triangles; ``disjoint`` truncates
    them and collects all their corners in the residual set.
    """
    spec = region.spec
    if spec is None or region.kind != "triangle" or spec.truncated:
        raise ValidationError("subdivide needs a non-truncated triangle region")
    if kind not in (COVER, DISJOINT):
        raise ValidationError(f"unknown partition kind {kind!r}")
    if not 0 <= level <= spec.level:
        raise ValidationError(
            f"piece level must be in [0, {spec.level}], got {level}")

    anchors = [(0, 0)]
    for k in range(level, spec.level):
        s = 2**k
        anchors = (anchors
                   + [(p + s, q) for p, q in anchors]
                   + [(p, q + s) for p, q in anchors])
    placed = [spec.place(a) for a in anchors]
    if kind == COVER:
        pieces = [TriangleSpec(level, anchor=a, mirrored=spec.mirrored)
                  for a in placed]
        return Partition(COVER, pieces)
    if level == 0:
        raise ValidationError("disjoint pieces must have level >= 1")
    pieces = [TriangleSpec(level, anchor=a, truncated=True,
                           mirrored=spec.mirrored) for a in placed]
    residual = frozenset(
        v
        for a in placed
        for v in TriangleSpec(level, anchor=a, mirrored=spec.mirrored).extreme_vertices()
    )
    return Partition(DISJOINT, pieces, residual)


def translation_map(a: TriangleSpec, b: TriangleSpec,
                    *, max_level=MAX_LEVEL) -> dict[Coord, Coord]:
    """Adjacency-preserving vertex bijection from triangle ``a`` onto ``b``."""
    if a.level != b.level:
        raise ValidationError(
            f"levels differ: {a.level} vs {b.level}")
    if a.truncated != b.truncated:
        raise ValidationError("truncation flags differ")
    _check_capacity(a.level, max_level)
    source = build_triangle(a, max_level=max_level)
    return {v: b.place(a.unplace(v)) for v in source.vertices}


def region_stats(region: LatticeRegion) -> dict:
    """Vertex/edge counts, degree histogram and boundary size."""
    return region.stats()

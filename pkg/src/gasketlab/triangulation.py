"""Sphere triangulations: validation, builders, barycentric subdivision."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, Sequence

Edge = tuple[int, int]
Face = tuple[int, int, int]


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Triangulation:
    """Maximal simple planar graph with an explicit, consistently oriented face list.

    Faces are stored explicitly so that unreduced triangulations (with 3-cycles
    that are not faces) can be represented faithfully.
    """

    vertex_count: int
    faces: tuple[Face, ...]
    edges: frozenset[Edge] = field(init=False)

    def __post_init__(self):
        es = set()
        for a, b, c in self.faces:
            es.update((edge_key(a, b), edge_key(b, c), edge_key(c, a)))
        object.__setattr__(self, "edges", frozenset(es))

    @property
    def face_count(self) -> int:
        return len(self.faces)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.vertex_count)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def face_edges(self, f: Face) -> list[Edge]:
        a, b, c = f
        return [edge_key(a, b), edge_key(b, c), edge_key(c, a)]

    def to_json_dict(self) -> dict:
        return {"vertices": self.vertex_count, "faces": [list(f) for f in self.faces]}

    @staticmethod
    def from_json_dict(data: dict) -> "Triangulation":
        return Triangulation(int(data["vertices"]),
                             tuple(tuple(f) for f in data["faces"]))


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, msg: str) -> None:
        self.violations.append(msg)


def validate(t: Triangulation) -> ValidationReport:
    """Check every Triangulation invariant; an empty report means valid."""
    rep = ValidationReport()
    n, e, f = t.vertex_count, t.edge_count, t.face_count
    if n < 4:
        rep.add(f"too few vertices: |V|={n} < 4")
    for a, b, c in t.faces:
        if len({a, b, c}) < 3:
            rep.add(f"degenerate face {(a, b, c)}")
        if not all(0 <= v < n for v in (a, b, c)):
            rep.add(f"face {(a, b, c)} references unknown vertex")
    if e != 3 * n - 6:
        rep.add(f"not maximal: |E| != 3|V|-6 ({e} != {3 * n - 6})")
    if f != 2 * n - 4:
        rep.add(f"face count: |F| != 2|V|-4 ({f} != {2 * n - 4})")
    if n - e + f != 2:
        rep.add(f"Euler characteristic: |V|-|E|+|F| = {n - e + f} != 2")
    # each edge in exactly two faces, once per direction
    directed: dict[tuple[int, int], int] = {}
    for face in t.faces:
        a, b, c = face
        for u, v in ((a, b), (b, c), (c, a)):
            directed[(u, v)] = directed.get((u, v), 0) + 1
    for u, v in t.edges:
        if directed.get((u, v), 0) != 1 or directed.get((v, u), 0) != 1:
            rep.add(f"edge {(u, v)} not used exactly once per direction "
                    "(faces missing or inconsistently oriented)")
    # two faces share at most one edge
    face_sets = [frozenset(f) for f in t.faces]
    for i, j in combinations(range(f), 2):
        if len(face_sets[i] & face_sets[j]) > 2:
            rep.add(f"faces {t.faces[i]} and {t.faces[j]} share more than one edge")
    return rep


def three_cycles(t: Triangulation) -> Iterator[frozenset[int]]:
    """All 3-cycles of the graph, by sorted-adjacency intersection."""
    adj = t.adjacency()
    for u, v in sorted(t.edges):
        for w in sorted(adj[u] & adj[v]):
            if w > v:
                yield frozenset((u, v, w))


def is_reduced(t: Triangulation) -> bool:
    """True iff every 3-cycle of the graph bounds a face (no separating triangles)."""
    face_sets = {frozenset(f) for f in t.faces}
    return all(cyc in face_sets for cyc in three_cycles(t))


def barycentric_subdivision(t: Triangulation) -> Triangulation:
    """Subdivide every face into six; preserves validity and reducedness."""
    n = t.vertex_count
    edge_ids = {e: n + i for i, e in enumerate(sorted(t.edges))}
    face_base = n + t.edge_count
    new_faces: list[Face] = []
    for fi, (a, b, c) in enumerate(t.faces):
        z = face_base + fi
        mab = edge_ids[edge_key(a, b)]
        mbc = edge_ids[edge_key(b, c)]
        mca = edge_ids[edge_key(c, a)]
        new_faces.extend([
            (a, mab, z), (mab, b, z), (b, mbc, z),
            (mbc, c, z), (c, mca, z), (mca, a, z),
        ])
    return Triangulation(face_base + t.face_count, tuple(new_faces))


def _oriented(faces: Sequence[Face]) -> tuple[Face, ...]:
    """Flip faces as needed so every edge is used once in each direction."""
    remaining = {i: tuple(f) for i, f in enumerate(faces)}
    out: dict[int, Face] = {}
    while remaining:
        seed = min(remaining)
        out[seed] = remaining.pop(seed)
        stack = [seed]
        while stack:
            i = stack.pop()
            used = {(out[i][k], out[i][(k + 1) % 3]) for k in range(3)}
            for j in list(remaining):
                f = remaining[j]
                dirs = {(f[k], f[(k + 1) % 3]) for k in range(3)}
                if any((v, u) in used for u, v in dirs):
                    out[j] = f
                    remaining.pop(j)
                    stack.append(j)
                elif dirs & used:
                    out[j] = (f[0], f[2], f[1])
                    remaining.pop(j)
                    stack.append(j)
    return tuple(out[i] for i in sorted(out))


def tetrahedron() -> Triangulation:
    """K4: every pair of the four vertices joined."""
    return Triangulation(4, ((0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)))


def octahedron() -> Triangulation:
    """K_{2,2,2}; antipodal pairs (0,5), (1,4), (2,3) are the non-edges."""
    faces = ((0, 1, 2), (0, 2, 4), (0, 4, 3), (0, 3, 1),
             (5, 2, 1), (5, 4, 2), (5, 3, 4), (5, 1, 3))
    return Triangulation(6, _oriented(faces))


def icosahedron() -> Triangulation:
    faces = ((0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 1),
             (1, 6, 2), (2, 7, 3), (3, 8, 4), (4, 9, 5), (5, 10, 1),
             (6, 7, 2), (7, 8, 3), (8, 9, 4), (9, 10, 5), (10, 6, 1),
             (11, 7, 6), (11, 8, 7), (11, 9, 8), (11, 10, 9), (11, 6, 10))
    return Triangulation(12, _oriented(faces))


def double_tetrahedron() -> Triangulation:
    """Two tetrahedra glued along a face; valid but not reduced."""
    faces = ((0, 1, 3), (1, 2, 3), (2, 0, 3), (1, 0, 4), (2, 1, 4), (0, 2, 4))
    return Triangulation(5, _oriented(faces))


BUILDERS = {
    "tetrahedron": tetrahedron,
    "octahedron": octahedron,
    "icosahedron": icosahedron,
    "double_tetrahedron": double_tetrahedron,
}

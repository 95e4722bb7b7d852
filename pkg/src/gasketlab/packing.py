"""Circle-packing solver: realize a sphere triangulation as a tangency packing.

Strategy: pick a vertex to send to infinity, compute the maximal packing of
the remaining disk triangulation in hyperbolic radii (interior angle sums 2pi,
boundary circles horocycles), lay the circles out in the unit disk by solving
tangency constraints in inversive coordinates, and complete the packing with
the exterior of the unit circle as the removed vertex's disk.  A Möbius
normalization then fixes the three-real-parameter gauge.

Labels use t = exp(-hyperbolic radius) in [0, 1): the angle at v in a face
(v, u, w) of mutually tangent circles is

    cos(angle) = ((1+a^2)(1+b^2) - 2 t^2 - 2 m^2) / ((1-a^2)(1-b^2)),

with a = t_v t_u, b = t_v t_w, m = t_v t_u t_w, which degenerates correctly
for horocycle neighbors (t = 0).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DegenerateTripleError, NoConvergenceError
from .geometry import (
    INF,
    Circle,
    Contact,
    GenCircle,
    Line,
    MobiusMap,
    SpherePoint,
    SphericalCap,
    apply_to_circle,
    cap_from_circle,
    caps_disjoint,
    chordal,
    chordal_to_curve,
    circle_through,
    circles_close,
    inversive_vector,
    mobius_from_triples,
    orthogonality_residual,
    tangency,
)
from .triangulation import Edge, Face, Triangulation, edge_key

OMEGA = cmath.exp(2j * math.pi / 3)

ANGLE_RESIDUAL = 1e-13
LAYOUT_TOL = 1e-10
MAX_SWEEPS = 20000


# ---------------------------------------------------------------------------
# radius relaxation
# ---------------------------------------------------------------------------


def _face_angle(t: float, tu: float, tw: float) -> float:
    a, b = t * tu, t * tw
    m = a * tw
    num = (1 + a * a) * (1 + b * b) - 2 * t * t - 2 * m * m
    den = (1 - a * a) * (1 - b * b)
    return math.acos(max(-1.0, min(1.0, num / den)))


def _angle_sum(t: float, pairs: list[tuple[float, float]]) -> float:
    return sum(_face_angle(t, tu, tw) for tu, tw in pairs)


def _solve_vertex(pairs: list[tuple[float, float]], target: float) -> float:
    lo, hi = 1e-16, 1.0 - 1e-16
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _angle_sum(mid, pairs) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _relax_radii(tri: Triangulation, v_inf: int) -> dict[int, float]:
    """Labels t_v for the maximal packing of (tri minus v_inf)."""
    link = tri.adjacency()[v_inf]
    interior = [v for v in range(tri.vertex_count) if v != v_inf and v not in link]
    t = {v: 0.0 for v in range(tri.vertex_count) if v != v_inf}
    for v in interior:
        t[v] = 0.5
    if not interior:
        return t
    neighbor_pairs: dict[int, list[tuple[int, int]]] = {v: [] for v in interior}
    for f in tri.faces:
        if v_inf in f:
            continue
        for i, v in enumerate(f):
            if v in neighbor_pairs:
                neighbor_pairs[v].append((f[(i + 1) % 3], f[(i + 2) % 3]))
    residual = math.inf
    for sweep in range(MAX_SWEEPS):
        residual = 0.0
        for v in interior:
            pairs = [(t[u], t[w]) for u, w in neighbor_pairs[v]]
            t[v] = _solve_vertex(pairs, 2 * math.pi)
            residual = max(residual, abs(_angle_sum(t[v], pairs) - 2 * math.pi))
        if residual < ANGLE_RESIDUAL:
            check = max(
                abs(_angle_sum(t[v], [(t[u], t[w]) for u, w in neighbor_pairs[v]])
                    - 2 * math.pi)
                for v in interior)
            if check < 10 * ANGLE_RESIDUAL:
                return t
    raise NoConvergenceError(MAX_SWEEPS, residual)


# ---------------------------------------------------------------------------
# layout in inversive coordinates
# ---------------------------------------------------------------------------


def _iprod4(a: np.ndarray, b: np.ndarray) -> float:
    return a[2] * b[2] + a[3] * b[3] - 0.5 * (a[0] * b[1] + a[1] * b[0])


def _tangency_row(c: Circle) -> tuple[np.ndarray, float]:
    v = inversive_vector(c)
    return np.array([-v[1] / 2, -v[0] / 2, v[2], v[3]]), -1.0


def _unit_row(sigma: float) -> tuple[np.ndarray, float]:
    return np.array([0.5, -0.5, 0.0, 0.0]), sigma


def _real_axis_row() -> tuple[np.ndarray, float]:
    return np.array([0.0, 0.0, 0.0, 1.0]), 0.0


def _solve_circle(rows: Sequence[tuple[np.ndarray, float]]) -> list[Circle]:
    a = np.array([r[0] for r in rows])
    b = np.array([r[1] for r in rows])
    w0, *_ = np.linalg.lstsq(a, b, rcond=None)
    _, _, vt = np.linalg.svd(a)
    k = vt[-1]
    q2 = _iprod4(k, k)
    q1 = _iprod4(w0, k)
    q0 = _iprod4(w0, w0) - 1.0
    sols: list[np.ndarray] = []
    if abs(q2) < 1e-14:
        if abs(q1) > 1e-14:
            sols.append(w0 - (q0 / (2 * q1)) * k)
    else:
        disc = q1 * q1 - q2 * q0
        if disc < 0 and disc > -1e-12:
            disc = 0.0
        if disc >= 0:
            root = math.sqrt(disc)
            for s in (+1, -1):
                sols.append(w0 + ((-q1 + s * root) / q2) * k)
    out = []
    for w in sols:
        if w[0] > 1e-9:  # genuine circle with the bounded disk as interior
            out.append(Circle(complex(w[2], w[3]) / w[0], 1.0 / w[0]))
    return out


def _sigma(t: float) -> float:
    return (1 + t * t) / (1 - t * t)


def _orientation(za: complex, zb: complex, zc: complex) -> float:
    return ((zb - za).conjugate() * (zc - za)).imag


def _layout(tri: Triangulation, v_inf: int, t: dict[int, float]) -> dict[int, Circle]:
    faces = [f for f in tri.faces if v_inf not in f]
    placed: dict[int, Circle] = {}

    # base face: prefer interior (t > 0) vertices first
    base = max(faces, key=lambda f: sum(t[v] > 0 for v in f))
    order = sorted(base, key=lambda v: -t[v])
    p, q = order[0], order[1]
    if t[p] > 0:
        rho = (1 - t[p]) / (1 + t[p])
        placed[p] = Circle(0j, rho)
    else:
        placed[p] = Circle(0.5 + 0j, 0.5)
    cands = _solve_circle([_tangency_row(placed[p]), _unit_row(_sigma(t[q])),
                           _real_axis_row()])
    cands = [c for c in cands if abs(c.center - placed[p].center) > 1e-9]
    if not cands:
        raise NoConvergenceError(0, math.inf)
    if t[p] > 0:
        placed[q] = max(cands, key=lambda c: c.center.real)
    else:
        placed[q] = min(cands, key=lambda c: c.center.real)

    base_sign = 0.0
    pending = [f for f in faces]
    progress = True
    while pending and progress:
        progress = False
        rest: list[Face] = []
        for f in pending:
            known = [v for v in f if v in placed]
            if len(known) == 3:
                progress = True
                continue
            if len(known) < 2:
                rest.append(f)
                continue
            missing = next(v for v in f if v not in placed)
            others = [v for v in f if v != missing]
            cands = _solve_circle([
                _tangency_row(placed[others[0]]),
                _tangency_row(placed[others[1]]),
                _unit_row(_sigma(t[missing])),
            ])
            ordered = {v: (placed[v].center if v != missing else None) for v in f}
            best = None
            for c in cands:
                ordered[missing] = c.center
                sign = _orientation(*(ordered[v] for v in f))
                if base_sign == 0.0 or sign * base_sign > 0:
                    if best is None or abs(sign) > abs(best[1]):
                        best = (c, sign)
            if best is None:
                rest.append(f)
                continue
            placed[missing] = best[0]
            if base_sign == 0.0:
                base_sign = best[1]
            progress = True
        pending = rest
    expected = {v for v in range(tri.vertex_count) if v != v_inf}
    if set(placed) != expected:
        raise NoConvergenceError(0, math.inf)
    return placed


# ---------------------------------------------------------------------------
# the packing object
# ---------------------------------------------------------------------------


@dataclass
class PackingReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass
class CirclePacking:
    triangulation: Triangulation
    circles: dict[int, GenCircle]
    duals: dict[int, GenCircle]
    tangencies: dict[Edge, SpherePoint]
    caps: dict[int, SphericalCap]
    dual_caps: dict[int, SphericalCap]
    normalization: str = "triple"

    def dual_of(self, face_index: int) -> GenCircle:
        return self.duals[face_index]


def _compute_tangencies(tri: Triangulation, circles: dict[int, GenCircle],
                        tol: float = 1e-6) -> dict[Edge, SpherePoint]:
    out: dict[Edge, SpherePoint] = {}
    for u, v in sorted(tri.edges):
        kind, pt = tangency(circles[u], circles[v], tol)
        if kind is not Contact.TANGENT:
            raise NoConvergenceError(0, math.inf)
        out[(u, v)] = pt
    return out


def dual_circles(tri: Triangulation, tangencies: dict[Edge, SpherePoint]) -> dict[int, GenCircle]:
    """Circle through the three tangency points of each face."""
    duals = {}
    for i, f in enumerate(tri.faces):
        pts = [tangencies[e] for e in tri.face_edges(f)]
        duals[i] = circle_through(*pts)
    return duals


def _vertex_caps(tri: Triangulation, circles: dict[int, GenCircle],
                 tangencies: dict[Edge, SpherePoint]) -> dict[int, SphericalCap]:
    """Closed disks: the side of each circle away from all non-incident tangencies."""
    caps = {}
    for v, c in circles.items():
        witness, depth = None, -1.0
        for e, pt in tangencies.items():
            if v in e:
                continue
            d = chordal_to_curve(c, pt)
            if d > depth:
                witness, depth = pt, d
        caps[v] = cap_from_circle(c, exclude=witness)
    return caps


def _dual_caps(tri: Triangulation, duals: dict[int, GenCircle],
               tangencies: dict[Edge, SpherePoint]) -> dict[int, SphericalCap]:
    """Closed dual disks: the side containing the face's interstice."""
    caps = {}
    for i, f in enumerate(tri.faces):
        fe = set(tri.face_edges(f))
        witness, depth = None, -1.0
        for e, pt in tangencies.items():
            if e in fe:
                continue
            d = chordal_to_curve(duals[i], pt)
            if d > depth:
                witness, depth = pt, d
        caps[i] = cap_from_circle(duals[i], exclude=witness)
    return caps


def _choose_v_inf(tri: Triangulation) -> int:
    adj = tri.adjacency()
    best = None
    for v in range(tri.vertex_count):
        if len(adj[v]) + 1 < tri.vertex_count:  # has a non-neighbor
            if best is None or len(adj[v]) > len(adj[best]):
                best = v
    return tri.vertex_count - 1 if best is None else best


def solve_packing(tri: Triangulation, normalization: str = "triple",
                  tol: float = 1e-9,
                  fix_points: Optional[Sequence[SpherePoint]] = None,
                  fix_face: int = 0) -> CirclePacking:
    """Compute the tangency circle packing of a valid triangulation.

    normalization:
      * "triple" (default): the tangency points of face ``fix_face`` go to the
        cube roots of unity.
      * "strip": K4 only; two vertex circles become the lines Im z = 0 and
        Im z = 2 with the third at Circle(i, 1).
      * "three_points": the tangency points of ``fix_face`` go to ``fix_points``.
      * "disk": no Möbius normalization (raw unit-disk layout).
    """
    v_inf = _choose_v_inf(tri)
    t = _relax_radii(tri, v_inf)
    layout = _layout(tri, v_inf, t)

    circles: dict[int, GenCircle] = dict(layout)
    circles[v_inf] = Circle(0j, 1.0)
    tangencies = _compute_tangencies(tri, circles)

    mob = _normalizing_map(tri, circles, tangencies, normalization,
                           fix_points, fix_face)
    if mob is not None:
        circles = {v: apply_to_circle(mob, c) for v, c in circles.items()}
        tangencies = {e: mob(pt) for e, pt in tangencies.items()}

    duals = dual_circles(tri, tangencies)
    packing = CirclePacking(
        triangulation=tri,
        circles=circles,
        duals=duals,
        tangencies=tangencies,
        caps=_vertex_caps(tri, circles, tangencies),
        dual_caps=_dual_caps(tri, duals, tangencies),
        normalization=normalization,
    )
    report = verify_packing(packing, tol)
    if not report.ok:
        raise NoConvergenceError(0, math.inf)
    return packing


def _normalizing_map(tri, circles, tangencies, normalization, fix_points, fix_face):
    if normalization == "disk":
        return None
    if normalization == "strip":
        if tri.vertex_count != 4:
            raise ValueError("strip normalization is defined for K4 only")
        src = (tangencies[(0, 2)], tangencies[(0, 1)], tangencies[(1, 2)])
        dst = (0j, INF, 2j)
        for anti in (False, True):
            m = mobius_from_triples(src, dst, anti=anti)
            c3 = apply_to_circle(m, circles[3])
            if isinstance(c3, Circle) and c3.center.real > 0:
                return m
        raise NoConvergenceError(0, math.inf)
    face = tri.faces[fix_face]
    pts = [tangencies[e] for e in tri.face_edges(face)]
    if normalization == "triple":
        dst = (1 + 0j, OMEGA, OMEGA**2)
    elif normalization == "three_points":
        if fix_points is None or len(fix_points) != 3:
            raise ValueError("three_points normalization needs three target points")
        dst = tuple(fix_points)
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    return mobius_from_triples(pts, dst)


def transform_packing(p: CirclePacking, m: MobiusMap) -> CirclePacking:
    """Möbius image of a packing (tangency structure is Möbius invariant)."""
    circles = {v: apply_to_circle(m, c) for v, c in p.circles.items()}
    tangencies = {e: m(pt) for e, pt in p.tangencies.items()}
    duals = dual_circles(p.triangulation, tangencies)
    return CirclePacking(
        triangulation=p.triangulation,
        circles=circles,
        duals=duals,
        tangencies=tangencies,
        caps=_vertex_caps(p.triangulation, circles, tangencies),
        dual_caps=_dual_caps(p.triangulation, duals, tangencies),
        normalization="custom",
    )


def verify_packing(p: CirclePacking, tol: float = 1e-9,
                   ortho_tol: float = 1e-9) -> PackingReport:
    """Check tangencies, disjointness, dual membership and orthogonality."""
    rep = PackingReport()
    tri = p.triangulation
    for e in sorted(tri.edges):
        u, v = e
        try:
            kind, pt = tangency(p.circles[u], p.circles[v], tol)
        except Exception as exc:  # identical circles etc.
            rep.violations.append(f"edge {e}: {exc}")
            continue
        if kind is not Contact.TANGENT:
            rep.violations.append(f"edge {e}: circles not tangent ({kind.value})")
        elif chordal(pt, p.tangencies[e]) > 10 * tol:
            rep.violations.append(f"edge {e}: tangency point drifted")
    adj = tri.adjacency()
    for u in range(tri.vertex_count):
        for v in range(u + 1, tri.vertex_count):
            if v in adj[u]:
                continue
            if not caps_disjoint(p.caps[u], p.caps[v], tol):
                rep.violations.append(f"non-adjacent disks {u},{v} overlap")
    for i, f in enumerate(tri.faces):
        d = p.duals[i]
        for e in tri.face_edges(f):
            if chordal_to_curve(d, p.tangencies[e]) > tol:
                rep.violations.append(f"dual of face {f} misses tangency {e}")
        for v in f:
            r = orthogonality_residual(d, p.circles[v])
            if r > ortho_tol:
                rep.violations.append(
                    f"dual of face {f} not orthogonal to circle {v} (cos={r:.2e})")
    return rep


# ---------------------------------------------------------------------------
# Möbius symmetry group
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymmetryElement:
    map: MobiusMap
    permutation: tuple[int, ...]

    @property
    def orientation_preserving(self) -> bool:
        return not self.map.anti


@dataclass
class SymmetryGroup:
    elements: list[SymmetryElement]

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def orientation_preserving_order(self) -> int:
        return sum(e.orientation_preserving for e in self.elements)


def graph_automorphisms(tri: Triangulation) -> Iterable[tuple[int, ...]]:
    """All face-preserving automorphisms of the triangulation graph."""
    n = tri.vertex_count
    adj = tri.adjacency()
    degs = [len(a) for a in adj]
    face_sets = {frozenset(f) for f in tri.faces}
    order = sorted(range(n), key=lambda v: -degs[v])
    perm = [-1] * n
    used = [False] * n

    def backtrack(i: int):
        if i == len(order):
            mapped = {frozenset(perm[v] for v in f) for f in face_sets}
            if mapped == face_sets:
                yield tuple(perm)
            return
        v = order[i]
        for w in range(n):
            if used[w] or degs[w] != degs[v]:
                continue
            ok = True
            for u in adj[v]:
                if perm[u] != -1 and perm[u] not in adj[w]:
                    ok = False
                    break
            if ok:
                for u in range(n):
                    if perm[u] != -1 and (u in adj[v]) != (perm[u] in adj[w]):
                        ok = False
                        break
            if ok:
                perm[v] = w
                used[w] = True
                yield from backtrack(i + 1)
                perm[v] = -1
                used[w] = False

    yield from backtrack(0)


def mobius_symmetries(p: CirclePacking, tol: float = 1e-7) -> SymmetryGroup:
    """Möbius and anti-Möbius maps permuting the packing circles.

    For each face-preserving graph automorphism, the candidate map sends one
    face's tangency triple to the image face's triple; it is kept iff every
    circle lands on the permuted circle within tol.
    """
    tri = p.triangulation
    f0 = tri.faces[0]
    a, b, c = f0
    src = (p.tangencies[edge_key(a, b)], p.tangencies[edge_key(b, c)],
           p.tangencies[edge_key(c, a)])
    elements = []
    for perm in graph_automorphisms(tri):
        dst = (p.tangencies[edge_key(perm[a], perm[b])],
               p.tangencies[edge_key(perm[b], perm[c])],
               p.tangencies[edge_key(perm[c], perm[a])])
        for anti in (False, True):
            m = mobius_from_triples(src, dst, anti=anti)
            if all(circles_close(apply_to_circle(m, p.circles[v]),
                                 p.circles[perm[v]], tol)
                   for v in range(tri.vertex_count)):
                elements.append(SymmetryElement(m, perm))
                break
    return SymmetryGroup(elements)


# ---------------------------------------------------------------------------
# JSON round-trip
# ---------------------------------------------------------------------------


def gencircle_to_json(c: GenCircle) -> dict:
    if isinstance(c, Circle):
        return {"type": "circle", "center": [c.center.real, c.center.imag],
                "radius": c.radius}
    return {"type": "line", "normal": [c.normal.real, c.normal.imag],
            "offset": c.offset}


def gencircle_from_json(d: dict) -> GenCircle:
    if d["type"] == "circle":
        return Circle(complex(*d["center"]), float(d["radius"]))
    return Line(complex(*d["normal"]), float(d["offset"]))


def packing_to_json(p: CirclePacking) -> dict:
    return {
        "triangulation": p.triangulation.to_json_dict(),
        "normalization": p.normalization,
        "circles": {str(v): gencircle_to_json(c) for v, c in p.circles.items()},
        "duals": {str(i): gencircle_to_json(c) for i, c in p.duals.items()},
        "tangencies": {f"{u}-{v}": [pt.real, pt.imag]
                       for (u, v), pt in p.tangencies.items()},
    }


def packing_from_json(data: dict) -> CirclePacking:
    tri = Triangulation.from_json_dict(data["triangulation"])
    circles = {int(v): gencircle_from_json(c) for v, c in data["circles"].items()}
    tangencies = {}
    for key, pt in data["tangencies"].items():
        u, v = (int(x) for x in key.split("-"))
        tangencies[(u, v)] = complex(pt[0], pt[1])
    duals = {int(i): gencircle_from_json(c) for i, c in data["duals"].items()}
    return CirclePacking(
        triangulation=tri,
        circles=circles,
        duals=duals,
        tangencies=tangencies,
        caps=_vertex_caps(tri, circles, tangencies),
        dual_caps=_dual_caps(tri, duals, tangencies),
        normalization=data.get("normalization", "custom"),
    )

"""The reflection group generated by dual-circle reflections.

Words in the face-indexed generators (involutions, so words are reduced when
no letter repeats consecutively), the orbit of the packing disks with their
generations, the piecewise Nielsen map acting by the generating reflection on
each closed dual disk, Markov coding of orbits, and limit-set rendering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .errors import SingularPointError
from .geometry import (
    Circle,
    GenCircle,
    Line,
    MobiusMap,
    SpherePoint,
    SphericalCap,
    apply_to_circle,
    cap_from_circle,
    chordal,
    is_inf,
    reflection,
    sphere_lift,
)
from .packing import CirclePacking

Word = tuple[int, ...]

_BOUNDARY_TOL = 1e-12


def generators(p: CirclePacking) -> list[MobiusMap]:
    """The dual-circle reflections, indexed by face."""
    return [reflection(p.duals[i]) for i in range(len(p.triangulation.faces))]


def enumerate_words(n_letters: int, maxlen: int) -> Iterator[Word]:
    """All reduced words of length <= maxlen; count at length n is k(k-1)^{n-1}."""
    yield ()
    frontier: list[Word] = [()]
    for _ in range(maxlen):
        nxt = []
        for w in frontier:
            for g in range(n_letters):
                if w and w[0] == g:
                    continue
                nw = (g,) + w
                nxt.append(nw)
                yield nw
        frontier = nxt


def word_map(p: CirclePacking, word: Word,
             gens: Optional[list[MobiusMap]] = None) -> MobiusMap:
    """The group element R_{w0} o R_{w1} o ... o R_{wn-1}."""
    gens = gens or generators(p)
    m = MobiusMap.identity()
    for g in reversed(word):
        m = gens[g] @ m
    return m


@dataclass(frozen=True)
class OrbitDisk:
    circle: GenCircle
    generation: int
    word: Word
    cap: SphericalCap


def _cap_key(cap: SphericalCap, scale: float = 1e6):
    n = cap.normal
    d = cap.d
    # canonical sign for the (n, d) representative of the *disk* is fixed by
    # construction, so no sign folding is needed
    return tuple(int(round(x * scale)) for x in (n[0], n[1], n[2], d))


class _CapIndex:
    """Rounded-bucket index with neighbor-bucket lookup for deduplication."""

    def __init__(self, tol: float = 1e-9):
        self.tol = tol
        self.buckets: dict[tuple, list[SphericalCap]] = {}

    def probe(self, cap: SphericalCap) -> bool:
        """True if an equal cap is present (within tol); otherwise inserts it."""
        base = _cap_key(cap)
        for d0 in (-1, 0, 1):
            for d1 in (-1, 0, 1):
                for d2 in (-1, 0, 1):
                    for d3 in (-1, 0, 1):
                        key = (base[0] + d0, base[1] + d1, base[2] + d2, base[3] + d3)
                        for other in self.buckets.get(key, ()):
                            if (np.linalg.norm(cap.normal - other.normal) < self.tol
                                    and abs(cap.d - other.d) < self.tol):
                                return True
        self.buckets.setdefault(base, []).append(cap)
        return False


def _cap_interior_point(cap: SphericalCap) -> SpherePoint:
    n = cap.normal
    if n[2] > 1 - 1e-12:
        return complex(math.inf, 0.0)
    return complex(n[0], n[1]) / (1.0 - n[2])


def _cap_exterior_point(cap: SphericalCap) -> SpherePoint:
    return _cap_interior_point(cap.complement())


def orbit_disks(p: CirclePacking, maxgen: int) -> list[OrbitDisk]:
    """All images of the packing disks under words of length <= maxgen.

    Breadth-first over word length; by the decreasing-generation property the
    BFS level at which a disk first appears is its true generation.
    Deduplication keys disks by their spherical-cap data at 1e-9 resolution.
    """
    gens = generators(p)
    index = _CapIndex()
    out: list[OrbitDisk] = []
    frontier: list[OrbitDisk] = []
    for v in sorted(p.circles):
        disk = OrbitDisk(p.circles[v], 0, (), p.caps[v])
        if not index.probe(disk.cap):
            out.append(disk)
            frontier.append(disk)
    for gen in range(1, maxgen + 1):
        nxt: list[OrbitDisk] = []
        for disk in frontier:
            for g, refl in enumerate(gens):
                if disk.word and disk.word[0] == g:
                    continue
                circ = apply_to_circle(refl, disk.circle)
                ext = refl(_cap_exterior_point(disk.cap))
                cap = cap_from_circle(circ, exclude=ext)
                if index.probe(cap):
                    continue
                nd = OrbitDisk(circ, gen, (g,) + disk.word, cap)
                out.append(nd)
                nxt.append(nd)
        frontier = nxt
    return out


def singular_points(p: CirclePacking) -> list[SpherePoint]:
    """Tangency points of the dual disks = the packing's edge tangency points."""
    return [p.tangencies[e] for e in sorted(p.tangencies)]


def tile_vertex(p: CirclePacking, z: SpherePoint, tol: float = _BOUNDARY_TOL) -> int:
    """Which vertex disk (closed) contains a fundamental-tile point; -1 if none."""
    for v in sorted(p.caps):
        if p.caps[v].contains(z, tol):
            return v
    return -1


def nielsen_step(p: CirclePacking, z: SpherePoint, tol: float = _BOUNDARY_TOL):
    """One application of the Nielsen map: reflection in the first (lowest face
    id) closed dual disk containing z, or ("tile", vertex id) outside all.

    Raises SingularPointError at the dual tangency points, where two closed
    disks meet and the choice of generator is genuinely ambiguous.
    """
    for s in singular_points(p):
        if chordal(z, s) < tol:
            raise SingularPointError(z)
    for i in sorted(p.dual_caps):
        if p.dual_caps[i].contains(z, tol):
            return ("mapped", reflection(p.duals[i])(z), i)
    return ("tile", tile_vertex(p, z))


@dataclass
class OrbitClassification:
    outcome: str                 # "escaped" | "undecided"
    steps: int
    tile_component: int = -1     # vertex id of the tile component reached
    code: list[int] = field(default_factory=list)
    point: SpherePoint = 0j      # final point


def classify(p: CirclePacking, z: SpherePoint, maxiter: int = 100,
             tol: float = _BOUNDARY_TOL) -> OrbitClassification:
    """Iterate the Nielsen map until the fundamental tile is reached.

    The tile test uses open dual disks (points on a dual circle belong to the
    tile: the fundamental tile is the complement of the open disks minus the
    singular points), matching the regular-set characterization; points within
    tol of the singular set are reported undecided, as they lie in the limit
    set.  "Undecided" is one-sided: it does not prove limit-set membership.
    """
    cur = z
    code: list[int] = []
    for n in range(maxiter + 1):
        near_sing = any(chordal(cur, s) < tol for s in singular_points(p))
        if near_sing:
            return OrbitClassification("undecided", n, code=code, point=cur)
        inside = None
        for i in sorted(p.dual_caps):
            if p.dual_caps[i].signed_depth(cur) > tol:
                inside = i
                break
        if inside is None:
            return OrbitClassification("escaped", n, tile_vertex(p, cur), code, cur)
        if n == maxiter:
            break
        code.append(inside)
        cur = reflection(p.duals[inside])(cur)
    return OrbitClassification("undecided", maxiter, code=code, point=cur)


def orbit_equivalence_check(p: CirclePacking, z: SpherePoint, word: Word,
                            maxiter: int = 50, tol: float = 1e-8) -> bool:
    """Do the forward Nielsen orbits of z and word(z) merge within maxiter steps?"""
    def orbit(w0: SpherePoint) -> list[SpherePoint]:
        pts = [w0]
        cur = w0
        for _ in range(maxiter):
            try:
                out = nielsen_step(p, cur)
            except SingularPointError:
                break
            if out[0] == "tile":
                break
            cur = out[1]
            pts.append(cur)
        return pts

    o1 = orbit(z)
    o2 = orbit(word_map(p, word)(z))
    return any(chordal(a, b) < tol for a in o1 for b in o2)


def interstice_diameters(p: CirclePacking, maxgen: int) -> list[float]:
    """Max chordal diameter of the generation-n interstice triangles, n = 0..maxgen.

    A generation-n interstice is the image of a face's tangency-point triangle
    under a reduced word of length n whose last letter differs from the face.
    """
    tri = p.triangulation
    corner_triples = [
        [p.tangencies[e] for e in tri.face_edges(f)] for f in tri.faces
    ]
    gens = generators(p)
    out = []
    frontier: list[tuple[Word, MobiusMap]] = [((), MobiusMap.identity())]
    for gen in range(maxgen + 1):
        worst = 0.0
        for word, m in frontier:
            for fi, triple in enumerate(corner_triples):
                if word and word[-1] == fi:
                    continue
                pts = [m(t) for t in triple]
                d = max(chordal(pts[0], pts[1]), chordal(pts[1], pts[2]),
                        chordal(pts[0], pts[2]))
                worst = max(worst, d)
        out.append(worst)
        if gen < maxgen:
            frontier = [
                ((g,) + word, gens[g] @ m)
                for word, m in frontier
                for g in range(len(gens))
                if not (word and word[0] == g)
            ]
    return out


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _lift_grid(z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    zc = np.where(np.abs(z) > 1e150, 1e150 * np.exp(1j * np.angle(z)), z)
    m = zc.real**2 + zc.imag**2
    d = m + 1.0
    return 2.0 * zc.real / d, 2.0 * zc.imag / d, (m - 1.0) / d


def _reflect_grid(c: GenCircle, z: np.ndarray) -> np.ndarray:
    if isinstance(c, Circle):
        d = z - c.center
        far = np.abs(z) > 1e12
        d = np.where(d == 0, 1e-300, d)
        out = c.center + (c.radius * c.radius) / np.conj(d)
        return np.where(far, np.full_like(z, c.center), out)
    n = c.normal
    return 2.0 * c.offset * n - n * n * np.conj(z)


def render_limit_set(p: CirclePacking, region: tuple[float, float, float, float],
                     resolution: int, maxiter: int = 60,
                     threads: int | None = None) -> np.ndarray:
    """Per-pixel Nielsen classification: undecided pixels (the limit set) are
    black, escaped pixels take the color of their tile component (the packing
    disk reached), shaded by escape time."""
    from .raster import basin_colors, render_rows

    x0, x1, y0, y1 = region
    faces = sorted(p.dual_caps)
    dual_data = [(p.dual_caps[i], p.duals[i]) for i in faces]
    vcaps = [p.caps[v] for v in sorted(p.caps)]

    sing = [s for s in singular_points(p) if not is_inf(s)]

    def rows(j0: int, j1: int) -> np.ndarray:
        h = j1 - j0
        xs = x0 + (np.arange(resolution) + 0.5) * (x1 - x0) / resolution
        ys = y1 - (np.arange(j0, j1) + 0.5) * (y1 - y0) / resolution
        z = (xs[None, :] + 1j * ys[:, None]).astype(complex)
        alive = np.ones(z.shape, dtype=bool)
        for s in sing:  # singular pixels stay limit-set colored at every maxiter
            alive &= np.abs(z - s) > _BOUNDARY_TOL
        target = np.full(z.shape, -1, dtype=np.int16)
        time = np.zeros(z.shape, dtype=np.int32)
        for n in range(maxiter + 1):
            if not alive.any():
                break
            lx, ly, lz = _lift_grid(z)
            claimed = np.zeros(z.shape, dtype=bool)
            for cap, dual in dual_data:
                nvec = cap.normal
                depth = lx * nvec[0] + ly * nvec[1] + lz * nvec[2] - cap.d
                mask = alive & ~claimed & (depth > _BOUNDARY_TOL)
                if mask.any() and n < maxiter:
                    z[mask] = _reflect_grid(dual, z[mask])
                claimed |= mask
            escaped = alive & ~claimed
            if escaped.any():
                comp = np.full(z.shape, -1, dtype=np.int16)
                for vi, cap in enumerate(vcaps):
                    nvec = cap.normal
                    depth = lx * nvec[0] + ly * nvec[1] + lz * nvec[2] - cap.d
                    hit = escaped & (comp < 0) & (depth >= -_BOUNDARY_TOL)
                    comp[hit] = vi
                target[escaped] = comp[escaped]
                time[escaped] = n
                alive &= ~escaped
        return basin_colors(target, time, maxiter, h, resolution)

    return render_rows(rows, resolution, resolution, threads)


def undecided_fraction(p: CirclePacking, region, resolution: int, maxiter: int) -> float:
    """Fraction of pixels still undecided after maxiter Nielsen steps."""
    img = render_limit_set(p, region, resolution, maxiter, threads=1)
    black = np.all(img == 0, axis=2)
    return float(black.mean())

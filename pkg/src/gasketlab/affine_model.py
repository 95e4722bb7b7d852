"""Piecewise-affine orientation-reversing dynamics on the tetrahedron net.

The net is the union of four equilateral triangles: the outer triangle has
vertices D2=(0,0), D3=(2,0), D1=(1,sqrt3); the inner face is ABC with
A=(1/2,sqrt3/2), B=(3/2,sqrt3/2), C=(1,0).  The three outer corners are
identified pairwise along the boundary (AD1~AD2, BD1~BD3, CD2~CD3, matched by
arc length), folding the net into the tetrahedron surface.

Each of the four interstices (midpoint triangles of the faces) carries six
affine pieces: three anti-similarities of factor 2 at the corners and three
non-conformal pieces joining the central triangle to the opposite cap.  The
caps around the four vertices are absorbing: cap entry is classified, never
iterated (the conformal gluing of conj(z)^2 there is non-constructive).
The never-entering set is four affine Sierpinski gaskets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConstructionInconsistentError, InsufficientDataError

SQ3 = math.sqrt(3.0)

# net coordinates (complex)
D1 = 1.0 + SQ3 * 1j
D2 = 0.0 + 0.0j
D3 = 2.0 + 0.0j
A = 0.5 + (SQ3 / 2) * 1j
B = 1.5 + (SQ3 / 2) * 1j
C = 1.0 + 0.0j

#: the four faces with their per-face net coordinates (D unfolds to D1/D2/D3)
FACES = (
    ("ABC", {"A": A, "B": B, "C": C}),
    ("ABD", {"A": A, "B": B, "D": D1}),
    ("ACD", {"A": A, "C": C, "D": D2}),
    ("BCD", {"B": B, "C": C, "D": D3}),
)

CAP_IDS = {"A": 0, "B": 1, "C": 2, "D": 3}

#: identified boundary edge pairs: (shared vertex, endpoint on side 1, endpoint on side 2)
IDENTIFIED_EDGES = ((A, D1, D2), (B, D1, D3), (C, D2, D3))

_EDGE_TOL = 1e-12


def _mid(a: complex, b: complex) -> complex:
    return 0.5 * (a + b)


@dataclass(frozen=True)
class AffinePiece:
    """Orientation-reversing affine map z -> alpha z + beta conj(z) + gamma
    sending the source triangle onto the target triangle vertex-by-vertex."""

    src: tuple[complex, complex, complex]
    dst: tuple[complex, complex, complex]
    alpha: complex
    beta: complex
    gamma: complex
    interstice: int
    label: str

    @property
    def determinant(self) -> float:
        return abs(self.alpha) ** 2 - abs(self.beta) ** 2

    @property
    def is_similarity(self) -> bool:
        return abs(self.alpha) < 1e-12

    @property
    def similarity_factor(self) -> float:
        return abs(self.beta)

    def singular_values(self) -> tuple[float, float]:
        s, d = abs(self.alpha) + abs(self.beta), abs(abs(self.alpha) - abs(self.beta))
        return (s, d)

    def apply(self, z: complex) -> complex:
        return self.alpha * z + self.beta * z.conjugate() + self.gamma

    def apply_grid(self, z: np.ndarray) -> np.ndarray:
        return self.alpha * z + self.beta * np.conj(z) + self.gamma

    def contains(self, z: complex, tol: float = 1e-12) -> bool:
        a, b, c = self.src
        area = ((b - a).conjugate() * (c - a)).imag
        s = 1.0 if area > 0 else -1.0
        for p, q in ((a, b), (b, c), (c, a)):
            if s * ((q - p).conjugate() * (z - p)).imag < -tol:
                return False
        return True


def _solve_piece(src, dst, interstice, label) -> AffinePiece:
    m = np.array([[s, np.conj(s), 1.0] for s in src], dtype=complex)
    coef = np.linalg.solve(m, np.array(dst, dtype=complex))
    return AffinePiece(tuple(src), tuple(dst), complex(coef[0]), complex(coef[1]),
                       complex(coef[2]), interstice, label)


def _face_pieces(face_index: int, labels: str, coords: dict) -> list[AffinePiece]:
    names = sorted(coords)
    mids = {frozenset((u, v)): _mid(coords[u], coords[v])
            for u in names for v in names if u < v}
    center = sum(mids.values()) / 3.0
    pieces = []
    for u, v in ((names[0], names[1]), (names[0], names[2]), (names[1], names[2])):
        w = next(x for x in names if x not in (u, v))
        # the other face containing edge {u,v} contributes the targets
        other = next((lbl, crd) for lbl, crd in FACES
                     if u in crd and v in crd and lbl != labels)
        olbl, ocrd = other
        x = next(n for n in ocrd if n not in (u, v))
        p = mids[frozenset((u, v))]
        k = _mid(p, mids[frozenset((u, w))])
        ell = _mid(p, mids[frozenset((v, w))])
        p_t = _mid(ocrd[u], ocrd[v])
        ku_t = _mid(ocrd[u], ocrd[x])
        lv_t = _mid(ocrd[v], ocrd[x])
        pieces.append(_solve_piece((p, k, ell), (p_t, ku_t, lv_t),
                                   face_index, f"{labels}:{u}{v}:corner"))
        pieces.append(_solve_piece((k, ell, center), (ku_t, lv_t, ocrd[x]),
                                   face_index, f"{labels}:{u}{v}:central"))
    return pieces


def _cap_polygons() -> list[tuple[str, tuple[complex, ...]]]:
    j1, j2 = _mid(A, D1), _mid(A, D2)
    h1, h2 = _mid(B, D1), _mid(B, D3)
    i1, i2 = _mid(C, D2), _mid(C, D3)
    e, f, g = _mid(A, B), _mid(B, C), _mid(A, C)
    return [
        ("A", (j2, j1, e, g)),
        ("B", (h1, h2, f, e)),
        ("C", (i1, g, f, i2)),
        ("D", (D1, h1, j1)),
        ("D", (D2, j2, i1)),
        ("D", (D3, i2, h2)),
    ]


def _poly_contains(poly: tuple[complex, ...], z: complex, tol: float) -> bool:
    # caps are convex polygons, so a uniform half-plane sign test suffices
    n = len(poly)
    s = 1.0 if ((poly[1] - poly[0]).conjugate() * (poly[2] - poly[0])).imag > 0 else -1.0
    return all(
        s * ((poly[(i + 1) % n] - poly[i]).conjugate() * (z - poly[i])).imag >= -tol
        for i in range(n)
    )


@dataclass(frozen=True)
class AffineModel:
    pieces: tuple[AffinePiece, ...]
    caps: tuple[tuple[str, tuple[complex, ...]], ...]

    def cap_at(self, z: complex, tol: float = 1e-12) -> Optional[int]:
        for name, poly in self.caps:
            if _poly_contains(poly, z, tol):
                return CAP_IDS[name]
        return None

    def piece_at(self, z: complex, tol: float = 1e-12) -> Optional[AffinePiece]:
        for piece in self.pieces:
            if piece.contains(z, tol):
                return piece
        return None


def on_segment(z: complex, a: complex, b: complex, tol: float = _EDGE_TOL) -> bool:
    d = b - a
    if abs((d.conjugate() * (z - a)).imag) > tol * abs(d):
        return False
    t = (d.conjugate() * (z - a)).real / abs(d) ** 2
    return -tol <= t <= 1 + tol


def twin_point(z: complex, tol: float = _EDGE_TOL) -> Optional[complex]:
    """The other net representative of a point on an identified boundary edge."""
    for v, e1, e2 in IDENTIFIED_EDGES:
        if on_segment(z, v, e1, tol):
            return v + abs(z - v) * (e2 - v)  # |e2 - v| = 1
        if on_segment(z, v, e2, tol):
            return v + abs(z - v) * (e1 - v)
    return None


def canonical_point(z: complex, tol: float = _EDGE_TOL) -> complex:
    """Canonical representative: the lexicographically smaller of the two."""
    t = twin_point(z, tol)
    if t is None:
        return z
    return min(z, t, key=lambda w: (round(w.real, 12), round(w.imag, 12)))


def same_surface_point(z: complex, w: complex, tol: float = 1e-9) -> bool:
    cz, cw = canonical_point(z, max(tol, _EDGE_TOL)), canonical_point(w, max(tol, _EDGE_TOL))
    return abs(cz - cw) <= tol


def build_model() -> AffineModel:
    """Construct all 24 affine pieces (six per interstice) and the cap polygons.

    Raises ConstructionInconsistentError if adjacent pieces disagree on a
    shared edge by more than 1e-12.
    """
    pieces: list[AffinePiece] = []
    for idx, (labels, coords) in enumerate(FACES):
        pieces.extend(_face_pieces(idx, labels, coords))
    model = AffineModel(tuple(pieces), tuple(_cap_polygons()))
    _check_shared_edges(model)
    _check_orientation(model)
    return model


def _check_shared_edges(model: AffineModel) -> None:
    by_face: dict[int, list[AffinePiece]] = {}
    for p in model.pieces:
        by_face.setdefault(p.interstice, []).append(p)
    for group in by_face.values():
        for i, p in enumerate(group):
            for q in group[i + 1:]:
                shared = [v for v in p.src if any(abs(v - w) < 1e-13 for w in q.src)]
                if len(shared) != 2:
                    continue
                a, b = shared
                for t in (0.2, 0.5, 0.8):
                    z = a + t * (b - a)
                    # images may land on the two identified outer edges
                    if not same_surface_point(p.apply(z), q.apply(z), tol=1e-12):
                        raise ConstructionInconsistentError(
                            f"pieces {p.label} and {q.label} disagree at {z}")


def _check_orientation(model: AffineModel) -> None:
    for p in model.pieces:
        if p.determinant >= 0:
            raise ConstructionInconsistentError(f"piece {p.label} not orientation reversing")
        if p.label.endswith("corner"):
            if not p.is_similarity or abs(p.similarity_factor - 2.0) > 1e-12:
                raise ConstructionInconsistentError(f"corner piece {p.label} not a 2-similarity")


_default_model: Optional[AffineModel] = None


def default_model() -> AffineModel:
    global _default_model
    if _default_model is None:
        _default_model = build_model()
    return _default_model


def step(model: AffineModel, z: complex):
    """One iteration: ("mapped", image) or ("cap", cap id).

    Shared piece boundaries go to the lowest-index piece; points on the
    identified outer edges are resolved through their twin representative.
    """
    candidates = [z]
    t = twin_point(z)
    if t is not None:
        candidates.append(t)
    for w in candidates:
        piece = model.piece_at(w)
        if piece is not None:
            return ("mapped", piece.apply(w))
    for w in candidates:
        cap = model.cap_at(w)
        if cap is not None:
            return ("cap", cap)
    raise ValueError(f"point {z} outside the net")


def classify_affine(model: AffineModel, z: complex, maxiter: int):
    """("fatou", cap id, entry time) or ("julia",) when no cap is entered."""
    w = z
    for n in range(maxiter + 1):
        out = step(model, w)
        if out[0] == "cap":
            return ("fatou", out[1], n)
        if n == maxiter:
            break
        w = out[1]
    return ("julia",)


# ---------------------------------------------------------------------------
# vectorized grid classification and box-counting dimension
# ---------------------------------------------------------------------------


def julia_candidate_grid(model: AffineModel, resolution: int, maxiter: int,
                         chunk: int = 1 << 18) -> np.ndarray:
    """Boolean (resolution x resolution) grid over [0,2]x[0,sqrt3]: True where the
    pixel-center orbit never enters a cap within maxiter steps."""
    xs = (np.arange(resolution) + 0.5) * (2.0 / resolution)
    ys = (np.arange(resolution) + 0.5) * (SQ3 / resolution)
    out = np.zeros((resolution, resolution), dtype=bool)
    for j0 in range(0, resolution, max(1, chunk // resolution)):
        j1 = min(resolution, j0 + max(1, chunk // resolution))
        z = (xs[None, :] + 1j * ys[j0:j1, None]).ravel()
        out[j0:j1] = _classify_points(model, z, maxiter).reshape(j1 - j0, resolution)
    return out


def _classify_points(model: AffineModel, z: np.ndarray, maxiter: int) -> np.ndarray:
    """True where the orbit stays in the interstice system for maxiter steps.

    The membership pass runs maxiter+1 times (position 0 counts), with
    maxiter mapping steps in between.
    """
    alive = np.ones(z.shape, dtype=bool)
    cur = z.copy()
    for it in range(maxiter + 1):
        if not alive.any():
            break
        w = cur[alive]
        nxt = np.empty_like(w)
        placed = np.zeros(w.shape, dtype=bool)
        for piece in model.pieces:
            a, b, c = piece.src
            area = ((b - a).conjugate() * (c - a)).imag
            s = 1.0 if area > 0 else -1.0
            m = ~placed
            for p, q in ((a, b), (b, c), (c, a)):
                if not m.any():
                    break
                m &= s * ((q - p).conjugate() * (w - p)).imag >= -1e-12
            if m.any():
                nxt[m] = piece.apply_grid(w[m])
                placed |= m
        idx = np.flatnonzero(alive)
        alive[idx[~placed]] = False
        if it < maxiter:
            cur[idx[placed]] = nxt[placed]
    return alive


def dimension_estimate(maxiter: int = 24, resolutions: tuple[int, ...] = (256, 512, 1024, 2048),
                       model: Optional[AffineModel] = None,
                       region_mask=None) -> float:
    """Box-counting slope of the Julia candidate set over the given box sizes.

    Pixel-center sampling only resolves the candidate set down to the pixel
    scale, so the escape depth used at each resolution is capped at
    log2(resolution): iterating deeper thins the sample below pixel density
    and biases the count low, while ``maxiter`` smaller than the cap leaves a
    thickened (overestimated) set, as in the coarse sanity check.
    """
    if len(resolutions) < 3:
        raise InsufficientDataError("need at least 3 resolutions")
    model = model or default_model()
    logs_n, logs_e = [], []
    for res in sorted(resolutions):
        depth = min(maxiter, max(1, int(math.log2(res)) - 1))
        grid = julia_candidate_grid(model, res, depth)
        if region_mask is not None:
            grid = grid & region_mask(res)
        count = int(grid.sum())
        if count == 0:
            raise InsufficientDataError("empty candidate set")
        logs_n.append(math.log(count))
        logs_e.append(math.log(res / 2.0))  # boxes of side 2/res
    slope, _ = np.polyfit(logs_e, logs_n, 1)
    return float(slope)

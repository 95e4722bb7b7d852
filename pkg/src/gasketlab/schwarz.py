"""Schwarz reflection dynamics for the deltoid and its inscribed circle.

The rational map R(z) = z + 1/(2 z^2) is univalent outside the closed unit
disk; the image domain is the exterior of a deltoid whose Schwarz reflection
is sigma1 = R o (reflection in the unit circle) o R^{-1}.  The largest disk
inscribed in it and centered at 0 has radius 1/2 (the tangency points
R(-omega^k) = -omega^k/2 all have modulus 1/2); its Schwarz reflection sigma2
is inversion in |z| = 1/2.  The combined map F acts as sigma1 on the closed
deltoid-exterior domain and sigma2 on the closed disk; the plane splits into
the basin of infinity, the tiling set (three invariant components plus
transients) and their common boundary, the limit set.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NotInDomainError, SingularPointError
from .geometry import INF, SpherePoint, is_inf

OMEGA = cmath.exp(2j * math.pi / 3)

#: the three 3/2-cusps of the deltoid: R(omega^k)
CUSPS = tuple(1.5 * OMEGA**k for k in range(3))

#: tangency points of the deltoid and the inscribed circle: R(-omega^k)
TANGENCY_POINTS = tuple(-0.5 * OMEGA**k for k in range(3))

#: the six singular points of the tile boundary
SINGULAR_POINTS = CUSPS + TANGENCY_POINTS

DISK2_RADIUS = 0.5

_BOUNDARY_GUARD = 1e-9
_SINGULAR_TOL = 1e-9
_ESCAPE_CERTAIN = 1e8


def eval_R(z: SpherePoint) -> SpherePoint:
    """R(z) = z + 1/(2 z^2); R(0) = R(inf) = inf."""
    if is_inf(z):
        return INF
    if z == 0:
        return INF
    return z + 1.0 / (2.0 * z * z)


def _cubic_roots(w: complex) -> np.ndarray:
    """Roots of 2 z^3 - 2 w z^2 + 1 = 0 (the R-preimage equation R(z) = w)."""
    return np.roots([2.0, -2.0 * w, 0.0, 1.0])


def invert_R_exterior(w: SpherePoint, guard: float = _BOUNDARY_GUARD) -> complex:
    """The unique preimage of w under R with |z| >= 1.

    Existence of such a root is the membership test for the closed
    deltoid-exterior domain; raises NotInDomainError otherwise.  Double roots
    at the cusps resolve toward modulus 1.
    """
    if is_inf(w):
        return INF
    roots = _cubic_roots(w)
    z = roots[np.argmax(np.abs(roots))]
    if abs(z) < 1.0 - guard:
        raise NotInDomainError(f"{w} has no R-preimage outside the unit disk")
    return complex(z)


def in_deltoid_domain(w: SpherePoint, guard: float = _BOUNDARY_GUARD) -> bool:
    try:
        invert_R_exterior(w, guard)
        return True
    except NotInDomainError:
        return False


def sigma1(w: SpherePoint) -> SpherePoint:
    """Schwarz reflection of the deltoid-exterior domain; fixes its boundary."""
    if is_inf(w):
        return INF
    z = invert_R_exterior(w)
    return eval_R(1.0 / z.conjugate())


def sigma2(w: SpherePoint) -> SpherePoint:
    """Reflection in the inscribed circle |z| = 1/2: w -> 1/(4 conj(w))."""
    if is_inf(w):
        return 0j
    if w == 0:
        return INF
    return 1.0 / (4.0 * w.conjugate())


def tile_component(w: complex) -> int:
    """Which of the three tile components the direction of w points into.

    Components are separated by the tangency directions at angles pi, +-pi/3:
    1 = right (cusp at angle 0), 2 = upper left, 3 = lower left.
    """
    a = cmath.phase(w)
    if -math.pi / 3 <= a < math.pi / 3:
        return 1
    if math.pi / 3 <= a < math.pi:
        return 2
    return 3


def near_singular(w: SpherePoint, tol: float = _SINGULAR_TOL) -> bool:
    return (not is_inf(w)) and any(abs(w - s) < tol for s in SINGULAR_POINTS)


def schwarz_step(w: SpherePoint, tol: float = _SINGULAR_TOL):
    """One application of F: ("mapped", F(w)) or ("tile", component).

    Membership in the deltoid domain is the exterior-root criterion; the disk
    is |w| <= 1/2.  The closed domains overlap only at the three tangency
    points, which (with the cusps) form the singular set.
    """
    if near_singular(w, tol):
        raise SingularPointError(w)
    if is_inf(w) or in_deltoid_domain(w):
        return ("mapped", sigma1(w))
    if abs(w) <= DISK2_RADIUS + _BOUNDARY_GUARD:
        return ("mapped", sigma2(w))
    return ("tile", tile_component(w))


@dataclass(frozen=True)
class SchwarzOutcome:
    kind: str          # "basin" | "tiling" | "undecided"
    time: int
    component: Optional[object] = None  # 1|2|3 or "transient" for tiling


def classify_schwarz(w: SpherePoint, maxiter: int = 100,
                     escape_radius: float = 10.0) -> SchwarzOutcome:
    """Iterate F.  Basin verdicts need |w| > escape_radius plus two consecutive
    modulus increases (sigma1 grows like |w|^2/2 far out, so growth persists);
    tile arrival reports the component reached, labeled "transient" when the
    orbit wandered outside that component's sector on the way (a
    visualization heuristic; only the arrival fact is load-bearing)."""
    m1 = m2 = math.inf
    cur = w
    sector: Optional[int] = None if is_inf(w) else tile_component(w)
    wandered = False
    for n in range(maxiter + 1):
        if is_inf(cur):
            return SchwarzOutcome("basin", n)
        m = abs(cur)
        if m > _ESCAPE_CERTAIN or (m > escape_radius and m > m1 > m2):
            return SchwarzOutcome("basin", n)
        try:
            out = schwarz_step(cur)
        except SingularPointError:
            return SchwarzOutcome("undecided", n)
        if out[0] == "tile":
            comp = out[1]
            label = comp if (not wandered and comp == sector) else "transient"
            return SchwarzOutcome("tiling", n, label)
        if m > 1.6 or (sector is not None and tile_component(cur) != sector):
            wandered = True
        m2, m1 = m1, m
        cur = out[1]
    return SchwarzOutcome("undecided", maxiter)


def preimages_under_sigma1(target: SpherePoint, guard: float = _BOUNDARY_GUARD) -> list[complex]:
    """All w in the closed deltoid domain with sigma1(w) = target.

    Through the uniformization, solutions correspond to roots u of the same
    preimage cubic with |u| <= 1, via w = R(1/conj(u)); there are d - 1 = 2
    of them for targets inside the domain and d = 3 for targets in the tile.
    """
    if is_inf(target):
        raise NotInDomainError("infinity is the critical value itself")
    roots = _cubic_roots(target)
    out = []
    for u in roots:
        if abs(u) <= 1.0 + guard:
            w = eval_R(1.0 / complex(u).conjugate())
            out.append(complex(w))
    return out


def deltoid_boundary(theta: float) -> complex:
    """Boundary parametrization R(e^{i theta}); cusps at theta = 2 pi k / 3."""
    return complex(eval_R(cmath.exp(1j * theta)))


# ---------------------------------------------------------------------------
# vectorized rendering
# ---------------------------------------------------------------------------


def _exterior_root_modulus_grid(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Max-modulus root of the preimage cubic, per element (Cardano)."""
    p = -w  # monic z^3 + p z^2 + 0 z + 1/2
    P = -w * w / 3.0
    Q = -2.0 * w**3 / 27.0 + 0.5
    S = np.sqrt(0.25 * Q * Q + P**3 / 27.0 + 0j)
    t1, t2 = -0.5 * Q + S, -0.5 * Q - S
    u3 = np.where(np.abs(t1) >= np.abs(t2), t1, t2)
    u = u3 ** (1.0 / 3.0)
    u = np.where(u == 0, 1e-150, u)
    best = np.full(w.shape, -np.inf)
    zbest = np.zeros_like(w)
    for k in range(3):
        uk = u * OMEGA**k
        zk = uk - P / (3.0 * uk) - p / 3.0
        m = np.abs(zk)
        take = m > best
        best = np.where(take, m, best)
        zbest = np.where(take, zk, zbest)
    return zbest, best


def _classify_rows(region: tuple[float, float, float, float], resolution: int,
                   maxiter: int, j0: int, j1: int):
    """Vectorized classification of pixel rows [j0, j1): returns (escaped, comp, time)."""
    x0, x1, y0, y1 = region
    xs = x0 + (np.arange(resolution) + 0.5) * (x1 - x0) / resolution
    ys = y1 - (np.arange(j0, j1) + 0.5) * (y1 - y0) / resolution
    w = (xs[None, :] + 1j * ys[:, None]).astype(complex)
    alive = np.ones(w.shape, dtype=bool)
    escaped = np.zeros(w.shape, dtype=bool)
    comp = np.full(w.shape, -1, dtype=np.int16)
    time = np.zeros(w.shape, dtype=np.int32)
    m1 = np.full(w.shape, np.inf)
    m2 = np.full(w.shape, np.inf)
    for n in range(maxiter + 1):
        if not alive.any():
            break
        m = np.abs(w)
        esc = alive & ((m > _ESCAPE_CERTAIN) | ((m > 10.0) & (m > m1) & (m1 > m2)))
        escaped |= esc
        time[esc] = n
        alive &= ~esc
        sing = np.zeros(w.shape, dtype=bool)
        for s in SINGULAR_POINTS:
            sing |= alive & (np.abs(w - s) < _SINGULAR_TOL)
        alive &= ~sing  # stays "undecided": limit-set colored
        if n == maxiter:
            break
        zext, mod = _exterior_root_modulus_grid(w)
        d1 = alive & (mod >= 1.0 - _BOUNDARY_GUARD)
        d2 = alive & ~d1 & (m <= DISK2_RADIUS + _BOUNDARY_GUARD)
        tile = alive & ~d1 & ~d2
        if tile.any():
            ang = np.angle(w[tile])
            c = np.where((-math.pi / 3 <= ang) & (ang < math.pi / 3), 1,
                         np.where((math.pi / 3 <= ang) & (ang < math.pi), 2, 3))
            comp[tile] = c
            time[tile] = n
            alive &= ~tile
        m2, m1 = m1, np.where(alive, m, m1)
        if d1.any():
            zr = np.conj(zext[d1])
            zr[zr == 0] = 1e-150
            iz = 1.0 / zr
            w[d1] = iz + 1.0 / (2.0 * iz * iz)
        if d2.any():
            wd = w[d2]
            wd[wd == 0] = 1e-150
            w[d2] = 1.0 / (4.0 * np.conj(wd))
        w[~np.isfinite(w)] = _ESCAPE_CERTAIN * 2.0
    return escaped, comp, time


def schwarz_class_grid(region: tuple[float, float, float, float], resolution: int,
                       maxiter: int = 60) -> np.ndarray:
    """Pixel classes over the region: -1 undecided (limit set), 0 basin of
    infinity, 1..3 the tiling-set components by sector."""
    escaped, comp, _ = _classify_rows(region, resolution, maxiter, 0, resolution)
    out = np.full(escaped.shape, -1, dtype=np.int8)
    out[escaped] = 0
    tiled = (~escaped) & (comp > 0)
    out[tiled] = comp[tiled].astype(np.int8)
    return out


def render_schwarz(region: tuple[float, float, float, float], resolution: int,
                   maxiter: int = 60, threads: int | None = None) -> np.ndarray:
    """Per-pixel classification image: basin of infinity shaded yellow, tiling
    components in per-component colors, the limit set (undecided) black."""
    from .raster import render_rows, two_class_colors

    def rows(j0: int, j1: int) -> np.ndarray:
        escaped, comp, time = _classify_rows(region, resolution, maxiter, j0, j1)
        return two_class_colors(escaped, comp, time, maxiter, j1 - j0, resolution)

    return render_rows(rows, resolution, resolution, threads)

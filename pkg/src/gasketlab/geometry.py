"""Numerical geometry on the Riemann sphere.

Points are complex numbers, with the point at infinity represented by the
sentinel ``INF`` (any non-finite complex is treated as infinity).  Generalized
circles come in two variants, ``Circle`` and ``Line`` (a line is a circle
through infinity), and Möbius / anti-Möbius maps act on both points and
generalized circles.  All tolerances are parameters; comparisons default to
the chordal metric with tolerance 1e-9.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DegenerateTripleError, IdenticalCirclesError

SpherePoint = complex

INF: SpherePoint = complex(math.inf, 0.0)

DEFAULT_TOL = 1e-9
_COLLINEAR_EPS = 1e-13
_AFFINE_EPS = 1e-13


def is_inf(z: SpherePoint) -> bool:
    """True when ``z`` represents the point at infinity."""
    return not (math.isfinite(z.real) and math.isfinite(z.imag))


def sphere_lift(z: SpherePoint) -> np.ndarray:
    """Stereographic lift onto the unit sphere; chordal distance is Euclidean there."""
    if is_inf(z):
        return np.array([0.0, 0.0, 1.0])
    m = z.real * z.real + z.imag * z.imag
    if m > 1e300:
        return np.array([0.0, 0.0, 1.0])
    return np.array([2.0 * z.real, 2.0 * z.imag, m - 1.0]) / (m + 1.0)


def chordal(z: SpherePoint, w: SpherePoint) -> float:
    """Chordal (spherical) distance; always in [0, 2]."""
    zi, wi = is_inf(z), is_inf(w)
    if zi and wi:
        return 0.0
    if zi or wi:
        f = w if zi else z
        return 2.0 / math.sqrt(1.0 + abs(f) ** 2)
    num = 2.0 * abs(z - w)
    if not math.isfinite(num):  # overflow in |z - w| for huge finite inputs
        return float(np.linalg.norm(sphere_lift(z) - sphere_lift(w)))
    return num / math.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))


@dataclass(frozen=True)
class Circle:
    """Euclidean circle with positive radius."""

    center: complex
    radius: float

    def __post_init__(self):
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ValueError(f"circle radius must be positive and finite: {self.radius}")

    def point_at(self, angle: float) -> complex:
        return self.center + self.radius * cmath.exp(1j * angle)


@dataclass(frozen=True)
class Line:
    """Line {z : Re(conj(normal) * z) = offset} with |normal| = 1."""

    normal: complex
    offset: float

    def __post_init__(self):
        if abs(abs(self.normal) - 1.0) > 1e-12:
            raise ValueError(f"line normal must be unit length: {self.normal}")

    def foot(self) -> complex:
        """Point of the line closest to the origin."""
        return self.offset * self.normal

    def direction(self) -> complex:
        return 1j * self.normal


GenCircle = Union[Circle, Line]


def canonical_line(normal: complex, offset: float) -> Line:
    """Normalize a line's (normal, offset) representative: unit normal, canonical sign."""
    n = normal / abs(normal)
    if offset < 0 or (offset == 0 and (n.real < 0 or (n.real == 0 and n.imag < 0))):
        n, offset = -n, -offset
    return Line(n, offset)


def nearest_on_curve(c: GenCircle, z: SpherePoint) -> SpherePoint:
    """Point of the generalized circle nearest to ``z`` (chordally, for infinite z)."""
    if isinstance(c, Line):
        if is_inf(z):
            return INF
        s = (z.conjugate() * c.normal).real - c.offset
        return z - s * c.normal
    if is_inf(z):
        if c.center == 0:
            return complex(c.radius, 0.0)
        return c.center * (1.0 + c.radius / abs(c.center))
    d = z - c.center
    if d == 0:
        return c.center + c.radius
    return c.center + c.radius * d / abs(d)


def chordal_to_curve(c: GenCircle, z: SpherePoint) -> float:
    """Chordal distance from ``z`` to the curve (0 if z == INF and c is a line)."""
    if isinstance(c, Line) and is_inf(z):
        return 0.0
    return chordal(z, nearest_on_curve(c, z))


def sample_points(c: GenCircle, n: int = 3) -> list[SpherePoint]:
    """``n`` well-spread points on the curve (finite ones for a line)."""
    if isinstance(c, Circle):
        return [c.point_at(0.1 + 2.0 * math.pi * k / n) for k in range(n)]
    p0, u = c.foot(), c.direction()
    return [p0 + (k - (n - 1) / 2.0) * u for k in range(n)]


# ---------------------------------------------------------------------------
# Möbius and anti-Möbius maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MobiusMap:
    """z -> (a z + b)/(c z + d), with z replaced by conj(z) first when ``anti``.

    Coefficients are normalized to determinant 1, which keeps long composition
    chains numerically stable.
    """

    a: complex
    b: complex
    c: complex
    d: complex
    anti: bool = False

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if det == 0:
            raise ValueError("singular Möbius matrix")
        s = cmath.sqrt(det)
        object.__setattr__(self, "a", self.a / s)
        object.__setattr__(self, "b", self.b / s)
        object.__setattr__(self, "c", self.c / s)
        object.__setattr__(self, "d", self.d / s)

    def __call__(self, z: SpherePoint) -> SpherePoint:
        w = z.conjugate() if (self.anti and not is_inf(z)) else z
        if is_inf(w):
            return INF if self.c == 0 else self.a / self.c
        den = self.c * w + self.d
        if den == 0:
            return INF
        return (self.a * w + self.b) / den

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """self after other (``(self @ other)(z) == self(other(z))``)."""
        a2, b2, c2, d2 = other.a, other.b, other.c, other.d
        if self.anti:
            a2, b2, c2, d2 = (a2.conjugate(), b2.conjugate(),
                              c2.conjugate(), d2.conjugate())
        return MobiusMap(
            self.a * a2 + self.b * c2,
            self.a * b2 + self.b * d2,
            self.c * a2 + self.d * c2,
            self.c * b2 + self.d * d2,
            anti=self.anti != other.anti,
        )

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        return self.compose(other)

    def inverse(self) -> "MobiusMap":
        a, b, c, d = self.d, -self.b, -self.c, self.a
        if self.anti:
            a, b, c, d = (a.conjugate(), b.conjugate(), c.conjugate(), d.conjugate())
        return MobiusMap(a, b, c, d, anti=self.anti)

    @staticmethod
    def identity() -> "MobiusMap":
        return MobiusMap(1, 0, 0, 1)


def reflect_in_circle(c: GenCircle, z: SpherePoint) -> SpherePoint:
    """Inversion in a circle / mirror reflection in a line.  An involution."""
    if isinstance(c, Circle):
        if is_inf(z):
            return c.center
        d = z - c.center
        if d == 0:
            return INF
        return c.center + (c.radius * c.radius) / d.conjugate()
    if is_inf(z):
        return INF
    n = c.normal
    return 2.0 * c.offset * n - n * n * z.conjugate()


def reflection(c: GenCircle) -> MobiusMap:
    """The reflection in ``c`` as an anti-Möbius map."""
    if isinstance(c, Circle):
        cc = c.center
        return MobiusMap(cc, c.radius**2 - abs(cc) ** 2, 1, -cc.conjugate(), anti=True)
    n = c.normal
    return MobiusMap(-n * n, 2.0 * c.offset * n, 0, 1, anti=True)


def _to_zero_one_inf(z1: SpherePoint, z2: SpherePoint, z3: SpherePoint) -> MobiusMap:
    """Möbius map sending (z1, z2, z3) to (0, 1, INF)."""
    if is_inf(z1):
        return MobiusMap(0, z2 - z3, 1, -z3)
    if is_inf(z2):
        return MobiusMap(1, -z1, 1, -z3)
    if is_inf(z3):
        return MobiusMap(1, -z1, 0, z2 - z1)
    return MobiusMap(z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1))


def _check_distinct(points: Sequence[SpherePoint], tol: float) -> None:
    for i in range(3):
        for j in range(i + 1, 3):
            if chordal(points[i], points[j]) < tol:
                raise DegenerateTripleError(
                    f"points {points[i]!r} and {points[j]!r} coincide within {tol}"
                )


def mobius_from_triples(
    src: Sequence[SpherePoint],
    dst: Sequence[SpherePoint],
    anti: bool = False,
    tol: float = 1e-13,
) -> MobiusMap:
    """The unique (anti-)Möbius map with src[k] -> dst[k]."""
    _check_distinct(src, tol)
    _check_distinct(dst, tol)
    if anti:
        src = [INF if is_inf(p) else p.conjugate() for p in src]
    s = _to_zero_one_inf(*src)
    t = _to_zero_one_inf(*dst)
    m = t.inverse().compose(s)
    if anti:
        m = MobiusMap(m.a, m.b, m.c, m.d, anti=True)
    return m


# --- images of generalized circles ----------------------------------------


def _affine_image(alpha: complex, beta: complex, c: GenCircle) -> GenCircle:
    if isinstance(c, Circle):
        return Circle(alpha * c.center + beta, abs(alpha) * c.radius)
    n, t = c.normal, c.offset
    n_new = n * alpha / abs(alpha)
    t_new = abs(alpha) * t + ((n.conjugate() * beta / alpha).real) * abs(alpha)
    return canonical_line(n_new, t_new)


def _inversion_image(c: GenCircle) -> GenCircle:
    """Image of a generalized circle under z -> 1/z."""
    if isinstance(c, Circle):
        power = abs(c.center) ** 2 - c.radius**2  # power of the origin
        if abs(power) < _AFFINE_EPS * (abs(c.center) ** 2 + c.radius**2):
            cc = c.center
            return canonical_line(cc.conjugate() / abs(cc), 1.0 / (2.0 * abs(cc)))
        return Circle(c.center.conjugate() / power, c.radius / abs(power))
    n, t = c.normal, c.offset
    if abs(t) < _AFFINE_EPS:
        return canonical_line(n.conjugate(), 0.0)
    return Circle(n.conjugate() / (2.0 * t), 1.0 / (2.0 * abs(t)))


def _conjugate_circle(c: GenCircle) -> GenCircle:
    if isinstance(c, Circle):
        return Circle(c.center.conjugate(), c.radius)
    return canonical_line(c.normal.conjugate(), c.offset)


def apply_to_circle(m: MobiusMap, c: GenCircle) -> GenCircle:
    """Image of a generalized circle under an (anti-)Möbius map.

    Computed analytically (affine + inversion decomposition) rather than by
    three-point interpolation, so images of huge circles stay accurate.
    """
    if m.anti:
        c = _conjugate_circle(c)
    scale = max(abs(m.a), abs(m.b), abs(m.d), 1e-300)
    if abs(m.c) < _AFFINE_EPS * scale:
        return _affine_image(m.a / m.d, m.b / m.d, c)
    c1 = _affine_image(m.c, m.d, c)
    c2 = _inversion_image(c1)
    mu = (m.b * m.c - m.a * m.d) / m.c
    return _affine_image(mu, m.a / m.c, c2)


def circle_through(p: SpherePoint, q: SpherePoint, r: SpherePoint,
                   tol: float = 1e-13) -> GenCircle:
    """The unique generalized circle through three distinct points."""
    _check_distinct((p, q, r), tol)
    finite = [z for z in (p, q, r) if not is_inf(z)]
    if len(finite) == 2:
        u, v = finite
        d = (v - u) / abs(v - u)
        n = 1j * d
        return canonical_line(n, (n.conjugate() * u).real)
    d1, d2 = q - p, r - p
    cross = (d1.conjugate() * d2).imag
    scale = max(abs(d1), abs(d2))
    if abs(cross) < _COLLINEAR_EPS * scale * scale:
        d = d1 / abs(d1)
        n = 1j * d
        return canonical_line(n, (n.conjugate() * p).real)
    # circumcenter from the two perpendicular bisectors
    a1, a2 = abs(d1) ** 2, abs(d2) ** 2
    cx = (d2.imag * a1 - d1.imag * a2) / (2.0 * cross)
    cy = (d1.real * a2 - d2.real * a1) / (2.0 * cross)
    center = p + complex(cx, cy)
    return Circle(center, abs(center - p))


# --- contact classification -------------------------------------------------


class Contact(Enum):
    DISJOINT = "disjoint"
    TANGENT = "tangent"
    INTERSECTING = "intersecting"


def tangency(c1: GenCircle, c2: GenCircle,
             tol: float = DEFAULT_TOL) -> tuple[Contact, Optional[SpherePoint]]:
    """Classify the contact of two generalized circles.

    Returns ``(Contact.TANGENT, point)`` with the tangency point (possibly
    INF for parallel lines), or ``(Contact.DISJOINT/INTERSECTING, None)``.
    """
    if isinstance(c1, Line) and isinstance(c2, Line):
        cross = (c1.normal.conjugate() * c2.normal).imag
        if abs(cross) < tol:
            same_dir = (c1.normal.conjugate() * c2.normal).real > 0
            off2 = c2.offset if same_dir else -c2.offset
            if abs(c1.offset - off2) < tol:
                raise IdenticalCirclesError("coincident lines")
            return Contact.TANGENT, INF
        return Contact.INTERSECTING, None
    if isinstance(c1, Line) or isinstance(c2, Line):
        line, circ = (c1, c2) if isinstance(c1, Line) else (c2, c1)
        s = (line.normal.conjugate() * circ.center).real - line.offset
        if abs(abs(s) - circ.radius) < tol:
            return Contact.TANGENT, circ.center - s * line.normal
        if abs(s) > circ.radius:
            return Contact.DISJOINT, None
        return Contact.INTERSECTING, None
    d = abs(c1.center - c2.center)
    if d < tol and abs(c1.radius - c2.radius) < tol:
        raise IdenticalCirclesError("coincident circles")
    if abs(d - (c1.radius + c2.radius)) < tol:
        u = (c2.center - c1.center) / d
        return Contact.TANGENT, c1.center + c1.radius * u
    rdiff = abs(c1.radius - c2.radius)
    if d > tol and abs(d - rdiff) < tol:
        u = (c2.center - c1.center) / d
        sign = 1.0 if c1.radius > c2.radius else -1.0
        return Contact.TANGENT, c1.center + sign * c1.radius * u
    if rdiff + tol < d < c1.radius + c2.radius - tol:
        return Contact.INTERSECTING, None
    return Contact.DISJOINT, None


# --- inversive coordinates --------------------------------------------------


def inversive_vector(c: GenCircle) -> np.ndarray:
    """Coordinates (e, f, g, h) with e=1/r, f=(|c|^2-r^2)/r, (g,h)=c/r; lines have e=0."""
    if isinstance(c, Circle):
        r = c.radius
        return np.array([
            1.0 / r,
            (abs(c.center) ** 2 - r * r) / r,
            c.center.real / r,
            c.center.imag / r,
        ])
    return np.array([0.0, 2.0 * c.offset, c.normal.real, c.normal.imag])


def inversive_product(c1: GenCircle, c2: GenCircle) -> float:
    """Symmetric bilinear form; 0 iff the circles are orthogonal, +-1 at tangency."""
    v, w = inversive_vector(c1), inversive_vector(c2)
    return v[2] * w[2] + v[3] * w[3] - 0.5 * (v[0] * w[1] + v[1] * w[0])


def orthogonality_residual(c1: GenCircle, c2: GenCircle) -> float:
    """|cos| of the intersection angle (0 means orthogonal)."""
    return abs(inversive_product(c1, c2))


# --- oriented disks as spherical caps ---------------------------------------


@dataclass(frozen=True)
class SphericalCap:
    """Closed disk on the sphere: {x : x . n >= d} for a unit vector n."""

    nx: float
    ny: float
    nz: float
    d: float

    @property
    def normal(self) -> np.ndarray:
        return np.array([self.nx, self.ny, self.nz])

    def angular_radius(self) -> float:
        return math.acos(max(-1.0, min(1.0, self.d)))

    def contains(self, z: SpherePoint, tol: float = 0.0) -> bool:
        return float(sphere_lift(z) @ self.normal) >= self.d - tol

    def signed_depth(self, z: SpherePoint) -> float:
        """Positive inside the cap, negative outside; ~chordal distance near the rim."""
        return float(sphere_lift(z) @ self.normal) - self.d

    def complement(self) -> "SphericalCap":
        return SphericalCap(-self.nx, -self.ny, -self.nz, -self.d)


def cap_from_circle(c: GenCircle, exclude: SpherePoint) -> SphericalCap:
    """Oriented closed disk bounded by ``c`` on the side *away from* ``exclude``."""
    if isinstance(c, Circle):
        pts = [sphere_lift(c.point_at(a)) for a in (0.0, 2.0943951023931953, 4.1887902047863905)]
    else:
        p0 = c.foot()
        pts = [sphere_lift(p0), sphere_lift(p0 + c.direction()), sphere_lift(INF)]
    n = np.cross(pts[1] - pts[0], pts[2] - pts[0])
    norm = np.linalg.norm(n)
    if norm == 0:
        raise ValueError("degenerate circle lift")
    n /= norm
    d = float(n @ pts[0])
    cap = SphericalCap(n[0], n[1], n[2], d)
    if cap.contains(exclude):
        cap = cap.complement()
    return cap


def caps_disjoint(a: SphericalCap, b: SphericalCap, tol: float = DEFAULT_TOL) -> bool:
    """True when the two closed caps have disjoint interiors (tangency allowed)."""
    cosang = float(np.clip(a.normal @ b.normal, -1.0, 1.0))
    return math.acos(cosang) >= a.angular_radius() + b.angular_radius() - tol


def circles_close(c1: GenCircle, c2: GenCircle, tol: float = DEFAULT_TOL) -> bool:
    """Chordal-Hausdorff closeness of two generalized circles."""
    pts = sample_points(c1, 4) + ([INF] if isinstance(c1, Line) else [])
    if any(chordal_to_curve(c2, p) > tol for p in pts):
        return False
    pts = sample_points(c2, 4) + ([INF] if isinstance(c2, Line) else [])
    return all(chordal_to_curve(c1, p) <= tol for p in pts)

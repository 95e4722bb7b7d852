"""Dynamics of the critically fixed cubic anti-rational map g(z) = 3 conj(z)^2 / (2 conj(z)^3 + 1).

The four critical points 0, 1, omega, omega^2 are fixed and attracting; their
basins touch pairwise at six repelling fixed points on the Julia set, which is
homeomorphic to the Apollonian gasket.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import VerificationFailedError
from .geometry import INF, SpherePoint, is_inf

OMEGA = cmath.exp(2j * math.pi / 3)

#: attracting fixed critical points, in basin-index order
CRITICAL_POINTS = (0j, 1 + 0j, OMEGA, OMEGA**2)

#: contraction radius verified by ``verify_contraction``; classify_basin
#: refuses anything larger so Attracted verdicts are proofs by contraction
MAX_EPS = 0.05

_BIG = 1e4


@dataclass(frozen=True)
class AntiRationalMap:
    """w -> P(conj w)/Q(conj w) with coefficient tuples in descending powers."""

    numer: tuple[complex, ...]
    denom: tuple[complex, ...]

    @property
    def degree(self) -> int:
        return max(len(self.numer), len(self.denom)) - 1

    def __call__(self, z: SpherePoint) -> SpherePoint:
        if is_inf(z) or abs(z) > _BIG:
            return self._eval_at_large(z)
        w = z.conjugate()
        num = _horner(self.numer, w)
        den = _horner(self.denom, w)
        if den == 0:
            return INF
        return num / den

    def _eval_at_large(self, z: SpherePoint) -> SpherePoint:
        # swap coordinates: evaluate reversed polynomials in 1/conj(z)
        r = 0j if is_inf(z) else 1.0 / z.conjugate()
        dp, dq = len(self.numer) - 1, len(self.denom) - 1
        num = _horner(tuple(reversed(self.numer)), r)
        den = _horner(tuple(reversed(self.denom)), r)
        k = dq - dp
        if den == 0:
            return INF
        v = num / den
        if k > 0:
            return v * r**k
        if k < 0:
            if r == 0:
                return INF
            return v / r ** (-k)
        return v

    def grid_eval(self, z: np.ndarray) -> np.ndarray:
        """Vectorized evaluation (moderate |z| only; callers clamp huge values)."""
        w = np.conj(z)
        num = np.zeros_like(w)
        for c in self.numer:
            num = num * w + c
        den = np.zeros_like(w)
        for c in self.denom:
            den = den * w + c
        with np.errstate(divide="ignore", invalid="ignore"):
            out = num / den
        return out


def _horner(coeffs: tuple[complex, ...], x: complex) -> complex:
    acc = 0j
    for c in coeffs:
        acc = acc * x + c
    return acc


#: the tetrahedral gasket map g(z) = 3 conj(z)^2 / (2 conj(z)^3 + 1)
TETRAHEDRAL_MAP = AntiRationalMap((3, 0, 0), (2, 0, 0, 1))


def holomorphic_part(z):
    """f(z) = 3z^2/(2z^3+1); g is f of the conjugate, and g(g(z)) = f(f(z))."""
    return 3 * z * z / (2 * z**3 + 1)


_contraction_verified: set[float] = set()


def verify_contraction(eps: float) -> None:
    """Check |g(c + d) - c| < |d|/2 on a ring |d| = eps at all critical points."""
    if eps in _contraction_verified:
        return
    if not 0 < eps <= MAX_EPS:
        raise ValueError(f"eps {eps} outside verified contraction range (0, {MAX_EPS}]")
    g = TETRAHEDRAL_MAP
    for c in CRITICAL_POINTS:
        for rad in (eps, eps / 2):
            for k in range(64):
                d = rad * cmath.exp(2j * math.pi * k / 64)
                if abs(g(c + d) - c) >= abs(d) / 2:
                    raise VerificationFailedError(
                        f"contraction fails at {c} with offset {d}")
    _contraction_verified.add(eps)


def fixed_critical_data(map_: AntiRationalMap = TETRAHEDRAL_MAP) -> list[tuple[complex, int]]:
    """The fixed critical points with their local degrees, numerically verified.

    Local degree 2 is certified by quadratic scaling: |g(c+d) - c| ~ A |d|^2
    with consistent A across two probe radii.
    """
    out = []
    for c in CRITICAL_POINTS:
        if abs(map_(c) - c) > 1e-13:
            raise VerificationFailedError(f"critical point {c} not fixed")
        ratios = []
        for delta in (1e-3, 1e-4):
            probe = max(abs(map_(c + delta * cmath.exp(1j * a)) - c)
                        for a in (0.0, 1.3, 2.9, 4.1))
            ratios.append(probe / delta**2)
        if not 0.1 < ratios[0] / ratios[1] < 10.0:
            raise VerificationFailedError(f"no quadratic scaling at {c}")
        out.append((c, 2))
    return out


@dataclass(frozen=True)
class BasinOutcome:
    target: Optional[int]  # index into CRITICAL_POINTS, None when undecided
    time: int

    @property
    def attracted(self) -> bool:
        return self.target is not None


def classify_basin(z: SpherePoint, maxiter: int = 200, eps: float = MAX_EPS) -> BasinOutcome:
    """Iterate g until the orbit enters a verified contraction ball."""
    verify_contraction(eps)
    g = TETRAHEDRAL_MAP
    w = z
    for n in range(maxiter + 1):
        for i, c in enumerate(CRITICAL_POINTS):
            if not is_inf(w) and abs(w - c) < eps:
                return BasinOutcome(i, n)
        if n < maxiter:
            w = g(w)
    return BasinOutcome(None, maxiter)


def julia_fixed_points() -> list[complex]:
    """The six repelling fixed points of g on the Julia set.

    Real roots r=(sqrt3-1)/2 and s=-(sqrt3+1)/2 of 2x^2+2x-1 (the non-critical
    factor of the fixed-point equation), spread by the omega-rotation symmetry.
    """
    r = (math.sqrt(3.0) - 1.0) / 2.0
    s = -(math.sqrt(3.0) + 1.0) / 2.0
    return [r * OMEGA**k for k in range(3)] + [s * OMEGA**k for k in range(3)]


def basin_probe(p: complex, radius: float = 1e-3, count: int = 64,
                maxiter: int = 400) -> dict[int, int]:
    """Histogram of attraction targets on a small circle around p."""
    hist: dict[int, int] = {}
    for k in range(count):
        z = p + radius * cmath.exp(2j * math.pi * k / count)
        out = classify_basin(z, maxiter=maxiter)
        if out.attracted:
            hist[out.target] = hist.get(out.target, 0) + 1
    return hist


def touching_basin_pair(p: complex, radius: float = 1e-3, count: int = 64,
                        maxiter: int = 400) -> frozenset[int]:
    """The two invariant Fatou components adjacent at a Julia point.

    The probe circle also clips the chains of small preimage components that
    accumulate in the cusps between the two invariant components, so those
    targets appear with small counts; the two dominant targets (each holding
    at least 20% of the decided samples) are the touching invariant pair.
    """
    hist = basin_probe(p, radius, count, maxiter)
    decided = sum(hist.values())
    major = {t for t, n in hist.items() if n >= 0.2 * decided}
    if len(major) != 2:
        raise VerificationFailedError(
            f"no dominant basin pair at {p}: histogram {hist}")
    return frozenset(major)


def second_iterate_derivative(z: complex, h: float = 1e-6) -> complex:
    """Finite-difference derivative of the holomorphic second iterate f(f(z))."""
    return (holomorphic_part(holomorphic_part(z + h))
            - holomorphic_part(holomorphic_part(z - h))) / (2 * h)


def fixed_point_inventory(maxiter: int = 60) -> list[complex]:
    """All fixed points of the degree-9 holomorphic map f(f(z)), deduplicated.

    Solves f(f(z)) = z as a polynomial equation; the inventory must close at
    exactly 10 points: the four attracting critical points plus the six
    repelling Julia fixed points (so g has no genuine 2-cycles).
    """
    # f(f(z)) = N(z)/D(z) with f = 3z^2/(2z^3+1):
    #   f(f) = 27 z^4 / (2z^3+1) / (54 z^6/(2z^3+1)^2 + ... ) -- assemble via resultant-free
    # composition: N1=3z^2, D1=2z^3+1; f(f) = 3 N1^2 D1 / (2 N1^3 + D1^3)
    z = np.poly1d([1, 0])
    n1 = 3 * z**2
    d1 = np.poly1d([2, 0, 0, 1])
    num = 3 * n1**2 * d1
    den = 2 * n1**3 + d1**3
    poly = num - den * z  # fixed points: roots
    roots = np.roots(poly.coefficients)
    uniq: list[complex] = []
    for r in roots:
        if all(abs(r - u) > 1e-7 for u in uniq):
            uniq.append(complex(r))
    return uniq


def render_julia(region: tuple[float, float, float, float], resolution: int,
                 maxiter: int = 100, eps: float = MAX_EPS,
                 threads: int | None = None) -> "np.ndarray":
    """Per-pixel basin classification; returns an (h, w, 3) uint8 image.

    Undecided pixels (the Julia set) are black; basins are colored by target
    critical point and shaded by arrival time.
    """
    from .raster import basin_colors, render_rows

    verify_contraction(eps)
    x0, x1, y0, y1 = region
    g = TETRAHEDRAL_MAP

    def rows(j0: int, j1: int) -> np.ndarray:
        h = j1 - j0
        xs = x0 + (np.arange(resolution) + 0.5) * (x1 - x0) / resolution
        ys = y1 - (np.arange(j0, j1) + 0.5) * (y1 - y0) / resolution
        z = xs[None, :] + 1j * ys[:, None]
        target = np.full(z.shape, -1, dtype=np.int16)
        time = np.zeros(z.shape, dtype=np.int32)
        alive = np.ones(z.shape, dtype=bool)
        for n in range(maxiter + 1):
            for i, c in enumerate(CRITICAL_POINTS):
                hit = alive & (np.abs(z - c) < eps)
                target[hit] = i
                time[hit] = n
                alive &= ~hit
            if n == maxiter or not alive.any():
                break
            zn = g.grid_eval(np.where(alive, z, 0))
            # exact pole hits produce non-finite values; the true image is
            # infinity, whose next iterate is ~0, so stand in a huge finite value
            zn[~np.isfinite(zn)] = 1e8
            z = np.where(alive, zn, z)
        return basin_colors(target, time, maxiter, h, resolution)

    return render_rows(rows, resolution, resolution, threads)

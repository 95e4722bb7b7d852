"""Exact Farey / Stern-Brocot arithmetic and the dyadic-to-Farey conjugacy.

The central object is the Conway box function: the increasing homeomorphism of
[0, 1] sending the level-n dyadics to the level-n Farey numbers by iterated
mediants (its inverse is the classical Minkowski question-mark function).  It
conjugates the orientation-reversing doubling map to the folded Nielsen map of
the ideal triangle with vertices 0, 1, infinity, exactly on rationals.

All combinatorics here run in exact big-integer rationals; floats appear only
in the final chart onto the unit circle and in distortion suprema.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from .errors import LevelTooLargeError, PrecisionUnreachableError
from .geometry import INF, Circle, mobius_from_triples, reflect_in_circle

MAX_LEVEL = 24
_MAX_DIGITS = 2000

OMEGA = cmath.exp(2j * math.pi / 3)

RealLike = Union[int, float, Fraction]


# ---------------------------------------------------------------------------
# the box function and its inverse
# ---------------------------------------------------------------------------


def _require_unit_interval(x: Fraction) -> None:
    if not 0 <= x <= 1:
        raise ValueError(f"argument {x} outside [0, 1]")


def box_dyadic(x: RealLike) -> Fraction:
    """Exact box-function value at a dyadic rational in [0, 1].

    Walks the Stern-Brocot tree: each binary digit of x halves the dyadic
    interval while the Farey interval is refined by mediants.
    """
    x = Fraction(x)
    _require_unit_interval(x)
    if x.denominator & (x.denominator - 1):
        raise ValueError(f"{x} is not dyadic")
    if x == 0 or x == 1:
        return x
    p, q, r, s = 0, 1, 1, 1
    y = x
    while True:
        y = 2 * y
        if y == 1:
            return Fraction(p + r, q + s)
        if y < 1:
            r, s = p + r, q + s
        else:
            p, q = p + r, q + s
            y -= 1


def questionmark(x: RealLike) -> Fraction:
    """Minkowski question-mark value of a rational in [0, 1]: an exact dyadic.

    Inverse of ``box_dyadic`` on its image; the Stern-Brocot path to x is read
    off as binary digits (the path of a rational always terminates).
    """
    x = Fraction(x)
    _require_unit_interval(x)
    if x == 0 or x == 1:
        return x
    p, q, r, s = 0, 1, 1, 1
    acc, k = 0, 0
    while True:
        mn, md = p + r, q + s
        cmpv = x.numerator * md - mn * x.denominator
        if cmpv == 0:
            return Fraction(2 * acc + 1, 1 << (k + 1))
        k += 1
        acc <<= 1
        if cmpv < 0:
            r, s = mn, md
        else:
            p, q = mn, md
            acc += 1
        if k > _MAX_DIGITS:
            raise PrecisionUnreachableError(f"Stern-Brocot path of {x} too deep")


def box_real(x: Union[RealLike, Iterable[int]], precision: float = 1e-12) -> float:
    """Box-function value of any x in [0, 1], by nested Farey intervals.

    Accepts a float (interpreted exactly as the binary rational it is), a
    Fraction, or a stream of binary digits.  Stops once the bracketing Farey
    interval is shorter than ``precision`` and returns its midpoint, so the
    result is within ``precision`` of the true value; exact on dyadics.
    """
    p, q, r, s = 0, 1, 1, 1
    if isinstance(x, (int, float, Fraction)):
        y = Fraction(x)
        _require_unit_interval(y)
        if y == 0 or y == 1:
            return float(y)
        digits = None
    else:
        digits = iter(x)
        y = None
    for _ in range(_MAX_DIGITS):
        if q * s > 1 / precision:
            return (p * s + r * q) / (2 * q * s)
        if digits is None:
            y = 2 * y
            if y == 1:
                return (p + r) / (q + s)
            bit = 1 if y > 1 else 0
            if bit:
                y -= 1
        else:
            try:
                bit = next(digits)
            except StopIteration:
                return (p * s + r * q) / (2 * q * s)
        if bit:
            p, q = p + r, q + s
        else:
            r, s = p + r, q + s
    raise PrecisionUnreachableError(
        f"denominators exceeded the digit budget before reaching {precision}")


# ---------------------------------------------------------------------------
# the three piecewise maps of the conjugacy
# ---------------------------------------------------------------------------


def theta(t):
    """Nielsen map of the ideal triangle with vertices 0, 1, infinity.

    Acts on the extended real line; theta(1/2) is infinity (math.inf).
    """
    if isinstance(t, float) and math.isinf(t):
        return math.inf
    exact = isinstance(t, (int, Fraction))
    t = Fraction(t) if exact else float(t)
    if t <= 0:
        return -t
    if t >= 1:
        return 2 - t
    den = 2 * t - 1
    if den == 0:
        return math.inf
    return t / den


def tau(t):
    """Folded Nielsen map: orientation-reversing double cover of [0, 1)."""
    exact = isinstance(t, (int, Fraction))
    t = Fraction(t) if exact else float(t)
    if not 0 <= t < 1:
        raise ValueError(f"tau needs t in [0,1): {t}")
    if t < Fraction(1, 2):
        v = (2 * t - 1) / (t - 1)
    else:
        v = (1 - t) / t
    return v if v != 1 else v - 1


def m_minus2(x):
    """Orientation-reversing doubling map x -> -2x (mod 1) on [0, 1)."""
    exact = isinstance(x, (int, Fraction))
    x = Fraction(x) if exact else float(x)
    if not 0 <= x < 1:
        raise ValueError(f"m_minus2 needs x in [0,1): {x}")
    v = (1 - 2 * x) if x < Fraction(1, 2) else (2 - 2 * x)
    return v if v != 1 else v - 1


# ---------------------------------------------------------------------------
# Farey levels (integer tables + Fraction view)
# ---------------------------------------------------------------------------

_pairs_cache: dict = {"level": -1, "nums": None, "dens": None}


def _farey_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Numerators/denominators of the level-n Farey sequence, as int64 arrays."""
    if n > MAX_LEVEL:
        raise LevelTooLargeError(f"level {n} > {MAX_LEVEL}")
    if _pairs_cache["level"] >= n:
        stride = 1 << (_pairs_cache["level"] - n)
        return _pairs_cache["nums"][::stride], _pairs_cache["dens"][::stride]
    nums = np.array([0, 1], dtype=np.int64)
    dens = np.array([1, 1], dtype=np.int64)
    for _ in range(n):
        mn = nums[:-1] + nums[1:]
        md = dens[:-1] + dens[1:]
        out_n = np.empty(2 * len(nums) - 1, dtype=np.int64)
        out_d = np.empty_like(out_n)
        out_n[0::2], out_n[1::2] = nums, mn
        out_d[0::2], out_d[1::2] = dens, md
        nums, dens = out_n, out_d
    _pairs_cache.update(level=n, nums=nums, dens=dens)
    return nums, dens


@dataclass(frozen=True)
class FareyLevel:
    """Level n: the 2^n + 1 Farey numbers aligned with the level-n dyadics."""

    level: int
    fractions: tuple[Fraction, ...]
    dyadics: tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.fractions)


def farey_level(n: int) -> FareyLevel:
    nums, dens = _farey_arrays(n)
    fracs = tuple(Fraction(int(p), int(q)) for p, q in zip(nums, dens))
    dy = tuple(Fraction(k, 1 << n) for k in range(len(fracs)))
    return FareyLevel(n, fracs, dy)


def entry_generation(index: int, n: int) -> int:
    """Level at which the Farey entry F_n[index] first appeared."""
    if index in (0, 1 << n):
        return 0
    return n - ((index & -index).bit_length() - 1)


# ---------------------------------------------------------------------------
# Ford circles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FordCircle:
    """Circle of radius 1/(2q^2) tangent to the real line at p/q; all exact."""

    fraction: Fraction

    @property
    def radius(self) -> Fraction:
        return Fraction(1, 2 * self.fraction.denominator**2)

    @property
    def center(self) -> tuple[Fraction, Fraction]:
        return (self.fraction, self.radius)


def ford_circle(x: RealLike) -> FordCircle:
    return FordCircle(Fraction(x))


def ford_tangent(c1: FordCircle, c2: FordCircle) -> bool:
    """Exact tangency test: |p s - q r| = 1."""
    p, q = c1.fraction.numerator, c1.fraction.denominator
    r, s = c2.fraction.numerator, c2.fraction.denominator
    return abs(p * s - q * r) == 1


# ---------------------------------------------------------------------------
# interval statistics and scalewise distortion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntervalRatioStats:
    level: int
    adjacent_max: Fraction
    adjacent_argmax: tuple[Fraction, Fraction, Fraction]  # endpoints of the two intervals
    within_two_max: Fraction
    within_two_separation: int


def _gap_inverse(n: int) -> np.ndarray:
    """1/|gap_i| = q_i * q_{i+1} for the complementary intervals of F_n."""
    _, dens = _farey_arrays(n)
    return dens[:-1] * dens[1:]


def interval_ratio_stats(n: int) -> IntervalRatioStats:
    """Exact extremal length ratios of complementary intervals of F_n.

    Complementary-interval lengths are 1/(q_i q_{i+1}), so every ratio is the
    exact integer quotient of two such products.
    """
    ginv = _gap_inverse(n)
    nums, dens = _farey_arrays(n)
    best_adj = Fraction(1)
    best_adj_i = 0
    best_any = Fraction(1)
    best_sep = 0
    for sep in (1, 2, 3):  # index offset = separating intervals + 1
        if sep >= len(ginv):
            continue
        a, b = ginv[:-sep], ginv[sep:]
        ratio = np.maximum(a, b) / np.minimum(a, b)
        i = int(np.argmax(ratio))
        exact = Fraction(int(max(a[i], b[i])), int(min(a[i], b[i])))
        if sep == 1:
            best_adj, best_adj_i = exact, i
        if exact > best_any:
            best_any, best_sep = exact, sep - 1
    f = [Fraction(int(p), int(q)) for p, q in zip(nums, dens)]
    arg = (f[best_adj_i], f[best_adj_i + 1], f[best_adj_i + 2])
    return IntervalRatioStats(n, best_adj, arg, best_any, best_sep)


def neighbor_comparability_max(n: int) -> Fraction:
    """Max length ratio of adjacent complementary intervals of F_n whose shared
    endpoint has generation strictly between 0 and n.

    This is the empirical constant of the two-tangent-circles comparability
    lemma; equals max q_{j+1}/q_{j-1} over even interior indices j.
    """
    _, dens = _farey_arrays(n)
    size = 1 << n
    j = np.arange(2, size, 2)
    lo, hi = dens[j - 1], dens[j + 1]
    ratio = np.maximum(lo, hi) / np.minimum(lo, hi)
    i = int(np.argmax(ratio))
    jj = int(j[i])
    return Fraction(int(max(dens[jj - 1], dens[jj + 1])),
                    int(min(dens[jj - 1], dens[jj + 1])))


def scalewise_distortion(n: int, grid_level: int | None = None) -> float:
    """Approximate scalewise distortion rho(2^-n) of the box function.

    Maximizes the symmetric difference-quotient ratio over the level
    ``grid_level`` dyadic grid (default n+4), wrapping through the periodic
    extension h(x+1) = h(x) + 1.  Grid values are exact; the result is a
    lower bound for the true supremum.
    """
    if grid_level is None:
        grid_level = n + 4
    if grid_level > 21:
        raise LevelTooLargeError("grid level > 21 would overflow int64 products")
    if grid_level < n:
        raise ValueError("grid must be at least as fine as the scale")
    nums, dens = _farey_arrays(grid_level)
    size = 1 << grid_level
    step = 1 << (grid_level - n)
    p, q = nums[:-1], dens[:-1]  # h on [0,1) grid
    idx = np.arange(size)
    up, dn = (idx + step) % size, (idx - step) % size
    wrap_up = (idx + step) >= size
    wrap_dn = (idx - step) < 0
    pu = nums[up] + wrap_up * dens[up]
    qu = dens[up]
    pd = nums[dn] - wrap_dn * dens[dn]
    qd = dens[dn]
    # forward and backward increments as exact int pairs
    fnum, fden = pu * q - p * qu, qu * q
    bnum, bden = p * qd - pd * q, q * qd
    a, b = fnum * bden, fden * bnum
    ratio = np.maximum(a, b) / np.minimum(a, b)
    return float(np.max(ratio))


# ---------------------------------------------------------------------------
# the circle conjugacy h between conj(z)^2 and the ideal-triangle Nielsen map
# ---------------------------------------------------------------------------

# upper half-plane boundary chart onto the unit circle, fixing the cube roots
# of unity: m(0)=1, m(1)=omega, m(inf)=omega^2
_CHART = mobius_from_triples((0, 1, INF), (1, OMEGA, OMEGA**2))

#: geodesic sides of the ideal triangle with vertices at the cube roots of
#: unity: |center| = 2 forces orthogonality to the unit circle, radius sqrt(3)
IDEAL_TRIANGLE_SIDES = tuple(
    Circle(2 * cmath.exp(1j * math.pi * (2 * k + 1) / 3), math.sqrt(3.0))
    for k in range(3)
)


def ideal_triangle_nielsen(z: complex) -> complex:
    """Reflection in whichever side of the ideal triangle covers z.

    On the unit circle the three closed arcs between cube roots of unity are
    each covered by exactly one side; arc endpoints are fixed either way.
    """
    for side in IDEAL_TRIANGLE_SIDES:
        if abs(z - side.center) <= side.radius + 1e-12:
            return reflect_in_circle(side, z)
    return z


def boundary_conjugacy_point(angle: RealLike, precision: float = 1e-12) -> complex:
    """h(e^{2 pi i angle}) where h conjugates conj(z)^2 to the Nielsen map.

    Computed on [0, 1/3] through the box function and the half-plane chart,
    extended to the whole circle by the 2pi/3-rotation equivariance.  The
    sector reduction is exact rational arithmetic: the box function has
    unbounded derivative at Farey points, so a float reduction would cost
    several digits near sector boundaries.
    """
    t = Fraction(angle) % 1
    k = int(3 * t)  # exact floor since t is rational
    if k == 3:
        k = 2
    u = box_real(3 * t - k, precision)
    return OMEGA**k * _CHART(u)


def circle_conjugacy_h(angle: RealLike, precision: float = 1e-12) -> float:
    """h as a map of angles in [0, 1)."""
    w = boundary_conjugacy_point(angle, precision)
    return (cmath.phase(w) / (2 * math.pi)) % 1.0


# ---------------------------------------------------------------------------
# exact verification suites (used by the CLI and the acceptance tests)
# ---------------------------------------------------------------------------


def conjugacy_identity_failures(level: int) -> int:
    """Count dyadics of the given level violating box(m_minus2(x)) = tau(box(x)).

    Exact rational identity; the return value should be 0.
    """
    nums, dens = _farey_arrays(level)
    size = 1 << level
    k = np.arange(size)
    km = (-2 * k) % size
    lp, lq = nums[km], dens[km]  # lhs = box(m_minus2(k/2^level))
    p, q = nums[:-1], dens[:-1]
    # tau(p/q): (q-2p)/(q-p) on [0,1/2), (q-p)/p on [1/2,1), with value 1 -> 0
    lower = 2 * p < q
    tn = np.where(lower, q - 2 * p, q - p)
    td = np.where(lower, q - p, p)
    tn = np.where(tn == td, 0, tn)  # mod-1 wrap at x = 0 and x = 1/2
    return int(np.count_nonzero(tn * lq != lp * td))


def farey_structure_failures(max_level: int) -> int:
    """Exact Farey structure at all levels <= max_level; returns violation count.

    Checks unimodularity q r - p s = 1 of consecutive pairs, the gap formula
    r/s - p/q = 1/(q s), and Ford tangency of consecutive entries through the
    exact rational identity (center distance)^2 = (radius sum)^2, all of which
    reduce to integer arithmetic.
    """
    bad = 0
    for n in range(1, max_level + 1):
        nums, dens = _farey_arrays(n)
        p, q, r, s = nums[:-1], dens[:-1], nums[1:], dens[1:]
        det = r * q - p * s
        bad += int(np.count_nonzero(det != 1))
        # Ford tangency of consecutive entries: |p s - q r| = 1
        bad += int(np.count_nonzero(np.abs(p * s - q * r) != 1))
    # gap formula and full Ford rational identity, in exact Fractions
    nums, dens = _farey_arrays(min(max_level, 10))
    for k in range(len(nums) - 1):
        a = Fraction(int(nums[k]), int(dens[k]))
        b = Fraction(int(nums[k + 1]), int(dens[k + 1]))
        if b - a != Fraction(1, int(dens[k]) * int(dens[k + 1])):
            bad += 1
        ra, rb = ford_circle(a).radius, ford_circle(b).radius
        if (b - a) ** 2 + (ra - rb) ** 2 != (ra + rb) ** 2:
            bad += 1
    return bad

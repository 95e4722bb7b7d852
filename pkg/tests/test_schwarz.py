import cmath
import math
import random

import mpmath
import numpy as np
import pytest

from gasketlab.errors import NotInDomainError, SingularPointError
from gasketlab.geometry import INF, is_inf
from gasketlab.schwarz import (
    CUSPS,
    schwarz_class_grid,
    OMEGA,
    SINGULAR_POINTS,
    TANGENCY_POINTS,
    classify_schwarz,
    deltoid_boundary,
    eval_R,
    in_deltoid_domain,
    invert_R_exterior,
    near_singular,
    preimages_under_sigma1,
    render_schwarz,
    schwarz_step,
    sigma1,
    sigma2,
    tile_component,
)


def test_eval_R_values():
    assert abs(eval_R(1 + 0j) - 1.5) < 1e-15
    assert abs(eval_R(-1 + 0j) + 0.5) < 1e-15
    assert abs(eval_R(OMEGA) - 1.5 * OMEGA) < 1e-14
    assert is_inf(eval_R(0j)) and is_inf(eval_R(INF))


def test_cusps_and_tangencies():
    for k in range(3):
        assert abs(eval_R(OMEGA**k) - CUSPS[k]) < 1e-14
        assert abs(eval_R(-(OMEGA**k)) - TANGENCY_POINTS[k]) < 1e-14
    # tangency points all at modulus 1/2: the inscribed disk radius
    assert all(abs(abs(t) - 0.5) < 1e-15 for t in TANGENCY_POINTS)


def test_disk2_radius_is_min_boundary_modulus():
    # numerical minimization of |R(e^i theta)| confirms the inscribed radius 1/2
    thetas = np.linspace(0, 2 * math.pi, 20000, endpoint=False)
    vals = np.abs([deltoid_boundary(t) for t in thetas])
    assert abs(vals.min() - 0.5) < 1e-6


def test_invert_R_exterior():
    z = invert_R_exterior(3 + 0j)
    assert abs(z) >= 1 and abs(eval_R(z) - 3) < 1e-12
    z = invert_R_exterior(1.5 + 0j)  # cusp: double root resolves to modulus ~1
    assert abs(abs(z) - 1.0) < 1e-6
    with pytest.raises(NotInDomainError):
        invert_R_exterior(0j)  # all roots of 2z^3+1 have modulus 2^{-1/3} < 1
    roots = np.roots([2, 0, 0, 1])
    assert np.allclose(np.abs(roots), 0.5 ** (1 / 3))


def test_invert_R_exterior_frozen_value():
    # oracle: high-precision cubic solve for w = 2
    mp_roots = mpmath.polyroots([2, -4, 0, 1])
    big = max(mp_roots, key=abs)
    z = invert_R_exterior(2 + 0j)
    assert abs(z - complex(big)) < 1e-12
    assert abs(z - 1.854638) < 1e-6


def test_sigma1_boundary_fixing():
    worst = 0.0
    for k in range(1000):
        th = (k + 0.5) * 2 * math.pi / 1000
        w = deltoid_boundary(th)
        worst = max(worst, abs(sigma1(w) - w))
    assert worst < 1e-9


def test_sigma1_frozen_value():
    # sigma1(2) via high-precision recomputation
    mp_roots = mpmath.polyroots([2, -4, 0, 1])
    z = max(mp_roots, key=abs)
    u = 1 / mpmath.conj(z)
    expected = complex(u + 1 / (2 * u**2))
    assert abs(sigma1(2 + 0j) - expected) < 1e-12
    assert abs(sigma1(2 + 0j) - 2.259029) < 1e-6


def test_sigma1_fixes_infinity():
    assert is_inf(sigma1(INF))


def test_sigma2_values():
    assert abs(sigma2(0.5 + 0j) - 0.5) < 1e-15
    assert abs(sigma2(0.25 + 0j) - 1.0) < 1e-15
    assert abs(sigma2(-0.5 + 0j) + 0.5) < 1e-15
    assert is_inf(sigma2(0j)) and sigma2(INF) == 0


def test_sigma2_involution():
    rng = random.Random(3)
    for _ in range(500):
        w = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        if abs(w) < 1e-3:
            continue
        assert abs(sigma2(sigma2(w)) - w) < 1e-12


def test_singular_points_fixed():
    for s in SINGULAR_POINTS:
        assert abs(sigma1(s) - s) < 1e-12
    for t in TANGENCY_POINTS:
        assert abs(sigma2(t) - t) < 1e-12


def test_equivariance():
    rng = random.Random(11)
    checked = 0
    for _ in range(2000):
        w = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        if near_singular(w, 1e-6):
            continue
        try:
            o1 = schwarz_step(w)
            o2 = schwarz_step(OMEGA * w)
            o3 = schwarz_step(w.conjugate())
        except SingularPointError:
            continue
        if o1[0] == "mapped":
            assert o2[0] == "mapped" and abs(o2[1] - OMEGA * o1[1]) < 1e-10 * max(1, abs(o1[1]))
            assert o3[0] == "mapped" and abs(o3[1] - o1[1].conjugate()) < 1e-10 * max(1, abs(o1[1]))
            checked += 1
    assert checked > 500


def test_schwarz_step_examples():
    kind, w = schwarz_step(0.01 + 0j)
    assert kind == "mapped" and abs(w - 25) < 1e-12

    kind, w = schwarz_step(25 + 0j)
    assert kind == "mapped" and abs(w) > 100  # sigma1 ~ conj(w)^2/2 far out

    out = schwarz_step(1.0 + 0j)  # on the positive axis between 1/2 and 3/2
    assert out == ("tile", 1)
    assert not in_deltoid_domain(1.0 + 0j)

    with pytest.raises(SingularPointError):
        schwarz_step(-0.5 + 0j)


def test_classify_examples():
    out = classify_schwarz(10 + 0j, maxiter=50)
    assert out.kind == "basin" and out.time <= 5

    out = classify_schwarz(-0.5 + 0j, maxiter=50)
    assert out.kind == "undecided"

    out = classify_schwarz(0.01 + 0j, maxiter=50)
    assert out.kind == "basin"

    out = classify_schwarz(1.0 + 0j, maxiter=50)
    assert out.kind == "tiling" and out.component == 1


def test_escape_threshold_validated_on_annulus():
    rng = random.Random(17)
    for _ in range(300):
        r = rng.uniform(5, 10)
        w = r * cmath.exp(2j * math.pi * rng.random())
        assert in_deltoid_domain(w)
        assert abs(sigma1(w)) > abs(w)


def test_degree_bookkeeping():
    rng = random.Random(23)
    in_domain = tile = 0
    while in_domain < 20 or tile < 20:
        w = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        if near_singular(w, 1e-3):
            continue
        pre = preimages_under_sigma1(w)
        for p in pre:
            assert abs(sigma1(p) - w) < 1e-8 * max(1.0, abs(w))
        if in_deltoid_domain(w, 1e-6):
            assert len(pre) == 2
            in_domain += 1
        elif abs(w) > 0.5 + 1e-6:
            assert len(pre) == 3
            tile += 1


def test_tile_components():
    assert tile_component(1 + 0j) == 1
    assert tile_component(cmath.exp(2j * math.pi / 3)) == 2
    assert tile_component(cmath.exp(-2j * math.pi / 3)) == 3


def test_render_schwarz_structure():
    img = render_schwarz((-2, 2, -2, 2), 200, maxiter=40, threads=1)
    assert img.shape == (200, 200, 3)
    # far corner escapes (yellow-dominant), origin neighborhood escapes too
    assert img[0, 0, 0] > 150 and img[0, 0, 2] < 120


def test_singular_points_carry_the_touching_pairs():
    # Prop-style touching structure: the basin and the three tiling components
    # pairwise touch at the six singular points, one pair per point: cusps
    # carry (basin, U_k), tangency points carry the two adjacent (U_i, U_j).
    n = 200
    grid = schwarz_class_grid((-2, 2, -2, 2), n, maxiter=60)
    expected = {}
    for k, c in enumerate(CUSPS):
        expected[c] = {0, tile_component(c)}
    expected[TANGENCY_POINTS[0]] = {2, 3}   # -1/2 between upper/lower left
    expected[TANGENCY_POINTS[1]] = {1, 3}   # -omega/2 at angle -pi/3
    expected[TANGENCY_POINTS[2]] = {1, 2}   # -omega^2/2 at angle +pi/3
    for s, pair in expected.items():
        i = int((2 - s.imag) / 4 * n)
        j = int((s.real + 2) / 4 * n)
        patch = grid[max(0, i - 3):i + 4, max(0, j - 3):j + 4]
        classes = set(int(v) for v in np.unique(patch))
        assert pair <= classes, (s, pair, classes)

import math
import random
from collections import Counter

import numpy as np
import pytest

from gasketlab.errors import SingularPointError
from gasketlab.geometry import Circle, chordal, circles_close, reflect_in_circle
from gasketlab.packing import solve_packing
from gasketlab.reflection_group import (
    classify,
    enumerate_words,
    generators,
    interstice_diameters,
    nielsen_step,
    orbit_disks,
    orbit_equivalence_check,
    render_limit_set,
    singular_points,
    undecided_fraction,
    word_map,
)
from gasketlab.triangulation import octahedron, tetrahedron

REGION = (-1.0, 3.0, -0.5, 2.5)


@pytest.fixture(scope="module")
def strip():
    return solve_packing(tetrahedron(), "strip")


def test_word_counts():
    words = list(enumerate_words(4, 3))
    by_len = Counter(len(w) for w in words)
    assert by_len[0] == 1 and by_len[1] == 4 and by_len[2] == 12 and by_len[3] == 36
    assert len(words) == 1 + 52
    by_len8 = Counter(len(w) for w in enumerate_words(8, 2))
    assert by_len8[1] == 8 and by_len8[2] == 8 * 7
    # reduced: no consecutive repeats
    assert all(all(a != b for a, b in zip(w, w[1:])) for w in words)


def test_generators_are_involutions(strip):
    rng = random.Random(4)
    for refl in generators(strip):
        for _ in range(250):
            z = complex(rng.uniform(-2, 4), rng.uniform(-2, 3))
            assert chordal(refl(refl(z)), z) < 1e-10


def test_orbit_disk_generations(strip):
    disks = orbit_disks(strip, 3)
    counts = Counter(d.generation for d in disks)
    assert counts[0] == 4 and counts[1] == 4 and counts[2] == 12 and counts[3] == 36


def test_orbit_disk_counts_deeper(strip):
    disks = orbit_disks(strip, 6)
    counts = Counter(d.generation for d in disks)
    for n in range(1, 7):
        assert counts[n] == 4 * 3 ** (n - 1)


def test_generation_one_descartes_disk(strip):
    disks = [d for d in orbit_disks(strip, 1) if d.generation == 1]
    assert any(circles_close(d.circle, Circle(1 + 0.25j, 0.25), 1e-12) for d in disks)


def test_orbit_disks_pairwise_disjoint(strip):
    from gasketlab.geometry import caps_disjoint

    disks = orbit_disks(strip, 2)
    for i, a in enumerate(disks):
        for b in disks[i + 1:]:
            assert caps_disjoint(a.cap, b.cap, 1e-9)


def test_reflections_permute_orbit_disks(strip):
    disks = orbit_disks(strip, 2)
    from gasketlab.geometry import apply_to_circle

    small = [d for d in disks if d.generation <= 1]
    all_circles = [d.circle for d in disks]
    for refl in generators(strip):
        for d in small:
            img = apply_to_circle(refl, d.circle)
            assert any(circles_close(img, c, 1e-9) for c in all_circles)


def test_nielsen_step_examples(strip):
    kind, pt, face = nielsen_step(strip, 1 + 0.25j)
    assert kind == "mapped" and chordal(pt, 1 + 4j) < 1e-12
    assert set(strip.triangulation.faces[face]) == {0, 2, 3}

    assert nielsen_step(strip, 1 + 4j)[0] == "tile"

    kind, pt, face = nielsen_step(strip, 5j)
    assert kind == "mapped" and chordal(pt, 5j) < 1e-12  # reflections fix their circle

    with pytest.raises(SingularPointError):
        nielsen_step(strip, 0j)


def test_classify_examples(strip):
    out = classify(strip, 1 + 0.25j, 50)
    assert out.outcome == "escaped" and out.steps == 1
    assert set(strip.triangulation.faces[out.code[0]]) == {0, 2, 3}

    out = classify(strip, 0j, 50)
    assert out.outcome == "undecided"  # tangency points lie in the limit set

    out = classify(strip, 1 + 4j, 50)
    assert out.outcome == "escaped" and out.steps == 0 and out.tile_component == 1

    out = classify(strip, 5j, 50)  # on a dual circle: already in the tile closure
    assert out.outcome == "escaped" and out.steps == 0


def test_markov_codes(strip):
    rng = random.Random(9)
    observed = set()
    n_faces = len(strip.triangulation.faces)
    for _ in range(400):
        z = complex(rng.uniform(-1, 3), rng.uniform(-0.5, 2.5))
        out = classify(strip, z, 80)
        for a, b in zip(out.code, out.code[1:]):
            assert a != b
            observed.add((a, b))
    offdiag = {(i, j) for i in range(n_faces) for j in range(n_faces) if i != j}
    assert observed <= offdiag
    assert observed == offdiag  # every allowed transition occurs


def test_orbit_equivalence(strip):
    assert orbit_equivalence_check(strip, 1 + 0.25j, (1,))
    rng = random.Random(31)
    words = [w for w in enumerate_words(4, 3) if len(w) <= 3]
    checked = 0
    for _ in range(40):
        z = complex(rng.uniform(-1, 3), rng.uniform(-0.4, 2.4))
        out = classify(strip, z, 60)
        if out.outcome != "escaped":
            continue
        w = rng.choice(words)
        assert orbit_equivalence_check(strip, z, w, maxiter=60), (z, w)
        checked += 1
    assert checked > 20
    assert orbit_equivalence_check(strip, 1 + 4j, ())  # tile point, empty word


def test_interstice_diameters_decreasing(strip):
    d = interstice_diameters(strip, 8)
    for n in range(1, 6):
        assert d[n] > d[n + 1]
    assert d[8] < 0.5  # parabolic cusps give O(1/n) decay; see decisions ledger


def test_singular_points_are_tangencies(strip):
    s = singular_points(strip)
    assert len(s) == 6
    for pt in s:
        at_most = sum(chordal(pt, t) < 1e-9 for t in strip.tangencies.values())
        assert at_most == 1


def test_render_monotone_undecided(strip):
    fracs = [undecided_fraction(strip, REGION, 80, m) for m in (0, 5, 12, 25)]
    assert all(a >= b for a, b in zip(fracs, fracs[1:]))
    assert fracs[-1] < fracs[0]


def test_render_pixel_at_tangency_stays_limit(strip):
    img = render_limit_set(strip, (-0.05, 0.05, -0.05, 0.05), 11, maxiter=40, threads=1)
    assert tuple(img[5, 5]) == (0, 0, 0)  # pixel at 0 limit-set colored


def test_render_maxiter_zero_structure(strip):
    # at maxiter 0, escaped = outside every open dual disk; undecided = the rest
    res = 60
    img = render_limit_set(strip, REGION, res, maxiter=0, threads=1)
    x0, x1, y0, y1 = REGION
    rng = random.Random(14)
    checked_esc = checked_und = 0
    for _ in range(200):
        i, j = rng.randrange(res), rng.randrange(res)
        z = complex(x0 + (j + 0.5) * (x1 - x0) / res, y1 - (i + 0.5) * (y1 - y0) / res)
        in_dual = any(strip.dual_caps[k].signed_depth(z) > 1e-12 for k in range(4))
        if in_dual:
            assert tuple(img[i, j]) == (0, 0, 0)
            checked_und += 1
        else:
            assert tuple(img[i, j]) != (0, 0, 0)
            checked_esc += 1
    assert checked_esc > 20 and checked_und > 20


def test_octahedron_group_runs():
    p = solve_packing(octahedron())
    disks = orbit_disks(p, 2)
    counts = Counter(d.generation for d in disks)
    # each face reflects its three non-member disks to new ones: 8 * 3 = 24
    assert counts[0] == 6 and counts[1] == 24
    rng = random.Random(2)
    for _ in range(50):
        z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        out = classify(p, z, 60)
        for a, b in zip(out.code, out.code[1:]):
            assert a != b

import cmath
import math
import random

import pytest

from gasketlab.geometry import (
    Circle,
    Line,
    chordal,
    chordal_to_curve,
    circles_close,
    mobius_from_triples,
    orthogonality_residual,
)
from gasketlab.packing import (
    graph_automorphisms,
    mobius_symmetries,
    packing_from_json,
    packing_to_json,
    solve_packing,
    transform_packing,
    verify_packing,
)
from gasketlab.triangulation import (
    barycentric_subdivision,
    double_tetrahedron,
    octahedron,
    tetrahedron,
)

STRIP_CIRCLES = {
    0: Line(1j, 0.0),
    1: Line(1j, 2.0),
    2: Circle(1j, 1.0),
    3: Circle(2 + 1j, 1.0),
}

STRIP_DUALS = {
    frozenset((0, 1, 2)): Line(1 + 0j, 0.0),
    frozenset((0, 2, 3)): Circle(1 + 0j, 1.0),
    frozenset((0, 1, 3)): Line(1 + 0j, 2.0),
    frozenset((1, 2, 3)): Circle(1 + 2j, 1.0),
}


@pytest.fixture(scope="module")
def strip():
    return solve_packing(tetrahedron(), "strip")


def test_strip_circles_exact(strip):
    for v, expect in STRIP_CIRCLES.items():
        assert circles_close(strip.circles[v], expect, 1e-10), (v, strip.circles[v])


def test_strip_duals_exact(strip):
    for i, f in enumerate(strip.triangulation.faces):
        expect = STRIP_DUALS[frozenset(f)]
        assert circles_close(strip.duals[i], expect, 1e-10)


def test_strip_tangencies(strip):
    t = strip.tangencies
    assert chordal(t[(0, 2)], 0) < 1e-10
    assert chordal(t[(1, 2)], 2j) < 1e-10
    assert chordal(t[(2, 3)], 1 + 1j) < 1e-10
    assert chordal(t[(0, 3)], 2) < 1e-10
    assert chordal(t[(0, 1)], complex(math.inf, 0)) < 1e-10


def test_dual_orthogonality(strip):
    for i, f in enumerate(strip.triangulation.faces):
        for v in f:
            assert orthogonality_residual(strip.duals[i], strip.circles[v]) < 1e-9


def test_dual_fixed_by_its_reflection(strip):
    from gasketlab.geometry import apply_to_circle, reflection

    for i in range(4):
        d = strip.duals[i]
        img = apply_to_circle(reflection(d), d)
        assert circles_close(img, d, 1e-10)


def test_deg_many_duals_orthogonal_per_vertex(strip):
    tri = strip.triangulation
    adj = tri.adjacency()
    for v in range(4):
        count = sum(
            orthogonality_residual(strip.duals[i], strip.circles[v]) < 1e-9
            for i in range(len(tri.faces))
        )
        assert count == len(adj[v])  # deg(v) duals orthogonal to circle(v)


@pytest.mark.parametrize("builder", [octahedron, double_tetrahedron,
                                     lambda: barycentric_subdivision(tetrahedron())])
def test_solver_verifies(builder):
    p = solve_packing(builder())
    assert verify_packing(p, 1e-9).ok


def test_verify_catches_perturbation(strip):
    import copy

    bad = copy.deepcopy(strip)
    bad.circles[2] = Circle(1j, 1.0 + 1e-3)
    rep = verify_packing(bad, 1e-9)
    tangency_violations = [v for v in rep.violations if "tangent" in v or "drifted" in v]
    assert len(tangency_violations) >= 3  # the three incident edges


def test_mobius_covariance(strip):
    rng = random.Random(5)
    src = [complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(3)]
    dst = [complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(3)]
    m = mobius_from_triples(src, dst)
    moved = transform_packing(strip, m)
    assert verify_packing(moved, 1e-8).ok


def test_symmetry_counts():
    p = solve_packing(tetrahedron(), "strip")
    sym = mobius_symmetries(p)
    assert sym.order == 24
    assert sym.orientation_preserving_order == 12
    ident = next(e for e in sym.elements if e.permutation == (0, 1, 2, 3)
                 and e.orientation_preserving)
    for z in (0.3 + 0.2j, 2 - 1j):
        assert chordal(ident.map(z), z) < 1e-8


def test_symmetry_group_closure():
    p = solve_packing(tetrahedron(), "strip")
    sym = mobius_symmetries(p)
    probes = [0.31 + 0.17j, -1.2 + 0.8j, 2.5 - 0.4j]

    def action_key(m):
        return tuple(round(coord, 6)
                     for z in probes for coord in (m(z).real, m(z).imag))

    table = {action_key(e.map): e.permutation for e in sym.elements}
    rng = random.Random(7)
    for _ in range(60):
        e1, e2 = rng.choice(sym.elements), rng.choice(sym.elements)
        composed = e1.map @ e2.map
        assert action_key(composed) in table


def test_double_tetrahedron_less_symmetric():
    sym = mobius_symmetries(solve_packing(double_tetrahedron()))
    assert sym.order < 24
    assert sym.order == 12


def test_graph_automorphism_counts():
    assert len(list(graph_automorphisms(tetrahedron()))) == 24
    assert len(list(graph_automorphisms(double_tetrahedron()))) == 12
    assert len(list(graph_automorphisms(octahedron()))) == 48


def test_json_roundtrip(strip):
    import json

    data = json.loads(json.dumps(packing_to_json(strip)))
    p2 = packing_from_json(data)
    assert verify_packing(p2, 1e-8).ok
    for v in range(4):
        assert circles_close(p2.circles[v], strip.circles[v], 1e-9)

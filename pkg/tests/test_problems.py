import math

import numpy as np
import pytest

from chdbc.mesh import generate_disk_mesh
from chdbc.problems import (
    ProblemSpec,
    evolution_problem,
    manufactured_linear,
    manufactured_nonlinear,
    problem_by_name,
    verify_manufactured,
    zero_map,
)


def interior_points(count, seed=0):
    rng = np.random.default_rng(seed)
    r = 0.95 * np.sqrt(rng.random(count))
    th = 2 * np.pi * rng.random(count)
    return list(zip(r * np.cos(th), r * np.sin(th)))


def circle_points(count, seed=1):
    rng = np.random.default_rng(seed)
    th = 2 * np.pi * rng.random(count)
    return list(zip(np.cos(th), np.sin(th)))


def test_linear_forcings_at_reference_points():
    p = manufactured_linear()
    assert p.f1_bulk(0.5, 0.5, 0.0) == pytest.approx(-0.25, rel=1e-15)
    s = math.sqrt(2.0) / 2.0
    assert p.f1_surf(s, s, 0.0) == pytest.approx(2.5, rel=1e-14)
    for t in (0.0, 0.7, 3.0):
        assert p.exact_u(1.0, 0.0, t) == 0.0


def test_linear_surface_forcings_are_minus_five_times_bulk():
    p = manufactured_linear()
    for x, y in circle_points(15, seed=4):
        for t in (0.0, 0.5, 1.0):
            assert p.f1_surf(x, y, t) == pytest.approx(-5.0 * p.f1_bulk(x, y, t),
                                                       rel=1e-13)
            assert p.f2_surf(x, y, t) == pytest.approx(-5.0 * p.f2_bulk(x, y, t),
                                                       rel=1e-13)


def test_nonlinear_double_well_roots_and_forcing():
    p = manufactured_nonlinear()
    for root in (-1.0, 0.0, 1.0):
        assert p.nonlinearity(root) == 0.0
    assert p.f2_bulk(0.5, 0.5, 0.0) == pytest.approx(0.484375, rel=1e-15)
    # f1 forcings are unchanged by the nonlinearity
    lin = manufactured_linear()
    for x, y in interior_points(5):
        assert p.f1_bulk(x, y, 0.3) == lin.f1_bulk(x, y, 0.3)


def test_fields_finite_on_disk():
    for p in (manufactured_linear(), manufactured_nonlinear()):
        for x, y in interior_points(30, seed=9) + circle_points(10, seed=9):
            for t in (0.0, 1.5, 3.0):
                for f in (p.f1_bulk, p.f2_bulk, p.f1_surf, p.f2_surf):
                    assert math.isfinite(float(f(x, y, t)))


def test_residual_oracle_accepts_both_manufactured_problems():
    pts = interior_points(20) + circle_points(20)
    times = (0.0, 0.5, 1.0)
    assert verify_manufactured(manufactured_linear(), pts, times) <= 1e-8
    assert verify_manufactured(manufactured_nonlinear(), pts, times) <= 1e-8


def test_residual_oracle_catches_sign_error():
    good = manufactured_linear()
    bad = ProblemSpec(
        kind="linear",
        f1_bulk=lambda x, y, t: -good.f1_bulk(x, y, t),
        f2_bulk=good.f2_bulk,
        f1_surf=good.f1_surf,
        f2_surf=good.f2_surf,
        u0=good.u0,
        exact_u=good.exact_u,
        exact_w=good.exact_w,
    )
    pts = [(0.5, 0.5), (-0.6, 0.4), (0.3, -0.7)]
    assert verify_manufactured(bad, pts, (0.0,)) >= 0.1


def test_residual_oracle_requires_exact_solution():
    with pytest.raises(ValueError, match="exact"):
        verify_manufactured(evolution_problem(), [(0.1, 0.1)], (0.0,))


def test_residual_oracle_rejects_outside_points():
    with pytest.raises(ValueError, match="neither"):
        verify_manufactured(manufactured_linear(), [(1.5, 0.0)], (0.0,))


def test_evolution_derivative_values():
    p = evolution_problem(strength=10.0)
    assert p.nonlinearity(1.0) == 0.0
    assert p.nonlinearity(0.5) == pytest.approx(-15.0, rel=1e-15)
    assert p.potential(1.0) == 0.0
    assert p.potential(0.0) == pytest.approx(10.0, rel=1e-15)


def test_evolution_requires_positive_strength():
    with pytest.raises(ValueError):
        evolution_problem(strength=0.0)


def test_evolution_initial_data_is_reproducible_pm_one():
    mesh = generate_disk_mesh(80, 1.0)
    xs, ys = mesh.nodes[:, 0], mesh.nodes[:, 1]
    a = evolution_problem(seed=42).u0(xs, ys, 0.0)
    b = evolution_problem(seed=42).u0(xs, ys, 0.0)
    np.testing.assert_array_equal(a, b)
    assert set(np.unique(a)) <= {-1.0, 1.0}
    c = evolution_problem(seed=43).u0(xs, ys, 0.0)
    assert not np.array_equal(a, c)
    # a fair draw: both phases present on 80 nodes
    assert 0 < np.sum(a > 0) < len(a)


def test_problem_by_name():
    assert problem_by_name("linear").kind == "linear"
    assert problem_by_name("nonlinear").kind == "nonlinear"
    assert problem_by_name("evolution").potential is not None
    with pytest.raises(ValueError, match="unknown problem"):
        problem_by_name("stokes")


def test_kind_nonlinearity_consistency():
    assert manufactured_linear().nonlinearity is zero_map
    with pytest.raises(ValueError):
        ProblemSpec(kind="linear", nonlinearity=lambda u: u)
    with pytest.raises(ValueError):
        ProblemSpec(kind="nonlinear")
    with pytest.raises(ValueError):
        ProblemSpec(kind="parabolic")

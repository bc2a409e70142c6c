import math

import numpy as np
import pytest

from curvlab import curvature as cv
from curvlab import exact, solver
from curvlab.solver import Status


def well(depth=2.0):
    """K = 1 - depth r^2 exp(-r^2): dips below 1 near r = 1, so some heights cross zero."""
    return cv.custom(lambda r: 1 - depth * np.asarray(r) ** 2 * np.exp(-np.asarray(r) ** 2),
                     lambda r: -depth * (2 * np.asarray(r) - 2 * np.asarray(r) ** 3)
                     * np.exp(-np.asarray(r) ** 2),
                     bounds=(1 - depth / math.e, 1.0), k_infinity=1.0, r0=3.0, name="well")


@pytest.mark.parametrize("n, K", [(3, 3.0), (4, 8.0), (5, 15.0), (6, 24.0), (4, 1.0)])
def test_bubble_agreement(n, K):
    lam = 1.0
    sol = solver.integrate_radial(n, cv.constant(K), exact.bubble_height(n, K, lam), r_max=20.0,
                                  rel_tol=1e-10)
    u, up = exact.bubble(n, K, lam, sol.r)
    assert sol.status.kind == Status.REACHED and sol.r_end == 20.0
    assert np.max(np.abs(sol.u / u - 1)) < 1e-8
    assert np.max(np.abs(sol.up - up)) < 1e-8 * np.max(np.abs(up))


def test_tighter_tolerance_reduces_error():
    errs = []
    for tol in (1e-6, 1e-8, 1e-10):
        sol = solver.integrate_radial(4, cv.constant(8.0), 1.0, r_max=100.0, rel_tol=tol)
        errs.append(np.max(np.abs(sol.u / exact.bubble(4, 8.0, 1.0, sol.r)[0] - 1)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[0] < 1e-6


def test_scaling_covariance():
    # for constant K, lam^m u(lam r) is again a solution, with height lam^m u0
    n, K, lam, u0 = 5, 1.0, 3.0, 0.8
    m = exact.half_dim(n)
    a = solver.integrate_radial(n, cv.constant(K), u0, r_max=300.0, rel_tol=1e-11)
    b = solver.integrate_radial(n, cv.constant(K), lam ** m * u0, r_max=100.0, rel_tol=1e-11)
    r = np.geomspace(1e-2, 100.0, 60)
    ua, _ = a.interpolate(lam * r)
    ub, _ = b.interpolate(r)
    np.testing.assert_allclose(ub, lam ** m * ua, rtol=1e-8)


def test_forced_grid_and_refinement():
    sol = solver.integrate_radial(4, cv.exp_perturbed(1.0, 0.5, 1.0), 1.0, r_max=1e4,
                                  per_decade=64)
    assert np.all(np.diff(sol.r) > 0)
    logs = np.log10(sol.r[1:])
    # every forced decade node is on the grid
    for k in range(-3, 5):
        assert np.min(np.abs(logs - k)) < 1e-12
    # the dense interpolant agrees with a finer run between nodes
    fine = solver.integrate_radial(4, cv.exp_perturbed(1.0, 0.5, 1.0), 1.0, r_max=1e4,
                                   per_decade=256, rel_tol=1e-12)
    r = np.geomspace(1e-2, 1e4, 333)
    np.testing.assert_allclose(sol.interpolate(r)[0], fine.interpolate(r)[0], rtol=1e-7)


def test_zero_outer_radius():
    sol = solver.integrate_radial(4, cv.constant(1.0), 2.0, r_max=0.0)
    assert sol.r.tolist() == [0.0] and sol.u.tolist() == [2.0]
    assert sol.status.kind == Status.REACHED


@pytest.mark.parametrize("kw", [dict(u0=0.0), dict(u0=-1.0), dict(u0=math.inf),
                                dict(r_max=-1.0), dict(rel_tol=0.0), dict(rel_tol=0.1),
                                dict(abs_tol=-1.0), dict(n=2)])
def test_invalid_arguments(kw):
    args = dict(n=4, profile=cv.constant(1.0), u0=1.0, r_max=10.0)
    args.update(kw)
    with pytest.raises(ValueError):
        solver.integrate_radial(**args)


def test_crossing_is_located():
    sol = solver.integrate_radial(3, well(), 1.0, r_max=1e3, rel_tol=1e-10)
    assert sol.status.kind == Status.CROSSED
    assert sol.status.at == pytest.approx(sol.r_end)
    assert sol.u[-1] == 0.0 and sol.up[-1] < 0
    assert np.all(sol.u[:-1] > 0)


def test_residual_small_at_nodes_and_midpoints():
    for prof in (cv.constant(1.0), cv.plateau(2.0, 1.0, 2.0), cv.power_perturbed(1.0, 0.5, 2.0)):
        sol = solver.integrate_radial(4, prof, 1.0, r_max=1e3, rel_tol=1e-10)
        assert np.max(solver.radial_residual(sol)) < 1e-6


def test_cylinder_hamiltonian_conserved():
    for n in (3, 4, 5, 6):
        vc = exact.constant_cylinder(n, 1.0)
        cs = solver.integrate_cylinder(n, cv.constant(1.0), 0.0, 0.7 * vc, 0.0, s_max=60.0,
                                       rel_tol=1e-11)
        h = cs.hamiltonian()
        assert np.max(np.abs(h - h[0])) < 1e-9 * abs(h[0])


def test_cylinder_separatrix():
    n, K = 4, 1.0
    c = exact.separatrix_amplitude(n, K)
    cs = solver.integrate_cylinder(n, cv.constant(K), 0.0, c, 0.0, s_max=8.0, rel_tol=1e-11,
                                   s_min=-8.0)
    v, vp = exact.cosh_separatrix(n, K, cs.s)
    assert cs.s[0] == -8.0 and cs.s[-1] == 8.0
    np.testing.assert_allclose(cs.v, v, rtol=1e-7)
    assert cs.meta["backward_status"]["kind"] == Status.REACHED
    # the two legs join smoothly at s0
    assert np.all(np.diff(cs.s) > 0)


def test_cylinder_backward_leg_is_time_reversal():
    n = 5
    vc = exact.constant_cylinder(n, 1.0)
    cs = solver.integrate_cylinder(n, cv.constant(1.0), 0.0, 0.9 * vc, 0.1, s_max=5.0,
                                   s_min=-5.0, rel_tol=1e-11)
    fw = solver.integrate_cylinder(n, cv.constant(1.0), -5.0, *cs.interpolate(-5.0),
                                   s_max=5.0, rel_tol=1e-11)
    np.testing.assert_allclose(fw.interpolate(4.0)[0], cs.interpolate(4.0)[0], rtol=1e-7)


def test_transform_round_trip_and_pullback():
    sol = solver.integrate_radial(4, cv.exp_perturbed(1.0, 0.5, 1.0), 1.0, r_max=1e4)
    cs = solver.cylinder_transform(sol)
    assert cs.s.size == sol.r.size - 1
    back = solver.inverse_transform(cs)
    np.testing.assert_allclose(back.u, sol.u[1:], rtol=1e-13)
    assert not back.regular
    part = solver.cylinder_transform(sol, s_min=0.0)
    assert part.s[0] >= 0.0
    resampled = solver.cylinder_transform(sol, s_grid=np.linspace(-2, 8, 11))
    np.testing.assert_allclose(resampled.v, cs.interpolate(np.linspace(-2, 8, 11))[0], rtol=1e-9)


def test_cylinder_transform_empty_range():
    sol = solver.integrate_radial(4, cv.constant(1.0), 1.0, r_max=10.0)
    with pytest.raises(solver.EmptyRangeError):
        solver.cylinder_transform(sol, s_min=10.0)


def test_serialisation_round_trip():
    from curvlab.serialize import solution_from_dict

    sol = solver.integrate_radial(4, cv.plateau(2.0, 1.0, 2.0), 1.0, r_max=100.0)
    back = solution_from_dict(sol.to_dict())
    assert back.profile == sol.profile and back.status == sol.status
    np.testing.assert_array_equal(back.u, sol.u)


@pytest.mark.slow
def test_shoot_locates_the_crossing_threshold():
    res = solver.shoot(3, well(), 1.0, 2.0, target="Crossed", r_max=1e4)
    assert res.converged
    assert res.u0_hi - res.u0_lo < 1e-9 * res.u0_star
    assert res.report_lo.decay_class == "Crossed"
    assert res.solution_hi.status.kind == Status.REACHED
    assert 1.9 < res.u0_star < 2.0


def test_shoot_rejects_a_bracket_without_a_change():
    with pytest.raises(solver.BracketInvalid):
        solver.shoot(4, cv.constant(8.0), 0.5, 1.0, r_max=1e4)


def test_shoot_with_no_iterations():
    res = solver.shoot(3, well(), 1.0, 2.0, target="Crossed", r_max=1e4, max_iter=0)
    assert res.iterations == 0 and not res.converged
    assert (res.u0_lo, res.u0_hi) == (1.0, 2.0)

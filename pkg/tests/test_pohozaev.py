import math

import numpy as np
import pytest

from curvlab import curvature as cv
from curvlab import exact, pohozaev as pz, solver


@pytest.fixture(scope="module")
def exp_solution():
    return solver.integrate_radial(4, cv.exp_perturbed(1.0, 0.5, 1.0), 1.0, r_max=1e4)


def test_surface_form_of_the_bubble_vanishes():
    for n, K in ((3, 3.0), (4, 8.0), (5, 15.0)):
        sol = solver.integrate_radial(n, cv.constant(K), 1.0, r_max=100.0, rel_tol=1e-12)
        r = np.geomspace(1e-2, 100.0, 50)
        assert np.max(np.abs(pz.surface_form(sol, r))) < 1e-9


def test_surface_form_matches_closed_form_terms():
    # on the exact bubble the bracket terms are explicit
    n, K, lam = 4, 8.0, 1.0
    sol = solver.integrate_radial(n, cv.constant(K), 1.0, r_max=10.0, rel_tol=1e-12)
    r = np.array([0.5, 2.0, 7.0])
    u, up = exact.bubble(n, K, lam, r)
    bracket = 0.5 * r * up ** 2 + (n - 2) / (2 * n) * r * K * u ** 4 + (n - 2) / 2 * u * up
    want = exact.sphere_area(n) * r ** (n - 1) * bracket
    # the bracket terms are O(10) and cancel; compare against that scale
    terms = exact.sphere_area(n) * r ** (n - 1) * 0.5 * r * up ** 2
    np.testing.assert_allclose(pz.surface_form(sol, r), want, atol=1e-11 * terms.max())


def test_surface_form_rejects_origin(exp_solution):
    with pytest.raises(ValueError):
        pz.surface_form(exp_solution, 0.0)


def test_volume_form_derivative_is_integrand(exp_solution):
    sol = exp_solution
    r = np.array([0.5, 1.0, 3.0, 10.0])
    h = 1e-5 * r
    dv = (pz.volume_form(sol, r + h) - pz.volume_form(sol, r - h)) / (2 * h)
    u, _ = sol.interpolate(r)
    want = (sol.n - 2) / (2 * sol.n) * exact.sphere_area(sol.n) * r ** sol.n * \
        sol.profile.derivative(r) * u ** 4
    np.testing.assert_allclose(dv, want, rtol=1e-6)
    assert isinstance(pz.volume_form(sol, 2.0), float)
    with pytest.raises(ValueError):
        pz.volume_form(sol, 2e4)


def test_identity_is_constancy_across_breakpoints():
    for prof in (cv.plateau(2.0, 1.0, 2.0), cv.plateau(0.5, 1.0, 0.3),
                 cv.power_perturbed(1.0, 0.5, 2.0)):
        sol = solver.integrate_radial(5, prof, 1.0, r_max=1e4)
        rep = pz.pohozaev_report(sol)
        assert rep.identity_residual < 1e-6 * (1 + abs(rep.p0))
        # regular solutions: the constant itself is zero
        assert abs(rep.p0) < 1e-12


def test_constant_cylinder_value_all_dimensions():
    for n in (3, 4, 5, 6):
        vc = exact.constant_cylinder(n, 1.0)
        cs = solver.integrate_cylinder(n, cv.constant(1.0), 0.0, vc, 0.0, s_max=math.log(1e4))
        rep = pz.pohozaev_report(solver.inverse_transform(cs))
        assert rep.limit_status == "Converged"
        assert rep.limit_estimate == pytest.approx(exact.constant_cylinder_pohozaev(n, 1.0),
                                                   rel=1e-10)


def test_cylinder_form_is_surface_form_and_energy():
    n = 4
    vc = exact.constant_cylinder(n, 1.0)
    cs = solver.integrate_cylinder(n, cv.constant(1.0), 0.0, 0.8 * vc, 0.0, s_max=12.0)
    rad = solver.inverse_transform(cs)
    s = np.linspace(0.5, 11.5, 40)
    np.testing.assert_allclose(pz.cylinder_form(cs, s), pz.surface_form(rad, np.exp(s)),
                               rtol=1e-9)
    h = cs.hamiltonian()
    np.testing.assert_allclose(pz.cylinder_form(cs, cs.s), exact.sphere_area(n) * h, rtol=1e-9)
    # Delaunay orbits sit strictly between the cylinder and the separatrix energy
    p = pz.pohozaev_report(rad).limit_estimate
    assert exact.constant_cylinder_pohozaev(n, 1.0) < p < 0


def test_limit_statuses():
    r = np.geomspace(1.0, 1e4, 400)
    est, unc, status = pz.pohozaev_limit(r, np.full(r.size, -2.0))
    assert (est, unc, status) == (-2.0, 0.0, "Converged")
    _, _, status = pz.pohozaev_limit(r, r ** 0.5)
    assert status == "Diverging"
    _, unc, status = pz.pohozaev_limit(r, -1 + 0.3 * np.sin(3 * np.log(r)))
    assert status == "Oscillating" and unc == pytest.approx(0.3, rel=1e-2)
    est, unc, status = pz.pohozaev_limit(r[:5], np.zeros(5))
    assert status == "Undetermined" and unc == math.inf
    assert pz.pohozaev_limit([], [])[2] == "Undetermined"
    custom = pz.LimitThresholds(variation=1.0)
    assert pz.pohozaev_limit(r, -1 + 0.01 * np.sin(np.log(r)), custom)[2] == "Converged"


def test_report_serialisation(exp_solution):
    rep = pz.pohozaev_report(exp_solution)
    d = rep.to_dict()
    assert set(d) == {"p0", "identity_residual", "identity_tol", "limit_estimate", "uncertainty",
                      "limit_status", "thresholds"}
    rows = list(rep.rows())
    assert len(rows) == rep.r.size and len(rows[0]) == 4
    assert pz.identity_tolerance(exp_solution) == 1e-6
    assert pz.identity_check(exp_solution) == pytest.approx(rep.identity_residual)


def test_tiny_solution_report():
    sol = solver.integrate_radial(4, cv.constant(1.0), 1.0, r_max=0.0)
    rep = pz.pohozaev_report(sol)
    assert rep.limit_status == "Undetermined"

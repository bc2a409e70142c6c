import math

import numpy as np
import pytest

from curvlab import quadrature


def test_polynomials_exact():
    # 15-point Kronrod is exact through degree 22
    for deg in (0, 1, 5, 13, 22):
        vals, err = quadrature.integrate_intervals(lambda x: x ** deg, [0.0], [2.0])
        assert vals[0] == pytest.approx(2.0 ** (deg + 1) / (deg + 1), rel=1e-14)


@pytest.mark.parametrize("f, a, b, exact", [
    (np.sin, 0.0, math.pi, 2.0),
    (np.exp, -1.0, 3.0, math.exp(3) - math.exp(-1)),
    (lambda x: 1 / (1 + x * x), -50.0, 50.0, 2 * math.atan(50.0)),
    (lambda x: np.sqrt(x), 0.0, 1.0, 2 / 3),
])
def test_known_integrals(f, a, b, exact):
    vals, err = quadrature.integrate_intervals(f, [a], [b], rel_tol=1e-12)
    assert vals[0] == pytest.approx(exact, rel=1e-10)
    assert err[0] <= 1e-10 * abs(exact) or err[0] < 1e-12


def test_vectorised_intervals_and_degenerate():
    a = np.array([0.0, 1.0, 2.0, 2.0])
    b = np.array([1.0, 2.0, 3.0, 2.0])
    vals, _ = quadrature.integrate_intervals(lambda x: 3 * x * x, a, b)
    np.testing.assert_allclose(vals, [1.0, 7.0, 19.0, 0.0], rtol=1e-14, atol=1e-15)


def test_cumulative_matches_antiderivative():
    nodes = np.geomspace(1e-3, 1e3, 97)
    cum = quadrature.cumulative(lambda t: 1 / t, nodes)
    np.testing.assert_allclose(cum, np.log(nodes / nodes[0]), rtol=1e-12, atol=1e-14)
    assert quadrature.cumulative(np.cos, [1.0]).tolist() == [0.0]

"""Fixture corpus shared by the acceptance and integration tests."""

from curvlab.harness import Initial, Scenario


def _const(k):
    return {"kind": "Constant", "params": {"k_infinity": k}}


# bubbles with lambda = 1: K = n(n-2), u(0) = 1; r_max bounded per n because the
# fast tail amplifies local error like r^(n-2)
BUBBLES = {
    3: Scenario("bubble-n3", 3, _const(3.0), Initial(u0=1.0), r_max=1e6, rel_tol=1e-12),
    4: Scenario("bubble-n4", 4, _const(8.0), Initial(u0=1.0), r_max=1e4, rel_tol=1e-12),
    5: Scenario("bubble-n5", 5, _const(15.0), Initial(u0=1.0), r_max=1e3, rel_tol=1e-12),
    6: Scenario("bubble-n6", 6, _const(24.0), Initial(u0=1.0), r_max=1e3, rel_tol=1e-12),
}

CYLINDERS = {
    n: Scenario(f"cylinder-n{n}", n, _const(1.0), Initial(cylinder={"v0": 1.0, "relative": True}),
                r_max=1e6)
    for n in (3, 4, 5, 6)
}

DELAUNAY = {
    n: Scenario(f"delaunay-n{n}", n, _const(1.0),
                Initial(cylinder={"v0": 0.95, "relative": True}),
                r_max=1e12 if n == 3 else 1e6)
    for n in (3, 4, 5)
}

VARIABLE_PROFILES = {
    "Plateau": {"kind": "Plateau", "params": {"inner": 2.0, "k_infinity": 1.0, "radius": 2.0}},
    "ExpPerturbed": {"kind": "ExpPerturbed",
                     "params": {"k_infinity": 1.0, "amplitude": 0.5, "rate": 1.0}},
    "PowerPerturbed": {"kind": "PowerPerturbed",
                       "params": {"k_infinity": 1.0, "amplitude": 0.5, "exponent": 2.0}},
}

# regular solutions of variable K; the slow tail period-locks only after many
# periods in s, hence the very large outer radius
VARIABLE = {
    (n, name): Scenario(f"{name.lower()}-n{n}", n, prof, Initial(u0=1.0), r_max=1e30)
    for n in (3, 4, 5) for name, prof in VARIABLE_PROFILES.items()
}


def all_scenarios():
    return (list(BUBBLES.values()) + list(CYLINDERS.values()) + list(DELAUNAY.values())
            + list(VARIABLE.values()))


_PIPES = {}


def pipeline(scenario):
    """Solved pipeline for a corpus scenario, cached by name for the session."""
    from curvlab.harness import solve

    if scenario.name not in _PIPES:
        _PIPES[scenario.name] = solve(scenario)
    return _PIPES[scenario.name]

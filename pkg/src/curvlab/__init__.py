"""Numerical laboratory for radial solutions of the conformal scalar curvature equation

    Delta u + K u^((n+2)/(n-2)) = 0   in R^n.

Modules: curvature (profiles K), exact (closed-form oracles), solver
(radial and cylinder integration, shooting), pohozaev, asymptotics,
harness (named verifications) and cli.
"""

__version__ = "0.1.0"

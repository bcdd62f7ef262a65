"""Python interface to the nlbellman solver and diagnostics.

Problems, kernels and configs are plain dicts with the same layout as the
JSON config files read by the ``nlb`` command.
"""

import json

from . import _core
from ._core import Error, NonconvergenceError, ParseError, ValidationError

__all__ = [
    "Error",
    "NonconvergenceError",
    "ParseError",
    "ValidationError",
    "comparability_fit",
    "config_hash",
    "diagnose",
    "fractional_laplacian",
    "run_scenario",
    "solve",
    "symbol",
]


def solve(problem, quadrature=None, tol=1e-8, max_iter=50):
    return _core.solve(json.dumps(problem), json.dumps(quadrature or {}), tol, max_iter)


def symbol(kernel, xi):
    xi = tuple(xi) + (0.0,) * (2 - len(xi))
    return _core.symbol(json.dumps(kernel), xi)


def comparability_fit(kernel):
    return json.loads(_core.comparability_fit(json.dumps(kernel)))


def fractional_laplacian(exterior, x, sigma, h=1.0 / 64.0):
    """Value and error bound of the power-kernel operator on a 1D closure."""
    return _core.fractional_laplacian(json.dumps(exterior), (float(x), 0.0), sigma, h)


def diagnose(problem, quadrature=None, diagnostics=None, tol=1e-8):
    diagnostics = diagnostics or {"interpolation_order": 3}
    return json.loads(
        _core.diagnose(json.dumps(problem), json.dumps(quadrature or {}), json.dumps(diagnostics), tol)
    )


def config_hash(config):
    return _core.config_hash(json.dumps(config))


def run_scenario(config, base_dir="."):
    return json.loads(_core.run_scenario(json.dumps(config), str(base_dir)))

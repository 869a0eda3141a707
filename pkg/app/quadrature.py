"""Composite Gauss-Legendre quadrature on intervals and on the triangle 0 < t < x < 1.

Integrands are evaluated vectorized: they receive node arrays and return
arrays whose trailing axes match the node shape, so several integrals
(e.g. the three rotations k = 1, 2, 3) can share one pass.
"""
import logging
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np

from app.config import settings

LOG = logging.getLogger(__name__)


@lru_cache(maxsize=32)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``order``-point rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def composite_nodes(a: float, b: float, panels: int, order: int = None) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite rule with ``panels`` equal panels on [a, b]."""
    order = order or settings.quad_order
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    h = np.diff(edges)
    nodes = (edges[:-1, None] + h[:, None] * x[None, :]).ravel()
    weights = (h[:, None] * w[None, :]).ravel()
    return nodes, weights


def unit_nodes(panels: int = None, order: int = None) -> Tuple[np.ndarray, np.ndarray]:
    return composite_nodes(0.0, 1.0, panels or settings.quad_panels, order)


def _converged(new, old, tol: float) -> bool:
    new = np.asarray(new)
    scale = max(1.0, float(np.max(np.abs(new))) if new.size else 1.0)
    return float(np.max(np.abs(new - old))) <= tol * scale


def integrate(
    func: Callable[[np.ndarray], np.ndarray],
    a: float = 0.0,
    b: float = 1.0,
    *,
    panels: int = None,
    tol: float = None,
):
    """Integrate ``func`` over [a, b], doubling the panel count until two
    successive results agree to ``tol`` (relative to max(1, |I|))."""
    panels = panels or settings.quad_panels
    tol = tol or settings.quad_tol

    def rule(p):
        x, w = composite_nodes(a, b, p)
        return np.asarray(func(x)) @ w

    current = rule(panels)
    while panels < settings.quad_max_panels:
        panels *= 2
        refined = rule(panels)
        if _converged(refined, current, tol):
            return refined
        current = refined
    LOG.warning("quadrature on [%g, %g] stopped at %d panels without reaching tol %g", a, b, panels, tol)
    return current


def integrate_triangle(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    *,
    panels: int = None,
    tol: float = None,
):
    """Integrate ``func(x, t)`` over the triangle 0 < t < x < 1.

    The inner integral over [0, x] uses the same composite rule mapped onto
    [0, x], so ``func`` receives 2-D node arrays X, T of equal shape.
    """
    panels = panels or settings.quad_panels
    tol = tol or settings.quad_tol

    def rule(p):
        x, wx = unit_nodes(p)
        tau, wt = unit_nodes(p)
        X = np.broadcast_to(x[:, None], (x.size, tau.size))
        T = x[:, None] * tau[None, :]
        W = (wx * x)[:, None] * wt[None, :]
        return np.sum(np.asarray(func(X, T)) * W, axis=(-2, -1))

    current = rule(panels)
    # the 2-D rule costs panels^2; stop doubling earlier than in 1-D
    limit = settings.quad_panels * 4
    while panels < limit:
        panels *= 2
        refined = rule(panels)
        if _converged(refined, current, tol):
            return refined
        current = refined
    LOG.warning("triangle quadrature stopped at %d panels without reaching tol %g", panels, tol)
    return current


def integrate_segments(
    func: Callable[[np.ndarray], np.ndarray],
    lo,
    hi,
    *,
    panels: int = None,
    tol: float = None,
):
    """Integrate over [lo_i, hi_i] for a whole vector of segments at once.

    ``func`` receives node arrays of shape (len(lo), nodes) and the result
    has the segment axis last but one, e.g. one integral per grid point x_i.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    panels = panels or settings.quad_panels
    tol = tol or settings.quad_tol
    h = (hi - lo)[:, None]

    def rule(p):
        tau, w = unit_nodes(p)
        T = lo[:, None] + h * tau[None, :]
        return np.sum(np.asarray(func(T)) * (h * w[None, :]), axis=-1)

    current = rule(panels)
    while panels < settings.quad_max_panels:
        panels *= 2
        refined = rule(panels)
        if _converged(refined, current, tol):
            return refined
        current = refined
    LOG.warning("segment quadrature stopped at %d panels without reaching tol %g", panels, tol)
    return current

"""Resolvent service - R_{L0}(z) and R_{L_alpha}(z) in series, kernel and boundary-value form.

Every operation takes the right-hand side as a ``Potential`` and returns
samples of the resolvent (or of its x-derivative of order 0, 1 or 2) on a
grid. z = lambda^3 throughout.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from app.config import settings
from app.errors import PoleProximity
from app.models import PerturbedOperator, Potential, ResolventSamples, mode_eigenvalue, mode_index, TWO_PI
from app.quadrature import integrate, integrate_segments
from app.services.ctrig_service import ctrig_service
from app.services.forward_service import forward_service
from app.services.potential_service import potential_service

LOG = logging.getLogger(__name__)

Rhs = Union[Potential, Callable[[np.ndarray], np.ndarray], None]

Q_CONSISTENCY_TOL = 1e-9


def cube_root(z: complex) -> complex:
    """lambda with lambda^3 = z: the real root for real z, else arg(lambda) in (-pi/3, pi/3]."""
    z = complex(z)
    if z.imag == 0.0:
        return complex(float(np.cbrt(z.real)))
    return abs(z) ** (1.0 / 3.0) * complex(math.cos(math.atan2(z.imag, z.real) / 3.0),
                                            math.sin(math.atan2(z.imag, z.real) / 3.0))


def _as_callable(f: Rhs) -> Optional[Callable[[np.ndarray], np.ndarray]]:
    if f is None:
        return None
    if isinstance(f, Potential):
        return potential_service.as_function(f)
    return f


def _rotate(coeffs: Tuple[complex, complex, complex], order: int) -> Tuple[complex, complex, complex]:
    """(A, B, C) -> (B, C, A) per x-derivative of A c + B s + C d."""
    a, b, c = coeffs
    for _ in range(order % 3):
        a, b, c = b, c, a
    return a, b, c


@dataclass(frozen=True, eq=False)
class IvpSolution:
    """Solution of i y''' = lambda^3 y + f with (y, y', y'')(0) = a.

    y(x) = A c(kx) + B s(kx) + C d(kx) + (i/lambda^2) int_0^x d(k(x-t)) f(t) dt,
    k = i lambda. At lambda = 0 the polynomial limit is used.
    """

    lam: complex
    a: Tuple[complex, complex, complex]
    f: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def evaluate(self, x, order: int = 0) -> np.ndarray:
        if not 0 <= order <= 3:
            raise ValueError(f"derivative order must be 0..3, got {order}")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.lam == 0:
            return self._polynomial(x, order)
        k = 1j * self.lam
        a0, a1, a2 = self.a
        hom = _rotate((a0, a1 / k, a2 / k**2), order)
        cx, sx, dx = ctrig_service.csd(k * x)
        y = k**order * (hom[0] * cx + hom[1] * sx + hom[2] * dx)
        if self.f is None:
            return y
        ker = _rotate((0j, 0j, 1j / self.lam**2), order)
        f = self.f

        def integrand(T):
            c, s, d = ctrig_service.csd(k * (x[:, None] - T))
            return (ker[0] * c + ker[1] * s + ker[2] * d) * f(T)

        y = y + k**order * integrate_segments(integrand, np.zeros_like(x), x)
        if order == 3:
            # boundary term of the third derivative: y''' = -i lambda^3 y - i f
            y = y - 1j * f(x)
        return y

    def _polynomial(self, x: np.ndarray, order: int) -> np.ndarray:
        a0, a1, a2 = self.a
        poly = [a0 + a1 * x + a2 * x**2 / 2.0, a1 + a2 * x, a2 + 0.0 * x, 0.0 * x][order]
        y = np.asarray(poly, dtype=complex)
        if self.f is None:
            return y
        if order == 3:
            return y - 1j * self.f(x)
        f = self.f
        power = 2 - order
        integral = integrate_segments(
            lambda T: (x[:, None] - T) ** power / math.factorial(power) * f(T),
            np.zeros_like(x),
            x,
        )
        return y - 1j * integral

    __call__ = evaluate


class ResolventService:
    """Service for the resolvents of L0 and L_alpha."""

    def solve_ivp(self, lam: complex, a: Sequence[complex], f: Rhs = None) -> IvpSolution:
        return IvpSolution(lam=complex(lam), a=tuple(complex(x) for x in a), f=_as_callable(f))

    # ------------------------------------------------------------------
    # guards
    # ------------------------------------------------------------------

    def _check_off_lattice(self, z: complex) -> None:
        n = mode_index(complex(z).real)
        for m in (n - 1, n, n + 1):
            z_m = mode_eigenvalue(m)
            if abs(z - z_m) < settings.pole_tol * max(1.0, abs(z_m)):
                raise PoleProximity(f"z is within {settings.pole_tol:g} of z_{m}", z=complex(z), n=m)

    def _series_window(self, f: Potential, n_max: Optional[int]) -> int:
        n_max = n_max or max(3 * settings.truncation_n, settings.series_min_modes)
        if f.count:
            n_max = min(n_max, (f.count - 1) // 2)
        return n_max

    # ------------------------------------------------------------------
    # R_{L0}
    # ------------------------------------------------------------------

    def resolvent_L0_coefficients(self, z: complex, f: Potential, n_max: Optional[int] = None) -> Dict[int, complex]:
        """Fourier coefficients f_n / (z_n - z) of R_{L0}(z) f."""
        self._check_off_lattice(z)
        n_max = self._series_window(f, n_max)
        coeffs = potential_service.coefficients(f, n_max)
        return {
            n: complex(c / (mode_eigenvalue(n) - z))
            for n, c in zip(range(-n_max, n_max + 1), coeffs)
        }

    def _tail_bound(self, z: complex, f: Potential, n_max: int, order: int) -> float:
        edge = max(abs(potential_service.fourier_coefficient(f, n_max)),
                   abs(potential_service.fourier_coefficient(f, -n_max)))
        if edge == 0.0:
            return 0.0
        n = np.arange(n_max + 1, 20 * n_max + 1, dtype=float)
        gap = (TWO_PI * n) ** 3 - abs(z)
        gap = np.where(gap > 0, gap, np.inf)
        return float(2.0 * edge * np.sum((TWO_PI * n) ** order / gap))

    def resolvent_L0_series(
        self,
        z: complex,
        f: Potential,
        x_grid,
        order: int = 0,
        n_max: Optional[int] = None,
    ) -> ResolventSamples:
        """sum_n f_n / (z_n - z) u_n, with a geometric tail estimate."""
        z = complex(z)
        n_max = self._series_window(f, n_max)
        table = self.resolvent_L0_coefficients(z, f, n_max)
        ns = np.array(list(table))
        cs = np.array(list(table.values())) * (1j * TWO_PI * ns) ** order
        x = np.asarray(x_grid, dtype=float)
        values = np.exp(1j * TWO_PI * x[..., None] * ns) @ cs
        return ResolventSamples(values=values, tail_bound=self._tail_bound(z, f, n_max, order))

    def resolvent_L0_kernel(self, z: complex, f: Potential, x_grid, order: int = 0) -> ResolventSamples:
        """Closed-form Green's function, integrated by quadrature on [0, x] and [x, 1].

        G(x, t) = -i/(lambda^2 Delta0) [K d(k(x-t)) + d(k(x-t+1)) + d(k(x-t-1))],
        K = 1 - 3c(k) for t < x and 1 - 3c(-k) for t > x, k = i lambda.
        """
        if not 0 <= order <= 2:
            raise ValueError(f"kernel derivative order must be 0..2, got {order}")
        z = complex(z)
        self._check_off_lattice(z)
        lam = cube_root(z)
        k = 1j * lam
        delta0 = forward_service.delta0(lam)
        pre = -1j / (lam**2 * delta0) * k**order
        below = 1.0 - 3.0 * ctrig_service.csd_eval(k).c
        above = 1.0 - 3.0 * ctrig_service.csd_eval(-k).c
        fx = potential_service.as_function(f)
        x = np.atleast_1d(np.asarray(x_grid, dtype=float))

        def branch(const):
            def integrand(T):
                u = x[:, None] - T
                parts = [ctrig_service.csd_derivative(k * w, order)[2] for w in (u, u + 1.0, u - 1.0)]
                return (const * parts[0] + parts[1] + parts[2]) * fx(T)
            return integrand

        lower = integrate_segments(branch(below), np.zeros_like(x), x)
        upper = integrate_segments(branch(above), x, np.ones_like(x))
        return ResolventSamples(values=pre * (lower + upper))

    def resolvent_L0_bvp(self, z: complex, f: Potential, x_grid, order: int = 0) -> ResolventSamples:
        """Solve the periodic system M(0, lambda) a = b, then evaluate the IVP solution."""
        z = complex(z)
        self._check_off_lattice(z)
        lam = cube_root(z)
        k = 1j * lam
        fx = potential_service.as_function(f)
        c, s, d = integrate(lambda t: np.stack(ctrig_service.csd(k * (1.0 - t))) * fx(t))
        rhs = np.array([-1j * d / lam**2, s / lam, 1j * c])
        a = np.linalg.solve(np.array(forward_service.m0_matrix(lam)), rhs)
        solution = self.solve_ivp(lam, a, fx)
        return ResolventSamples(values=solution.evaluate(x_grid, order))

    # ------------------------------------------------------------------
    # R_{L_alpha}
    # ------------------------------------------------------------------

    def _check_off_spectrum(self, op: PerturbedOperator, z: complex) -> None:
        self._check_off_lattice(z)
        for mu in forward_service.compute_spectrum(op).sigma2:
            if abs(z - mu) < settings.pole_tol * max(1.0, abs(mu)):
                raise PoleProximity(f"z is within {settings.pole_tol:g} of the eigenvalue {mu:.17g}",
                                    z=complex(z), eigenvalue=mu)

    def resolvent_L_alpha_coefficients(
        self,
        op: PerturbedOperator,
        z: complex,
        f: Potential,
        n_max: Optional[int] = None,
    ) -> Dict[int, complex]:
        """Fourier coefficients of R_{L0}f - alpha <R_{L0}f, v> / (1 + alpha <R_{L0}v, v>) R_{L0}v."""
        z = complex(z)
        self._check_off_spectrum(op, z)
        rf = self.resolvent_L0_coefficients(z, f, n_max)
        if op.alpha == 0.0:
            return rf
        sec = forward_service.secular(op)
        rv = {n: c / (mode_eigenvalue(n) - z) for n, c in zip(sec.modes, sec.coefficients)}
        vmap = dict(zip(sec.modes, sec.coefficients))
        pairing = sum(rf.get(n, 0j) * vmap[n].conjugate() for n in sec.modes)
        denominator = 1.0 + op.alpha * sum(rv[n] * vmap[n].conjugate() for n in sec.modes)
        q = complex(sec(z))
        if abs(denominator - q) > Q_CONSISTENCY_TOL * max(1.0, abs(q)):
            LOG.warning("Q-consistency mismatch at z=%s: %s vs %s", z, denominator, q)
        if abs(denominator) < settings.pole_tol:
            raise PoleProximity("1 + alpha <R v, v> vanishes: z is an eigenvalue", z=z)
        scale = op.alpha * pairing / denominator
        out = dict(rf)
        for n, r in rv.items():
            out[n] = out.get(n, 0j) - scale * r
        return out

    def resolvent_L_alpha(
        self,
        op: PerturbedOperator,
        z: complex,
        f: Potential,
        x_grid,
        order: int = 0,
    ) -> ResolventSamples:
        table = self.resolvent_L_alpha_coefficients(op, z, f)
        ns = np.array(list(table))
        cs = np.array(list(table.values())) * (1j * TWO_PI * ns) ** order
        x = np.asarray(x_grid, dtype=float)
        n_max = int(np.max(np.abs(ns))) if ns.size else 0
        return ResolventSamples(
            values=np.exp(1j * TWO_PI * x[..., None] * ns) @ cs,
            tail_bound=self._tail_bound(complex(z), f, n_max, order) if n_max else 0.0,
        )


resolvent_service = ResolventService()

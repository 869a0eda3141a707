"""Ctrig service - the generalized trigonometric functions c, s, d.

c, s, d are the fundamental solutions of y''' = y with initial data
(1,0,0), (0,1,0), (0,0,1):

    c(z) = (1/3) sum_k e^{w^k z}
    s(z) = (1/3) sum_k w^{-k} e^{w^k z}
    d(z) = (1/3) sum_k w^{k} e^{w^k z}

with w = e^{2 pi i / 3} and k = 1, 2, 3. Near the origin the three
exponentials cancel, so |z| <= 0.5 is evaluated by the Taylor series.
"""
import math
from typing import Dict, Tuple

import numpy as np

from app.errors import OverflowDomain
from app.models import CsdTriple

SQRT3 = math.sqrt(3.0)
OMEGA = complex(-0.5, SQRT3 / 2.0)
OMEGA2 = OMEGA.conjugate()  # w^2 = conj(w)
# w^k and w^{-k} for k = 1, 2, 3
OMEGA_POWERS = np.array([OMEGA, OMEGA2, 1.0 + 0.0j])
OMEGA_INVERSE_POWERS = np.array([OMEGA2, OMEGA, 1.0 + 0.0j])

Z_BOUND = 1e6
EXP_LIMIT = 709.0
TAYLOR_RADIUS = 0.5
N_2NPI_BOUND = 40
SERIES_EPS = 1e-17
SERIES_MAX_TERMS = 400

# identity predicates compare |lhs - rhs| / max(1, largest term involved)
IDENTITY_TOL = 1e-10

CsdArrays = Tuple[np.ndarray, np.ndarray, np.ndarray]


def _rel(lhs, rhs, *terms) -> float:
    scale = max([1.0] + [float(np.max(np.abs(t))) for t in terms])
    return float(np.max(np.abs(np.asarray(lhs) - np.asarray(rhs)))) / scale


class CtrigService:
    """Service for c, s, d evaluation and their identity algebra."""

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------

    def check_domain(self, z) -> None:
        z = np.asarray(z, dtype=complex)
        if z.size == 0:
            return
        if np.max(np.abs(z)) > Z_BOUND:
            raise OverflowDomain(f"|z| exceeds {Z_BOUND:g}", z=complex(z.ravel()[np.argmax(np.abs(z))]))
        exponents = (OMEGA_POWERS.reshape((3,) + (1,) * z.ndim) * z).real
        if np.max(exponents) > EXP_LIMIT:
            raise OverflowDomain("e^{w^k z} leaves the double range", max_exponent=float(np.max(exponents)))

    def exponential_form(self, z) -> CsdArrays:
        """c, s, d from the three exponentials (no series switch)."""
        z = np.asarray(z, dtype=complex)
        e = np.exp(OMEGA_POWERS.reshape((3,) + (1,) * z.ndim) * z)
        inv = OMEGA_INVERSE_POWERS.reshape((3,) + (1,) * z.ndim)
        fwd = OMEGA_POWERS.reshape((3,) + (1,) * z.ndim)
        return e.sum(axis=0) / 3.0, (inv * e).sum(axis=0) / 3.0, (fwd * e).sum(axis=0) / 3.0

    def csd_series(self, z) -> CsdArrays:
        """Taylor evaluation: c = sum z^{3n}/(3n)!, s = sum z^{3n+1}/(3n+1)!, d = sum z^{3n+2}/(3n+2)!."""
        z = np.asarray(z, dtype=complex)
        sums = [np.zeros_like(z), np.zeros_like(z), np.zeros_like(z)]
        term = np.ones_like(z)
        scale = np.ones(z.shape)
        for m in range(SERIES_MAX_TERMS):
            sums[m % 3] = sums[m % 3] + term
            scale = np.maximum(scale, np.abs(term))
            term = term * z / (m + 1)
            if m >= 3 and np.all(np.abs(term) < SERIES_EPS * scale):
                break
        return sums[0], sums[1], sums[2]

    def csd(self, z) -> CsdArrays:
        """Vectorized c, s, d with the series branch for |z| <= 0.5."""
        z = np.asarray(z, dtype=complex)
        self.check_domain(z)
        small = np.abs(z) <= TAYLOR_RADIUS
        if not np.any(small):
            return self.exponential_form(z)
        if np.all(small):
            return self.csd_series(z)
        c, s, d = self.exponential_form(np.where(small, 0.0, z))
        cs, ss, ds = self.csd_series(np.where(small, z, 0.0))
        return np.where(small, cs, c), np.where(small, ss, s), np.where(small, ds, d)

    def csd_derivative(self, z, order: int) -> CsdArrays:
        """order-th derivatives of (c, s, d) at z, using c' = d, s' = c, d' = s."""
        c, s, d = self.csd(z)
        k = order % 3
        if k == 0:
            return c, s, d
        if k == 1:
            return d, c, s
        return s, d, c

    def csd_eval(self, z: complex) -> CsdTriple:
        c, s, d = self.csd(complex(z))
        return CsdTriple(complex(c), complex(s), complex(d))

    def csd_at_2npi(self, n: int) -> CsdTriple:
        """Closed forms at z = 2n*pi*i."""
        if abs(n) > N_2NPI_BOUND:
            raise OverflowDomain(f"|n| = {abs(n)} exceeds {N_2NPI_BOUND}", n=n)
        sign = -1.0 if n % 2 else 1.0
        ch = math.cosh(SQRT3 * n * math.pi)
        sh = math.sinh(SQRT3 * n * math.pi)
        c = (1.0 + 2.0 * sign * ch) / 3.0
        s = complex(1.0 - sign * ch, SQRT3 * sign * sh) / 3.0
        d = complex(1.0 - sign * ch, -SQRT3 * sign * sh) / 3.0
        return CsdTriple(complex(c), s, d)

    # ------------------------------------------------------------------
    # identity algebra
    # ------------------------------------------------------------------

    def identity_residuals(self, z1: complex, z2: complex) -> Dict[str, float]:
        """Scaled residual of every identity family at (z1, z2)."""
        z1, z2 = complex(z1), complex(z2)
        c, s, d = (complex(x) for x in self.csd(z1))
        out: Dict[str, float] = {}

        # derivative chain via the Cauchy integral on |zeta - z1| = 1
        theta = 2.0 * np.pi * np.arange(32) / 32
        ring = z1 + np.exp(1j * theta)
        rc, rs, rd = self.csd(ring)
        weight = np.exp(-1j * theta) / theta.size
        dc, ds, dd = rc @ weight, rs @ weight, rd @ weight
        out["derivative"] = max(
            _rel(dc, d, rc), _rel(ds, c, rs), _rel(dd, s, rd)
        )

        cc, sc, dc_ = (complex(x) for x in self.csd(z1.conjugate()))
        out["conjugation"] = max(
            _rel(c.conjugate(), cc, c), _rel(s.conjugate(), sc, s), _rel(d.conjugate(), dc_, d)
        )

        cw, sw, dw = (complex(x) for x in self.csd(OMEGA * z1))
        out["rotation"] = max(
            _rel(cw, c, c), _rel(sw, OMEGA * s, s), _rel(dw, OMEGA2 * d, d)
        )

        euler = []
        for wk in OMEGA_POWERS:
            wk2 = wk.conjugate()  # w^{2k} = conj(w^k)
            euler.append(_rel(np.exp(wk * z1), c + wk * s + wk2 * d, c, s, d))
        out["euler"] = max(euler)

        out["main"] = _rel(c**3 + s**3 + d**3 - 3 * c * s * d, 1.0, c**3, s**3, d**3, 3 * c * s * d)

        c2, s2, d2 = (complex(x) for x in self.csd(z2))
        cp, sp, dp = (complex(x) for x in self.csd(z1 + z2))
        out["summation"] = max(
            _rel(cp, c * c2 + s * d2 + d * s2, c * c2, s * d2, d * s2),
            _rel(sp, c * s2 + s * c2 + d * d2, c * s2, s * c2, d * d2),
            _rel(dp, c * d2 + s * s2 + d * c2, c * d2, s * s2, d * c2),
        )

        cd2, sd2, dd2 = (complex(x) for x in self.csd(2 * z1))
        out["double_angle"] = max(
            _rel(cd2, c * c + 2 * s * d, c * c, s * d),
            _rel(sd2, d * d + 2 * c * s, d * d, c * s),
            _rel(dd2, s * s + 2 * c * d, s * s, c * d),
        )

        cm, sm, dm = (complex(x) for x in self.csd(-z1))
        out["reflection"] = max(
            _rel(cm, c * c - s * d, c * c, s * d),
            _rel(sm, d * d - c * s, d * d, c * s),
            _rel(dm, s * s - c * d, s * s, c * d),
        )

        ts, ss_, ds_ = (complex(x) for x in self.csd_series(z1))
        te, se, de = (complex(x) for x in self.exponential_form(z1))
        bound = math.exp(abs(z1))  # bounds every partial sum of the series
        out["taylor"] = max(_rel(ts, te, bound), _rel(ss_, se, bound), _rel(ds_, de, bound))

        # c(i*lam) through the sine/cosine products behind Delta(0, lam)
        lam = -1j * z1
        half = np.array([lam, OMEGA * lam, OMEGA2 * lam]) / 2.0
        cos_prod = complex(np.prod(np.cos(half)))
        sin_prod = complex(np.prod(np.sin(half)))
        trig = (4.0 * cos_prod - 1.0 - 4.0j * sin_prod) / 3.0
        out["trig_product"] = _rel(c, trig, 4.0 * cos_prod, 4.0 * sin_prod)
        return out

    def closed_form_residuals(self, n: int) -> Dict[str, float]:
        """Residuals of the closed forms at 2n*pi*i against direct evaluation."""
        closed = self.csd_at_2npi(n)
        direct = self.csd_eval(2j * math.pi * n)
        mirror = self.csd_at_2npi(-n)
        c, s, d = closed
        return {
            "closed_form": max(_rel(a, b, a, b) for a, b in zip(closed, direct)),
            "unit_sum": _rel(c + s + d, 1.0, c, s, d),
            "conjugate_swap": max(
                _rel(mirror.c, c, c), _rel(mirror.s, d, d), _rel(mirror.d, s, s)
            ),
        }

    def identities_hold(self, z1: complex, z2: complex, tol: float = IDENTITY_TOL) -> bool:
        return all(r <= tol for r in self.identity_residuals(z1, z2).values())


ctrig_service = CtrigService()

"""Potential service - Fourier coefficients, evaluation and the transform pack of v."""
import logging
import math
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.linalg import expm

from app.config import settings
from app.errors import AliasRisk, NormMismatch, OverflowDomain
from app.models import Potential, PotentialKind, Symmetry, TransformPack, TWO_PI
from app.quadrature import integrate, integrate_triangle
from app.services.ctrig_service import (
    OMEGA_INVERSE_POWERS,
    OMEGA_POWERS,
    ctrig_service,
)

LOG = logging.getLogger(__name__)

LAMBDA_BOUND = 700.0

# (vc, vs, vd, vc*, vs*, vd*)
Transforms = Tuple[complex, complex, complex, complex, complex, complex]


def _phi1(h: np.ndarray) -> np.ndarray:
    """(e^h - 1)/h, continued by 1 at h = 0."""
    h = np.asarray(h, dtype=complex)
    out = np.ones_like(h)
    nz = h != 0
    out[nz] = np.expm1(h[nz]) / h[nz]
    return out


def exp_divided_difference(nodes: np.ndarray) -> np.ndarray:
    """exp[z_0, ..., z_k] for every row of ``nodes`` (shape (..., k+1)).

    The divided difference is the (0, k) entry of expm of the upper
    bidiagonal matrix with the nodes on the diagonal and ones above it;
    confluent nodes need no special casing.
    """
    nodes = np.asarray(nodes, dtype=complex)
    k = nodes.shape[-1]
    mats = np.zeros(nodes.shape + (k,), dtype=complex)
    idx = np.arange(k)
    mats[..., idx, idx] = nodes
    mats[..., idx[:-1], idx[1:]] = 1.0
    return expm(mats)[..., 0, k - 1]


def _combine(vk: np.ndarray, star: np.ndarray) -> Transforms:
    vc = vk.sum() / 3.0
    vs = (OMEGA_INVERSE_POWERS * vk).sum() / 3.0
    vd = (OMEGA_POWERS * vk).sum() / 3.0
    vc_star = star.sum() / 3.0
    vs_star = (OMEGA_POWERS * star).sum() / 3.0
    vd_star = (OMEGA_INVERSE_POWERS * star).sum() / 3.0
    return tuple(complex(x) for x in (vc, vs, vd, vc_star, vs_star, vd_star))


class PotentialService:
    """Service for potentials and their Fourier-type transforms."""

    # ------------------------------------------------------------------
    # coefficients and values
    # ------------------------------------------------------------------

    def fourier_coefficient(self, v: Potential, n: int) -> complex:
        """v_n = <v, e^{2n*pi*i*x}>."""
        if v.kind is PotentialKind.FOURIER:
            return v.coefficient_map().get(n, 0j)
        if v.kind is PotentialKind.SAMPLES:
            return complex(self._grid_coefficients(v, abs(n))[n])
        return self._named_coefficient(v.name, -n if v.reflected else n)

    def coefficients(self, v: Potential, n_max: int) -> np.ndarray:
        """Vector (v_{-n_max}, ..., v_{n_max})."""
        if v.kind is PotentialKind.SAMPLES:
            table = self._grid_coefficients(v, n_max)
            return np.array([table[n] for n in range(-n_max, n_max + 1)])
        return np.array([self.fourier_coefficient(v, n) for n in range(-n_max, n_max + 1)])

    def quadrature_coefficient(self, v: Potential, n: int) -> complex:
        """v_n by composite Gauss-Legendre on the point values."""
        return complex(integrate(lambda x: self.evaluate(v, x) * np.exp(-1j * TWO_PI * n * x)))

    def _grid_coefficients(self, v: Potential, n_max: int) -> Dict[int, complex]:
        if 2 * n_max >= v.count:
            raise AliasRisk(
                f"grid of {v.count} samples cannot resolve mode {n_max}",
                count=v.count,
                n=n_max,
            )
        fft = np.fft.fft(np.asarray(v.samples)) / v.count
        return {n: complex(fft[n % v.count]) for n in range(-n_max, n_max + 1)}

    @staticmethod
    def _named_coefficient(name: str, n: int) -> complex:
        if name == "unit":
            return 1.0 + 0j if n == 0 else 0j
        if name == "g":
            return 0.5 + 0j if n == 0 else 1.0 / (1j * TWO_PI * n)
        h = 1.0 / 12.0 if n == 0 else 1.0 / (2.0 * n * n * math.pi**2)
        return complex(h) if name == "h" else 1j * h

    def evaluate(self, v: Potential, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if v.kind is PotentialKind.FOURIER:
            if not v.coeffs:
                return np.zeros(x.shape, dtype=complex)
            ns = np.array([n for n, _ in v.coeffs])
            cs = np.array([c for _, c in v.coeffs])
            return np.exp(1j * TWO_PI * x[..., None] * ns) @ cs
        if v.kind is PotentialKind.SAMPLES:
            # trigonometric interpolant on modes |n| < count/2
            n_max = (v.count - 1) // 2
            table = self._grid_coefficients(v, n_max)
            ns = np.arange(-n_max, n_max + 1)
            cs = np.array([table[n] for n in ns])
            return np.exp(1j * TWO_PI * x[..., None] * ns) @ cs
        t = 1.0 - x if v.reflected else x
        if v.name == "unit":
            return np.ones(x.shape, dtype=complex)
        if v.name == "g":
            return (1.0 - t).astype(complex)
        if v.name == "h":
            return ((t - 0.5) ** 2).astype(complex)
        return 1j * (t - 0.5) ** 2

    def as_function(self, v: Potential) -> Callable[[np.ndarray], np.ndarray]:
        return lambda x: self.evaluate(v, x)

    # ------------------------------------------------------------------
    # constructions
    # ------------------------------------------------------------------

    def reflect(self, v: Potential) -> Potential:
        """w(x) = v(1 - x); for Fourier series w_n = v_{-n}."""
        if v.kind is PotentialKind.FOURIER:
            return Potential.fourier({-n: c for n, c in v.coeffs})
        if v.kind is PotentialKind.SAMPLES:
            # x_j -> 1 - x_j = x_{count - j}, with x_0 fixed by periodicity
            return Potential.from_samples(np.roll(np.asarray(v.samples)[::-1], 1))
        if v.name == "g":
            return Potential.named(v.name, reflected=not v.reflected)
        return v

    def to_fourier(self, v: Potential, n_max: int) -> Potential:
        if v.kind is PotentialKind.FOURIER:
            return Potential.fourier({n: c for n, c in v.coeffs if abs(n) <= n_max})
        if v.kind is PotentialKind.SAMPLES and 2 * n_max >= v.count:
            LOG.debug("truncating %s to modes below count/2", v.describe())
            n_max = (v.count - 1) // 2
        coeffs = self.coefficients(v, n_max)
        return Potential.fourier({n: c for n, c in zip(range(-n_max, n_max + 1), coeffs) if c != 0})

    def combine(self, v: Potential, w: Potential, scale: complex, n_max: int) -> Potential:
        """Fourier series of v + scale * w on modes |n| <= n_max."""
        out = self.to_fourier(v, n_max).coefficient_map()
        for n, c in self.to_fourier(w, n_max).coeffs:
            out[n] = out.get(n, 0j) + scale * c
        return Potential.fourier(out)

    def normalize(self, v: Potential, n_max: Optional[int] = None) -> Potential:
        """v / ||v||; closed forms are first truncated to modes |n| <= n_max."""
        if v.kind is PotentialKind.NAMED:
            v = self.to_fourier(v, n_max or settings.truncation_n)
        if v.norm == 0.0:
            raise NormMismatch("cannot normalize the zero potential", norm=0.0)
        if v.kind is PotentialKind.SAMPLES:
            return Potential.from_samples(np.asarray(v.samples) / v.norm)
        return Potential.fourier({n: c / v.norm for n, c in v.coeffs})

    def symmetry_class(self, v: Potential, n_max: Optional[int] = None) -> Symmetry:
        """even: conj(v(1-x)) = v(x), all v_n real; odd: conj(v(1-x)) = -v(x), all v_n imaginary."""
        if v.kind is PotentialKind.FOURIER:
            coeffs = np.array([c for _, c in v.coeffs], dtype=complex)
        else:
            n_max = n_max or settings.truncation_n
            if v.kind is PotentialKind.SAMPLES:
                n_max = min(n_max, (v.count - 1) // 2)
            coeffs = self.coefficients(v, n_max)
        tol = 1e-10 * max(v.norm, np.finfo(float).tiny)
        if coeffs.size == 0 or np.all(np.abs(coeffs.imag) <= tol):
            return Symmetry.EVEN
        if np.all(np.abs(coeffs.real) <= tol):
            return Symmetry.ODD
        return Symmetry.NONE

    # ------------------------------------------------------------------
    # transforms
    # ------------------------------------------------------------------

    def _check_lambda(self, lam: complex) -> None:
        if abs(lam) > LAMBDA_BOUND:
            raise OverflowDomain(f"|lambda| = {abs(lam):g} exceeds {LAMBDA_BOUND:g}", lam=lam)

    def basic_transforms(self, v: Potential, lam: complex) -> Transforms:
        """(vc, vs, vd, vc*, vs*, vd*) at lambda.

        v~_k(lam) = int e^{-i w^k lam x} v(x) dx, v~_k*(lam) = int e^{i conj(w)^k lam x} conj(v(x)) dx,
        recombined as vc = mean_k v~_k, vs = mean_k w^{-k} v~_k, vd = mean_k w^k v~_k.
        """
        lam = complex(lam)
        self._check_lambda(lam)
        if v.kind is PotentialKind.FOURIER:
            if not v.coeffs:
                return (0j,) * 6
            ns = TWO_PI * np.array([n for n, _ in v.coeffs], dtype=float)
            cs = np.array([c for _, c in v.coeffs])
            vk = _phi1(1j * (ns[None, :] - OMEGA_POWERS[:, None] * lam)) @ cs
            star = _phi1(1j * (OMEGA_INVERSE_POWERS[:, None] * lam - ns[None, :])) @ cs.conj()
            return _combine(vk, star)
        f = self.as_function(v)
        vk = integrate(lambda x: np.exp(-1j * OMEGA_POWERS[:, None] * lam * x) * f(x))
        star = integrate(lambda x: np.exp(1j * OMEGA_INVERSE_POWERS[:, None] * lam * x) * np.conj(f(x)))
        return _combine(np.asarray(vk), np.asarray(star))

    def convolution_transform(self, v: Potential, lam: complex) -> complex:
        """m(lam) = int_0^1 int_0^x d(i lam (x - t)) v(t) conj(v(x)) dt dx.

        Written as mean_k w^k phi_k with phi_k = int int_{t<x} e^{i w^k lam (x-t)} conj(v(x)) v(t).
        """
        lam = complex(lam)
        self._check_lambda(lam)
        gamma = OMEGA_POWERS * lam
        if v.kind is PotentialKind.FOURIER:
            if not v.coeffs:
                return 0j
            ns = np.array([n for n, _ in v.coeffs], dtype=float)
            cs = np.array([c for _, c in v.coeffs])
            p = ns[:, None]
            q = ns[None, :]
            nodes = np.zeros((3, ns.size, ns.size, 3), dtype=complex)
            nodes[..., 1] = 1j * (gamma[:, None, None] - TWO_PI * p)
            nodes[..., 2] = 2j * math.pi * (q - p)
            dd = exp_divided_difference(nodes)
            phi = np.einsum("p,q,kpq->k", cs.conj(), cs, dd)
        else:
            f = self.as_function(v)
            phi = integrate_triangle(
                lambda X, T: np.exp(1j * gamma[:, None, None] * (X - T)) * np.conj(f(X)) * f(T)
            )
        return complex((OMEGA_POWERS * np.asarray(phi)).sum() / 3.0)

    def transform_pack(self, v: Potential, lam: complex) -> TransformPack:
        lam = complex(lam)
        vt = self.basic_transforms(v, lam)
        wt = self.basic_transforms(self.reflect(v), lam)
        m = self.convolution_transform(v, lam)
        m_star = self.convolution_transform(v, lam.conjugate()).conjugate()
        return TransformPack(lam, *vt, *wt, m, m_star)

    def transform_identity_residuals(self, v: Potential, lam: complex) -> Dict[str, float]:
        """Residuals of the reflection displays and of the m + m* display at lambda."""
        lam = complex(lam)
        pack = self.transform_pack(v, lam)
        wc, ws, wd, _, _, _ = self.basic_transforms(self.reflect(v), -lam)
        c, s, d = ctrig_service.csd_eval(1j * lam)

        def rel(lhs, *terms):
            scale = max([1.0] + [abs(t) for t in terms])
            return abs(lhs - sum(terms)) / scale

        return {
            "reflection_d": rel(wd, c * pack.vd, s * pack.vs, d * pack.vc),
            "reflection_s": rel(ws, c * pack.vs, s * pack.vc, d * pack.vd),
            "reflection_c": rel(wc, c * pack.vc, s * pack.vd, d * pack.vs),
            "convolution": rel(
                pack.m + pack.m_star,
                pack.vd * pack.vc_star,
                pack.vs * pack.vs_star,
                pack.vc * pack.vd_star,
            ),
        }


potential_service = PotentialService()

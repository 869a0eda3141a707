"""Forward service - characteristic functions, the secular function and the spectrum of L_alpha.

The spectrum of L_alpha splits into
  sigma0: z_n = (2n*pi)^3 with v_n = 0 (unmoved),
  sigma2: zeros of Q(z) = 1 + alpha * sum |v_n|^2 / (z_n - z),
and the zeros of Q strictly interlace the poles z_n with v_n != 0 (sigma1).
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.config import settings
from app.errors import NearZeroLambda, OverflowDomain, TruncationTooSmall
from app.models import (
    PerturbedOperator,
    Potential,
    SecularFunction,
    SpectrumTag,
    mode_eigenvalue,
    mode_index,
)
from app.schemas import SpectrumData, SpectrumEntry
from app.services.ctrig_service import EXP_LIMIT, OMEGA, OMEGA2, ctrig_service
from app.services.potential_service import potential_service

LOG = logging.getLogger(__name__)

NEAR_ZERO_LAMBDA = 1e-4
# below this |lambda| the closed form cancels; the series head c0 + c1 lam^3 + c2 lam^6 is used
SERIES_LAMBDA = 0.05
# sum_{n>=1} (2n*pi)^-6 = zeta(6) / (2*pi)^6
INV_SIXTH_POWER_SUM = 1.0 / 60480.0
DET_MIN_LAMBDA = 1e-3
MAX_BISECTIONS = 400


def det_cofactor(matrix: Sequence[Sequence[complex]]) -> complex:
    """Determinant by cofactor expansion along the first row."""
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    if n == 2:
        return matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]
    total = 0j
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        total += (-1) ** j * matrix[0][j] * det_cofactor(minor)
    return total


def bisect(
    f: Callable[[float], float],
    a: float,
    b: float,
    left_sign: float,
    tol: float,
) -> Tuple[float, float, float]:
    """Shrink (a, b) around the sign change of f; f is never evaluated at a or b.

    ``left_sign`` is the sign of f just right of a. Returns (root, a, b).
    """
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b or (b - a) <= tol * max(1.0, abs(a), abs(b)):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid, mid, mid
        if math.copysign(1.0, fm) == left_sign:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b), a, b


class ForwardService:
    """Service for the forward spectral problem."""

    # ------------------------------------------------------------------
    # characteristic functions
    # ------------------------------------------------------------------

    def delta0(self, lam: complex) -> complex:
        """Delta(0, lam) = -8i sin(lam/2) sin(w lam/2) sin(w^2 lam/2) = 3[c(i lam) - c(-i lam)]."""
        lam = complex(lam)
        args = np.array([lam, OMEGA * lam, OMEGA2 * lam]) / 2.0
        if np.max(np.abs(args.imag)) > EXP_LIMIT:
            raise OverflowDomain("sin argument leaves the double range", lam=lam)
        return complex(-8j * np.prod(np.sin(args)))

    def delta0_zeros(self, n_max: int) -> List[float]:
        """Real zeros 2n*pi, |n| <= n_max, located by bisection of Im Delta(0, lam)."""
        f = lambda lam: self.delta0(lam).imag  # noqa: E731
        zeros = []
        for n in range(-n_max, n_max + 1):
            a, b = 2 * n * math.pi - 1.0, 2 * n * math.pi + 1.0
            left = math.copysign(1.0, f(a))
            root, _, _ = bisect(f, a, b, left, settings.root_tol)
            zeros.append(root)
        return zeros

    def _f_term(self, v: Potential, lam: complex) -> complex:
        """F(lam) = m(lam)[3c(i lam) - 1] - vc w~d*(-lam) - vs w~s*(-lam) - vd w~c*(-lam)."""
        vc, vs, vd, _, _, _ = potential_service.basic_transforms(v, lam)
        _, _, _, wc_star, ws_star, wd_star = potential_service.basic_transforms(
            potential_service.reflect(v), -lam
        )
        m = potential_service.convolution_transform(v, lam)
        c = ctrig_service.csd_eval(1j * lam).c
        return m * (3.0 * c - 1.0) - vc * wd_star - vs * ws_star - vd * wc_star

    def delta_alpha(self, op: PerturbedOperator, lam: complex) -> complex:
        """Delta(alpha, lam) = Delta(0, lam) + (i alpha / lam^2) [F(lam) + F*(lam)]."""
        lam = complex(lam)
        if abs(lam) < NEAR_ZERO_LAMBDA:
            raise NearZeroLambda(
                f"|lambda| = {abs(lam):g} < {NEAR_ZERO_LAMBDA:g}; use series_constants", lam=lam
            )
        if op.alpha == 0.0:
            return self.delta0(lam)
        if abs(lam) < SERIES_LAMBDA:
            c0, c1, c2 = self._series_head(op)
            return c0 + c1 * lam**3 + c2 * lam**6
        d0 = self.delta0(lam)
        f = self._f_term(op.v, lam)
        f_star = self._f_term(op.v, lam.conjugate()).conjugate()
        return d0 + 1j * op.alpha / lam**2 * (f + f_star)

    def series_constants(self, op: PerturbedOperator) -> Tuple[complex, complex]:
        """(c0, c1) with Delta(alpha, lam) = c0 + c1 lam^3 + O(lam^6).

        c0 = i alpha |v_0|^2, c1 = -i (1 + alpha * sum_{n != 0} |v_n|^2 / (2n*pi)^3).
        """
        c0, c1, _ = self._series_head(op)
        return c0, c1

    def _series_head(self, op: PerturbedOperator) -> Tuple[complex, complex, complex]:
        """(c0, c1, c2) of Delta(0, lam) Q(lam^3) = c0 + c1 lam^3 + c2 lam^6 + O(lam^9).

        c2 = -i alpha (sum_{n != 0} |v_n|^2 / z_n^2 + |v_0|^2 / 60480).
        """
        n_max = op.truncation_n if op.v.is_fourier else max(op.truncation_n, settings.series_min_modes)
        if op.v.count:
            n_max = min(n_max, (op.v.count - 1) // 2)
        coeffs = potential_service.coefficients(op.v, n_max)
        v0 = coeffs[n_max]
        c0 = 1j * op.alpha * abs(v0) ** 2
        tail = math.fsum(
            abs(coeffs[n + n_max]) ** 2 / mode_eigenvalue(n) for n in range(-n_max, n_max + 1) if n != 0
        )
        c1 = -1j * (1.0 + op.alpha * tail)
        tail2 = math.fsum(
            abs(coeffs[n + n_max]) ** 2 / mode_eigenvalue(n) ** 2 for n in range(-n_max, n_max + 1) if n != 0
        )
        c2 = -1j * op.alpha * (tail2 + abs(v0) ** 2 * INV_SIXTH_POWER_SUM)
        return complex(c0), complex(c1), complex(c2)

    # ------------------------------------------------------------------
    # determinant cross-checks
    # ------------------------------------------------------------------

    def m0_matrix(self, lam: complex) -> List[List[complex]]:
        x = 1j * complex(lam)
        c, s, d = ctrig_service.csd_eval(x)
        return [
            [c - 1.0, s / x, d / x**2],
            [x * d, c - 1.0, s / x],
            [x**2 * s, x * d, c - 1.0],
        ]

    def malpha_matrix(self, op: PerturbedOperator, lam: complex) -> List[List[complex]]:
        lam = complex(lam)
        x = 1j * lam
        alpha = op.alpha
        c, s, d = ctrig_service.csd_eval(x)
        pack = potential_service.transform_pack(op.v, lam)
        wc, ws, wd, _, _, _ = potential_service.basic_transforms(potential_service.reflect(op.v), -lam)
        return [
            [pack.vc_star, pack.vs_star / x, pack.vd_star / x**2, -(1.0 + 1j * alpha * pack.m / lam**2)],
            [c - 1.0, s / x, d / x**2, -1j * alpha * wd / lam**2],
            [x * d, c - 1.0, s / x, alpha * ws / lam],
            [x**2 * s, x * d, c - 1.0, 1j * alpha * wc],
        ]

    def _check_det_lambda(self, lam: complex) -> None:
        if abs(lam) < DET_MIN_LAMBDA:
            raise NearZeroLambda(f"|lambda| = {abs(lam):g} < {DET_MIN_LAMBDA:g}", lam=lam)

    def det_M0_check(self, lam: complex) -> float:
        """|det M(0, lam) - Delta(0, lam)| / max(1, |Delta(0, lam)|)."""
        self._check_det_lambda(lam)
        target = self.delta0(lam)
        return abs(det_cofactor(self.m0_matrix(lam)) - target) / max(1.0, abs(target))

    def det_Malpha_check(self, op: PerturbedOperator, lam: complex) -> float:
        """|det M(alpha, lam) - Delta(alpha, lam)| / max(1, |Delta(alpha, lam)|)."""
        self._check_det_lambda(lam)
        target = self.delta_alpha(op, lam)
        return abs(det_cofactor(self.malpha_matrix(op, lam)) - target) / max(1.0, abs(target))

    # ------------------------------------------------------------------
    # secular function and spectrum
    # ------------------------------------------------------------------

    def secular(self, op: PerturbedOperator) -> SecularFunction:
        n_max = op.truncation_n
        coeffs = potential_service.coefficients(op.v, n_max)
        cutoff = settings.drop_tol * op.v.norm
        modes, poles, weights, values = [], [], [], []
        for n, c in zip(range(-n_max, n_max + 1), coeffs):
            if op.v.norm > 0.0 and abs(c) > cutoff:
                modes.append(n)
                poles.append(mode_eigenvalue(n))
                weights.append(abs(c) ** 2)
                values.append(complex(c))
        return SecularFunction(
            alpha=op.alpha,
            modes=tuple(modes),
            poles=tuple(poles),
            weights=tuple(weights),
            coefficients=tuple(values),
        )

    def unperturbed_spectrum(self, n_max: int) -> SpectrumData:
        return SpectrumData(
            truncation_N=n_max,
            entries=[SpectrumEntry(value=mode_eigenvalue(n)) for n in range(-n_max, n_max + 1)],
        )

    def _brackets(self, sec: SecularFunction) -> List[Tuple[float, float]]:
        poles = sec.poles
        brackets = list(zip(poles[:-1], poles[1:]))
        reach = abs(sec.alpha) * sec.total_weight + 1.0
        if sec.alpha > 0:
            brackets.append((poles[-1], poles[-1] + reach))
        else:
            brackets.insert(0, (poles[0] - reach, poles[0]))
        return brackets

    def _root_in(self, sec: SecularFunction, bracket: Tuple[float, float], tol: float) -> float:
        a, b = bracket
        q = lambda z: float(sec(z))  # noqa: E731
        left_sign = -math.copysign(1.0, sec.alpha)
        root, lo, hi = bisect(q, a, b, left_sign, tol)
        # one Newton polish, kept only if it stays inside the final bracket and improves |Q|
        slope = float(sec.derivative(root))
        if slope != 0.0 and lo < hi:
            polished = root - q(root) / slope
            if lo < polished < hi and abs(q(polished)) <= abs(q(root)):
                root = polished
        return root

    def secular_roots(self, sec: SecularFunction, tol: Optional[float] = None) -> List[float]:
        """Zeros of Q, one per bracket between consecutive poles plus the extreme one."""
        if sec.alpha == 0.0 or not sec.poles:
            return []
        tol = tol or settings.root_tol
        brackets = self._brackets(sec)
        if settings.threads > 1 and len(brackets) > 8:
            with ThreadPoolExecutor(max_workers=settings.threads) as pool:
                roots = list(pool.map(lambda br: self._root_in(sec, br, tol), brackets))
        else:
            roots = [self._root_in(sec, br, tol) for br in brackets]
        return sorted(roots)

    def compute_spectrum(
        self,
        op: PerturbedOperator,
        window: Optional[Tuple[float, float]] = None,
    ) -> SpectrumData:
        """sigma(L_alpha) = sigma0 + sigma2 on modes |n| <= N."""
        n_max = op.truncation_n
        lo, hi = op.window
        if window is not None and (window[0] < lo or window[1] > hi):
            raise TruncationTooSmall(
                f"window [{window[0]:g}, {window[1]:g}] exceeds the pole window [{lo:g}, {hi:g}]",
                truncation_n=n_max,
            )
        sec = self.secular(op)
        if op.alpha == 0.0:
            moved = set()
        else:
            moved = set(sec.modes)
        entries: Dict[float, SpectrumEntry] = {
            mode_eigenvalue(n): SpectrumEntry(value=mode_eigenvalue(n), tag=SpectrumTag.SIGMA0)
            for n in range(-n_max, n_max + 1)
            if n not in moved
        }
        roots = self.secular_roots(sec, op.tol) if moved else []
        for root in roots:
            n = mode_index(root)
            z_n = mode_eigenvalue(n)
            if z_n in entries and abs(root - z_n) <= settings.match_tol * max(1.0, abs(z_n)):
                entries[z_n] = SpectrumEntry(value=z_n, multiplicity=2, tag=SpectrumTag.BOTH)
                LOG.info("double eigenvalue at z_%d = %.17g", n, z_n)
            else:
                entries[root] = SpectrumEntry(value=root, tag=SpectrumTag.SIGMA2)
        ordered = [entries[k] for k in sorted(entries)]
        if window is not None:
            ordered = [e for e in ordered if window[0] <= e.value <= window[1]]
        LOG.debug("spectrum: %d sigma0, %d sigma2 entries (N=%d)", len(entries) - len(roots), len(roots), n_max)
        return SpectrumData(truncation_N=n_max, entries=ordered)

    def secular_samples(self, sec: SecularFunction, per_interval: int = 32) -> List[Tuple[float, float]]:
        """(z, Q(z)) samples between and around the poles, for plotting."""
        if not sec.poles:
            return []
        reach = max(1.0, abs(sec.alpha) * sec.total_weight + 1.0)
        edges = [sec.poles[0] - reach] + list(sec.poles) + [sec.poles[-1] + reach]
        frac = np.arange(1, per_interval + 1) / (per_interval + 1)
        points = np.concatenate([a + (b - a) * frac for a, b in zip(edges[:-1], edges[1:])])
        return [(float(z), float(sec(z))) for z in points]

    # ------------------------------------------------------------------
    # eigenfunctions
    # ------------------------------------------------------------------

    def eigenfunction_coefficients(self, op: PerturbedOperator, entry: SpectrumEntry) -> List[Dict[int, complex]]:
        """Fourier coefficients of the normalized eigenfunction(s) of ``entry``."""
        out: List[Dict[int, complex]] = []
        if entry.in_sigma0:
            out.append({mode_index(entry.value): 1.0 + 0j})
        if entry.in_sigma2:
            sec = self.secular(op)
            mu = entry.value
            norm = math.sqrt(float(sec.g_prime(mu)))
            out.append({
                n: c / (z - mu) / norm for n, z, c in zip(sec.modes, sec.poles, sec.coefficients)
            })
        return out

    def eigenfunction(self, op: PerturbedOperator, entry: SpectrumEntry, x_grid) -> List[np.ndarray]:
        return [
            potential_service.evaluate(Potential.fourier(coeffs), x_grid)
            for coeffs in self.eigenfunction_coefficients(op, entry)
        ]

    # ------------------------------------------------------------------
    # canonical products
    # ------------------------------------------------------------------

    def hadamard_check(self, op: PerturbedOperator, lam: float, n_factors: Optional[int] = None) -> float:
        """Relative mismatch of Delta(alpha, lam) against its truncated canonical product.

        Delta(alpha, lam) = c0 prod(1 - lam^3/zeta) when 0 is not an eigenvalue,
        and c1 lam^3 prod'(1 - lam^3/zeta) otherwise; zeros beyond the
        truncation window are the unmoved z_n, taken in +-n pairs.
        """
        n_factors = n_factors or settings.hadamard_factors
        spectrum = self.compute_spectrum(op)
        zeros = spectrum.with_multiplicity()
        n_max = op.truncation_n
        for n in range(n_max + 1, n_factors + 1):
            zeros.extend([mode_eigenvalue(-n), mode_eigenvalue(n)])
        c0, c1 = self.series_constants(op)
        z = complex(lam) ** 3
        if 0.0 in zeros:
            zeros.remove(0.0)
            lead = c1 * z
        else:
            lead = c0
        zeta = np.array(sorted(zeros, key=abs), dtype=float)
        log_prod = np.sum(np.log((1.0 - z / zeta).astype(complex)))
        product = lead * np.exp(log_prod)
        delta = self.delta_alpha(op, lam)
        return float(abs(delta - product) / abs(delta))


forward_service = ForwardService()

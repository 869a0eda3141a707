"""Inverse service - recover (alpha, v) from spectra.

Two spectra sigma(L0), sigma(L_alpha(v)) give alpha and |v_n|^2 under the
normalization ||v|| = 1. The phases come from the extra spectra of
v + g, v + ig (g = 1 - x), or from v + h / v + i h (h = (x - 1/2)^2) when
v is known to be even or odd.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Sequence, Tuple

import numpy as np

from app.config import settings
from app.errors import (
    InconsistentSpectra,
    NormMismatch,
    SignInconsistency,
    SlowConvergence,
    SymmetryViolation,
)
from app.models import (
    Branch,
    Classification,
    PerturbedOperator,
    Potential,
    SpectraBundle,
    SpectralData,
    SpectrumTag,
    mode_eigenvalue,
    mode_index,
)
from app.schemas import (
    CoefficientOut,
    ComplexOut,
    InverseResult,
    ResidualOut,
    SpectrumData,
    WeightOut,
)
from app.services.forward_service import forward_service
from app.services.potential_service import potential_service

LOG = logging.getLogger(__name__)

# recovered coefficients below this are reported as exact zeros
CLEAN_TOL = 1e-9

ROUTE_FORMS = {"four": ("g",), "even": ("h",), "odd": ("h_tilde",)}


def _matches(a: float, b: float) -> bool:
    return abs(a - b) <= settings.match_tol * max(1.0, abs(a), abs(b))


def _log_product(values: Sequence[float]) -> Tuple[float, float]:
    """(log |prod|, sign of prod) of real factors."""
    sign = 1.0
    total = 0.0
    for x in values:
        if x < 0:
            sign = -sign
        total += math.log(abs(x))
    return total, sign


class InverseService:
    """Service for the inverse spectral problem."""

    # ------------------------------------------------------------------
    # two-spectra route
    # ------------------------------------------------------------------

    def ambarzumyan_check(self, sigma_L0: SpectrumData, sigma_alpha: SpectrumData) -> bool:
        """True iff the spectra coincide entrywise (with multiplicity) within match_tol."""
        a = sigma_L0.with_multiplicity()
        b = sigma_alpha.with_multiplicity()
        return len(a) == len(b) and all(_matches(x, y) for x, y in zip(a, b))

    def _check_reference(self, sigma_L0: SpectrumData) -> None:
        n_max = sigma_L0.truncation_N
        values = sigma_L0.values
        if len(values) != 2 * n_max + 1 or any(
            not _matches(z, mode_eigenvalue(n)) for z, n in zip(values, range(-n_max, n_max + 1))
        ):
            raise InconsistentSpectra("sigma_L0 is not {(2n*pi)^3 : |n| <= N}", truncation_n=n_max)

    def _split(self, sigma_alpha: SpectrumData) -> Tuple[List[float], List[float]]:
        """(sigma0, sigma2) values: from the tags when present, else by matching the lattice."""
        if any(e.tag is not SpectrumTag.SIGMA0 for e in sigma_alpha.entries):
            sigma0 = sigma_alpha.sigma0
            for z in sigma0:
                if not _matches(z, mode_eigenvalue(mode_index(z))):
                    raise InconsistentSpectra(f"entry {z:.17g} is tagged sigma0 but is not some (2n*pi)^3")
            return sigma0, sigma_alpha.sigma2
        sigma0, sigma2 = [], []
        for z in sigma_alpha.values:
            (sigma0 if _matches(z, mode_eigenvalue(mode_index(z))) else sigma2).append(z)
        return sigma0, sigma2

    def classify(self, sigma_L0: SpectrumData, sigma_alpha: SpectrumData) -> Classification:
        """sigma1 = sigma(L0) minus sigma0, with the interlacing of sigma2 against sigma1 verified."""
        if sigma_L0.truncation_N != sigma_alpha.truncation_N:
            raise InconsistentSpectra(
                "spectra use different truncation windows",
                sigma_L0=sigma_L0.truncation_N,
                sigma_alpha=sigma_alpha.truncation_N,
            )
        self._check_reference(sigma_L0)
        sigma0, sigma2 = self._split(sigma_alpha)
        kept = {mode_index(z) for z in sigma0}
        sigma1_modes = tuple(n for n in range(-sigma_L0.truncation_N, sigma_L0.truncation_N + 1) if n not in kept)
        sigma1 = tuple(mode_eigenvalue(n) for n in sigma1_modes)
        zero_in = 0 in kept
        branch = Branch.ZERO_IN_SPECTRUM if zero_in else Branch.ZERO_NOT_IN_SPECTRUM

        if not sigma1 and not sigma2:
            return Classification(tuple(sigma0), (), (), (), branch, 0)
        if len(sigma1) != len(sigma2):
            raise InconsistentSpectra(
                f"{len(sigma2)} moved eigenvalues against {len(sigma1)} poles",
                sigma1=len(sigma1),
                sigma2=len(sigma2),
            )
        if any(mu == 0.0 for mu in sigma2):
            raise InconsistentSpectra("a moved eigenvalue sits exactly at 0")

        sign = 1 if sigma2[0] > sigma1[0] else -1
        if sign > 0:
            chain = [x for pair in zip(sigma1, sigma2) for x in pair]
        else:
            chain = [x for pair in zip(sigma2, sigma1) for x in pair]
        if any(b <= a for a, b in zip(chain, chain[1:])):
            raise InconsistentSpectra("moved eigenvalues do not interlace the poles")
        return Classification(tuple(sigma0), sigma1, tuple(sigma2), sigma1_modes, branch, sign)

    def _product_ratio(self, cls: Classification, y: float) -> complex:
        """prod(1 - iy/mu) / (y prod'(1 - iy/z)) or / (-i prod(1 - iy/z)), per branch."""
        mu = np.asarray(cls.sigma2, dtype=float)
        if cls.branch is Branch.ZERO_NOT_IN_SPECTRUM:
            z = np.asarray([p for p in cls.sigma1 if p != 0.0], dtype=float)
            head = math.log(y)
        else:
            z = np.asarray(cls.sigma1, dtype=float)
            head = complex(np.log(-1j))
        total = np.sum(np.log(1.0 - 1j * y / mu)) - np.sum(np.log(1.0 - 1j * y / z)) - head
        return complex(np.exp(total))

    def leading_constant(self, cls: Classification) -> complex:
        """c0 or c1 from the imaginary-axis limit of the product ratio, Richardson-extrapolated in 1/y."""
        if cls.unperturbed:
            raise InconsistentSpectra("spectra coincide: no leading constant to recover")
        reach = max(abs(x) for x in cls.sigma1 + cls.sigma2)
        base = max(settings.richardson_base, 10.0 * reach)
        levels = settings.richardson_levels
        table = [[self._product_ratio(cls, base * 10.0**j)] for j in range(levels)]
        for j in range(1, levels):
            for m in range(1, j + 1):
                prev, coarse = table[j][m - 1], table[j - 1][m - 1]
                table[j].append(prev + (prev - coarse) / (10.0**m - 1.0))
        best, second = table[-1][-1], table[-2][-2]
        if abs(best - second) > settings.richardson_tol * abs(best):
            raise SlowConvergence(
                "imaginary-axis limit did not settle",
                last=best,
                previous=second,
            )
        return 1.0 / best

    def recover_weights(self, cls: Classification, constant: complex) -> Dict[int, float]:
        """alpha |v_n|^2 for every pole z_n in sigma1, by the residue products."""
        weights: Dict[int, float] = {}
        for n, z_n in zip(cls.sigma1_modes, cls.sigma1):
            if cls.branch is Branch.ZERO_NOT_IN_SPECTRUM and n == 0:
                weights[n] = (-1j * constant).real
                continue
            log_num, sign_num = _log_product([(mu - z_n) / mu for mu in cls.sigma2])
            others = [z for m, z in zip(cls.sigma1_modes, cls.sigma1) if m != n and z != 0.0]
            log_den, sign_den = _log_product([(z - z_n) / z for z in others])
            ratio = sign_num * sign_den * math.exp(log_num - log_den)
            if cls.branch is Branch.ZERO_NOT_IN_SPECTRUM:
                weights[n] = (1j * constant * ratio).real
            else:
                weights[n] = (1j * constant * z_n * ratio).real
        largest = max((abs(w) for w in weights.values()), default=0.0)
        stray = [n for n, w in weights.items() if w * cls.alpha_sign < 0 and abs(w) > settings.recon_tol * largest]
        if stray:
            raise SignInconsistency(
                f"weights at modes {stray} disagree in sign with the interlacing pattern",
                alpha_sign=cls.alpha_sign,
            )
        return weights

    def recover_spectral_data(self, sigma_L0: SpectrumData, sigma_alpha: SpectrumData) -> SpectralData:
        """classify -> leading_constant -> recover_weights -> alpha = sum of weights."""
        cls = self.classify(sigma_L0, sigma_alpha)
        if cls.unperturbed:
            return SpectralData(alpha=0.0, weights={}, moduli_sq={}, branch=cls.branch, constant=0j)
        constant = self.leading_constant(cls)
        weights = self.recover_weights(cls, constant)
        alpha = math.fsum(weights.values())
        LOG.debug("recovered %d weights, alpha=%.12g, branch=%s", len(weights), alpha, cls.branch.value)
        return SpectralData(
            alpha=alpha,
            weights=weights,
            moduli_sq={n: w / alpha for n, w in weights.items()},
            branch=cls.branch,
            constant=constant,
        )

    # ------------------------------------------------------------------
    # reconstruction routes
    # ------------------------------------------------------------------

    def _recover_all(self, bundle: SpectraBundle, spectra: List[SpectrumData]) -> List[SpectralData]:
        workers = max(1, min(len(spectra), settings.threads))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda s: self.recover_spectral_data(bundle.sigma_L0, s), spectra))

    def _indeterminate(self) -> InverseResult:
        LOG.info("spectra coincide with sigma(L0): v = 0, alpha is not identifiable")
        return InverseResult(alpha=None, diagnostics={"ambarzumyan": True})

    def _result(
        self,
        route: str,
        data: SpectralData,
        coefficients: Dict[int, complex],
        sigma_alpha: SpectrumData,
    ) -> InverseResult:
        clean = {n: c for n, c in sorted(coefficients.items()) if abs(c) > CLEAN_TOL}
        norm_sq = math.fsum(abs(c) ** 2 for c in clean.values())
        if abs(norm_sq - 1.0) > settings.recon_tol:
            raise NormMismatch(f"recovered ||v||^2 = {norm_sq:.12g}", norm_sq=norm_sq)
        residuals = [
            ResidualOut(n=n, value=abs(data.alpha * abs(clean.get(n, 0j)) ** 2 - w))
            for n, w in sorted(data.weights.items())
        ]
        result = InverseResult(
            alpha=data.alpha,
            coefficients=[CoefficientOut(n=n, re=c.real, im=c.imag) for n, c in clean.items()],
            weights=[WeightOut(n=n, value=w) for n, w in sorted(data.weights.items())],
            branch=data.branch,
            residuals=residuals,
            leading_constant=ComplexOut.of(data.constant),
            diagnostics={"route": route, "norm_sq": norm_sq},
        )
        result.diagnostics["spectral_residual"] = self.spectral_residual(result, sigma_alpha)
        LOG.info("%s-spectra reconstruction: alpha=%.12g, %d coefficients", route, data.alpha, len(clean))
        return result

    def reconstruct_four_spectra(self, bundle: SpectraBundle) -> InverseResult:
        if self.ambarzumyan_check(bundle.sigma_L0, bundle.sigma_v):
            return self._indeterminate()
        if bundle.sigma_v_plus_g is None or bundle.sigma_v_plus_ig is None:
            raise InconsistentSpectra("four-spectra route needs sigma(v+g) and sigma(v+ig)")
        data_v, data_g, data_ig = self._recover_all(
            bundle, [bundle.sigma_v, bundle.sigma_v_plus_g, bundle.sigma_v_plus_ig]
        )
        alpha = data_v.alpha
        g = Potential.named("g")
        coefficients: Dict[int, complex] = {}
        phase_misfit = 0.0
        # v_n = 0 exactly where z_n is unmoved by v
        for n, w_v in sorted(data_v.weights.items()):
            g_n = potential_service.fourier_coefficient(g, n)
            base = w_v + alpha * abs(g_n) ** 2
            re = (data_g.weights.get(n, 0.0) - base) / (2.0 * alpha)
            im = (data_ig.weights.get(n, 0.0) - base) / (2.0 * alpha)
            v_n = complex(re, im) / g_n.conjugate()
            coefficients[n] = v_n
            phase_misfit = max(phase_misfit, abs(abs(v_n) ** 2 - w_v / alpha))
        if phase_misfit > settings.recon_tol:
            LOG.warning(
                "four-spectra moduli disagree with two-spectra moduli by %.3g; "
                "v is pinned only up to what the g-spectra resolve",
                phase_misfit,
            )
        result = self._result("four", data_v, coefficients, bundle.sigma_v)
        result.diagnostics["modulus_misfit"] = phase_misfit
        return result

    def reconstruct_three_spectra(self, bundle: SpectraBundle, symmetry: str) -> InverseResult:
        """Even v (real v_n) from sigma(v+h); odd v (imaginary v_n) from sigma(v + i h)."""
        if symmetry not in ("even", "odd"):
            raise ValueError(f"symmetry must be even or odd, got {symmetry!r}")
        if self.ambarzumyan_check(bundle.sigma_L0, bundle.sigma_v):
            return self._indeterminate()
        if bundle.sigma_v_plus_h is None:
            raise InconsistentSpectra("three-spectra route needs sigma(v+h)")
        data_v, data_h = self._recover_all(bundle, [bundle.sigma_v, bundle.sigma_v_plus_h])
        alpha = data_v.alpha
        h = Potential.named("h")
        coefficients: Dict[int, complex] = {}
        for n, w_v in sorted(data_v.weights.items()):
            h_n = potential_service.fourier_coefficient(h, n).real
            product = (data_h.weights.get(n, 0.0) - w_v - alpha * h_n**2) / (2.0 * alpha)
            b_n = product / h_n
            if abs(b_n**2 - w_v / alpha) > settings.recon_tol:
                raise SymmetryViolation(
                    f"mode {n} is not {'real' if symmetry == 'even' else 'imaginary'}: "
                    f"{b_n**2:.12g} vs |v_n|^2 = {w_v / alpha:.12g}",
                    n=n,
                )
            coefficients[n] = complex(b_n) if symmetry == "even" else 1j * b_n
        return self._result(symmetry, data_v, coefficients, bundle.sigma_v)

    # ------------------------------------------------------------------
    # forward-generated bundles and residuals
    # ------------------------------------------------------------------

    def build_bundle(self, op: PerturbedOperator, route: str = "four") -> SpectraBundle:
        """Spectra of v, and of v + g, v + ig (four) or v + h (even) or v + i h (odd), with ||v|| = 1."""
        if route not in ROUTE_FORMS:
            raise ValueError(f"unknown route {route!r}")
        n_max = op.truncation_n
        if op.v.norm == 0.0:
            # v = 0 is kept as is: sigma(v) is sigma(L0)
            v = Potential.zero()
        else:
            v = potential_service.normalize(op.v, n_max)
            if abs(op.v.norm - 1.0) > settings.recon_tol:
                LOG.info("normalized v (||v|| was %.12g)", op.v.norm)
        shift = Potential.named(ROUTE_FORMS[route][0])
        targets = [v]
        if route == "four":
            targets += [potential_service.combine(v, shift, 1.0, n_max), potential_service.combine(v, shift, 1j, n_max)]
        else:
            targets.append(potential_service.combine(v, shift, 1.0, n_max))

        def spectrum(w: Potential) -> SpectrumData:
            return forward_service.compute_spectrum(PerturbedOperator(op.alpha, w, n_max, op.tol))

        workers = max(1, min(len(targets), settings.threads))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            spectra = list(pool.map(spectrum, targets))
        LOG.info("built %s bundle: alpha=%g, N=%d", route, op.alpha, n_max)
        sigma_L0 = forward_service.unperturbed_spectrum(n_max)
        if route == "four":
            return SpectraBundle(sigma_L0, spectra[0], sigma_v_plus_g=spectra[1], sigma_v_plus_ig=spectra[2])
        return SpectraBundle(sigma_L0, spectra[0], sigma_v_plus_h=spectra[1])

    def spectral_residual(self, result: InverseResult, sigma_alpha: SpectrumData) -> float:
        """Max relative deviation of the recovered operator's sigma2 from the input sigma2."""
        if result.alpha is None or not result.coefficients:
            return 0.0
        op = PerturbedOperator(result.alpha, result.to_potential(), sigma_alpha.truncation_N)
        recomputed = forward_service.compute_spectrum(op).sigma2
        given = sigma_alpha.sigma2
        if len(recomputed) != len(given):
            return math.inf
        return max((abs(a - b) / max(1.0, abs(b)) for a, b in zip(recomputed, given)), default=0.0)


inverse_service = InverseService()

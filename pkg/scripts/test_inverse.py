#!/usr/bin/env python3
"""Tests for classification, two-spectra recovery and the three/four-spectra reconstructions."""
import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from app.commands.verify import coefficient_error, random_case  # noqa: E402
from app.errors import InconsistentSpectra, SignInconsistency, SymmetryViolation  # noqa: E402
from app.models import Branch, PerturbedOperator, Potential, SpectraBundle, SpectrumTag, mode_eigenvalue  # noqa: E402
from app.schemas import SpectrumData, SpectrumEntry  # noqa: E402
from app.services.forward_service import forward_service  # noqa: E402
from app.services.inverse_service import inverse_service  # noqa: E402
from app.services.potential_service import potential_service  # noqa: E402

N = 8
SIGMA_L0 = forward_service.unperturbed_spectrum(N)
TWO_MODE = Potential.fourier({0: 1 / math.sqrt(2), 1: 1j / math.sqrt(2)})


def spectrum(alpha, v, n=N):
    return forward_service.compute_spectrum(PerturbedOperator(alpha, v, n))


def test_classify_single_mode():
    cls = inverse_service.classify(SIGMA_L0, spectrum(5.0, Potential.mode(1)))
    assert cls.sigma1 == (mode_eigenvalue(1),)
    assert cls.sigma1_modes == (1,)
    assert cls.sigma2[0] == pytest.approx(mode_eigenvalue(1) + 5.0)
    assert cls.branch is Branch.ZERO_IN_SPECTRUM
    assert cls.alpha_sign == 1
    cls = inverse_service.classify(SIGMA_L0, spectrum(-5.0, Potential.mode(1)))
    assert cls.alpha_sign == -1


def test_classify_unit():
    cls = inverse_service.classify(SIGMA_L0, spectrum(1.0, Potential.named("unit")))
    assert cls.sigma1 == (0.0,)
    assert cls.sigma2 == pytest.approx((1.0,))
    assert cls.branch is Branch.ZERO_NOT_IN_SPECTRUM


def test_classify_untagged_spectrum():
    tagged = spectrum(5.0, Potential.mode(1))
    plain = SpectrumData(truncation_N=N, entries=[SpectrumEntry(value=z) for z in tagged.values])
    assert inverse_service.classify(SIGMA_L0, plain).sigma1_modes == (1,)


def test_leading_constant():
    cls = inverse_service.classify(SIGMA_L0, spectrum(1.0, Potential.named("unit")))
    assert inverse_service.leading_constant(cls) == pytest.approx(1j, rel=1e-8)
    op = PerturbedOperator(5.0, Potential.mode(1), N)
    _, c1 = forward_service.series_constants(op)
    cls = inverse_service.classify(SIGMA_L0, forward_service.compute_spectrum(op))
    assert inverse_service.leading_constant(cls) == pytest.approx(c1, rel=1e-8)


def test_leading_constant_is_i_alpha_v0_squared():
    rng = np.random.default_rng(11)
    for _ in range(10):
        modes = rng.choice(np.arange(-4, 5), size=int(rng.integers(1, 6)), replace=False)
        coeffs = {int(m): complex(rng.normal(), rng.normal()) for m in modes}
        coeffs[0] = complex(rng.normal(), rng.normal())
        v = potential_service.normalize(Potential.fourier(coeffs))
        alpha = float(rng.choice([-1, 1]) * rng.uniform(0.5, 10.0))
        cls = inverse_service.classify(SIGMA_L0, spectrum(alpha, v))
        expected = 1j * alpha * abs(v.coefficient_map()[0]) ** 2
        assert inverse_service.leading_constant(cls) == pytest.approx(expected, rel=1e-4)


def test_recover_spectral_data():
    data = inverse_service.recover_spectral_data(SIGMA_L0, spectrum(5.0, Potential.mode(1)))
    assert data.alpha == pytest.approx(5.0, rel=1e-8)
    assert data.moduli_sq == {1: pytest.approx(1.0, rel=1e-8)}
    data = inverse_service.recover_spectral_data(SIGMA_L0, spectrum(1.0, Potential.named("unit")))
    assert data.weights == {0: pytest.approx(1.0, rel=1e-8)}
    data = inverse_service.recover_spectral_data(SIGMA_L0, spectrum(-2.5, TWO_MODE))
    assert data.alpha == pytest.approx(-2.5, rel=1e-8)
    assert data.moduli_sq[0] == pytest.approx(0.5, rel=1e-8)
    assert data.moduli_sq[1] == pytest.approx(0.5, rel=1e-8)


def test_four_spectra_round_trip():
    for seed in range(4):
        alpha, v = random_case(seed)
        bundle = inverse_service.build_bundle(PerturbedOperator(alpha, v, 12))
        result = inverse_service.reconstruct_four_spectra(bundle)
        assert result.alpha == pytest.approx(alpha, rel=1e-6)
        assert coefficient_error(v.coefficient_map(), result.coefficient_map()) <= 1e-6, seed
        assert result.diagnostics["spectral_residual"] <= 1e-6
        assert result.diagnostics["route"] == "four"


def test_four_spectra_on_two_mode():
    bundle = inverse_service.build_bundle(PerturbedOperator(1.5, TWO_MODE, N))
    result = inverse_service.reconstruct_four_spectra(bundle)
    assert coefficient_error(TWO_MODE.coefficient_map(), result.coefficient_map()) <= 1e-6
    assert result.weight_map() == {0: pytest.approx(0.75), 1: pytest.approx(0.75)}


def test_four_spectra_on_normalized_g():
    v = potential_service.normalize(Potential.named("g"), N)
    bundle = inverse_service.build_bundle(PerturbedOperator(2.0, Potential.named("g"), N))
    result = inverse_service.reconstruct_four_spectra(bundle)
    assert result.alpha == pytest.approx(2.0, rel=1e-6)
    assert coefficient_error(v.coefficient_map(), result.coefficient_map()) <= 1e-6


def test_three_spectra_even():
    for alpha, coeffs in ((1.0, {-1: 1 / math.sqrt(2), 1: 1 / math.sqrt(2)}), (-2.0, {-1: -0.6, 2: 0.8})):
        v = Potential.fourier(coeffs)
        bundle = inverse_service.build_bundle(PerturbedOperator(alpha, v, N), "even")
        result = inverse_service.reconstruct_three_spectra(bundle, "even")
        assert result.alpha == pytest.approx(alpha, rel=1e-6)
        assert coefficient_error(coeffs, result.coefficient_map()) <= 1e-6


def test_three_spectra_odd():
    coeffs = {-1: 1j / math.sqrt(2), 1: 1j / math.sqrt(2)}
    bundle = inverse_service.build_bundle(PerturbedOperator(1.0, Potential.fourier(coeffs), N), "odd")
    result = inverse_service.reconstruct_three_spectra(bundle, "odd")
    assert coefficient_error(coeffs, result.coefficient_map()) <= 1e-6


def test_three_spectra_seeded():
    for route in ("even", "odd"):
        alpha, v = random_case(5, route)
        bundle = inverse_service.build_bundle(PerturbedOperator(alpha, v, N), route)
        result = inverse_service.reconstruct_three_spectra(bundle, route)
        assert coefficient_error(v.coefficient_map(), result.coefficient_map()) <= 1e-6, route


def test_symmetry_violation():
    bundle = inverse_service.build_bundle(PerturbedOperator(1.5, TWO_MODE, N), "even")
    with pytest.raises(SymmetryViolation):
        inverse_service.reconstruct_three_spectra(bundle, "even")


def test_ambarzumyan():
    sigma_v = spectrum(7.0, Potential.zero())
    assert inverse_service.ambarzumyan_check(SIGMA_L0, sigma_v)
    result = inverse_service.reconstruct_four_spectra(SpectraBundle(SIGMA_L0, sigma_v))
    assert result.alpha is None
    assert result.diagnostics["ambarzumyan"] is True
    assert not inverse_service.ambarzumyan_check(SIGMA_L0, spectrum(1e-3, Potential.mode(1)))


def test_zero_potential_spectrum_is_unperturbed():
    for alpha in (1.0, 100.0):
        sigma_v = spectrum(alpha, Potential.zero())
        assert len(sigma_v.entries) == len(SIGMA_L0.entries)
        for a, b in zip(sigma_v.entries, SIGMA_L0.entries):
            assert abs(a.value - b.value) <= 1e-12 * max(1.0, abs(b.value))
            assert a.multiplicity == b.multiplicity


def test_zero_potential_bundle_is_indeterminate():
    for route in ("four", "even", "odd"):
        bundle = inverse_service.build_bundle(PerturbedOperator(100.0, Potential.zero(), N), route)
        assert bundle.sigma_v.values == SIGMA_L0.values
        if route == "four":
            result = inverse_service.reconstruct_four_spectra(bundle)
        else:
            result = inverse_service.reconstruct_three_spectra(bundle, route)
        assert result.alpha is None
        assert result.coefficients == []


def test_interlacing_violation():
    z1, z2 = mode_eigenvalue(1), mode_eigenvalue(2)
    entries = [SpectrumEntry(value=mode_eigenvalue(n)) for n in range(-N, N + 1) if n not in (1, 2)]
    entries += [
        SpectrumEntry(value=z1 + 10.0, tag=SpectrumTag.SIGMA2),
        SpectrumEntry(value=z1 + 20.0, tag=SpectrumTag.SIGMA2),
    ]
    bad = SpectrumData(truncation_N=N, entries=sorted(entries, key=lambda e: e.value))
    assert z1 + 20.0 < z2
    with pytest.raises(InconsistentSpectra):
        inverse_service.classify(SIGMA_L0, bad)


def test_count_and_window_mismatch():
    missing = SpectrumData(
        truncation_N=N,
        entries=[SpectrumEntry(value=mode_eigenvalue(n)) for n in range(-N, N + 1) if n != 3],
    )
    with pytest.raises(InconsistentSpectra):
        inverse_service.classify(SIGMA_L0, missing)
    with pytest.raises(InconsistentSpectra):
        inverse_service.classify(SIGMA_L0, spectrum(1.0, TWO_MODE, n=10))
    with pytest.raises(InconsistentSpectra):
        SpectraBundle(SIGMA_L0, spectrum(1.0, TWO_MODE, n=10))


def test_sign_inconsistency():
    cls = inverse_service.classify(SIGMA_L0, spectrum(1.5, TWO_MODE))
    constant = inverse_service.leading_constant(cls)
    with pytest.raises(SignInconsistency):
        inverse_service.recover_weights(cls, -constant)


if __name__ == "__main__":
    from harness import run_tests

    sys.exit(run_tests(globals(), "inverse"))

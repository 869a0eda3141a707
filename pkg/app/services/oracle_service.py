"""Oracle service - truncated Fourier-basis model of L_alpha and a cyclic Jacobi eigensolver.

The model is diag((2n*pi)^3) + alpha v v^H on modes -N..N. Its eigenvalues
are an independent check on the secular-equation spectrum.
"""
import logging
import math
from typing import List, Optional

import numpy as np

from app.config import settings
from app.errors import NoConvergence, TruncationTooSmall
from app.models import (
    EigenDecomposition,
    OracleEigenvalue,
    PerturbedOperator,
    TruncatedModel,
    mode_eigenvalue,
)
from app.schemas import SpectrumData
from app.services.potential_service import potential_service

LOG = logging.getLogger(__name__)

MAX_SWEEPS = 50
OFF_TOL = 1e-12
WINDOW_GUARD = 2


def _jacobi_rotation(app: float, aqq: float, apq: complex) -> np.ndarray:
    """Unitary 2x2 J with (J^H B J) diagonal for B = [[app, apq], [conj(apq), aqq]]."""
    r = abs(apq)
    phase = apq / r
    theta = (aqq - app) / (2.0 * r)
    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    # diag(1, conj(phase)) makes the block real symmetric, then a plane rotation
    return np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]], dtype=complex)


class OracleService:
    """Service for the dense ground-truth eigenproblem."""

    def build_model(self, op: PerturbedOperator, n_max: Optional[int] = None) -> TruncatedModel:
        n_max = n_max or op.truncation_n
        if op.v.is_fourier and op.v.support > n_max:
            raise TruncationTooSmall(
                f"potential support {op.v.support} exceeds model size N={n_max}",
                support=op.v.support,
                truncation_n=n_max,
            )
        modes = np.arange(-n_max, n_max + 1)
        v = potential_service.coefficients(op.v, n_max)
        matrix = np.diag(np.array([mode_eigenvalue(int(n)) for n in modes], dtype=complex))
        matrix = matrix + op.alpha * np.outer(v, v.conj())
        return TruncatedModel(n=n_max, modes=modes, matrix=matrix)

    def decompose(self, model: TruncatedModel, max_sweeps: int = MAX_SWEEPS) -> EigenDecomposition:
        """Cyclic complex Jacobi sweeps until the off-diagonal norm is below 1e-12 ||M||."""
        a = np.array(model.matrix, dtype=complex)
        n = a.shape[0]
        vectors = np.eye(n, dtype=complex)
        scale = max(1.0, float(np.linalg.norm(a)))
        target = OFF_TOL * scale
        threshold = target / n
        for sweep in range(max_sweeps + 1):
            off = a - np.diag(np.diag(a))
            if np.linalg.norm(off) <= target:
                values = np.diag(a).real
                order = np.argsort(values, kind="stable")
                LOG.debug("jacobi converged after %d sweeps (n=%d)", sweep, n)
                return EigenDecomposition(values=values[order], vectors=vectors[:, order], sweeps=sweep)
            if sweep == max_sweeps:
                break
            rows, cols = np.nonzero(np.triu(np.abs(off) > threshold, 1))
            for p, q in zip(rows, cols):
                apq = a[p, q]
                if abs(apq) <= threshold:
                    continue
                j = _jacobi_rotation(a[p, p].real, a[q, q].real, apq)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ j
                a[idx, :] = j.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vectors[:, idx] = vectors[:, idx] @ j
        raise NoConvergence(f"Jacobi sweeps did not converge in {max_sweeps} sweeps", size=n)

    def eigensolve(self, model: TruncatedModel) -> List[OracleEigenvalue]:
        """Sorted eigenvalues; values within cluster_tol * max(1, |value|) are merged."""
        values = self.decompose(model).values
        clusters: List[List[float]] = []
        for value in values:
            if clusters and abs(value - clusters[-1][-1]) <= settings.cluster_tol * max(1.0, abs(value)):
                clusters[-1].append(float(value))
            else:
                clusters.append([float(value)])
        return [OracleEigenvalue(value=math.fsum(c) / len(c), multiplicity=len(c)) for c in clusters]

    def window_mismatch(self, spectrum: SpectrumData, eigenvalues: List[OracleEigenvalue]) -> float:
        """Max |forward - oracle| / max(1, |z|) inside [z_{-N+2}, z_{N-2}], multiplicities included.

        Returns inf when the two lists disagree in length or multiplicity.
        """
        n = spectrum.truncation_N - WINDOW_GUARD
        lo, hi = mode_eigenvalue(-n), mode_eigenvalue(n)
        forward = [(e.value, e.multiplicity) for e in spectrum.entries if lo <= e.value <= hi]
        oracle = [(e.value, e.multiplicity) for e in eigenvalues if lo <= e.value <= hi]
        if len(forward) != len(oracle) or any(a[1] != b[1] for a, b in zip(forward, oracle)):
            return math.inf
        return max((abs(a[0] - b[0]) / max(1.0, abs(a[0])) for a, b in zip(forward, oracle)), default=0.0)


oracle_service = OracleService()

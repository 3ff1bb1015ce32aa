"""Shared pieces of the in-repo first-order semidefinite solvers.

Both the atomic-norm denoiser and the measurement-matrix optimizer are
small dense SDPs solved by operator splitting (ADMM) with an
eigendecomposition-based projection onto the PSD cone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class SolverOptions:
    max_iter: int = 20000
    tol: float = 1e-6
    psd_tol: float = 1e-6
    # initial ADMM penalty; adapted by residual balancing when adapt_penalty
    penalty: float = 1.0
    adapt_penalty: bool = True
    check_every: int = 25


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def psd_project(a: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) PSD matrix to the Hermitian part of ``a``."""
    w, v = np.linalg.eigh(hermitize(a))
    pos = w > 0.0
    if not np.any(pos):
        return np.zeros_like(a)
    vp = v[:, pos]
    return (vp * w[pos]) @ vp.conj().T


def min_eigenvalue(a: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitize(a))[0])

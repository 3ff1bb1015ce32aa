"""Comparison estimators: matched-filter FFT beamforming (with and without
interference removal), grid-based OMP, and l1-norm sparse reconstruction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DictionaryDegenerate, DimensionMismatch, NotConverged, ZeroVector
from .signal_model import MeasurementMatrix, steering_grid
from .subspace import PeakResult, SpatialSpectrum, make_grid, pick_peaks


@dataclass
class GridDictionary:
    thetas_deg: np.ndarray
    atoms: np.ndarray  # M x P, column p = a(theta_p)

    @property
    def step_deg(self) -> float:
        return float(self.thetas_deg[1] - self.thetas_deg[0])


def make_grid_dictionary(
    grid: dict, theta_rs_deg: float, m_elements: int, spacing_over_lambda: float
) -> GridDictionary:
    thetas = make_grid(grid["min"], grid["max"], grid["step"])
    atoms = steering_grid(thetas, theta_rs_deg, m_elements, spacing_over_lambda)
    return GridDictionary(thetas_deg=thetas, atoms=atoms)


def _as_matrix(G) -> np.ndarray:
    if isinstance(G, MeasurementMatrix):
        return G.entries
    return np.asarray(G, dtype=complex)


def fft_spectrum(r: np.ndarray, G, dictionary: GridDictionary) -> SpatialSpectrum:
    """Matched-filter beamforming spectrum |a(theta)^H G^H r|^2 on the grid."""
    gm = _as_matrix(G)
    r = np.asarray(r, dtype=complex).ravel()
    if gm.shape[0] != r.size or gm.shape[1] != dictionary.atoms.shape[0]:
        raise DimensionMismatch("r, G and dictionary dimensions disagree")
    corr = dictionary.atoms.conj().T @ (gm.conj().T @ r)
    return SpatialSpectrum(
        thetas_deg=dictionary.thetas_deg,
        values=np.abs(corr) ** 2,
        grid_step_deg=dictionary.step_deg,
    )


def remove_interference(r: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Project r onto the orthocomplement of the interference signature b."""
    r = np.asarray(r, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    bb = float(np.vdot(b, b).real)
    if bb == 0.0:
        raise ZeroVector("interference signature b is zero")
    return r - b * (np.vdot(b, r) / bb)


def omp_estimate(
    r: np.ndarray,
    G,
    b: np.ndarray,
    dictionary: GridDictionary,
    k_targets: int,
) -> list[float]:
    """Orthogonal matching pursuit over G D after interference projection.

    Runs exactly K iterations with a least-squares refit over the selected
    atoms at each step; returns the selected grid angles sorted ascending.
    """
    if k_targets < 1:
        raise ValueError("k_targets must be >= 1")
    gm = _as_matrix(G)
    eff = gm @ dictionary.atoms  # N x P
    y = remove_interference(r, b)
    norms = np.linalg.norm(eff, axis=0)
    norms[norms == 0.0] = 1.0

    selected: list[int] = []
    residual = y.copy()
    for _ in range(k_targets):
        corr = np.abs(eff.conj().T @ residual) / norms
        corr[selected] = -1.0
        idx = int(np.argmax(corr))
        selected.append(idx)
        sub = eff[:, selected]
        gram = sub.conj().T @ sub
        if np.linalg.cond(gram) > 1e12:
            raise DictionaryDegenerate("selected atoms are numerically dependent")
        coef = np.linalg.solve(gram, sub.conj().T @ y)
        residual = y - sub @ coef
    return sorted(float(dictionary.thetas_deg[i]) for i in selected)


def _projected_problem(r, G, b, dictionary: GridDictionary):
    """Interference-eliminated data vector and effective dictionary."""
    gm = _as_matrix(G)
    b = np.asarray(b, dtype=complex).ravel()
    r = np.asarray(r, dtype=complex).ravel()
    eff = gm @ dictionary.atoms
    bb = float(np.vdot(b, b).real)
    if bb > 0.0:
        bu = b / math.sqrt(bb)
        r = r - bu * np.vdot(bu, r)
        eff = eff - np.outer(bu, bu.conj() @ eff)
    return r, eff


def l1_solve(
    r,
    G,
    b,
    dictionary: GridDictionary,
    rho_tilde: float,
    max_iter: int = 5000,
    tol: float = 1e-9,
) -> tuple[np.ndarray, bool]:
    """FISTA solve of min ||y - E x||^2 + rho_tilde ||x||_1 (q eliminated).

    Returns the coefficient vector and a convergence flag.
    """
    if rho_tilde <= 0:
        raise ValueError("rho_tilde must be positive")
    y, eff = _projected_problem(r, G, b, dictionary)
    lip = 2.0 * float(np.linalg.eigvalsh(eff.conj().T @ eff)[-1])
    if lip == 0.0:
        return np.zeros(eff.shape[1], dtype=complex), True
    step = 1.0 / lip

    x = np.zeros(eff.shape[1], dtype=complex)
    v = x.copy()
    t_mom = 1.0
    obj_prev = math.inf
    for _ in range(max_iter):
        grad = 2.0 * (eff.conj().T @ (eff @ v - y))
        w = v - step * grad
        mag = np.abs(w)
        shrink = np.maximum(mag - step * rho_tilde, 0.0)
        x_new = np.where(mag > 0, w * (shrink / np.maximum(mag, 1e-300)), 0.0)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_mom**2))
        v = x_new + ((t_mom - 1.0) / t_new) * (x_new - x)
        x, t_mom = x_new, t_new
        res = y - eff @ x
        obj = float(np.vdot(res, res).real) + rho_tilde * float(np.sum(np.abs(x)))
        if abs(obj_prev - obj) <= tol * max(1.0, abs(obj)):
            return x, True
        obj_prev = obj
    return x, False


def l1_estimate(
    r,
    G,
    b,
    dictionary: GridDictionary,
    rho_tilde: float,
    k_targets: int,
    max_iter: int = 5000,
) -> PeakResult:
    """Angles of the K strongest local maxima of the l1 coefficient magnitudes."""
    x, converged = l1_solve(r, G, b, dictionary, rho_tilde, max_iter=max_iter)
    if not converged:
        raise NotConverged("l1 proximal gradient did not converge", best=x)
    spec = SpatialSpectrum(
        thetas_deg=dictionary.thetas_deg,
        values=np.abs(x),
        grid_step_deg=dictionary.step_deg,
    )
    return pick_peaks(spec, k_targets)

"""Hankel lifting and single-snapshot MUSIC.

The denoised aperture-domain vector xi is reshaped into an L x (M-L+1)
Hankel matrix so that subspace processing applies with one snapshot.  The
left-singular vectors beyond the K dominant ones span the noise subspace,
and the spatial spectrum follows from the sub-array steering vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import InvalidSubarray, RankDeficient
from .signal_model import steering_grid


@dataclass
class HankelLift:
    matrix: np.ndarray
    sub_len: int


@dataclass
class SpatialSpectrum:
    thetas_deg: np.ndarray
    values: np.ndarray
    grid_step_deg: float


@dataclass
class PeakResult:
    angles_deg: list[float]
    padded: bool


def default_sub_len(m_elements: int) -> int:
    """Sub-array length L = ceil(M / 2)."""
    return (m_elements + 1) // 2


def hankel_lift(xi: np.ndarray, sub_len: int) -> HankelLift:
    """L x (M-L+1) Hankel matrix with entry (p, q) = xi[p + q]."""
    xi = np.asarray(xi, dtype=complex).ravel()
    m = xi.size
    if not 1 <= sub_len <= m:
        raise InvalidSubarray("sub_len %d outside [1, %d]" % (sub_len, m))
    return HankelLift(matrix=sla.hankel(xi[:sub_len], xi[sub_len - 1:]), sub_len=sub_len)


def noise_subspace(lift: HankelLift, k_targets: int) -> np.ndarray:
    """Left-singular vectors beyond the K largest singular values (L x (L-K))."""
    l = lift.sub_len
    if k_targets >= l:
        raise InvalidSubarray("need k_targets < L (got K=%d, L=%d)" % (k_targets, l))
    if k_targets > lift.matrix.shape[1]:
        raise RankDeficient(
            "Hankel lift has only %d columns; cannot separate %d sources"
            % (lift.matrix.shape[1], k_targets)
        )
    u1, _, _ = np.linalg.svd(lift.matrix, full_matrices=True)
    return u1[:, k_targets:]


def make_grid(min_deg: float, max_deg: float, step_deg: float) -> np.ndarray:
    if not (min_deg < max_deg and step_deg > 0):
        raise ValueError("grid requires min < max and step > 0")
    count = int(round((max_deg - min_deg) / step_deg)) + 1
    return min_deg + step_deg * np.arange(count)


def music_spectrum(
    noise_sub: np.ndarray,
    theta_rs_deg: float,
    grid: dict,
    spacing_over_lambda: float,
) -> SpatialSpectrum:
    """Pseudo-spectrum ||a~||^2 / ||a~^H U~||^2 over a closed uniform grid.

    The denominator is floored at 1e-12 ||a~||^2 so that exact orthogonality
    yields a large finite peak instead of a division by zero.
    """
    thetas = make_grid(grid["min"], grid["max"], grid["step"])
    l = noise_sub.shape[0]
    atoms = steering_grid(thetas, theta_rs_deg, l, spacing_over_lambda)
    num = float(l)  # unit-modulus entries: ||a~||^2 = L on every grid point
    denom = np.sum(np.abs(noise_sub.conj().T @ atoms) ** 2, axis=0)
    denom = np.maximum(denom, 1e-12 * num)
    return SpatialSpectrum(
        thetas_deg=thetas, values=num / denom, grid_step_deg=float(grid["step"])
    )


def _local_maxima(values: np.ndarray) -> list[int]:
    """Strict local maxima; plateaus count once, at their smallest index."""
    n = values.size
    peaks = []
    i = 1
    while i < n - 1:
        if values[i] <= values[i - 1]:
            i += 1
            continue
        j = i
        while j + 1 < n and values[j + 1] == values[i]:
            j += 1
        if j + 1 < n and values[j + 1] < values[i]:
            peaks.append(i)
        i = j + 1
    return peaks


def pick_peaks(spectrum: SpatialSpectrum, k_targets: int) -> PeakResult:
    """K largest strict local maxima, ascending; pads from remaining grid values.

    ``padded`` flags a degenerate spectrum with fewer than K local maxima.
    """
    if k_targets < 1:
        raise ValueError("k_targets must be >= 1")
    values = np.asarray(spectrum.values, dtype=float)
    if values.size == 0:
        raise ValueError("spectrum is empty")
    peaks = _local_maxima(values)
    peaks.sort(key=lambda i: (-values[i], i))
    chosen = peaks[:k_targets]
    padded = len(chosen) < k_targets
    if padded:
        taken = set(chosen)
        order = sorted(
            (i for i in range(values.size) if i not in taken),
            key=lambda i: (-values[i], i),
        )
        chosen.extend(order[: k_targets - len(chosen)])
    angles = sorted(float(spectrum.thetas_deg[i]) for i in chosen)
    return PeakResult(angles_deg=angles, padded=padded)


def candidate_peaks(spectrum: SpatialSpectrum, n_max: int) -> list[float]:
    """Angles of up to n_max largest strict local maxima, tallest first.

    Unlike pick_peaks this never pads, so the caller can tell how many
    genuine peaks the spectrum has.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    values = np.asarray(spectrum.values, dtype=float)
    peaks = _local_maxima(values)
    peaks.sort(key=lambda i: (-values[i], i))
    return [float(spectrum.thetas_deg[i]) for i in peaks[:n_max]]


def estimate_doas(
    xi: np.ndarray,
    k_targets: int,
    theta_rs_deg: float,
    spacing_over_lambda: float,
    grid: dict | None = None,
    sub_len: int | None = None,
) -> PeakResult:
    """Convenience pipeline: Hankel lift -> noise subspace -> MUSIC -> peaks."""
    m = np.asarray(xi).size
    if sub_len is None:
        sub_len = default_sub_len(m)
    if grid is None:
        grid = {"min": -45.0, "max": 45.0, "step": 0.01}
    lift = hankel_lift(xi, sub_len)
    ns = noise_subspace(lift, k_targets)
    spec = music_spectrum(ns, theta_rs_deg, grid, spacing_over_lambda)
    return pick_peaks(spec, k_targets)


def singular_value_gap(lift: HankelLift, k_targets: int) -> float:
    """Diagnostic ratio sigma_{K+1} / sigma_K of the Hankel lift."""
    s = np.linalg.svd(lift.matrix, compute_uv=False)
    if k_targets <= 0 or k_targets >= s.size:
        return math.nan
    if s[k_targets - 1] == 0:
        return math.nan
    return float(s[k_targets] / s[k_targets - 1])

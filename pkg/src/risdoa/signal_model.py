"""Steering vectors and the single-snapshot received-signal model.

The sensor sees, over N RIS configurations,

    r = G A(theta_TR) z + G a(theta_AR) q + w,

where G is the N x M measurement matrix of unit-modulus RIS reflection
coefficients, A stacks the steering vectors of the targets, z holds the
per-target complex path amplitudes, q is the direct AP->RIS->sensor
interference amplitude and w is circular complex Gaussian noise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import AngleOutOfRange, DimensionMismatch
from .scene import SceneDerived


@dataclass
class SteeringVector:
    entries: np.ndarray
    theta_deg: float
    theta_rs_deg: float


@dataclass
class MeasurementMatrix:
    """N x M RIS control matrix; row n is the reflection pattern of slot n."""

    entries: np.ndarray
    amplitudes_fixed: bool = True

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.ndim != 2:
            raise DimensionMismatch("measurement matrix must be 2D")
        mags = np.abs(self.entries)
        if np.any(mags > 1.0 + 1e-9):
            raise ValueError("reflection amplitudes must satisfy |g| <= 1")
        if self.amplitudes_fixed and np.any(np.abs(mags - 1.0) > 1e-9):
            raise ValueError("amplitudes_fixed requires |g| = 1")

    @property
    def n_meas(self) -> int:
        return self.entries.shape[0]

    @property
    def m_elements(self) -> int:
        return self.entries.shape[1]


@dataclass
class SnapshotTruth:
    theta_tr_deg: list[float]
    z: np.ndarray
    q: complex
    sigma_w: float


@dataclass
class Snapshot:
    r: np.ndarray
    truth: Optional[SnapshotTruth] = None


def steering_vector(
    theta_deg: float,
    theta_rs_deg: float,
    m_elements: int,
    spacing_over_lambda: float,
) -> SteeringVector:
    """Array response a(theta): entry m is exp(j 2 pi m d_E/lambda sin(theta_RS + theta))."""
    if m_elements < 1:
        raise ValueError("m_elements must be >= 1")
    total = theta_rs_deg + theta_deg
    if not -90.0 < total < 90.0:
        raise AngleOutOfRange("theta_RS + theta = %g deg outside (-90, 90)" % total)
    phase = 2.0 * math.pi * spacing_over_lambda * math.sin(math.radians(total))
    entries = np.exp(1j * phase * np.arange(m_elements))
    return SteeringVector(entries=entries, theta_deg=theta_deg, theta_rs_deg=theta_rs_deg)


def steering_matrix(
    thetas_deg: Sequence[float],
    theta_rs_deg: float,
    m_elements: int,
    spacing_over_lambda: float,
) -> np.ndarray:
    """M x K matrix whose k-th column is the steering vector of thetas_deg[k]."""
    cols = [
        steering_vector(th, theta_rs_deg, m_elements, spacing_over_lambda).entries
        for th in thetas_deg
    ]
    return np.column_stack(cols)


def steering_grid(
    thetas_deg: np.ndarray,
    theta_rs_deg: float,
    m_elements: int,
    spacing_over_lambda: float,
) -> np.ndarray:
    """Vectorized steering matrix over a dense grid (no per-angle validation)."""
    total = np.radians(theta_rs_deg + np.asarray(thetas_deg, dtype=float))
    phase = 2.0 * np.pi * spacing_over_lambda * np.sin(total)
    return np.exp(1j * np.outer(np.arange(m_elements), phase))


def random_measurement_matrix(n_meas: int, m_elements: int, seed: int) -> MeasurementMatrix:
    """Unit-modulus matrix with i.i.d. uniform phases, reproducible from seed."""
    if n_meas < 1:
        raise ValueError("n_meas must be >= 1")
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(n_meas, m_elements))
    return MeasurementMatrix(entries=np.exp(1j * phases))


def simulate_snapshot(
    G: MeasurementMatrix,
    scene: SceneDerived,
    snr_db: Optional[float],
    seed: int,
    interference_on: bool = True,
    sigma_w: Optional[float] = None,
) -> Snapshot:
    """Draw one received vector r with ground truth recorded.

    z_k is the target path gain times a unit-magnitude random phase; q is
    drawn the same way from the direct path gain when interference_on.  The
    per-entry noise variance sigma_w^2 is set so that
    ||G A z||^2 / (N sigma_w^2) matches snr_db (interference excluded), or
    taken from the explicit ``sigma_w`` override.
    """
    if G.m_elements != scene.num_elements:
        raise DimensionMismatch(
            "G has %d columns but scene has %d elements"
            % (G.m_elements, scene.num_elements)
        )
    if (snr_db is None) == (sigma_w is None):
        raise ValueError("exactly one of snr_db and sigma_w must be given")

    rng = np.random.default_rng(seed)
    k = scene.k_targets
    z = np.asarray(scene.target_path_gain, dtype=complex) * np.exp(
        1j * rng.uniform(0.0, 2.0 * np.pi, size=k)
    )
    q = 0.0 + 0j
    if interference_on:
        q = scene.direct_path_gain * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))

    A = steering_matrix(
        scene.theta_tr_deg, scene.theta_rs_deg, scene.num_elements, scene.spacing_over_lambda
    )
    a_ar = steering_vector(
        scene.theta_ar_deg, scene.theta_rs_deg, scene.num_elements, scene.spacing_over_lambda
    ).entries

    signal = G.entries @ (A @ z)
    n = G.n_meas
    if sigma_w is None:
        sig_pow = float(np.vdot(signal, signal).real)
        sigma_w = math.sqrt(sig_pow / (n * 10.0 ** (snr_db / 10.0)))
    noise = sigma_w * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)

    r = signal + q * (G.entries @ a_ar) + noise
    truth = SnapshotTruth(
        theta_tr_deg=list(scene.theta_tr_deg), z=z, q=q, sigma_w=float(sigma_w)
    )
    return Snapshot(r=r, truth=truth)


def snapshot_to_csv(snapshot: Snapshot, path: str) -> None:
    """Export r as (index, re, im) rows for external inspection."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["index", "re_r", "im_r"])
        for i, v in enumerate(snapshot.r):
            writer.writerow([i, repr(float(v.real)), repr(float(v.imag))])

"""Fisher information and Cramer-Rao lower bounds for the DOA estimates.

The unknown parameter vector stacks the K target DOAs, the K complex path
amplitudes z and the interference amplitude q.  The FIM is assembled from
the nine printed blocks; the DOA bound is the corresponding real diagonal
entry of its inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import AngleOutOfRange, SingularFIM, SingularModel, ZeroGradient
from .scene import Point2D, Scene, SceneDerived, derive_scene
from .sdp import hermitize
from .signal_model import MeasurementMatrix, steering_matrix, steering_vector


@dataclass
class FisherInfo:
    matrix: np.ndarray
    sigma_w2: float
    block_index: dict

    @property
    def k_targets(self) -> int:
        return (self.matrix.shape[0] - 1) // 2


def deriv_steering(
    theta_deg: float,
    theta_rs_deg: float,
    z_k: complex,
    m_elements: int,
    spacing_over_lambda: float,
) -> np.ndarray:
    """z_k times the derivative of a(theta) with respect to theta (radians).

    Entry m is j 2 pi m d_E/lambda z_k cos(theta_RS + theta) a_m(theta).
    """
    a = steering_vector(theta_deg, theta_rs_deg, m_elements, spacing_over_lambda).entries
    cos_term = math.cos(math.radians(theta_rs_deg + theta_deg))
    scale = 1j * 2.0 * math.pi * spacing_over_lambda * z_k * cos_term
    return scale * (a * np.arange(m_elements))


def _as_matrix(G) -> np.ndarray:
    if isinstance(G, MeasurementMatrix):
        return G.entries
    return np.asarray(G, dtype=complex)


def fisher_matrix(
    G,
    scene: SceneDerived,
    z: np.ndarray,
    q: complex,
    sigma_w: float,
) -> FisherInfo:
    """Assemble the (2K+1) x (2K+1) FIM over [theta_TR; z; q].

    q is part of the parameter point but does not enter the printed block
    expressions; it is accepted for interface completeness.
    """
    del q
    if sigma_w <= 0:
        raise ValueError("sigma_w must be positive")
    gm = _as_matrix(G)
    m = scene.num_elements
    k = scene.k_targets
    z = np.asarray(z, dtype=complex).ravel()
    if gm.shape[1] != m or z.size != k:
        raise SingularModel(
            "inconsistent dimensions: G %s, M=%d, K=%d, |z|=%d"
            % (gm.shape, m, k, z.size)
        )
    A = steering_matrix(scene.theta_tr_deg, scene.theta_rs_deg, m, scene.spacing_over_lambda)
    a_ar = steering_vector(
        scene.theta_ar_deg, scene.theta_rs_deg, m, scene.spacing_over_lambda
    ).entries
    B = np.column_stack(
        [
            deriv_steering(th, scene.theta_rs_deg, z[i], m, scene.spacing_over_lambda)
            for i, th in enumerate(scene.theta_tr_deg)
        ]
    )

    gb = gm @ B
    ga = gm @ A
    gq = gm @ a_ar

    f = np.zeros((2 * k + 1, 2 * k + 1), dtype=complex)
    f[:k, :k] = 2.0 * np.real(gb.conj().T @ gb)
    f[:k, k : 2 * k] = gb.conj().T @ ga
    f[:k, 2 * k] = gb.conj().T @ gq
    f[k : 2 * k, :k] = ga.conj().T @ gb
    f[k : 2 * k, k : 2 * k] = ga.conj().T @ ga
    f[k : 2 * k, 2 * k] = ga.conj().T @ gq
    f[2 * k, :k] = gq.conj().T @ gb
    f[2 * k, k : 2 * k] = gq.conj().T @ ga
    f[2 * k, 2 * k] = np.vdot(gq, gq)
    f /= sigma_w**2

    return FisherInfo(
        matrix=f,
        sigma_w2=sigma_w**2,
        block_index={"theta": (0, k), "z": (k, 2 * k), "q": (2 * k, 2 * k + 1)},
    )


def crlb_doa(fim: FisherInfo, k: int) -> float:
    """[F^{-1}]_{k,k} for the k-th DOA, in radians squared."""
    f = fim.matrix
    if not 0 <= k < fim.k_targets:
        raise IndexError("target index %d out of range" % k)
    cond = float(np.linalg.cond(hermitize(f)))
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularFIM("FIM condition number %.3e exceeds 1e12" % cond, cond)
    inv = np.linalg.inv(hermitize(f))
    return float(np.real(inv[k, k]))


def crlb_doa_deg(fim: FisherInfo, k: int) -> float:
    """Same bound expressed in degrees squared."""
    return crlb_doa(fim, k) * math.degrees(1.0) ** 2


def crlb_single_target(G, scene: SceneDerived, p_s: float, sigma_w: float) -> float:
    """Closed-form single-target bound sigma_w^2 / (2 |z|^2 ||G grad a||^2), rad^2."""
    if scene.k_targets != 1:
        raise SingularModel("closed form requires exactly one target")
    gm = _as_matrix(G)
    grad = deriv_steering(
        scene.theta_tr_deg[0],
        scene.theta_rs_deg,
        1.0,
        scene.num_elements,
        scene.spacing_over_lambda,
    )
    gg = gm @ grad
    denom = float(np.vdot(gg, gg).real)
    if denom == 0.0:
        raise ZeroGradient("||G grad a|| vanishes at this angle")
    amp2 = abs(scene.target_path_gain[0]) ** 2 * p_s
    return sigma_w**2 / (2.0 * amp2 * denom)


EXCLUSION_RADIUS_M = 0.5


def crlb_map(
    scene_template: Scene,
    target_grid: dict,
    G,
    p_s: float = 1.0,
    sigma_w: float = 0.1,
) -> list[tuple[float, float, float]]:
    """Single-target placement heatmap: rows of (x_m, y_m, rmse_deg).

    Grid points inside the 0.5 m exclusion disk of AP/RIS/sensor, or whose
    DOA leaves the front half-plane, emit NaN sentinels.
    """
    xs = np.arange(target_grid["x_min"], target_grid["x_max"] + 1e-9, target_grid["step"])
    ys = np.arange(target_grid["y_min"], target_grid["y_max"] + 1e-9, target_grid["step"])
    if xs.size == 0 or ys.size == 0:
        raise ValueError("empty heatmap grid")
    nodes = (scene_template.ap, scene_template.ris, scene_template.sensor)
    rows = []
    for y in ys:
        for x in xs:
            p = Point2D(float(x), float(y))
            if any(p.distance_to(n) < EXCLUSION_RADIUS_M for n in nodes):
                rows.append((float(x), float(y), math.nan))
                continue
            single = replace(
                scene_template,
                targets=[p],
                scatter_coeffs=[scene_template.scatter_coeffs[0]],
            )
            try:
                derived = derive_scene(single)
                bound = crlb_single_target(G, derived, p_s, sigma_w)
            except (AngleOutOfRange, ZeroGradient):
                rows.append((float(x), float(y), math.nan))
                continue
            rows.append((float(x), float(y), math.degrees(math.sqrt(bound))))
    return rows

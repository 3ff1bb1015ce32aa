"""Measurement-matrix optimization and SINR evaluation.

The AP interference power ||G a(theta_AR)||^2 is suppressed by solving the
unit-diagonal SDP relaxation

    min Tr{a a^H G~}  s.t.  diag(G~) = 1, G~ >= 0 Hermitian,

once, then drawing each of the N rows by randomized phase-only rounding so
that the matrix keeps the randomness sparse recovery relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import DimensionMismatch, NotConverged
from .scene import SceneDerived
from .sdp import SolverOptions, hermitize, min_eigenvalue, psd_project
from .signal_model import MeasurementMatrix, SteeringVector, steering_matrix, steering_vector


@dataclass
class GramCandidate:
    g_tilde: np.ndarray
    solve_diagnostics: dict = field(default_factory=dict)


def _steering_entries(a) -> np.ndarray:
    if isinstance(a, SteeringVector):
        return a.entries
    return np.asarray(a, dtype=complex).ravel()


def optimize_gram(a_ar, opts: Optional[SolverOptions] = None) -> GramCandidate:
    """Hermitian PSD unit-diagonal Gram minimizing Tr{a a^H G~} via ADMM."""
    if opts is None:
        opts = SolverOptions()
    a = _steering_entries(a_ar)
    m = a.size
    if m < 2:
        raise DimensionMismatch("need at least 2 elements")
    c = np.outer(a, a.conj())
    c_norm = float(np.linalg.norm(c))

    tau = float(opts.penalty) * max(c_norm / m, 1.0)
    X = np.eye(m, dtype=complex)
    Z = X.copy()
    Lam = np.zeros((m, m), dtype=complex)
    converged = False
    it = 0
    z_prev = Z.copy()
    for it in range(1, opts.max_iter + 1):
        X = hermitize(Z - Lam - c / tau)
        np.fill_diagonal(X, 1.0)
        Z = psd_project(X + Lam)
        Lam = Lam + X - Z

        if it % opts.check_every == 0 or it == opts.max_iter:
            pri = float(np.linalg.norm(X - Z))
            dua = tau * float(np.linalg.norm(Z - z_prev))
            ref = max(float(np.linalg.norm(X)), 1.0)
            if pri / ref <= opts.tol and dua / ref <= opts.tol:
                converged = True
                break
            if opts.adapt_penalty and it < 0.8 * opts.max_iter:
                if pri > 10.0 * dua:
                    tau *= 2.0
                    Lam /= 2.0
                elif dua > 10.0 * pri:
                    tau /= 2.0
                    Lam *= 2.0
            z_prev = Z.copy()

    objective = float(np.real(np.vdot(a, X @ a)))
    diag = {
        "iterations": it,
        "converged": converged,
        "objective": objective,
        "min_eigenvalue": min_eigenvalue(X),
    }
    if not converged:
        raise NotConverged(
            "gram ADMM did not converge in %d iterations" % it,
            best=GramCandidate(g_tilde=X, solve_diagnostics=diag),
        )
    return GramCandidate(g_tilde=X, solve_diagnostics=diag)


NULL_EIGENVALUE_CUTOFF = 1e-6


def round_rows(
    gram: GramCandidate, n_rows: int, seed: int, candidates: int = 64
) -> MeasurementMatrix:
    """Randomized phase-only rounding of the Gram into N unit-modulus rows.

    Eigendecompose G~ = U L U^H (negative eigenvalues clipped), draw
    standard complex Gaussian vectors g and take the entrywise phase of
    U L^{1/2} g; row n of the output is the conjugate transpose of that
    column vector, matching G = [g'_0, ..., g'_{N-1}]^H.

    The phase projection is lossy (per-entry error variance 1 - pi/4), so a
    single draw leaves the steered null only ~7 dB deep.  Each row therefore
    keeps the best of `candidates` independent draws, scored by the energy
    the rounded row leaks into the null space of G~ (at the optimum that
    null space is exactly the steered direction).  With a full-rank Gram
    such as the identity the score is constant and the first draw is kept,
    so the single-draw behavior is recovered.
    """
    if n_rows < 1:
        raise ValueError("n_rows must be >= 1")
    if candidates < 1:
        raise ValueError("candidates must be >= 1")
    w, v = np.linalg.eigh(hermitize(gram.g_tilde))
    w = np.clip(w, 0.0, None)
    half = v * np.sqrt(w)
    m = half.shape[0]
    null_vecs = v[:, w <= NULL_EIGENVALUE_CUTOFF * max(float(w[-1]), 1.0)]
    rng = np.random.default_rng(seed)
    rows = np.empty((n_rows, m), dtype=complex)
    for n in range(n_rows):
        best_col = None
        best_score = math.inf
        for _ in range(candidates):
            g = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / math.sqrt(2.0)
            col = np.exp(1j * np.angle(half @ g))
            leak = null_vecs.conj().T @ col
            score = float(np.vdot(leak, leak).real)
            if score < best_score:
                best_score = score
                best_col = col
        rows[n] = best_col.conj()
    return MeasurementMatrix(entries=rows, amplitudes_fixed=True)


@dataclass
class SinrReport:
    signal_power: float
    interference_power: float
    noise_power: float
    sinr: float


def interference_gain(G: Union[MeasurementMatrix, np.ndarray], a_ar) -> float:
    """||G a(theta_AR)||_2^2."""
    gm = G.entries if isinstance(G, MeasurementMatrix) else np.asarray(G, dtype=complex)
    a = _steering_entries(a_ar)
    if gm.shape[1] != a.size:
        raise DimensionMismatch("G has %d columns, a has %d" % (gm.shape[1], a.size))
    v = gm @ a
    return float(np.vdot(v, v).real)


def sinr(
    G: MeasurementMatrix,
    scene: SceneDerived,
    p_s: float,
    sigma_w: float,
) -> SinrReport:
    """Target power over interference-plus-noise power for a given G.

    Signal power is Tr{G A Lambda A^H G^H} with Lambda carrying the squared
    target path gains times P_s; interference uses the direct path gain.
    """
    if p_s <= 0:
        raise ValueError("p_s must be positive")
    gm = G.entries
    if gm.shape[1] != scene.num_elements:
        raise DimensionMismatch(
            "G has %d columns but scene has %d elements"
            % (gm.shape[1], scene.num_elements)
        )
    A = steering_matrix(
        scene.theta_tr_deg, scene.theta_rs_deg, scene.num_elements, scene.spacing_over_lambda
    )
    a_ar = steering_vector(
        scene.theta_ar_deg, scene.theta_rs_deg, scene.num_elements, scene.spacing_over_lambda
    ).entries
    lam = p_s * np.abs(np.asarray(scene.target_path_gain)) ** 2
    ga = gm @ A
    signal = float(np.sum(lam * np.sum(np.abs(ga) ** 2, axis=0)))
    interference = interference_gain(gm, a_ar) * abs(scene.direct_path_gain) ** 2 * p_s
    noise = gm.shape[0] * sigma_w**2
    return SinrReport(
        signal_power=signal,
        interference_power=interference,
        noise_power=noise,
        sinr=signal / (interference + noise),
    )


def optimized_measurement_matrix(
    scene: SceneDerived,
    n_rows: int,
    seed: int,
    opts: Optional[SolverOptions] = None,
) -> MeasurementMatrix:
    """Convenience: null-steering Gram for the scene's AP direction, then round."""
    a_ar = steering_vector(
        scene.theta_ar_deg, scene.theta_rs_deg, scene.num_elements, scene.spacing_over_lambda
    )
    gram = optimize_gram(a_ar, opts)
    return round_rows(gram, n_rows, seed)

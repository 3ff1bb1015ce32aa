"""FFT beamforming, interference removal, OMP and l1 baselines."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risdoa import derive_scene, nominal_scene, random_measurement_matrix, simulate_snapshot
from risdoa.baselines import (
    fft_spectrum,
    l1_estimate,
    l1_solve,
    make_grid_dictionary,
    omp_estimate,
    remove_interference,
)
from risdoa.errors import ZeroVector
from risdoa.signal_model import steering_vector
from risdoa.subspace import pick_peaks
from conftest import steer_ref

COARSE = {"min": -45.0, "max": 45.0, "step": 1.0}
FINE = {"min": -45.0, "max": 45.0, "step": 0.01}


def test_fft_single_atom_peak_within_beamwidth():
    m = 64
    G = random_measurement_matrix(16, m, 0)
    r = G.entries @ steer_ref(10.0, m)
    dic = make_grid_dictionary(FINE, 0.0, m, 0.5)
    spec = fft_spectrum(r, G, dic)
    top = spec.thetas_deg[int(np.argmax(spec.values))]
    beamwidth_deg = math.degrees(2.0 / m)
    assert abs(top - 10.0) <= beamwidth_deg


def test_fft_zero_data_zero_spectrum():
    G = random_measurement_matrix(4, 8, 0)
    spec = fft_spectrum(np.zeros(4), G, make_grid_dictionary(COARSE, 0.0, 8, 0.5))
    assert np.allclose(spec.values, 0.0)


def test_fft_fails_on_interference_dominated_snapshot():
    derived = derive_scene(nominal_scene())
    G = random_measurement_matrix(16, 64, 1)
    snap = simulate_snapshot(G, derived, 20.0, 1)
    spec = fft_spectrum(snap.r, G, make_grid_dictionary(FINE, 0.0, 64, 0.5))
    picked = pick_peaks(spec, 3)
    errors = [
        min(abs(est - t) for est in picked.angles_deg) for t in derived.theta_tr_deg
    ]
    assert max(errors) > 1.0


def test_remove_interference_examples():
    rng = np.random.default_rng(0)
    b = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    assert np.allclose(remove_interference(3.7j * b, b), 0.0, atol=1e-12)
    r_perp = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    r_perp -= b * (np.vdot(b, r_perp) / np.vdot(b, b))
    assert np.allclose(remove_interference(r_perp, b), r_perp, atol=1e-12)
    with pytest.raises(ZeroVector):
        remove_interference(r_perp, np.zeros(8))


def test_remove_interference_matches_projector_oracle():
    derived = derive_scene(nominal_scene())
    G = random_measurement_matrix(16, 64, 2)
    snap = simulate_snapshot(G, derived, 30.0, 2)
    b = G.entries @ steering_vector(derived.theta_ar_deg, 0.0, 64, 0.5).entries
    out = remove_interference(snap.r, b)
    P = np.eye(16) - np.outer(b, b.conj()) / float(np.vdot(b, b).real)
    assert np.allclose(out, P @ snap.r, atol=1e-12)


@settings(deadline=None, max_examples=50)
@given(seed=st.integers(0, 2**31 - 1))
def test_remove_interference_idempotent_contraction(seed):
    rng = np.random.default_rng(seed)
    r = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    b = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    once = remove_interference(r, b)
    twice = remove_interference(once, b)
    assert np.allclose(once, twice, atol=1e-10)
    assert np.linalg.norm(once) <= np.linalg.norm(r) + 1e-12


def _no_interference_setup(theta_deg, m=32, n=12, seed=4):
    G = random_measurement_matrix(n, m, seed)
    r = G.entries @ steer_ref(theta_deg, m)
    # use a signature orthogonal to the data so projection is a no-op
    rng = np.random.default_rng(seed + 1)
    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    b -= r * (np.vdot(r, b) / np.vdot(r, r))
    return r, G, b


def test_omp_exact_on_grid_recovery():
    r, G, b = _no_interference_setup(-7.0)
    dic = make_grid_dictionary(COARSE, 0.0, 32, 0.5)
    assert omp_estimate(r, G, b, dic, 1) == [-7.0]


def test_omp_quantizes_off_grid_target():
    r, G, b = _no_interference_setup(12.4)
    dic = make_grid_dictionary(COARSE, 0.0, 32, 0.5)
    est = omp_estimate(r, G, b, dic, 1)
    assert abs(est[0] - 12.4) <= 0.5 + 1e-9


def test_omp_residual_decreases_with_more_atoms():
    m, n = 32, 12
    G = random_measurement_matrix(n, m, 8)
    r = G.entries @ (steer_ref(-20.0, m) + 0.8 * steer_ref(14.0, m))
    rng = np.random.default_rng(9)
    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    b -= r * (np.vdot(r, b) / np.vdot(r, r))
    dic = make_grid_dictionary(COARSE, 0.0, m, 0.5)

    def residual_norm(angles):
        eff = G.entries @ np.column_stack([steer_ref(t, m) for t in angles])
        y = remove_interference(r, b)
        coef, *_ = np.linalg.lstsq(eff, y, rcond=None)
        return float(np.linalg.norm(y - eff @ coef))

    r1 = residual_norm(omp_estimate(r, G, b, dic, 1))
    r2 = residual_norm(omp_estimate(r, G, b, dic, 2))
    assert r2 <= r1 + 1e-12


def test_l1_zero_data():
    G = random_measurement_matrix(6, 16, 0)
    dic = make_grid_dictionary(COARSE, 0.0, 16, 0.5)
    x, converged = l1_solve(np.zeros(6), G, np.ones(6), dic, rho_tilde=0.1)
    assert converged
    assert np.allclose(x, 0.0)


def test_l1_single_atom_support():
    r, G, b = _no_interference_setup(5.0)
    dic = make_grid_dictionary(COARSE, 0.0, 32, 0.5)
    x, converged = l1_solve(r, G, b, dic, rho_tilde=0.05, max_iter=20000, tol=1e-12)
    assert converged
    idx = int(np.argmax(np.abs(x)))
    assert dic.thetas_deg[idx] == 5.0
    others = np.abs(np.delete(x, idx))
    assert np.max(others) <= 0.05 * abs(x[idx])
    res = l1_estimate(r, G, b, dic, 0.05, 1, max_iter=20000)
    assert res.angles_deg == [5.0]


def test_l1_kkt_conditions():
    r, G, b = _no_interference_setup(5.0, m=16, n=8, seed=6)
    dic = make_grid_dictionary({"min": -45, "max": 45, "step": 3.0}, 0.0, 16, 0.5)
    rho = 0.05
    x, converged = l1_solve(r, G, b, dic, rho, max_iter=200000, tol=1e-16)
    assert converged
    y = remove_interference(r, b)
    eff = G.entries @ dic.atoms
    eff = eff - np.outer(b, b.conj() @ eff) / float(np.vdot(b, b).real)
    grad = 2.0 * (eff.conj().T @ (eff @ x - y))
    active = np.abs(x) > 1e-8
    assert np.all(np.abs(np.abs(grad[active]) - rho) <= 1e-6)
    assert np.all(np.abs(grad[~active]) <= rho + 1e-6)


def test_l1_objective_decreases_with_iterations():
    r, G, b = _no_interference_setup(5.0)
    dic = make_grid_dictionary(COARSE, 0.0, 32, 0.5)

    def objective(x):
        y = remove_interference(r, b)
        eff = G.entries @ dic.atoms
        eff = eff - np.outer(b, b.conj() @ eff) / float(np.vdot(b, b).real)
        res = y - eff @ x
        return float(np.vdot(res, res).real) + 0.05 * float(np.sum(np.abs(x)))

    x5, _ = l1_solve(r, G, b, dic, 0.05, max_iter=5, tol=0.0)
    x500, _ = l1_solve(r, G, b, dic, 0.05, max_iter=500, tol=0.0)
    assert objective(x500) <= objective(x5) + 1e-12


def test_baselines_deterministic():
    derived = derive_scene(nominal_scene())
    G = random_measurement_matrix(16, 64, 5)
    snap = simulate_snapshot(G, derived, 20.0, 5)
    b = G.entries @ steering_vector(derived.theta_ar_deg, 0.0, 64, 0.5).entries
    dic = make_grid_dictionary(COARSE, 0.0, 64, 0.5)
    assert omp_estimate(snap.r, G, b, dic, 3) == omp_estimate(snap.r, G, b, dic, 3)
    s1 = fft_spectrum(snap.r, G, dic)
    s2 = fft_spectrum(snap.r, G, dic)
    assert np.array_equal(s1.values, s2.values)

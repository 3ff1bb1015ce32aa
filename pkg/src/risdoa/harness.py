"""Monte Carlo experiment orchestration.

Sweeps SNR, measurement count or element count over a list of estimators,
scores each trial by optimal assignment against the ground-truth DOAs and
aggregates RMSE (root of the grand mean squared error over trials and
targets jointly), with the root-CRLB attached per sweep point.
"""

from __future__ import annotations

import configparser
import csv
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import scene as scene_mod
from .anm import AnmProblem, default_rho, solve_anm
from .baselines import (
    fft_spectrum,
    l1_estimate,
    make_grid_dictionary,
    omp_estimate,
    remove_interference,
)
from .crlb import crlb_doa, fisher_matrix
from .errors import CountMismatch, RisDoaError
from .measmat import optimize_gram, round_rows
from .scene import Point2D, Scene, SceneDerived, derive_scene, load_scene, nominal_scene
from .sdp import SolverOptions
from .signal_model import (
    MeasurementMatrix,
    Snapshot,
    random_measurement_matrix,
    simulate_snapshot,
    steering_matrix,
    steering_vector,
)
from .subspace import (
    candidate_peaks,
    default_sub_len,
    hankel_lift,
    music_spectrum,
    noise_subspace,
    pick_peaks,
    singular_value_gap,
)

FINE_GRID = {"min": -45.0, "max": 45.0, "step": 0.01}
COARSE_GRID = {"min": -45.0, "max": 45.0, "step": 1.0}
METHODS = ("anm", "fft", "fft-ir", "omp", "l1")

# A denoised xi carrying K well-resolved targets is numerically Hankel-rank-K;
# a gap ratio near 1 means the convex program settled on an interpolant that
# is not K sparse, so the MUSIC peaks are meaningless and the trial is
# reported as a failure instead of polluting the RMSE.
ANM_RANK_GAP_LIMIT = 0.5


def associate_and_score(estimates: Sequence[float], truth: Sequence[float]) -> float:
    """Mean squared DOA error (deg^2) under the optimal one-to-one assignment."""
    if len(estimates) != len(truth):
        raise CountMismatch(
            "got %d estimates for %d targets" % (len(estimates), len(truth))
        )
    k = len(truth)
    if k > 6:
        raise ValueError("exhaustive assignment supported only for K <= 6")
    est = np.asarray(estimates, dtype=float)
    tru = np.asarray(truth, dtype=float)
    best = math.inf
    for perm in itertools.permutations(range(k)):
        sse = float(np.sum((est[list(perm)] - tru) ** 2))
        if sse < best:
            best = sse
    return best / k


@dataclass
class ExperimentConfig:
    scene: str = "nominal"
    methods: list[str] = field(default_factory=lambda: ["anm"])
    sweep_variable: str = "snr_db"  # snr_db | n_meas | m_elements
    sweep_values: list[float] = field(default_factory=lambda: [0, 5, 10, 15, 20, 25, 30])
    trials: int = 100
    base_seed: int = 1
    matrix_mode: str = "random"  # random | optimized | file
    matrix_file: Optional[str] = None
    output_path: Optional[str] = None
    snr_db: float = 20.0
    n_meas: int = 16
    m_elements: int = 64
    doa_spread_deg: float = 1.0
    interference_on: bool = True
    anm_max_iter: int = 20000
    anm_tol: float = 1e-6
    anm_rho_override: Optional[float] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        vals = list(self.sweep_values)
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("sweep values must be strictly increasing")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError("unknown methods: %s" % sorted(unknown))
        if self.sweep_variable not in ("snr_db", "n_meas", "m_elements"):
            raise ValueError("unsupported sweep variable %r" % self.sweep_variable)


def load_experiment_config(path: str) -> ExperimentConfig:
    """Read an experiment description from an INI file.

    Sections: [scene] (file = nominal | path), [sweep] (variable, values,
    trials, base_seed, snr_db, n_meas, m_elements, matrix_mode,
    doa_spread_deg, interference), [method] (names), [output] (path).
    """
    parser = configparser.ConfigParser()
    with open(path) as f:
        parser.read_file(f)
    kwargs = {}
    if parser.has_section("scene"):
        kwargs["scene"] = parser.get("scene", "file", fallback="nominal")
    sw = parser["sweep"] if parser.has_section("sweep") else {}
    if "variable" in sw:
        kwargs["sweep_variable"] = sw["variable"]
    if "values" in sw:
        kwargs["sweep_values"] = [float(v) for v in sw["values"].split(",")]
    for key, cast in (
        ("trials", int),
        ("base_seed", int),
        ("snr_db", float),
        ("n_meas", int),
        ("m_elements", int),
        ("doa_spread_deg", float),
    ):
        if key in sw:
            kwargs[key] = cast(sw[key])
    if "matrix_mode" in sw:
        kwargs["matrix_mode"] = sw["matrix_mode"]
    if "matrix_file" in sw:
        kwargs["matrix_file"] = sw["matrix_file"]
    if "interference" in sw:
        kwargs["interference_on"] = sw["interference"].strip().lower() in ("1", "true", "yes", "on")
    if parser.has_section("method") and parser.get("method", "names", fallback=""):
        kwargs["methods"] = [m.strip() for m in parser.get("method", "names").split(",")]
    if parser.has_section("output"):
        kwargs["output_path"] = parser.get("output", "path", fallback=None)
    anm = parser["anm"] if parser.has_section("anm") else {}
    if "max_iter" in anm:
        kwargs["anm_max_iter"] = int(anm["max_iter"])
    if "tol" in anm:
        kwargs["anm_tol"] = float(anm["tol"])
    if "rho_override" in anm:
        kwargs["anm_rho_override"] = float(anm["rho_override"])
    return ExperimentConfig(**kwargs)


@dataclass
class RmseRow:
    sweep_value: float
    method: str
    rmse_deg: float
    trials: int
    failures: int
    mean_runtime_s: float
    crlb_deg: Optional[float] = None


@dataclass
class RmseTable:
    sweep_variable: str
    rows: list[RmseRow]

    def to_csv(self, path: str) -> None:
        # wall-clock stays on the in-memory rows only, so that identical
        # config + seed gives a byte-identical file
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(
                [self.sweep_variable, "method",
                 "rmse_deg_over_trials_and_targets", "trials", "failures",
                 "crlb_deg"]
            )
            for row in self.rows:
                writer.writerow(
                    [
                        repr(row.sweep_value),
                        row.method,
                        repr(row.rmse_deg),
                        row.trials,
                        row.failures,
                        "" if row.crlb_deg is None else repr(row.crlb_deg),
                    ]
                )


def trial_seed(base_seed: int, point: int, trial: int, stream: int = 0) -> int:
    """Deterministic per-trial seed from a counter-based split of the base seed."""
    ss = np.random.SeedSequence([base_seed, point, trial, stream])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _base_scene(config: ExperimentConfig, m_elements: int) -> Scene:
    if config.scene in ("nominal", "table1"):
        return nominal_scene(num_elements=m_elements)
    sc = load_scene(config.scene)
    if sc.num_elements != m_elements:
        sc.num_elements = m_elements
    return sc


def perturb_scene(scene: Scene, deltas_deg: Sequence[float]) -> Scene:
    """Rotate each target about the RIS by its own offset (preserves d_TR)."""
    targets = []
    for t, d in zip(scene.targets, deltas_deg):
        ang = math.radians(d)
        dx, dy = t.x - scene.ris.x, t.y - scene.ris.y
        targets.append(
            Point2D(
                scene.ris.x + dx * math.cos(ang) - dy * math.sin(ang),
                scene.ris.y + dx * math.sin(ang) + dy * math.cos(ang),
            )
        )
    from dataclasses import replace

    return replace(scene, targets=targets)


def select_peaks_by_fit(
    r: np.ndarray,
    G: MeasurementMatrix,
    b: np.ndarray,
    candidates: Sequence[float],
    k: int,
    theta_rs_deg: float,
    spacing_over_lambda: float,
) -> list[float]:
    """Choose the K candidate angles whose atoms best explain the snapshot.

    MUSIC ranks peaks by spectrum height, which on hard noisy draws can
    promote a spurious peak above a true target. Each K-subset of the
    candidates is refit to the measured data by least squares (interference
    signature included as an extra column) and the subset with the smallest
    residual wins. Angles are kept exactly as picked; no refinement.
    """
    cands = list(candidates)
    if len(cands) <= k:
        return sorted(cands)
    best_res, best = math.inf, None
    for subset in itertools.combinations(cands, k):
        A = steering_matrix(
            subset, theta_rs_deg, G.m_elements, spacing_over_lambda
        )
        H = np.column_stack([G.entries @ A, b])
        coef, *_ = np.linalg.lstsq(H, r, rcond=None)
        res = float(np.linalg.norm(r - H @ coef))
        if res < best_res:
            best_res, best = res, subset
    return sorted(best)


def estimate_trial(
    method: str,
    snapshot: Snapshot,
    G: MeasurementMatrix,
    derived: SceneDerived,
    anm_opts: Optional[SolverOptions] = None,
    rho_override: Optional[float] = None,
) -> tuple[list[float], bool]:
    """Run one estimator on one snapshot; returns (angles, degenerate_flag)."""
    k = derived.k_targets
    b = G.entries @ steering_vector(
        derived.theta_ar_deg, derived.theta_rs_deg, derived.num_elements,
        derived.spacing_over_lambda,
    ).entries
    if method == "anm":
        sigma_w = snapshot.truth.sigma_w if snapshot.truth else 0.0
        rho = rho_override if rho_override is not None else default_rho(
            sigma_w, derived.num_elements
        )
        # floor keeps the Toeplitz structure active for (near-)noiseless data
        rho = max(rho, 1e-6 * max(np.linalg.norm(snapshot.r), 1e-300))
        sol = solve_anm(AnmProblem(r=snapshot.r, G=G, b=b, rho=rho), anm_opts)
        lift = hankel_lift(sol.xi, default_sub_len(derived.num_elements))
        spec = music_spectrum(
            noise_subspace(lift, k), derived.theta_rs_deg, FINE_GRID,
            derived.spacing_over_lambda,
        )
        # on hard draws a true target can survive only as a minor local
        # maximum, so the refit pool is kept much wider than K
        cands = candidate_peaks(spec, 8 * k)
        degenerate = len(cands) < k or not sol.converged
        if degenerate:
            # too few genuine peaks: fall back to padded picking
            angles = pick_peaks(spec, k).angles_deg
        else:
            angles = select_peaks_by_fit(
                snapshot.r, G, b, cands, k, derived.theta_rs_deg,
                derived.spacing_over_lambda,
            )
        gap = singular_value_gap(lift, k)
        if not math.isnan(gap) and gap > ANM_RANK_GAP_LIMIT:
            degenerate = True
        return angles, degenerate
    if method in ("fft", "fft-ir"):
        dic = make_grid_dictionary(
            FINE_GRID, derived.theta_rs_deg, derived.num_elements,
            derived.spacing_over_lambda,
        )
        r = snapshot.r if method == "fft" else remove_interference(snapshot.r, b)
        peaks = pick_peaks(fft_spectrum(r, G, dic), k)
        return peaks.angles_deg, peaks.padded
    if method == "omp":
        dic = make_grid_dictionary(
            COARSE_GRID, derived.theta_rs_deg, derived.num_elements,
            derived.spacing_over_lambda,
        )
        return omp_estimate(snapshot.r, G, b, dic, k), False
    if method == "l1":
        dic = make_grid_dictionary(
            COARSE_GRID, derived.theta_rs_deg, derived.num_elements,
            derived.spacing_over_lambda,
        )
        sigma_w = snapshot.truth.sigma_w if snapshot.truth else 0.0
        rho = rho_override if rho_override is not None else default_rho(
            sigma_w, derived.num_elements
        )
        rho = max(rho, 1e-12 * max(np.linalg.norm(snapshot.r), 1e-300))
        peaks = l1_estimate(snapshot.r, G, b, dic, rho, k)
        return peaks.angles_deg, peaks.padded
    raise ValueError("unknown method %r" % method)


def _crlb_for_point(
    config: ExperimentConfig, scene: Scene, G: MeasurementMatrix, snr_db: float
) -> Optional[float]:
    """Root-CRLB (deg) at the nominal scene, averaged over targets."""
    derived = derive_scene(scene)
    z = np.asarray(derived.target_path_gain, dtype=complex)
    from .signal_model import steering_matrix

    A = steering_matrix(
        derived.theta_tr_deg, derived.theta_rs_deg, derived.num_elements,
        derived.spacing_over_lambda,
    )
    sig = G.entries @ (A @ z)
    sig_pow = float(np.vdot(sig, sig).real)
    sigma_w = math.sqrt(sig_pow / (G.n_meas * 10.0 ** (snr_db / 10.0)))
    try:
        fim = fisher_matrix(G, derived, z, derived.direct_path_gain, sigma_w)
        bounds = [crlb_doa(fim, i) for i in range(derived.k_targets)]
    except RisDoaError:
        return None
    return math.degrees(math.sqrt(sum(bounds) / len(bounds)))


def _matrix_for_trial(
    config: ExperimentConfig,
    derived: SceneDerived,
    n_meas: int,
    seed: int,
    gram_cache: dict,
) -> MeasurementMatrix:
    if config.matrix_mode == "random":
        return random_measurement_matrix(n_meas, derived.num_elements, seed)
    if config.matrix_mode == "optimized":
        key = (derived.num_elements, round(derived.theta_ar_deg, 9))
        if key not in gram_cache:
            a_ar = steering_vector(
                derived.theta_ar_deg, derived.theta_rs_deg, derived.num_elements,
                derived.spacing_over_lambda,
            )
            gram_cache[key] = optimize_gram(a_ar)
        return round_rows(gram_cache[key], n_meas, seed)
    if config.matrix_mode == "file":
        if config.matrix_file is None:
            raise ValueError("matrix_mode=file requires matrix_file")
        return load_measurement_matrix(config.matrix_file)
    raise ValueError("unknown matrix mode %r" % config.matrix_mode)


def run_sweep(config: ExperimentConfig) -> RmseTable:
    """Execute the configured Monte Carlo sweep and aggregate an RMSE table."""
    anm_opts = SolverOptions(max_iter=config.anm_max_iter, tol=config.anm_tol)
    gram_cache: dict = {}
    rows = []
    for p_idx, value in enumerate(config.sweep_values):
        snr_db = config.snr_db
        n_meas = config.n_meas
        m_elements = config.m_elements
        if config.sweep_variable == "snr_db":
            snr_db = float(value)
        elif config.sweep_variable == "n_meas":
            n_meas = int(value)
        else:
            m_elements = int(value)

        base = _base_scene(config, m_elements)
        nominal_derived = derive_scene(base)
        crlb_G = _matrix_for_trial(
            config, nominal_derived, n_meas, trial_seed(config.base_seed, p_idx, 0, 9),
            gram_cache,
        )
        crlb_deg = _crlb_for_point(config, base, crlb_G, snr_db)

        for method in config.methods:
            sq_errors: list[float] = []
            failures = 0
            runtimes: list[float] = []
            for t in range(config.trials):
                seed_scene = trial_seed(config.base_seed, p_idx, t, 1)
                seed_sim = trial_seed(config.base_seed, p_idx, t, 2)
                seed_mat = trial_seed(config.base_seed, p_idx, t, 3)
                rng = np.random.default_rng(seed_scene)
                deltas = rng.uniform(
                    -config.doa_spread_deg, config.doa_spread_deg, size=base.k_targets
                )
                trial_scene = perturb_scene(base, deltas)
                derived = derive_scene(trial_scene)
                G = _matrix_for_trial(config, derived, n_meas, seed_mat, gram_cache)
                snap = simulate_snapshot(
                    G, derived, snr_db, seed_sim, interference_on=config.interference_on
                )
                start = time.perf_counter()
                try:
                    est, degenerate = estimate_trial(
                        method, snap, G, derived,
                        anm_opts=anm_opts, rho_override=config.anm_rho_override,
                    )
                except RisDoaError:
                    failures += 1
                    runtimes.append(time.perf_counter() - start)
                    continue
                runtimes.append(time.perf_counter() - start)
                if degenerate:
                    # counted, reported and left out of the RMSE: a flagged
                    # solve carries no usable angle estimate
                    failures += 1
                    continue
                sq_errors.append(associate_and_score(est, derived.theta_tr_deg))
            rmse = math.sqrt(sum(sq_errors) / len(sq_errors)) if sq_errors else math.nan
            rows.append(
                RmseRow(
                    sweep_value=float(value),
                    method=method,
                    rmse_deg=rmse,
                    trials=config.trials,
                    failures=failures,
                    mean_runtime_s=sum(runtimes) / len(runtimes),
                    crlb_deg=crlb_deg,
                )
            )
    table = RmseTable(sweep_variable=config.sweep_variable, rows=rows)
    if config.output_path:
        table.to_csv(config.output_path)
    return table


def save_measurement_matrix(G: MeasurementMatrix, path: str, seed: Optional[int] = None) -> None:
    """CSV of interleaved re/im entries, row-major, with an M,N,seed header."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["M", G.m_elements, "N", G.n_meas, "seed", seed if seed is not None else ""])
        for row in G.entries:
            flat = []
            for v in row:
                flat.extend([repr(float(v.real)), repr(float(v.imag))])
            writer.writerow(flat)


def load_measurement_matrix(path: str) -> MeasurementMatrix:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        m = int(header[1])
        rows = []
        for line in reader:
            vals = [float(x) for x in line]
            rows.append([complex(vals[2 * i], vals[2 * i + 1]) for i in range(m)])
    return MeasurementMatrix(entries=np.asarray(rows), amplitudes_fixed=False)


def write_plot_recipe(table_csv: str, path: str) -> None:
    """Emit a self-contained matplotlib script that plots an RMSE table CSV."""
    script = f'''"""Plot RMSE-vs-sweep curves from {table_csv}."""
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

by_method = defaultdict(list)
with open("{table_csv}") as f:
    reader = csv.DictReader(f)
    sweep_name = reader.fieldnames[0]
    for row in reader:
        by_method[row["method"]].append(
            (float(row[sweep_name]), float(row["rmse_deg_over_trials_and_targets"]))
        )
        if row.get("crlb_deg"):
            by_method["crlb"].append((float(row[sweep_name]), float(row["crlb_deg"])))

for method, pts in by_method.items():
    pts = sorted(set(pts))
    style = "k--" if method == "crlb" else "-o"
    plt.semilogy([p[0] for p in pts], [p[1] for p in pts], style, label=method)
plt.xlabel(sweep_name)
plt.ylabel("RMSE (deg)")
plt.grid(True, which="both")
plt.legend()
plt.savefig("{table_csv}.png", dpi=150)
'''
    with open(path, "w") as f:
        f.write(script)

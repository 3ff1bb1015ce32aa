"""Command-line interface.

Subcommands: simulate, estimate, spectrum, optimize-g, crlb-map, sweep.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .anm import AnmProblem, default_rho, solve_anm
from .baselines import fft_spectrum, make_grid_dictionary, remove_interference
from .crlb import crlb_map
from .errors import RisDoaError
from .harness import (
    FINE_GRID,
    estimate_trial,
    load_experiment_config,
    load_measurement_matrix,
    run_sweep,
    save_measurement_matrix,
)
from .measmat import optimized_measurement_matrix
from .scene import derive_scene, load_scene, nominal_scene
from .signal_model import (
    random_measurement_matrix,
    simulate_snapshot,
    snapshot_to_csv,
    steering_vector,
)
from .subspace import default_sub_len, hankel_lift, music_spectrum, noise_subspace


def _load_any_scene(name: str):
    if name in ("nominal", "table1"):
        return nominal_scene()
    return load_scene(name)


def _matrix(arg: str, n: int, m: int, derived):
    if arg.startswith("random:"):
        return random_measurement_matrix(n, m, int(arg.split(":", 1)[1]))
    if arg.startswith("optimized:"):
        return optimized_measurement_matrix(derived, n, int(arg.split(":", 1)[1]))
    return load_measurement_matrix(arg)


def _add_common(p):
    p.add_argument("--scene", default="nominal", help="scene JSON file or 'nominal'")
    p.add_argument("--n", type=int, default=16, help="number of measurements N")
    p.add_argument("--seed", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risdoa",
        description="RIS-aided passive DOA estimation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw one snapshot and write it as CSV")
    _add_common(p)
    p.add_argument("--snr", type=float, default=20.0, help="SNR in dB")
    p.add_argument("--matrix", default="random:1", help="random:SEED | optimized:SEED | file")
    p.add_argument("--no-interference", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("estimate", help="simulate one snapshot and estimate DOAs")
    _add_common(p)
    p.add_argument("--snr", type=float, default=20.0)
    p.add_argument("--matrix", default="random:1")
    p.add_argument("--method", choices=["anm", "fft", "fft-ir", "omp", "l1"], default="anm")

    p = sub.add_parser("spectrum", help="write a spatial-spectrum CSV (theta_deg, value)")
    _add_common(p)
    p.add_argument("--snr", type=float, default=20.0)
    p.add_argument("--matrix", default="random:1")
    p.add_argument("--method", choices=["anm", "fft", "fft-ir"], default="anm")
    p.add_argument("--out", required=True)

    p = sub.add_parser("optimize-g", help="optimize the measurement matrix and save it")
    _add_common(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("crlb-map", help="single-target root-CRLB heatmap CSV")
    p.add_argument("--scene", required=True, help="scene JSON file or 'nominal'")
    p.add_argument("--g", default="random:1", help="random:SEED | optimized:SEED | file")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--grid", required=True, help="x0,x1,y0,y1,step in meters")
    p.add_argument("--sigma-w", type=float, default=0.1)
    p.add_argument("--ps", type=float, default=1.0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="run a Monte Carlo sweep from an INI config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="override the config's output path")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except FileNotFoundError as exc:
        print("error: file not found: %s" % exc.filename, file=sys.stderr)
        return 2
    except (RisDoaError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "simulate":
        scene = _load_any_scene(args.scene)
        derived = derive_scene(scene)
        G = _matrix(args.matrix, args.n, scene.num_elements, derived)
        snap = simulate_snapshot(
            G, derived, args.snr, args.seed, interference_on=not args.no_interference
        )
        snapshot_to_csv(snap, args.out)
        print("wrote %d samples to %s" % (snap.r.size, args.out))
        return 0

    if args.command == "estimate":
        scene = _load_any_scene(args.scene)
        derived = derive_scene(scene)
        G = _matrix(args.matrix, args.n, scene.num_elements, derived)
        snap = simulate_snapshot(G, derived, args.snr, args.seed)
        est, degenerate = estimate_trial(args.method, snap, G, derived)
        print("estimated DOAs (deg):", " ".join("%.4f" % a for a in est))
        print("true DOAs (deg):     ", " ".join("%.4f" % a for a in derived.theta_tr_deg))
        if degenerate:
            print("warning: degenerate estimate (padded peaks or non-converged solve)")
        return 0

    if args.command == "spectrum":
        scene = _load_any_scene(args.scene)
        derived = derive_scene(scene)
        G = _matrix(args.matrix, args.n, scene.num_elements, derived)
        snap = simulate_snapshot(G, derived, args.snr, args.seed)
        b = G.entries @ steering_vector(
            derived.theta_ar_deg, derived.theta_rs_deg, derived.num_elements,
            derived.spacing_over_lambda,
        ).entries
        if args.method == "anm":
            rho = default_rho(snap.truth.sigma_w, derived.num_elements)
            sol = solve_anm(AnmProblem(r=snap.r, G=G, b=b, rho=rho))
            lift = hankel_lift(sol.xi, default_sub_len(derived.num_elements))
            ns = noise_subspace(lift, derived.k_targets)
            spec = music_spectrum(
                ns, derived.theta_rs_deg, FINE_GRID, derived.spacing_over_lambda
            )
        else:
            dic = make_grid_dictionary(
                FINE_GRID, derived.theta_rs_deg, derived.num_elements,
                derived.spacing_over_lambda,
            )
            r = snap.r if args.method == "fft" else remove_interference(snap.r, b)
            spec = fft_spectrum(r, G, dic)
        with open(args.out, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["theta_deg", "g_sp"])
            for th, v in zip(spec.thetas_deg, spec.values):
                writer.writerow([repr(float(th)), repr(float(v))])
        print("wrote %d spectrum points to %s" % (spec.thetas_deg.size, args.out))
        return 0

    if args.command == "optimize-g":
        scene = _load_any_scene(args.scene)
        derived = derive_scene(scene)
        G = optimized_measurement_matrix(derived, args.n, args.seed)
        save_measurement_matrix(G, args.out, seed=args.seed)
        print("wrote %dx%d optimized matrix to %s" % (G.n_meas, G.m_elements, args.out))
        return 0

    if args.command == "crlb-map":
        scene = _load_any_scene(args.scene)
        derived = derive_scene(scene)
        G = _matrix(args.g, args.n, scene.num_elements, derived)
        x0, x1, y0, y1, step = (float(v) for v in args.grid.split(","))
        rows = crlb_map(
            scene,
            {"x_min": x0, "x_max": x1, "y_min": y0, "y_max": y1, "step": step},
            G,
            p_s=args.ps,
            sigma_w=args.sigma_w,
        )
        with open(args.out, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["x_m", "y_m", "rmse_deg"])
            for x, y, v in rows:
                writer.writerow([repr(x), repr(y), repr(v)])
        print("wrote %d heatmap points to %s" % (len(rows), args.out))
        return 0

    if args.command == "sweep":
        config = load_experiment_config(args.config)
        if args.out:
            config.output_path = args.out
        table = run_sweep(config)
        for row in table.rows:
            print(
                "%s=%g method=%s rmse=%.5f deg (failures %d/%d)"
                % (
                    table.sweep_variable,
                    row.sweep_value,
                    row.method,
                    row.rmse_deg,
                    row.failures,
                    row.trials,
                )
            )
        if config.output_path:
            print("wrote %s" % config.output_path)
        return 0

    raise ValueError("unknown command %r" % args.command)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line pipeline: make-acq -> simulate -> reconstruct -> slice, plus self-checks.

Exit codes: 0 success, 1 check failure, 2 usage or input error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .errors import FormatError, PolarSARError
from .forward import simulate_hologram
from .geometry import expand_sweep
from .inversion import mnls_fast
from .kgrid import suggest_grid
from .polarimetry import MAP_LABELS

log = logging.getLogger("polarsar3d")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_IO = 0, 1, 2, 3


class InputFileError(Exception):
    """A required input path is missing or unreadable."""


def _require(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise InputFileError(f"{what} not found: {p}")
    return p


def cmd_make_acq(args) -> int:
    acq = expand_sweep(args.theta, args.phi, args.freq, args.mode)
    if args.explicit:
        io.save_acquisition(acq, args.out)
    else:
        doc = {"mode": args.mode.upper(), "sweep": {"theta_deg": args.theta, "phi_deg": args.phi, "freq_hz": args.freq}}
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"M = {len(acq)} descriptors written to {args.out}")
    return EXIT_OK


def cmd_make_grid(args) -> int:
    acq = io.load_acquisition(_require(args.acq, "acquisition file"))
    extent = args.extent if len(args.extent) == 3 else args.extent * 3
    kgrid = suggest_grid(acq, extent, dims=args.dims, interp=args.interp)
    io.save_grid(kgrid, args.out)
    print(
        f"grid dims {list(kgrid.dims)}, delta_k {np.round(kgrid.delta_k, 4).tolist()} rad/m, "
        f"voxel pitch {np.round(kgrid.voxel_pitch, 5).tolist()} m -> {args.out}"
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    scene = io.load_scene(_require(args.scene, "scene file"))
    acq = io.load_acquisition(_require(args.acq, "acquisition file"))
    holo = simulate_hologram(scene, acq, noise_sigma=args.noise_sigma, seed=args.seed)
    io.write_hologram(holo, args.out)
    print(f"hologram of {len(acq)} samples written to {args.out}")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    holo = io.read_hologram(_require(args.holo, "hologram file"))
    kgrid = io.load_grid(_require(args.grid, "grid file"))
    if args.interp:
        kgrid = kgrid.with_interp(args.interp)
    report = mnls_fast(holo, kgrid)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for label, vol in report.maps.items():
        io.write_volume(vol, report.maps.pitch, report.maps.origin, out / f"{label}.vol", label=label)
    config = {"hologram": str(args.holo), "grid": kgrid.to_json_dict(), "measurements": len(holo.acquisition)}
    io.save_report(report, out / "report.json", config=config)
    print(
        f"maps {list(kgrid.dims)} written to {out}; residual {report.residual_norm:.3e}, "
        f"relative data fit {report.data_fit_relative:.3e}"
    )
    return EXIT_OK


def cmd_check(args) -> int:
    from . import checks

    rng = np.random.default_rng(args.seed)
    if args.mode == "adjoint":
        trials = args.trials or 100
        worst = float(checks.adjoint_defects(rng, trials).max())
        ok = worst < 1e-10
        print(f"adjoint: {trials} trials, max relative defect {worst:.3e} (limit 1e-10) {'PASS' if ok else 'FAIL'}")
    elif args.mode == "weights":
        n = args.trials or 10_000
        worst = checks.weights_crossderivation(rng, n)
        ok = worst < 1e-12
        print(f"weights: {n} angle pairs x 3 modes, max |closed form - Jones composition| {worst:.3e} (limit 1e-12) "
              f"{'PASS' if ok else 'FAIL'}")
    else:
        trials = args.trials or 5
        rows = checks.oracle_errors(rng, trials, dims=(6, 6, 6), m=96)
        worst, fit = float(rows[:, 0].max()), float(rows[:, 1].max())
        ok = worst < 1e-8 and fit < 1e-8
        print(f"oracle: {trials} trials on 6x6x6, M=96, max map error {worst:.3e}, max data fit {fit:.3e} "
              f"(limit 1e-8) {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_slice(args) -> int:
    vol, geom = io.read_volume(_require(args.map, "volume file"))
    io.export_slice(vol, args.axis, args.index, args.db_floor, args.out)
    print(f"{geom['label']} slice {args.axis}={args.index} written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="polarsar3d",
        description="3-D radar imaging from polarization-diverse measurements. "
        "Angles are degrees, frequencies Hz, lengths meters. "
        "POLARSAR3D_THREADS caps FFT threads (0 = all cores).",
    )
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("make-acq", help="expand sweeps into an acquisition JSON file")
    s.add_argument("--mode", default="HH", choices=["HH", "VV", "HV", "hh", "vv", "hv"], help="polarization mode")
    s.add_argument("--theta", required=True, help="azimuth sweep start:step:stop in degrees, e.g. 0:2:20")
    s.add_argument("--phi", required=True, help="roll sweep start:step:stop in degrees, e.g. 0:5:360")
    s.add_argument("--freq", required=True, help="frequency sweep start:step:stop in Hz, e.g. 1e9:1e7:3e9")
    s.add_argument("--explicit", action="store_true", help="write explicit descriptor lists instead of the sweep form")
    s.add_argument("--out", required=True, help="output JSON path")
    s.set_defaults(func=cmd_make_acq)

    s = sub.add_parser("make-grid", help="suggest a k-space grid JSON for an acquisition")
    s.add_argument("--acq", required=True, help="acquisition JSON")
    s.add_argument("--extent", type=float, nargs="+", default=[1.0], help="image extent in meters (1 or 3 values)")
    s.add_argument("--dims", type=int, nargs=3, default=None, help="explicit grid dims Nx Ny Nz (fits delta_k to data)")
    s.add_argument("--interp", default="nearest", choices=["nearest", "linear"], help="regridding kernel")
    s.add_argument("--out", required=True, help="output grid JSON (units rad/m)")
    s.set_defaults(func=cmd_make_grid)

    s = sub.add_parser("simulate", help="simulate a hologram from a scene")
    s.add_argument("--scene", required=True, help="scene JSON (positions in meters)")
    s.add_argument("--acq", required=True, help="acquisition JSON (degrees, Hz)")
    s.add_argument("--out", required=True, help="output hologram file")
    s.add_argument("--noise-sigma", type=float, default=0.0, help="complex noise standard deviation (hologram units)")
    s.add_argument("--seed", type=int, default=0, help="noise seed")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("reconstruct", help="fast MNLS reconstruction of the xx, yy, xy maps")
    s.add_argument("--holo", required=True, help="hologram file")
    s.add_argument("--grid", required=True, help="grid JSON (rad/m)")
    s.add_argument("--out-dir", required=True, help="directory for xx.vol, yy.vol, xy.vol and report.json")
    s.add_argument("--interp", choices=["nearest", "linear"], default=None, help="override the grid's regridding kernel")
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("check", help="randomized self-tests; exit 1 on failure")
    s.add_argument("--mode", required=True, choices=["adjoint", "oracle", "weights"])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=0, help="number of random instances (0 = mode default)")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("slice", help="export a dB-scaled volume slice as PGM")
    s.add_argument("--map", required=True, help="volume file")
    s.add_argument("--axis", required=True, choices=["x", "y", "z"])
    s.add_argument("--index", type=int, required=True, help="slice index along the axis (voxels)")
    s.add_argument("--db-floor", type=float, default=-40.0, help="dynamic range floor in dB below the volume peak (<0)")
    s.add_argument("--out", required=True, help="output PGM path")
    s.set_defaults(func=cmd_slice)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (InputFileError, FormatError, PolarSARError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

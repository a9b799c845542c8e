"""Batch front-end: simulate | reconstruct | gain | validate.

Every command is driven by a config file (all keys optional, see config.py),
is reproducible from the recorded manifest plus seed, and writes only under
the configured output directory. Images are binary PGM, tables are CSV with
header rows, manifests are plain key=value text.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .config import ExperimentConfig, load_config
from .errors import ConfigError
from .experiment import build_problems, make_basis, slit_object
from .gain import gain_surface, write_gain_csv
from .imaging import (
    AcquisitionParams,
    DetectorGeometry,
    TransmittanceMap,
    build_binning_operator,
)
from .reduction import linear_reduction, project_box, sparsity_denoise, suppressed_components
from .simulate import SimulationConfig, accumulate, simulate_acquisition
from .validate import run_standard_checks


def _load_object(config: ExperimentConfig) -> TransmittanceMap:
    if config.object_source == "slit":
        return slit_object()
    path = Path(config.object_source)
    if not path.exists():
        raise ConfigError(f"object file not found: {path}")
    return TransmittanceMap.from_pgm(path)


def _geometry(config: ExperimentConfig, f: TransmittanceMap) -> DetectorGeometry:
    return DetectorGeometry.for_object(f.width, f.height, config.bin_factor)


def _params(config: ExperimentConfig) -> AcquisitionParams:
    return AcquisitionParams(config.n, config.eta0, config.eta1, config.n_eps)


def _outdir(config: ExperimentConfig) -> Path:
    out = Path(config.outputs_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, config: ExperimentConfig, extra: dict | None = None):
    entries = {"command": command}
    entries.update(config.manifest_entries())
    entries.update(extra or {})
    io.write_manifest(out / "manifest.txt", entries)


def cmd_simulate(config: ExperimentConfig) -> int:
    f = _load_object(config)
    geom = _geometry(config, f)
    sim = SimulationConfig(f=f, geom=geom, params=_params(config), frames=config.frames, seed=config.seed)
    xi0, xi1 = accumulate(simulate_acquisition(sim))

    out = _outdir(config)
    shape = (geom.detector_height, geom.detector_width)
    io.write_counts_pgm(out / "xi0.pgm", xi0.reshape(shape))
    io.write_counts_pgm(out / "xi1.pgm", xi1.reshape(shape))
    io.write_counts_csv(out / "xi0.csv", xi0.reshape(shape))
    io.write_counts_csv(out / "xi1.csv", xi1.reshape(shape))
    f.to_pgm(out / "object.pgm")
    _write_manifest(out, "simulate", config)
    print(f"simulate: wrote xi0/xi1 images and counts to {out}")
    return 0


def cmd_reconstruct(config: ExperimentConfig) -> int:
    f = _load_object(config)
    geom = _geometry(config, f)
    sim = SimulationConfig(f=f, geom=geom, params=_params(config), frames=config.frames, seed=config.seed)
    xi0, xi1 = accumulate(simulate_acquisition(sim))
    problems = build_problems(f, geom, _params(config), frames=config.frames)
    basis = make_basis(config.basis, f.width, f.height)

    out = _outdir(config)
    f.to_pgm(out / "object.pgm")
    rows = ["variant,tau,squared_error,zeroed_components"]
    variants = [
        ("red", problems.combined, np.concatenate([xi0, xi1])),
        ("red-s", problems.ghost_only, xi1),
    ]
    for name, problem, xi in variants:
        result = linear_reduction(problem, xi)
        for tau in config.tau_list:
            estimate = result.estimate
            zeroed = 0
            if basis is not None:
                zeroed = int(suppressed_components(result, basis, tau).sum())
                if tau > 0.0:
                    estimate = sparsity_denoise(result, basis, tau)
            final = project_box(estimate, result.estimate_cov)
            sq_error = float(np.sum((final - f.values) ** 2))
            stem = f"{name}_tau{tau:g}"
            io.write_unit_pgm(out / f"{stem}.pgm", final.reshape(f.height, f.width))
            io.write_values_csv(out / f"{stem}.csv", final.reshape(f.height, f.width))
            rows.append(f"{name},{tau:g},{sq_error:.10g},{zeroed}")
    (out / "summary.csv").write_text("\n".join(rows) + "\n")
    _write_manifest(out, "reconstruct", config)
    print(f"reconstruct: wrote estimates and summary.csv to {out}")
    return 0


def cmd_gain(config: ExperimentConfig) -> int:
    # Half-step slack so a stop value equal to start + k*step is included.
    etas = np.arange(config.gain_eta_start, config.gain_eta_stop + config.gain_eta_step / 2, config.gain_eta_step)
    ratios = np.arange(
        config.gain_ratio_start, config.gain_ratio_stop + config.gain_ratio_step / 2, config.gain_ratio_step
    )
    f = TransmittanceMap.constant(config.gain_width, config.gain_height, 1.0)
    a0 = build_binning_operator(config.gain_width, config.gain_height, 1)
    rows = gain_surface(a0, f, etas, ratios, n_ref=config.gain_n_ref)

    out = _outdir(config)
    write_gain_csv(out / "gain.csv", rows)
    _write_manifest(out, "gain", config, extra={"gain.points": len(rows)})
    print(f"gain: wrote {len(rows)} grid points to {out / 'gain.csv'}")
    return 0


def cmd_validate(config: ExperimentConfig | None, perturb_cov: float, seed: int | None) -> int:
    checks = run_standard_checks(perturb_cov=perturb_cov, seed=seed if seed is not None else 20240608)
    for check in checks:
        print(check.format_line())
    failed = [c for c in checks if not c.passed]
    print(f"validate: {len(checks) - len(failed)}/{len(checks)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualgi",
        description="Dual-arm ghost imaging: simulation, reconstruction and photon-gain analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("simulate", "simulate an acquisition and write count images"),
        ("reconstruct", "simulate and reconstruct the object for each tau"),
        ("gain", "evaluate the photon-gain surface and write CSV"),
        ("validate", "run the analytic-vs-Monte-Carlo oracle suite"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=str, default=None, help="config file path")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", type=str, default=None, help="override the output directory")
        if name == "validate":
            p.add_argument(
                "--perturb-cov",
                type=float,
                default=0.0,
                help="fault injection: scale the analytic covariance by (1 + X)",
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else ExperimentConfig()
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.out is not None:
            overrides["outputs_dir"] = args.out
        if overrides:
            config = replace(config, **overrides)
        if args.command == "simulate":
            return cmd_simulate(config)
        if args.command == "reconstruct":
            return cmd_reconstruct(config)
        if args.command == "gain":
            return cmd_gain(config)
        if args.command == "validate":
            return cmd_validate(config, perturb_cov=args.perturb_cov, seed=args.seed)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line interface.

Every subcommand reads an optional JSON config (``--config``), applies
``--set key=value`` overrides (dotted keys reach into ``constants``),
resolves defaults (``L = sqrt(n)``, radius at its admissibility threshold,
speed at its cap), and writes deterministic artifacts — JSON, CSV, SVG —
into the output directory (``--output-dir`` flag, else the
``MRWPFLOOD_OUTPUT_DIR`` environment variable, else the working directory).

Every output embeds the resolved config, the seed, the RNG algorithm
identifier, and the artifact version; no wall-clock data is written, so
identical configurations produce byte-identical files regardless of
parallelism.

Exit codes: 0 success, 1 validation or violation failure, 2 configuration
error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import RNG_ALGORITHM_ID, SPEED_ENVELOPE_DEFAULT, WorldParams
from .experiments import (
    lemma_sweep,
    lower_bound_experiment,
    lower_bound_params,
    scaling_experiment,
    stationarity_report,
)
from .flooding import SOURCE_RANDOM, SourcePlacementError, run_flood
from .mobility import APPROX_STATIONARY, WARMUP, Heading, Leg, init_population
from .stationary import destination_law, spatial_density
from .zones import build_zone_map, check_expansion, zone_map_svg, zone_map_to_csv

OUTPUT_DIR_ENV = "MRWPFLOOD_OUTPUT_DIR"

DEFAULT_CONFIG: dict = {
    "n": 2000,
    "L": None,
    "R": None,
    "v": None,
    "seed": 0,
    "init": APPROX_STATIONARY,
    "warmup_steps": None,
    "eta": 0.02,
    "constants": {"a": 18.0, "b": 600.0, "c1": 2.5, "c2": SPEED_ENVELOPE_DEFAULT},
    "max_steps": None,
}


class ConfigError(Exception):
    """Malformed or inconsistent configuration."""


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def load_config(path: str | None, overrides: list[str]) -> dict:
    """Resolve the configuration: defaults, then file, then overrides."""
    config = json.loads(json.dumps(DEFAULT_CONFIG))  # deep copy
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in loaded.items():
            if key == "constants":
                if not isinstance(value, dict):
                    raise ConfigError("'constants' must be a JSON object")
                for ckey, cval in value.items():
                    if ckey not in config["constants"]:
                        raise ConfigError(f"unknown constant {ckey!r}")
                    config["constants"][ckey] = cval
            elif key in config:
                config[key] = value
            else:
                raise ConfigError(f"unknown config key {key!r}")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        value = _parse_value(raw)
        if key.startswith("constants."):
            ckey = key[len("constants."):]
            if ckey not in config["constants"]:
                raise ConfigError(f"unknown constant {ckey!r}")
            config["constants"][ckey] = value
        elif key in config and key != "constants":
            config[key] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return config


def resolve_params(config: dict) -> WorldParams:
    """Fill derived defaults and build the world parameters."""
    try:
        n = int(config["n"])
        constants = config["constants"]
        c1 = float(constants["c1"])
        c2 = float(constants["c2"])
        eta = float(config["eta"])
        seed = int(config["seed"])
        L = float(config["L"]) if config["L"] is not None else math.sqrt(n)
        if config["R"] is not None:
            R = float(config["R"])
        else:
            R = c1 * L * math.sqrt(math.log(n) / n) if n > 1 else L
        v = float(config["v"]) if config["v"] is not None else R / c2
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid configuration value: {exc}") from exc
    try:
        return WorldParams(n=n, L=L, R=R, v=v, seed=seed, c1=c1, c2=c2, eta=eta)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def bound_constants(config: dict) -> tuple[float, float]:
    return float(config["constants"]["a"]), float(config["constants"]["b"])


def _metadata(config: dict) -> dict:
    return {
        "artifact_version": __version__,
        "rng_algorithm": RNG_ALGORITHM_ID,
        "config": config,
    }


# ---------------------------------------------------------------------------
# deterministic writers
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def write_csv(path: Path, meta: dict, header: list[str], rows: list[list]) -> None:
    lines = [f"# {key}={_fmt(value)}" for key, value in sorted(meta.items())]
    lines.append(",".join(header))
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _csv_meta(config: dict) -> dict:
    return {
        "artifact_version": __version__,
        "rng_algorithm": RNG_ALGORITHM_ID,
        "config": json.dumps(config, sort_keys=True),
    }


def _svg_meta_comment(config: dict) -> str:
    blob = json.dumps(_metadata(config), sort_keys=True)
    return f"<!-- {blob} -->\n"


def grid_svg(values: np.ndarray, size: int = 512) -> str:
    """Grayscale SVG of a value grid; black marks the maximum.

    ``values[i, j]`` covers the cell with south-west corner at the fractional
    position (i, j); the south row is drawn at the bottom.
    """
    k = values.shape[0]
    cell = size / k
    top = float(values.max())
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
        f'height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for i in range(k):
        for j in range(values.shape[1]):
            shade = values[i, j] / top if top > 0 else 0.0
            level = int(round(255 * (1.0 - shade)))
            color = f"#{level:02x}{level:02x}{level:02x}"
            x = i * cell
            y = (values.shape[1] - 1 - j) * cell
            parts.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{cell:.2f}" '
                f'height="{cell:.2f}" fill="{color}"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _out_dir(args) -> Path:
    chosen = args.output_dir or os.environ.get(OUTPUT_DIR_ENV) or "."
    path = Path(chosen)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path}: {exc}") from exc
    return path


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def cmd_simulate(args, config: dict) -> int:
    params = resolve_params(config)
    out = _out_dir(args)
    population = init_population(
        params, config["init"], config["warmup_steps"], workers=args.workers
    )
    watched = list(range(min(args.agents, params.n)))
    rows: list[list] = []
    for agent in watched:
        rows.append(
            [
                0,
                agent,
                float(population.pos[agent, 0]),
                float(population.pos[agent, 1]),
                Heading(int(population.heading[agent])).name,
                Leg(int(population.leg[agent])).name,
            ]
        )
    for step in range(1, args.steps + 1):
        population.step(workers=args.workers)
        for agent in watched:
            rows.append(
                [
                    step,
                    agent,
                    float(population.pos[agent, 0]),
                    float(population.pos[agent, 1]),
                    Heading(int(population.heading[agent])).name,
                    Leg(int(population.leg[agent])).name,
                ]
            )
    path = out / "trajectories.csv"
    write_csv(
        path,
        _csv_meta(config),
        ["step", "agent", "x", "y", "heading", "leg"],
        rows,
    )
    _say(args, f"wrote {path} ({len(watched)} agents, {args.steps} steps)")
    return 0


def cmd_flood(args, config: dict) -> int:
    params = resolve_params(config)
    out = _out_dir(args)
    record = run_flood(
        params,
        source_rule=args.source,
        init_mode=config["init"],
        warmup_steps=config["warmup_steps"],
        max_steps=config["max_steps"],
        bound_constants=bound_constants(config),
        workers=args.workers,
        check_stability=args.check_stability,
        collect_progress=True,
    )
    payload = _metadata(config)
    payload["result"] = record.to_json_dict()
    write_json(out / "flood_summary.json", payload)
    write_csv(
        out / "flood_progress.csv",
        _csv_meta(config),
        ["step", "informed_count", "cz_cells_informed", "suburb_informed_count"],
        [list(row) for row in record.progress],
    )
    status = "TIMEOUT" if record.timed_out else f"T={record.flooding_time}"
    _say(args, f"wrote {out / 'flood_summary.json'} ({status})")
    violation_total = sum(record.violations.values())
    return 1 if violation_total > 0 else 0


def cmd_zones(args, config: dict) -> int:
    params = resolve_params(config)
    out = _out_dir(args)
    zone_map = build_zone_map(params)
    payload = _metadata(config)
    payload["result"] = zone_map.to_dict()
    write_json(out / "zones.json", payload)
    (out / "zones.csv").write_text(
        f"# {json.dumps(_csv_meta(config), sort_keys=True)}\n"
        + zone_map_to_csv(zone_map),
        encoding="utf-8",
    )
    (out / "zones.svg").write_text(
        _svg_meta_comment(config) + zone_map_svg(zone_map), encoding="utf-8"
    )
    _say(
        args,
        f"wrote {out / 'zones.svg'} (m={zone_map.m}, central {zone_map.cz_size}"
        f"/{zone_map.m ** 2})",
    )
    return 0


def cmd_validate_stationary(args, config: dict) -> int:
    params = resolve_params(config)
    out = _out_dir(args)
    report = stationarity_report(
        params,
        bins=args.bins,
        snapshots=args.snapshots,
        spacing=args.spacing,
        warmup_steps=config["warmup_steps"],
        compare_approx=not args.skip_approx,
        workers=args.workers,
    )
    payload = _metadata(config)
    payload["result"] = report.to_json_dict()
    payload["result"]["tv_limit"] = args.tv_limit
    payload["result"]["init_tv_limit"] = args.init_tv_limit
    write_json(out / "stationarity.json", payload)
    ok = report.tv_model <= args.tv_limit and (
        report.tv_init is None or report.tv_init <= args.init_tv_limit
    )
    _say(
        args,
        f"wrote {out / 'stationarity.json'} (tv_model={report.tv_model:.4f}, "
        f"tv_init={report.tv_init if report.tv_init is None else round(report.tv_init, 4)}, "
        f"{'OK' if ok else 'VIOLATION'})",
    )
    return 0 if ok else 1


def cmd_expansion_check(args, config: dict) -> int:
    params = resolve_params(config)
    out = _out_dir(args)
    zone_map = build_zone_map(params)
    report = check_expansion(zone_map, mode=args.mode, samples=args.samples)
    payload = _metadata(config)
    payload["result"] = {
        "cz_size": report.cz_size,
        "mode": report.mode,
        "subsets_checked": report.subsets_checked,
        "violations": report.violations,
        "worst_margin": report.worst_margin,
        "witness": sorted(report.witness) if report.witness else None,
    }
    write_json(out / "expansion.json", payload)
    _say(
        args,
        f"wrote {out / 'expansion.json'} ({report.subsets_checked} subsets, "
        f"{report.violations} violations)",
    )
    return 0 if report.violations == 0 else 1


def cmd_lemma_sweep(args, config: dict) -> int:
    out = _out_dir(args)
    report = lemma_sweep(
        eta_override=args.eta_override,
        suburb_scale=args.suburb_scale,
        expansion_samples=args.expansion_samples,
        density_horizon=args.density_horizon,
        turn_windows=args.turn_windows,
        include_expansion=not args.skip_expansion,
        include_density=not args.skip_density,
        include_turns=not args.skip_turns,
        seed=int(config["seed"]),
        workers=args.workers,
    )
    payload = _metadata(config)
    payload["result"] = report.to_json_dict()
    write_json(out / "lemma_sweep.json", payload)
    rows = [
        [
            s.name,
            s.params.n,
            s.params.R,
            s.m,
            s.cz_size,
            s.suburb_size,
            int(s.coverage_ok),
            s.expansion_checked,
            s.expansion_violations,
            s.suburb_violations,
            int(s.density_checked),
            s.density_violations,
            s.turn_windows,
            s.turn_violations,
        ]
        for s in report.settings
    ]
    write_csv(
        out / "lemma_sweep.csv",
        _csv_meta(config),
        [
            "name",
            "n",
            "R",
            "m",
            "cz_size",
            "suburb_size",
            "coverage_ok",
            "expansion_checked",
            "expansion_violations",
            "suburb_violations",
            "density_checked",
            "density_violations",
            "turn_windows",
            "turn_violations",
        ],
        rows,
    )
    _say(
        args,
        f"wrote {out / 'lemma_sweep.json'} "
        f"(deterministic={report.deterministic_violations}, "
        f"density={report.density_violations}, "
        f"turn_fraction={report.turn_fraction:.4f})",
    )
    return 0 if report.ok else 1


def cmd_scaling(args, config: dict) -> int:
    out = _out_dir(args)
    report = scaling_experiment(
        scales=args.scales,
        replicas=args.replicas,
        c1=float(config["constants"]["c1"]),
        constants=bound_constants(config),
        init_mode=config["init"],
        seed=int(config["seed"]),
        workers=args.workers,
    )
    payload = _metadata(config)
    payload["result"] = report.to_json_dict()
    write_json(out / "scaling.json", payload)
    header = [
        "n",
        "L",
        "R",
        "v",
        "rule",
        "replicas",
        "median_time",
        "min_time",
        "max_time",
        "median_spread",
        "bound",
        "ratio",
    ]
    write_csv(
        out / "scaling.csv",
        _csv_meta(config),
        header,
        [[row[key] for key in header] for row in report.rows],
    )
    runs_dir = out / "runs"
    runs_dir.mkdir(exist_ok=True)
    for k, record in enumerate(report.runs):
        run_payload = _metadata(config)
        run_payload["result"] = record.to_json_dict()
        write_json(runs_dir / f"run_{k:04d}.json", run_payload)
    _say(
        args,
        f"wrote {out / 'scaling.csv'} (C={report.max_ratio:.4g}, "
        f"spread constant={report.spread_constant:.4g})",
    )
    return 0


def cmd_lower_bound(args, config: dict) -> int:
    out = _out_dir(args)
    n = int(config["n"])
    seed = int(config["seed"])
    scenario, d = lower_bound_params(n, d_factor=args.d_factor, seed=seed)
    if config["R"] is not None or config["v"] is not None:
        params = resolve_params(config)
    else:
        params = scenario
    try:
        report = lower_bound_experiment(
            params,
            d,
            trials=args.trials,
            flood_cap=args.flood_cap,
            workers=args.workers,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    payload = _metadata(config)
    payload["result"] = report.to_json_dict()
    write_json(out / "lower_bound.json", payload)
    _say(
        args,
        f"wrote {out / 'lower_bound.json'} (P={report.probability:.4f}, "
        f"floods={report.floods}, all_satisfied={report.all_satisfied})",
    )
    return 0 if report.all_satisfied else 1


def cmd_heatmap(args, config: dict) -> int:
    params = resolve_params(config)
    out = _out_dir(args)
    L = params.L
    k = args.bins
    centers = (np.arange(k) + 0.5) * (L / k)
    xs, ys = np.meshgrid(centers, centers, indexing="ij")
    density = spatial_density(xs, ys, L)
    spatial_path = out / "heatmap_spatial.svg"
    spatial_path.write_text(
        _svg_meta_comment(config) + grid_svg(density), encoding="utf-8"
    )
    if args.origin is not None:
        try:
            x0, y0 = (float(part) for part in args.origin.split(","))
        except ValueError as exc:
            raise ConfigError(
                f"origin must be 'x,y', got {args.origin!r}"
            ) from exc
    else:
        x0, y0 = L / 3.0, L / 4.0
    try:
        law = destination_law((x0, y0), L)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    size = 512
    scale = size / L
    densities = [law.density_sw, law.density_nw, law.density_ne, law.density_se]
    top = max(densities)
    quads = [
        (0.0, 0.0, x0, y0, law.density_sw),
        (0.0, y0, x0, L - y0, law.density_nw),
        (x0, y0, L - x0, L - y0, law.density_ne),
        (x0, 0.0, L - x0, y0, law.density_se),
    ]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
        f'height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for qx, qy, qw, qh, dens in quads:
        shade = dens / top if top > 0 else 0.0
        level = int(round(255 * (1.0 - shade)))
        color = f"#{level:02x}{level:02x}{level:02x}"
        parts.append(
            f'<rect x="{qx * scale:.2f}" y="{(L - qy - qh) * scale:.2f}" '
            f'width="{qw * scale:.2f}" height="{qh * scale:.2f}" fill="{color}"/>'
        )
    # the axis-aligned cross through the origin carries the atomic mass:
    # stroke width scales with each arm's share
    cross = law.cross
    arms = [
        (x0, 0.0, x0, y0, cross.south),
        (x0, y0, x0, L, cross.north),
        (0.0, y0, x0, y0, cross.west),
        (x0, y0, L, y0, cross.east),
    ]
    for ax0, ay0, ax1, ay1, mass in arms:
        width = 1.0 + 16.0 * mass
        parts.append(
            f'<line x1="{ax0 * scale:.2f}" y1="{(L - ay0) * scale:.2f}" '
            f'x2="{ax1 * scale:.2f}" y2="{(L - ay1) * scale:.2f}" '
            f'stroke="black" stroke-width="{width:.2f}"/>'
        )
    parts.append("</svg>")
    dest_path = out / "heatmap_destination.svg"
    dest_path.write_text(
        _svg_meta_comment(config) + "\n".join(parts) + "\n", encoding="utf-8"
    )
    _say(args, f"wrote {spatial_path} and {dest_path}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrwpflood",
        description=(
            "Discrete-time flooding simulator for Manhattan random "
            "way-point networks"
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to a JSON config file")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key (dotted keys reach constants.*)",
    )
    common.add_argument("--output-dir", help="directory for output artifacts")
    common.add_argument(
        "--workers", type=int, default=1, help="worker threads for stepping"
    )
    common.add_argument(
        "-q", "--quiet", action="store_true", help="suppress progress lines"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="dump agent trajectories")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--agents", type=int, default=10, help="number of agents to dump")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("flood", parents=[common], help="run one flood")
    p.add_argument("--source", default=SOURCE_RANDOM, help="source rule")
    p.add_argument(
        "--check-stability",
        action="store_true",
        help="attach the density and cell-stability monitors",
    )
    p.set_defaults(func=cmd_flood)

    p = sub.add_parser("zones", parents=[common], help="export the zone map")
    p.set_defaults(func=cmd_zones)

    p = sub.add_parser(
        "validate-stationary",
        parents=[common],
        help="compare pooled histograms against the exact law",
    )
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--snapshots", type=int, default=200)
    p.add_argument("--spacing", type=int, default=None)
    p.add_argument("--tv-limit", type=float, default=0.02)
    p.add_argument("--init-tv-limit", type=float, default=0.03)
    p.add_argument("--skip-approx", action="store_true")
    p.set_defaults(func=cmd_validate_stationary)

    p = sub.add_parser(
        "expansion-check", parents=[common], help="check boundary expansion"
    )
    p.add_argument("--mode", default="auto", choices=["auto", "exhaustive", "random"])
    p.add_argument("--samples", type=int, default=100_000)
    p.set_defaults(func=cmd_expansion_check)

    p = sub.add_parser(
        "lemma-sweep", parents=[common], help="run all checkers across the sweep"
    )
    p.add_argument("--eta-override", type=float, default=None)
    p.add_argument("--suburb-scale", type=float, default=1.0)
    p.add_argument("--expansion-samples", type=int, default=2000)
    p.add_argument("--density-horizon", type=int, default=300)
    p.add_argument("--turn-windows", type=int, default=200)
    p.add_argument("--skip-expansion", action="store_true")
    p.add_argument("--skip-density", action="store_true")
    p.add_argument("--skip-turns", action="store_true")
    p.set_defaults(func=cmd_lemma_sweep)

    p = sub.add_parser(
        "scaling", parents=[common], help="flooding times across arena scales"
    )
    p.add_argument("--scales", type=int, nargs="+", default=[1000, 2000, 4000])
    p.add_argument("--replicas", type=int, default=20)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser(
        "lower-bound", parents=[common], help="corner-event lower bound"
    )
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--d-factor", type=float, default=0.23)
    p.add_argument("--flood-cap", type=int, default=None)
    p.set_defaults(func=cmd_lower_bound)

    p = sub.add_parser(
        "heatmap", parents=[common], help="density and destination-law figures"
    )
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--origin", default=None, help="destination-law origin 'x,y'")
    p.set_defaults(func=cmd_heatmap)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, args.overrides)
        return args.func(args, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, SourcePlacementError) as exc:
        print(f"run error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands wire the library into reproducible pipelines:

    solve      current-density map, interface profiles, variance breakdown
    sweep      geometry/thickness sweeps as plot-ready CSV
    fit        m^2 sigma fit against a measurement table
    extract    spectroscopy pipeline on synthetic or stored traces
    converge   discretization robustness gates

Every command is deterministic for a fixed (config, seed) and re-running
overwrites identical bytes.  Configuration lives in one JSON file whose
keys mirror DEFAULT_CONFIG; unknown keys are rejected.
"""

import argparse
import copy
import csv as csv_module
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import spectroscopy
from .constants import PHI0
from .dataset import load_dataset, packaged_table
from .errors import FitError, NumericsError, ValidationError
from .fields import dump_profiles_csv
from .geometry import SquidGeometry, mean_width, perimeter
from .noise import (
    ModelVariant,
    PipelineConfig,
    analytic_variance_integral,
    fit_defect_density,
    geometry_factor,
    predict_amplitude,
)
from .spectroscopy import QubitTruth, SamplingPlan
from .svgplot import write_line_plot

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_FIT = 3
EXIT_NUMERICS = 4

REPORT_SCHEMA_VERSION = 1

DEFAULT_CONFIG = {
    "geometry": {
        "X_um": 9.16,
        "Y_um": 8.0,
        "W_um": 1.0,
        "b_nm": 190.0,
        "lambda_nm": 40.0,
        "shadow_offset_nm": 350.0,
    },
    "solver": {
        "target_patch_nm": None,
        "patch_cap": 20000,
        "strip_length_um": None,
    },
    "interfaces": {
        "standoff_nm": 1.0,
        "substrate_extent_factor": 20.0,
        "resolution_top": 512,
        "resolution_side": 128,
        "resolution_substrate": 1024,
    },
    "fit": {
        "variant": "analytic_top",
        "space": "power",
    },
    "sweep": {
        "parameter": "width",
        "values": [0.4, 0.5, 1.0, 2.0, 5.0],
        "variants": ["analytic_top", "numeric_top", "numeric_all"],
        "m2sigma": None,
    },
    "synthesis": {
        "sqrtA_uPhi0": 2.5,
        "Delta_over_h_GHz": 4.6,
        "slope_coeff_over_h_GHz": 600.0,
        "T1_us": 15.0,
        "spectrum_window_mPhi0": 3.0,
        "spectrum_points": 25,
        "spectrum_jitter_kHz": 0.0,
        "trace_offsets_mPhi0": [-2.5, -1.75, -1.25, -0.75, 0.75, 1.25, 1.75, 2.5],
        "trace_points": 41,
        "population_noise": 0.0,
    },
    "converge": {
        "grid_threshold": 0.02,
        "length_threshold": 0.01,
        "standoff_threshold": 0.02,
    },
}

SWEEP_PARAMETERS = ("perimeter", "width", "thickness", "aspect")


def _merge_config(base: dict, override: dict, path="config") -> dict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base:
            raise ValidationError(f"unknown key {path}.{key}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ValidationError(f"{path}.{key} must be an object")
            merged[key] = _merge_config(base[key], value, f"{path}.{key}")
        else:
            merged[key] = value
    return merged


def load_config(path: str | None) -> dict:
    if path is None:
        return copy.deepcopy(DEFAULT_CONFIG)
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationError("config root must be a JSON object")
    return _merge_config(DEFAULT_CONFIG, raw)


def _geometry_from_config(cfg: dict) -> SquidGeometry:
    g = cfg["geometry"]
    return SquidGeometry(
        X=g["X_um"] * 1e-6,
        Y=g["Y_um"] * 1e-6,
        W=g["W_um"] * 1e-6,
        b=g["b_nm"] * 1e-9,
        lam=g["lambda_nm"] * 1e-9,
        shadow_offset=g["shadow_offset_nm"] * 1e-9,
    )


def _pipeline_from_config(cfg: dict, b: float | None = None) -> PipelineConfig:
    solver = cfg["solver"]
    interfaces = cfg["interfaces"]
    geometry = cfg["geometry"]
    target = solver["target_patch_nm"]
    length = solver["strip_length_um"]
    return PipelineConfig(
        b=geometry["b_nm"] * 1e-9 if b is None else b,
        lam=geometry["lambda_nm"] * 1e-9,
        target_patch=None if target is None else target * 1e-9,
        patch_cap=solver["patch_cap"],
        strip_length=None if length is None else length * 1e-6,
        standoff=interfaces["standoff_nm"] * 1e-9,
        substrate_extent_factor=interfaces["substrate_extent_factor"],
        resolution_top=interfaces["resolution_top"],
        resolution_side=interfaces["resolution_side"],
        resolution_substrate=interfaces["resolution_substrate"],
    )


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_solve(args, cfg: dict) -> int:
    out = _out_dir(args)
    geometry = _geometry_from_config(cfg)
    pipeline = _pipeline_from_config(cfg)
    dist = pipeline.solve_width(geometry.W)
    dist.dump_density_csv(out / "current_density.csv")
    profiles = pipeline.width_profiles(geometry.W)
    dump_profiles_csv(profiles, out / "interface_profiles.csv")

    breakdown_all = pipeline.width_breakdown(geometry.W, ModelVariant.NUMERIC_ALL)
    payload = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "W_um": geometry.W * 1e6,
        "b_nm": geometry.b * 1e9,
        "lambda_nm": geometry.lam * 1e9,
        "per_interface_T2m_per_A2": breakdown_all.per_interface,
        "numeric_top_total": breakdown_all.per_interface["top"],
        "numeric_all_total": breakdown_all.total,
        "analytic_top_total": analytic_variance_integral(geometry.W, geometry.b, geometry.lam),
    }
    _write_json(out / "variance_breakdown.json", payload)
    if args.svg:
        top = next(p for p in profiles if p.spec.kind == "top")
        write_line_plot(
            out / "top_profile.svg",
            [(top.coordinates * 1e6, top.field_over_current, "top")],
            title="Surface field of the solved strip",
            xlabel="x (um)",
            ylabel="|B|/I (T/A)",
        )
    print(f"solve: wrote current density, profiles and breakdown to {out}")
    return EXIT_OK


def _sweep_geometry(cfg: dict, parameter: str, value: float) -> tuple[SquidGeometry, float]:
    """Geometry for one sweep point; returns (geometry, film thickness)."""
    g = cfg["geometry"]
    b = g["b_nm"] * 1e-9
    X, Y, W = g["X_um"] * 1e-6, g["Y_um"] * 1e-6, g["W_um"] * 1e-6
    lam = g["lambda_nm"] * 1e-9
    offset = g["shadow_offset_nm"] * 1e-9
    if parameter == "perimeter":
        # value is P in um at fixed W; square loop with that center-line perimeter
        side = (value * 1e-6 - 4 * W) / 4
        if side <= 0:
            raise ValidationError(f"perimeter {value} um too small for W = {W * 1e6} um")
        return SquidGeometry(X=side, Y=side, W=W, b=b, lam=lam, shadow_offset=offset), b
    if parameter == "width":
        # value is W in um at fixed inner perimeter 2X + 2Y
        return SquidGeometry(X=X, Y=Y, W=value * 1e-6, b=b, lam=lam, shadow_offset=offset), b
    if parameter == "thickness":
        # value is b in nm at fixed loop geometry
        return SquidGeometry(X=X, Y=Y, W=W, b=value * 1e-9, lam=lam, shadow_offset=offset), value * 1e-9
    if parameter == "aspect":
        # value is X/Y at fixed inner perimeter and W
        half = X + Y
        Yv = half / (1 + value)
        Xv = half - Yv
        return SquidGeometry(X=Xv, Y=Yv, W=W, b=b, lam=lam, shadow_offset=offset), b
    raise ValidationError(f"unknown sweep parameter {parameter!r}")


def _sweep_point(cfg: dict, parameter: str, value: float, variants, m2sigma):
    geometry, b = _sweep_geometry(cfg, parameter, value)
    pipeline = _pipeline_from_config(cfg, b=b)
    rows = []
    for name in variants:
        variant = ModelVariant(name)
        if variant is ModelVariant.ANALYTIC_TOP:
            integral = analytic_variance_integral(geometry.W, geometry.b, geometry.lam)
        else:
            integral = pipeline.width_breakdown(geometry.W, variant).total
        G = geometry_factor(geometry, variant, pipeline)
        sqrtA = "" if m2sigma is None else f"{math.sqrt(m2sigma * G) / PHI0 * 1e6:.8g}"
        rows.append(
            {
                "parameter": parameter,
                "value": value,
                "variant": variant.value,
                "P_um": perimeter(geometry) * 1e6,
                "mean_width_um": mean_width(geometry) * 1e6,
                "integral_total_T2m_per_A2": integral,
                "geometry_factor_Wb2": G,
                "sqrtA_uPhi0": sqrtA,
            }
        )
    return rows


def cmd_sweep(args, cfg: dict) -> int:
    out = _out_dir(args)
    sweep = cfg["sweep"]
    parameter = sweep["parameter"]
    values = sweep["values"]
    if parameter not in SWEEP_PARAMETERS:
        raise ValidationError(f"sweep parameter must be one of {SWEEP_PARAMETERS}")
    if len(values) < 2:
        raise ValidationError("sweep needs at least 2 values")
    if any(v <= 0 for v in values):
        raise ValidationError("sweep values must be positive")
    variants = sweep["variants"]
    for name in variants:
        ModelVariant(name)

    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        futures = [
            pool.submit(_sweep_point, cfg, parameter, value, variants, sweep["m2sigma"])
            for value in values
        ]
        results = [f.result() for f in futures]

    rows = [row for point in results for row in point]
    columns = list(rows[0].keys())
    if args.format == "json":
        _write_json(out / "sweep.json", {"schema_version": REPORT_SCHEMA_VERSION, "rows": rows})
        target = out / "sweep.json"
    else:
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(_csv_cell(row[c]) for c in columns))
        target = out / "sweep.csv"
        target.write_text("\n".join(lines) + "\n")
    if args.svg:
        series = []
        for name in variants:
            pts = [(r["value"], r["integral_total_T2m_per_A2"]) for r in rows if r["variant"] == name]
            series.append(([p[0] for p in pts], [p[1] for p in pts], name))
        write_line_plot(
            out / "sweep.svg",
            series,
            title=f"{parameter} sweep",
            xlabel=parameter,
            ylabel="int (B/I)^2 dx (T^2 m / A^2)",
        )
    print(f"sweep: wrote {len(rows)} rows to {target}")
    return EXIT_OK


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def cmd_fit(args, cfg: dict) -> int:
    out = _out_dir(args)
    dataset = Path(args.dataset) if args.dataset else packaged_table("table_s1.csv")
    records = load_dataset(dataset)
    pipeline = _pipeline_from_config(cfg)
    variant = ModelVariant(args.variant or cfg["fit"]["variant"])
    result = fit_defect_density(
        records,
        variant,
        pipeline,
        space=cfg["fit"]["space"],
        shadow_offset=cfg["geometry"]["shadow_offset_nm"] * 1e-9,
    )
    payload = {"schema_version": REPORT_SCHEMA_VERSION, **result.as_dict()}
    _write_json(out / "fit_result.json", payload)

    columns = ("sample", "qubit", "measured_uPhi0", "predicted_uPhi0", "residual_uPhi0")
    lines = [",".join(columns)]
    for r in result.records:
        lines.append(
            f"{r.sample},{r.qubit},{r.measured_uPhi0:.6g},{r.predicted_uPhi0:.6g},{r.residual_uPhi0:.6g}"
        )
    (out / "fit_predictions.csv").write_text("\n".join(lines) + "\n")
    print(
        f"fit: variant={result.variant.value} m2sigma={result.m2sigma:.6g} "
        f"sigma(muB)={result.sigma_for_muB:.6g} per m^2"
    )
    return EXIT_OK


def _load_spectrum_csv(path: Path):
    points = []
    with path.open(newline="") as handle:
        reader = csv_module.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["flux_phi0", "omega_rad_s", "sigma_omega"]:
            raise ValidationError(f"{path}: expected header flux_phi0,omega_rad_s,sigma_omega")
        for line_number, row in enumerate(reader, start=2):
            try:
                flux, omega, sigma = (float(cell) for cell in row)
            except (ValueError, TypeError) as exc:
                raise ValidationError(f"{path} line {line_number}: malformed spectrum row") from exc
            points.append(spectroscopy.SpectrumPoint(flux=flux, omega=omega, sigma_omega=sigma))
    return points


def _load_traces_csv(path: Path):
    groups: dict[float, list] = {}
    with path.open(newline="") as handle:
        reader = csv_module.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["flux_phi0", "t_s", "population", "sigma"]:
            raise ValidationError(f"{path}: expected header flux_phi0,t_s,population,sigma")
        for line_number, row in enumerate(reader, start=2):
            try:
                flux, t, p, s = (float(cell) for cell in row)
            except (ValueError, TypeError) as exc:
                raise ValidationError(f"{path} line {line_number}: malformed trace row") from exc
            groups.setdefault(flux, []).append((t, p, s))
    traces = []
    for flux, samples in groups.items():
        samples.sort()
        t, p, s = (np.array(column) for column in zip(*samples))
        traces.append(spectroscopy.DecayTrace(times=t, populations=p, sigma=s, flux=flux))
    traces.sort(key=lambda tr: tr.flux)
    return traces


def _dump_traces_csv(traces, path: Path) -> None:
    lines = ["flux_phi0,t_s,population,sigma"]
    for trace in traces:
        for t, p, s in zip(trace.times, trace.populations, trace.sigma):
            lines.append(f"{trace.flux:.10g},{t:.10g},{p:.10g},{s:.10g}")
    path.write_text("\n".join(lines) + "\n")


def cmd_extract(args, cfg: dict) -> int:
    out = _out_dir(args)
    synth = cfg["synthesis"]
    T1 = synth["T1_us"] * 1e-6
    if args.synthesize:
        truth = QubitTruth(
            sqrtA=synth["sqrtA_uPhi0"] * 1e-6,
            Delta=spectroscopy.HPLANCK * synth["Delta_over_h_GHz"] * 1e9,
            slope_coeff=spectroscopy.HPLANCK * synth["slope_coeff_over_h_GHz"] * 1e9,
            T1=T1,
        )
        plan = SamplingPlan(
            spectrum_window=synth["spectrum_window_mPhi0"] * 1e-3,
            spectrum_points=synth["spectrum_points"],
            spectrum_sigma=max(2 * math.pi * synth["spectrum_jitter_kHz"] * 1e3, 2 * math.pi * 1e3),
            trace_offsets=tuple(v * 1e-3 for v in synth["trace_offsets_mPhi0"]),
            trace_points=synth["trace_points"],
            population_noise=synth["population_noise"],
        )
        spectrum, traces = spectroscopy.synthesize_qubit_dataset(truth, plan, seed=args.seed)
        spectrum_lines = ["flux_phi0,omega_rad_s,sigma_omega"]
        for p in spectrum:
            spectrum_lines.append(f"{p.flux:.10g},{p.omega:.10g},{p.sigma_omega:.10g}")
        (out / "spectrum.csv").write_text("\n".join(spectrum_lines) + "\n")
        _dump_traces_csv(traces, out / "traces.csv")
    else:
        if not args.spectrum or not args.traces:
            raise ValidationError("extract needs --synthesize or both --spectrum and --traces")
        spectrum = _load_spectrum_csv(Path(args.spectrum))
        traces = _load_traces_csv(Path(args.traces))

    hyperbola, decay_fits, extraction = spectroscopy.run_extraction(spectrum, traces, T1_guess=T1)

    _write_json(
        out / "hyperbola_fit.json",
        {
            "schema_version": REPORT_SCHEMA_VERSION,
            "Delta_over_h_GHz": hyperbola.Delta / spectroscopy.HPLANCK / 1e9,
            "slope_coeff_over_h_GHz": hyperbola.slope_coeff / spectroscopy.HPLANCK / 1e9,
            "sweet_spot_flux_phi0": hyperbola.sweet_spot_flux,
        },
    )
    lines = ["flux_phi0,slope_rad_s_per_phi0,Gamma_exp_per_s,Gamma_phi_per_s,Gamma_phi_err_per_s"]
    for trace, fitres in zip(traces, decay_fits):
        slope = spectroscopy.spectrum_slope(hyperbola, trace.flux)
        lines.append(
            f"{trace.flux:.10g},{slope:.10g},{fitres.Gamma_exp:.10g},"
            f"{fitres.Gamma_phi:.10g},{fitres.Gamma_phi_err:.10g}"
        )
    (out / "decay_fits.csv").write_text("\n".join(lines) + "\n")
    _write_json(
        out / "extraction.json",
        {
            "schema_version": REPORT_SCHEMA_VERSION,
            "sqrtA_left_uPhi0": extraction.sqrtA_left,
            "sqrtA_left_err_uPhi0": extraction.sqrtA_left_err,
            "sqrtA_right_uPhi0": extraction.sqrtA_right,
            "sqrtA_right_err_uPhi0": extraction.sqrtA_right_err,
            "sqrtA_combined_uPhi0": extraction.combined,
            "sqrtA_combined_err_uPhi0": extraction.combined_err,
            "omitted_branches": list(extraction.omitted_branches),
        },
    )
    print(f"extract: combined sqrtA = {extraction.combined:.4f} uPhi0 (written to {out})")
    return EXIT_OK


def cmd_converge(args, cfg: dict) -> int:
    out = _out_dir(args)
    geometry = _geometry_from_config(cfg)
    thresholds = cfg["converge"]
    base = _pipeline_from_config(cfg)

    def totals(pipeline: PipelineConfig) -> dict:
        return {
            "numeric_top": pipeline.width_breakdown(geometry.W, ModelVariant.NUMERIC_TOP).total,
            "numeric_all": pipeline.width_breakdown(geometry.W, ModelVariant.NUMERIC_ALL).total,
        }

    reference = totals(base)

    fine = _pipeline_from_config(cfg)
    fine.target_patch = base.patch_target() / 2
    fine.patch_cap = base.patch_cap * 4
    longer = _pipeline_from_config(cfg)
    longer.strip_length = base.length_for(geometry.W) * 2
    closer = _pipeline_from_config(cfg)
    closer.standoff = base.standoff / 2

    checks = []
    for name, pipeline, threshold in (
        ("grid_doubling", fine, thresholds["grid_threshold"]),
        ("strip_length_doubling", longer, thresholds["length_threshold"]),
        ("standoff_halving", closer, thresholds["standoff_threshold"]),
    ):
        perturbed = totals(pipeline)
        for variant_name, base_value in reference.items():
            delta = abs(perturbed[variant_name] - base_value) / base_value
            checks.append(
                {
                    "check": name,
                    "variant": variant_name,
                    "baseline": base_value,
                    "perturbed": perturbed[variant_name],
                    "rel_delta": delta,
                    "threshold": threshold,
                    "pass": bool(delta < threshold),
                }
            )
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "W_um": geometry.W * 1e6,
        "b_nm": geometry.b * 1e9,
        "checks": checks,
        "all_pass": all(c["pass"] for c in checks),
    }
    _write_json(out / "convergence.json", report)
    status = "all gates pass" if report["all_pass"] else "GATE FAILURE flagged"
    print(f"converge: {status}; report in {out / 'convergence.json'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="squidflux",
        description="Current distributions, surface fields and 1/f flux-noise amplitudes "
        "of rectangular SQUID loops.",
    )
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--out", default="out", help="output directory (created if missing)")
    parser.add_argument("--seed", type=int, default=0, help="seed for synthetic data")
    parser.add_argument("--workers", type=int, default=1, help="concurrent sweep workers")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")

    sub = parser.add_subparsers(dest="command", required=True)
    solve = sub.add_parser("solve", help="solve one strip and dump fields")
    solve.add_argument("--svg", action="store_true", help="also render a simple SVG plot")
    sweep = sub.add_parser("sweep", help="sweep a geometry parameter")
    sweep.add_argument("--svg", action="store_true")
    fit = sub.add_parser("fit", help="fit m^2 sigma to a measurement table")
    fit.add_argument("--dataset", help="CSV path (default: packaged table_s1.csv)")
    fit.add_argument("--variant", choices=[v.value for v in ModelVariant])
    extract = sub.add_parser("extract", help="run the spectroscopy extraction pipeline")
    extract.add_argument("--synthesize", action="store_true")
    extract.add_argument("--spectrum", help="spectrum CSV: flux_phi0,omega_rad_s,sigma_omega")
    extract.add_argument("--traces", help="traces CSV: flux_phi0,t_s,population,sigma")
    sub.add_parser("converge", help="run discretization convergence gates")
    return parser


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "extract": cmd_extract,
    "converge": cmd_converge,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FitError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except NumericsError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICS


if __name__ == "__main__":
    sys.exit(main())

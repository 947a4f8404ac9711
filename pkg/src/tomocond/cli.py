"""Command-line front end.

Subcommands: ``table1`` (robustness comparison of the seven protocols),
``reconstruct`` (single-state pipeline), ``robustness`` (Monte Carlo
comparison from a JSON config), ``verify-setup`` (wave-plate and
beam-splitter checks), ``qudit`` (condition numbers of the generalized
protocols), ``export-protocols`` (JSON catalog).

Every report embeds tool version, a config echo, and the seed.  Exit
codes: 0 success / all checks pass, 1 verification failure, 2 usage error.
Relative ``--output`` paths are resolved against $TOMOCOND_OUTPUT_DIR when
it is set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .conditioning import (
    condition_number,
    conditioning_report,
    report_row,
    table1_check,
    table1_report,
)
from .optics import verify_setup_report
from .protocols import (
    all_protocols,
    catalog_from_json,
    catalog_to_json,
    optimal_gpos_qudit,
    pauli_tensor_protocol,
    protocol_by_id,
)
from .simulate import (
    NoiseModel,
    RobustnessRow,
    robustness_experiment,
    run_tomography,
    substream,
)
from .states import (
    density_matrix_from_dict,
    density_matrix_to_dict,
    named_state,
    projector,
    random_density_matrix,
)

_SQRT2 = float(np.sqrt(2.0))


def _fmt(value, digits: int = 12) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


def _header(command: str, config: dict, seed=None) -> str:
    kv = " ".join(f"{k}={v}" for k, v in config.items() if v is not None)
    head = f"# tomocond {__version__} | {command}"
    if kv:
        head += " | " + kv
    head += f" | seed={seed}"
    return head


def _envelope(command: str, config: dict, seed, result) -> str:
    return json.dumps(
        {
            "tool": "tomocond",
            "version": __version__,
            "command": command,
            "config": config,
            "seed": seed,
            "result": result,
        },
        indent=2,
    )


def _write_output(content: str, output: str | None) -> None:
    if not content.endswith("\n"):
        content += "\n"
    if output is None:
        sys.stdout.write(content)
        return
    path = output
    base = os.environ.get("TOMOCOND_OUTPUT_DIR")
    if base and not os.path.isabs(path):
        path = os.path.join(base, path)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(content)


# ---------------------------------------------------------------------------
# table1


def _cmd_table1(args) -> int:
    config = {"mub_variant": args.mub_variant, "protocols_file": args.protocols_file}
    if args.protocols_file:
        with open(args.protocols_file, encoding="utf-8") as fh:
            specs = catalog_from_json(fh.read())
        reports = [conditioning_report(s) for s in specs]
    else:
        reports = table1_report(args.mub_variant)
    checks = table1_check(reports)
    all_pass = all(c.all_ok for c in checks)

    if args.format == "json":
        rows = []
        for c in checks:
            row = report_row(c.report)
            row["status"] = "PASS" if c.all_ok else "FAIL"
            row["failing_cells"] = c.failing_cells
            rows.append(row)
        out = _envelope(
            "table1", config, None, {"rows": rows, "all_pass": all_pass}
        )
    elif args.format == "csv":
        lines = [_header("table1", config)]
        lines.append(
            "protocol,based_on,n_projectors,locality,kappa_A,kappa_C,"
            "min_svd_C,dist_to_singular,status"
        )
        for c in checks:
            r = report_row(c.report)
            status = "PASS" if c.all_ok else "FAIL:" + "+".join(c.failing_cells)
            lines.append(
                ",".join(
                    [
                        _fmt(r["protocol"]),
                        r["based_on"],
                        _fmt(r["n_projectors"]),
                        r["locality"].replace(",", ";"),
                        _fmt(r["kappa_A"]),
                        _fmt(r["kappa_C"]),
                        _fmt(r["min_svd_C"]),
                        _fmt(r["dist_to_singular"]),
                        status,
                    ]
                )
            )
        out = "\n".join(lines)
    else:
        lines = [_header("table1", config)]
        lines.append(
            f"{'protocol':>8}  {'based on':<26} {'n':>3}  {'locality':<15} "
            f"{'kappa(A)':>12} {'kappa(C)':>12} {'min svd(C)':>12}  status"
        )
        for c in checks:
            r = c.report
            status = "PASS" if c.all_ok else "FAIL(" + ",".join(c.failing_cells) + ")"
            lines.append(
                f"{r.protocol_id:>8}  {r.based_on:<26} {r.n_elements:>3}  "
                f"{r.locality:<15} {r.kappa_a:>12.9f} {r.kappa_c:>12.9f} "
                f"{r.min_svd_c:>12.9f}  {status}"
            )
        lines.append(
            f"{sum(c.all_ok for c in checks)}/{len(checks)} rows match the "
            "reference values"
        )
        out = "\n".join(lines)
    _write_output(out, args.output)
    return 0 if all_pass else 1


# ---------------------------------------------------------------------------
# reconstruct


def _parse_state(spec_str: str, seed: int) -> tuple[np.ndarray, str]:
    if spec_str.startswith("file:"):
        path = spec_str[5:]
        with open(path, encoding="utf-8") as fh:
            return density_matrix_from_dict(json.load(fh)), spec_str
    if spec_str.startswith("random"):
        state_seed = seed
        if ":" in spec_str:
            state_seed = int(spec_str.split(":", 1)[1])
        return random_density_matrix(4, substream(state_seed, 0xA11CE)), spec_str
    return projector(named_state(spec_str)), spec_str


def _noise_from_args(args) -> NoiseModel:
    if args.noise == "ideal":
        return NoiseModel.ideal()
    if args.noise == "gaussian":
        return NoiseModel.gaussian(args.sigma_rel)
    return NoiseModel.poisson(args.shots, args.efficiency, args.eta_assumed)


def _matrix_lines(m: np.ndarray, digits: int = 6) -> list[str]:
    lines = []
    for row in m:
        cells = []
        for z in row:
            cells.append(f"{z.real:+.{digits}f}{z.imag:+.{digits}f}j")
        lines.append("  [" + "  ".join(cells) + "]")
    return lines


def _cmd_reconstruct(args) -> int:
    spec = protocol_by_id(args.protocol, args.mub_variant)
    rho, state_label = _parse_state(args.state, args.seed)
    noise = _noise_from_args(args)
    result = run_tomography(rho, spec, noise, args.seed)
    config = {
        "protocol": args.protocol,
        "state": state_label,
        "noise": args.noise,
        "shots": args.shots if args.noise == "poisson" else None,
        "efficiency": args.efficiency if args.noise == "poisson" else None,
        "sigma_rel": args.sigma_rel if args.noise == "gaussian" else None,
    }
    if args.format == "json":
        payload = {
            "x": result.x.tolist(),
            "state_vector": result.state_vector.tolist(),
            "rho": density_matrix_to_dict(result.rho),
            "residual_norm": result.residual_norm,
            "trace": result.trace,
            "fidelity_to_truth": result.fidelity_to_truth,
            "trace_distance_to_truth": result.trace_distance_to_truth,
            "max_abs_error": result.max_abs_error,
            "psd_clipped": result.psd_clipped,
        }
        out = _envelope("reconstruct", config, args.seed, payload)
    else:
        lines = [_header("reconstruct", config, args.seed)]
        lines.append("reconstructed rho:")
        lines.extend(_matrix_lines(result.rho))
        lines.append(f"residual |Ax-b|     : {_fmt(result.residual_norm)}")
        lines.append(f"trace (efficiency)  : {_fmt(result.trace)}")
        lines.append(f"fidelity to truth   : {_fmt(result.fidelity_to_truth)}")
        lines.append(f"trace dist to truth : {_fmt(result.trace_distance_to_truth)}")
        out = "\n".join(lines)
    _write_output(out, args.output)
    return 0


# ---------------------------------------------------------------------------
# robustness


def _noise_models_from_config(noise_cfg: dict) -> list[NoiseModel]:
    mode = noise_cfg.get("mode", "poisson")
    if mode == "ideal":
        return [NoiseModel.ideal()]
    if mode == "gaussian":
        sigmas = noise_cfg.get("sigma_rel", 0.01)
        if not isinstance(sigmas, list):
            sigmas = [sigmas]
        return [NoiseModel.gaussian(s) for s in sigmas]
    if mode == "poisson":
        shots = noise_cfg.get("shots", 10_000)
        if not isinstance(shots, list):
            shots = [shots]
        eta = noise_cfg.get("efficiency", 1.0)
        eta_assumed = noise_cfg.get("efficiency_assumed")
        return [NoiseModel.poisson(int(n), eta, eta_assumed) for n in shots]
    raise ValueError(f"unknown noise mode {mode!r}")


def _states_from_config(states_cfg, seed: int) -> list[np.ndarray] | None:
    if states_cfg in (None, "random"):
        return None
    states = []
    for entry in states_cfg:
        rho, _ = _parse_state(entry, seed)
        states.append(rho)
    return states


_ROBUSTNESS_FIELDS = (
    "protocol",
    "name",
    "noise_mode",
    "noise_param",
    "budget",
    "trials",
    "mean_rel_x_error",
    "std_rel_x_error",
    "mean_trace_distance",
    "std_trace_distance",
    "mean_fidelity",
    "mean_amplification",
    "max_amplification",
    "kappa_A",
    "bound_violations",
)


def _robustness_row_dict(row: RobustnessRow) -> dict:
    return {
        "protocol": row.protocol_id,
        "name": row.protocol_name,
        "noise_mode": row.noise_mode,
        "noise_param": row.noise_param,
        "budget": row.budget,
        "trials": row.trials,
        "mean_rel_x_error": row.mean_rel_x_error,
        "std_rel_x_error": row.std_rel_x_error,
        "mean_trace_distance": row.mean_trace_distance,
        "std_trace_distance": row.std_trace_distance,
        "mean_fidelity": row.mean_fidelity,
        "mean_amplification": row.mean_amplification,
        "max_amplification": row.max_amplification,
        "kappa_A": row.kappa_a,
        "bound_violations": row.bound_violations,
    }


def _cmd_robustness(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        cfg = json.load(fh)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    trials = args.trials if args.trials is not None else int(cfg.get("trials", 100))
    budget = args.budget if args.budget is not None else cfg.get("budget", "per-setting")
    mub_variant = cfg.get("mub_variant", "adamson")
    ids = cfg.get("protocols", [1, 2, 3])
    specs = [protocol_by_id(int(i), mub_variant) for i in ids]
    noise_models = _noise_models_from_config(cfg.get("noise", {}))
    states = _states_from_config(cfg.get("states", "random"), seed)
    result = robustness_experiment(
        specs,
        noise_models,
        trials,
        seed=seed,
        states=states,
        budget=budget,
        jobs=args.jobs,
        keep_trials=args.raw,
    )
    config = {
        "config": args.config,
        "protocols": ids,
        "trials": trials,
        "budget": budget,
    }
    violations = sum(r.bound_violations for r in result.rows)
    if args.format == "json":
        payload = {"rows": [_robustness_row_dict(r) for r in result.rows]}
        if args.raw:
            payload["trial_records"] = [
                {
                    "protocol": rec.protocol_id,
                    "noise_index": rec.noise_index,
                    "trial": rec.trial,
                    "rel_x_error": rec.rel_x_error,
                    "rel_b_error": rec.rel_b_error,
                    "amplification": rec.amplification,
                    "bounds_ok": rec.bounds_ok,
                    "trace_distance": rec.trace_distance,
                    "fidelity": rec.fidelity,
                    "trace": rec.trace,
                }
                for rec in result.trial_records
            ]
        out = _envelope("robustness", config, seed, payload)
    else:
        lines = [_header("robustness", config, seed)]
        lines.append(",".join(_ROBUSTNESS_FIELDS))
        for row in result.rows:
            d = _robustness_row_dict(row)
            ordered = [
                d["protocol"], d["name"], d["noise_mode"], d["noise_param"],
                d["budget"], d["trials"], d["mean_rel_x_error"],
                d["std_rel_x_error"], d["mean_trace_distance"],
                d["std_trace_distance"], d["mean_fidelity"],
                d["mean_amplification"], d["max_amplification"], d["kappa_A"],
                d["bound_violations"],
            ]
            lines.append(",".join(_fmt(v) for v in ordered))
        out = "\n".join(lines)
    _write_output(out, args.output)
    return 0 if violations == 0 else 1


# ---------------------------------------------------------------------------
# verify-setup


def _cmd_verify_setup(args) -> int:
    checks = verify_setup_report()
    all_pass = all(c.passed for c in checks)
    if args.format == "json":
        payload = {
            "checks": [
                {
                    "group": c.group,
                    "name": c.name,
                    "value": c.value,
                    "target": c.target,
                    "atol": c.atol,
                    "passed": c.passed,
                }
                for c in checks
            ],
            "all_pass": all_pass,
        }
        out = _envelope("verify-setup", {}, None, payload)
    else:
        lines = [_header("verify-setup", {})]
        for c in checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(
                f"[{mark}] {c.group:<13} {c.name:<24} value={_fmt(c.value)}"
            )
        lines.append(
            f"{sum(c.passed for c in checks)}/{len(checks)} checks passed"
        )
        out = "\n".join(lines)
    _write_output(out, args.output)
    return 0 if all_pass else 1


# ---------------------------------------------------------------------------
# qudit


def _cmd_qudit(args) -> int:
    if args.d is not None:
        spec = optimal_gpos_qudit(args.d)
        expected = 1.0
        label = f"optimal GPOs, d={args.d}"
    else:
        spec = pauli_tensor_protocol(args.qubits)
        expected = _SQRT2
        label = f"Pauli tensor products, N={args.qubits}"
    kappa = condition_number(spec.rotation_matrix)
    ok = abs(kappa.value - expected) <= 1e-10 * expected
    config = {"d": args.d, "qubits": args.qubits}
    if args.format == "json":
        payload = {
            "protocol": label,
            "dim": spec.dim,
            "n_operators": spec.n_elements,
            "kappa_A": kappa.value,
            "expected_kappa_A": expected,
            "matches_expected": ok,
        }
        out = _envelope("qudit", config, None, payload)
    else:
        lines = [_header("qudit", config)]
        lines.append(f"{label}: {spec.n_elements} operators on dim {spec.dim}")
        lines.append(
            f"kappa(A) = {_fmt(kappa.value)} (expected {_fmt(expected)}) "
            + ("PASS" if ok else "FAIL")
        )
        out = "\n".join(lines)
    _write_output(out, args.output)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# export-protocols


def _cmd_export_protocols(args) -> int:
    if args.protocol is None:
        specs = all_protocols(args.mub_variant)
    else:
        specs = [protocol_by_id(args.protocol, args.mub_variant)]
    _write_output(catalog_to_json(specs), args.output)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tomocond",
        description="Tomography protocol robustness analysis and simulation",
    )
    parser.add_argument(
        "--version", action="version", version=f"tomocond {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, formats=("text", "json")):
        p.add_argument("--format", choices=formats, default=formats[0])
        p.add_argument("--output", help="output path (stdout when omitted)")

    p = sub.add_parser("table1", help="robustness comparison of protocols 1-7")
    add_common(p, ("text", "csv", "json"))
    p.add_argument("--mub-variant", choices=("adamson", "bandyopadhyay"),
                   default="adamson")
    p.add_argument("--protocols-file",
                   help="check a previously exported protocol catalog instead "
                        "of the built-in definitions")
    p.set_defaults(func=_cmd_table1)

    p = sub.add_parser("reconstruct", help="measure and invert a single state")
    add_common(p)
    p.add_argument("--protocol", type=int, required=True, choices=range(1, 8))
    p.add_argument("--mub-variant", choices=("adamson", "bandyopadhyay"),
                   default="adamson")
    p.add_argument("--state", required=True,
                   help="named state (e.g. phi+), random[:SEED], or file:PATH")
    p.add_argument("--noise", choices=("ideal", "gaussian", "poisson"),
                   default="ideal")
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--efficiency", type=float, default=1.0)
    p.add_argument("--eta-assumed", type=float, default=None)
    p.add_argument("--sigma-rel", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("robustness", help="Monte Carlo protocol comparison")
    add_common(p, ("csv", "json"))
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--budget", choices=("per-setting", "total"), default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--raw", action="store_true",
                   help="include per-trial records (json format)")
    p.set_defaults(func=_cmd_robustness)

    p = sub.add_parser("verify-setup", help="wave-plate and beam-splitter checks")
    add_common(p)
    p.set_defaults(func=_cmd_verify_setup)

    p = sub.add_parser("qudit", help="condition number of generalized protocols")
    add_common(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--d", type=int, help="qudit dimension")
    group.add_argument("--qubits", type=int, help="number of qubits")
    p.set_defaults(func=_cmd_qudit)

    p = sub.add_parser("export-protocols", help="emit the protocol catalog as JSON")
    add_common(p, ("json",))
    p.add_argument("--protocol", type=int, choices=range(1, 8), default=None)
    p.add_argument("--mub-variant", choices=("adamson", "bandyopadhyay"),
                   default="adamson")
    p.set_defaults(func=_cmd_export_protocols)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"tomocond: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Exit codes: 0 ok, 2 config/usage error, 3 model-domain error, 4 I/O error,
5 validation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Sequence

from .export import format_sci, scan_to_csv, scan_to_svg
from .mc import MIN_ROUNDS
from .model import (
    EZZ_DARK_COUNT,
    EZZ_EQUAL_OBSERVED,
    ModelDomainError,
    SystemParams,
    derive_channel,
)
from .scan import (
    Engine,
    ScanSpec,
    calibrate_qbar11,
    max_distance,
    optimize_mu,
    qber_threshold,
    scan_common_qber,
    scan_distance,
)
from .validation import run_validation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_IO = 4
EXIT_VALIDATION = 5

CONFIG_KEYS = {
    "eta_d": ("eta_d", 0.2),
    "alpha_db_per_km": ("alpha", 0.2),
    "dark_count": ("p_d", 1.2e-8),
    "error_correction_f": ("f", 1.15),
    "pairing_interval": ("delta", 1_000_000),
    "misalignment": ("e_d", 0.04),
    "vacuum_error": ("e_0", 0.5),
    "e_zz_model": ("e_zz_model", EZZ_DARK_COUNT),
}
RUN_KEYS = {"b_min": 1, "b_max": 3, "mu": None}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    b_min: int = 1
    b_max: int = 3
    mu: float | None = None

    @property
    def b_range(self) -> tuple[int, int]:
        return (self.b_min, self.b_max)


def _number(key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    return float(value)


def _integer(key: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return int(value)


def parse_config(data: Any) -> RunConfig:
    """Validate a decoded JSON config object; missing keys take the defaults."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(data) - set(CONFIG_KEYS) - set(RUN_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kwargs: dict[str, Any] = {}
    for key, (field_name, default) in CONFIG_KEYS.items():
        value = data.get(key, default)
        if key == "pairing_interval":
            kwargs[field_name] = _integer(key, value)
        elif key == "e_zz_model":
            if isinstance(value, str):
                if value not in (EZZ_DARK_COUNT, EZZ_EQUAL_OBSERVED):
                    raise ConfigError("e_zz_model must be 'dark_count', 'equal_observed' or a number")
                kwargs[field_name] = value
            else:
                kwargs[field_name] = _number(key, value)
        else:
            kwargs[field_name] = _number(key, value)
    try:
        params = SystemParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    b_min = _integer("b_min", data.get("b_min", 1))
    b_max = _integer("b_max", data.get("b_max", 3))
    if not 1 <= b_min <= b_max:
        raise ConfigError(f"need 1 <= b_min <= b_max, got {b_min}, {b_max}")
    mu = data.get("mu")
    if mu is not None:
        mu = _number("mu", mu)
        if not mu > 0:
            raise ConfigError(f"mu must be positive, got {mu}")
    return RunConfig(params, b_min, b_max, mu)


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return parse_config({})
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data)


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    if getattr(args, "b_max", None) is not None:
        if args.b_max < cfg.b_min:
            raise ConfigError(f"--b-max {args.b_max} is below b_min {cfg.b_min}")
        cfg = replace(cfg, b_max=args.b_max)
    if getattr(args, "mu", None) is not None:
        if not args.mu > 0:
            raise ConfigError(f"--mu must be positive, got {args.mu}")
        cfg = replace(cfg, mu=args.mu)
    return cfg


def _params_record(params: SystemParams) -> dict[str, Any]:
    return asdict(params)


def _emit(record: dict[str, Any]) -> None:
    sys.stdout.write(json.dumps(record, indent=2) + "\n")


def cmd_rate(args: argparse.Namespace, cfg: RunConfig) -> int:
    L = args.L
    if not (L >= 0) or math.isinf(L):
        raise ConfigError(f"distance must be a finite number >= 0, got {L}")
    engines = {}
    for engine in Engine:
        mu_opt, res = optimize_mu(cfg.params, L, engine, cfg.b_range, cfg.mu)
        engines[engine.value] = {
            "rate": res.rate,
            "raw": res.raw,
            "mu_opt": mu_opt,
            "b_opt": res.b_opt,
            "lambda3_opt": res.lambda3_opt,
        }
    selected = Engine(args.engine).value
    ch = derive_channel(cfg.params, L, engines[selected]["mu_opt"])
    channel = asdict(ch)
    channel.pop("L")
    _emit(
        {
            "L_km": L,
            "engine": selected,
            "mu_opt": engines[selected]["mu_opt"],
            "b_opt": engines[Engine.AD.value]["b_opt"],
            "rate_original": engines["original"]["rate"],
            "rate_info": engines["info"]["rate"],
            "rate_ad": engines["ad"]["rate"],
            "channel": channel,
            "engines": engines,
            "params": _params_record(cfg.params),
        }
    )
    return EXIT_OK


class _IOFailure(Exception):
    pass


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc}") from exc


def cmd_scan_distance(args: argparse.Namespace, cfg: RunConfig) -> int:
    try:
        spec = ScanSpec(
            params=cfg.params,
            L_from=args.L_from,
            L_to=args.L_to,
            L_step=args.step,
            engine=Engine(args.engine),
            mu=cfg.mu,
            b_range=cfg.b_range,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    table = scan_distance(spec, workers=args.workers)
    csv_text = scan_to_csv(table)
    if args.out:
        _write(args.out, csv_text)
    else:
        sys.stdout.write(csv_text)
    if args.svg:
        _write(args.svg, scan_to_svg(table))
    return EXIT_OK


def cmd_scan_qber(args: argparse.Namespace, cfg: RunConfig) -> int:
    calibrated = args.qbar11 is None
    qbar11 = calibrate_qbar11(cfg.params.f) if calibrated else args.qbar11
    if not (0.0 < qbar11 <= 1.0):
        raise ConfigError(f"--qbar11 must be in (0, 1], got {qbar11}")
    if not (0.0 <= args.Q_from <= args.Q_to <= 0.5 and args.step > 0):
        raise ConfigError("QBER range must satisfy 0 <= from <= to <= 0.5 with step > 0")
    rows = scan_common_qber(cfg.params, qbar11, args.Q_from, args.Q_to, args.step, cfg.b_range)
    lines = ["Q,b_opt,rate_original,rate_info,rate_ad"]
    for r in rows:
        lines.append(
            ",".join(
                [f"{r.Q:.4f}", str(r.b_opt)]
                + [format_sci(v) for v in (r.rate_original, r.rate_info, r.rate_ad)]
            )
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        _write(args.out, text)
        _emit({"qbar11_eff": qbar11, "calibrated": calibrated, "rows": len(rows)})
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_thresholds(args: argparse.Namespace, cfg: RunConfig) -> int:
    params = cfg.params
    lmax = {e.value: max_distance(params, e, cfg.b_range, args.tol_km) for e in Engine}
    qbar11 = calibrate_qbar11(params.f)
    qber = {e.value: qber_threshold(params, qbar11, e, cfg.b_range, args.tol_q) for e in Engine}
    record: dict[str, Any] = {
        "misalignment": params.e_d,
        "L_max_km": lmax,
        "extension_km": lmax["ad"] - lmax["original"],
        "qber_threshold": qber,
        "qber_ratio_ad_over_original": qber["ad"] / qber["original"],
        "calibration": {
            "qbar11_eff": qbar11,
            "target_original_threshold": 0.046,
            "note": "synthetic scan: e_xx = e_zz = E_zz = Q, unit pairing prefactors",
        },
        "b_range": list(cfg.b_range),
    }
    if args.ed_sweep:
        sweep = {}
        for e_d in args.ed_sweep:
            p = replace(params, e_d=e_d)
            lo = max_distance(p, Engine.ORIGINAL, cfg.b_range, args.tol_km)
            hi = max_distance(p, Engine.AD, cfg.b_range, args.tol_km)
            sweep[f"{e_d:g}"] = {"L_max_original": lo, "L_max_ad": hi, "extension_km": hi - lo}
        record["misalignment_sweep"] = sweep
    _emit(record)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, cfg: RunConfig) -> int:
    if args.samples < MIN_ROUNDS:
        raise ConfigError(f"--samples must be >= {MIN_ROUNDS}, got {args.samples}")
    report = run_validation(args.seed, args.samples)
    _emit(report)
    return EXIT_OK if report["all_passed"] else EXIT_VALIDATION


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpqkd-ad",
        description="Asymptotic key rates of mode-pairing QKD with advantage distillation.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", metavar="PATH", help="JSON config (defaults if omitted)")
        p.add_argument("--b-max", type=int, dest="b_max", help="override maximum AD block size")
        p.add_argument("--mu", type=float, help="fix the signal intensity instead of optimizing")
        p.add_argument(
            "--engine",
            choices=[e.value for e in Engine],
            default=Engine.AD.value,
            help="engine whose optimal mu is reported",
        )

    p = sub.add_parser("rate", help="rates and channel statistics at one distance")
    common(p)
    p.add_argument("L", type=float, help="total distance in km")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("scan-distance", help="key rate versus distance, CSV and optional SVG")
    common(p)
    p.add_argument("--from", dest="L_from", type=float, default=0.0)
    p.add_argument("--to", dest="L_to", type=float, default=560.0)
    p.add_argument("--step", type=float, default=2.0)
    p.add_argument("--out", metavar="CSV")
    p.add_argument("--svg", metavar="PATH")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_scan_distance)

    p = sub.add_parser("scan-qber", help="key rate versus common QBER (calibrated synthetic scan)")
    common(p)
    p.add_argument("--from", dest="Q_from", type=float, default=0.0)
    p.add_argument("--to", dest="Q_to", type=float, default=0.12)
    p.add_argument("--step", type=float, default=0.002)
    p.add_argument("--qbar11", type=float, help="effective single-photon fraction (default: calibrated)")
    p.add_argument("--out", metavar="CSV")
    p.set_defaults(func=cmd_scan_qber)

    p = sub.add_parser("thresholds", help="maximum distances and QBER thresholds")
    common(p)
    p.add_argument("--tol-km", type=float, default=0.5)
    p.add_argument("--tol-q", type=float, default=1e-4)
    p.add_argument("--ed-sweep", type=_float_list, help="comma-separated misalignment errors")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("validate", help="Monte Carlo and exhaustive oracle checks")
    common(p)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelDomainError as exc:
        print(f"model domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except _IOFailure as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

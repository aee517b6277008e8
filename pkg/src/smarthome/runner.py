"""CLI and run orchestration.

Subcommands:
  run      headless experiment: free-run the scenario, write energy_log.csv
           plus a summary (text + JSON), print the comparison table
  serve    live service: wall-paced tick loop plus the HTTP API (and the
           dashboard, when built)
  compare  post-hoc comparison of a smart-run CSV against a baseline CSV

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import socket
import sys
import threading
from dataclasses import dataclass
from pathlib import Path

from .config import ConfigStore
from .energy import (
    DEFAULT_TARIFF_GBP_PER_KWH,
    CSV_FIELDS,
    ClassComparison,
    SavingsReport,
    parse_sim_timestamp,
)
from .engine import ThresholdError
from .envsim import Scenario, ScenarioError, builtin_reference_scenario, load_scenario
from .hal import HardwareManifest, ManifestError, NoiseModel, default_manifest, load_manifest
from .service import Service


class ConfigError(ValueError):
    """Invalid run configuration (bad flags, bad scenario, bad manifest)."""


class RunnerError(RuntimeError):
    """Runtime failure after a valid configuration (IO, port in use)."""


class CsvSchemaError(ValueError):
    """An energy CSV did not match the expected schema."""


@dataclass
class SimulatedClock:
    """Simulated seconds, advanced by the tick loop; scale is simulated
    seconds per wall second (headless runs ignore it and free-run)."""

    scale: float = 1.0
    t: float = 0.0

    def advance(self, dt_s: float) -> None:
        self.t += dt_s


@dataclass
class RunConfig:
    out_dir: Path
    scenario: str = "reference"
    manifest: str | None = None
    hours: float | None = None
    time_scale: float | None = None
    tick_s: float = 1.0
    log_interval_s: float = 30.0
    port: int = 8000
    host: str = "127.0.0.1"
    config_path: Path | None = None
    baseline: str | None = None
    noise: bool = False
    dashboard_dir: Path | None = None

    def validate(self) -> "RunConfig":
        if self.tick_s <= 0:
            raise ConfigError(f"--tick must be > 0, got {self.tick_s}")
        if self.tick_s > self.log_interval_s:
            raise ConfigError(
                f"--tick ({self.tick_s}) must not exceed --log-interval ({self.log_interval_s})"
            )
        ratio = self.log_interval_s / self.tick_s
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError(
                f"--log-interval ({self.log_interval_s}) must be a multiple of --tick ({self.tick_s})"
            )
        if self.hours is not None and self.hours <= 0:
            raise ConfigError(f"--hours must be > 0, got {self.hours}")
        if self.time_scale is not None and self.time_scale < 1:
            raise ConfigError(f"--time-scale must be >= 1, got {self.time_scale}")
        if self.baseline is not None and self.baseline != "always-on":
            raise ConfigError(f"--baseline only supports 'always-on', got {self.baseline!r}")
        return self


def load_inputs(config: RunConfig) -> tuple[Scenario, HardwareManifest]:
    try:
        if config.scenario == "reference":
            scenario = builtin_reference_scenario()
        else:
            scenario = load_scenario(config.scenario)
        manifest = load_manifest(config.manifest) if config.manifest else default_manifest()
    except (ScenarioError, ManifestError, OSError) as exc:
        raise ConfigError(str(exc)) from exc
    return scenario, manifest


def resolve_duration(config: RunConfig, scenario: Scenario) -> float:
    duration = scenario.duration_s if config.hours is None else config.hours * 3600.0
    if duration > scenario.duration_s:
        raise ConfigError(
            f"--hours {config.hours} exceeds the scenario's scripted duration "
            f"({scenario.duration_s / 3600:.1f} h)"
        )
    return duration


def build_service(config: RunConfig) -> tuple[Service, ConfigStore, float]:
    scenario, manifest = load_inputs(config)
    duration = resolve_duration(config, scenario)
    store = ConfigStore(config.config_path or config.out_dir / "config.yaml")
    service = Service(
        scenario,
        manifest,
        out_dir=config.out_dir,
        thresholds=store.config.thresholds,
        tariff_gbp_per_kwh=store.config.tariff_gbp_per_kwh,
        tick_s=config.tick_s,
        log_interval_s=config.log_interval_s,
        noise=NoiseModel() if config.noise else None,
    )
    if config.baseline == "always-on":
        service.force_always_on()
    return service, store, duration


def write_summary(out_dir: Path, report: SavingsReport, extra: dict) -> None:
    summary = dict(extra)
    summary["report"] = report.to_json()
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    (out_dir / "summary.txt").write_text(report.render_text() + "\n", encoding="utf-8")


def run_headless(config: RunConfig) -> SavingsReport:
    config.validate()
    service, _store, duration = build_service(config)
    try:
        service.run_to(duration)
        from .energy import savings_report

        report = savings_report(service.ledger, service.devices, duration)
        write_summary(
            config.out_dir,
            report,
            {
                "scenario": service.scenario.name,
                "mode": "baseline-always-on" if config.baseline else "smart",
                "duration_s": duration,
                "log_rows": len(service.records),
                "csv": str(service.csv_path),
            },
        )
        return report
    except OSError as exc:
        raise RunnerError(f"run failed: {exc}") from exc
    finally:
        service.close()


def _check_port_free(host: str, port: int) -> None:
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as exc:
        raise RunnerError(f"cannot bind {host}:{port}: {exc}") from exc
    finally:
        probe.close()


def run_serve(config: RunConfig) -> None:
    import signal

    import uvicorn

    from .api import create_app

    config.validate()
    _check_port_free(config.host, config.port)
    service, store, duration = build_service(config)
    time_scale = config.time_scale or service.scenario.time_scale
    app = create_app(service, store, dashboard_dir=config.dashboard_dir)

    stop = threading.Event()
    server = uvicorn.Server(
        uvicorn.Config(app, host=config.host, port=config.port, log_level="warning")
    )

    def graceful(_signum, _frame):
        stop.set()
        server.should_exit = True

    # uvicorn restores the pre-run handlers and re-raises any captured
    # signal after shutdown; pointing the originals at a no-op keeps the
    # re-raise from killing the process before logs are flushed.
    if threading.current_thread() is threading.main_thread():
        signal.signal(signal.SIGTERM, graceful)
        signal.signal(signal.SIGINT, graceful)

    def loop() -> None:
        try:
            service.run_paced(duration, time_scale, stop)
        finally:
            server.should_exit = True

    ticker = threading.Thread(target=loop, name="tick-loop", daemon=True)
    ticker.start()
    print(
        f"serving on http://{config.host}:{config.port} "
        f"(scenario {service.scenario.name!r}, time scale x{time_scale:g})",
        flush=True,
    )
    try:
        server.run()
    finally:
        stop.set()
        ticker.join(timeout=10)
        service.close()


def compare_runs(
    smart_csv: str | Path,
    baseline_csv: str | Path,
    tariff_gbp_per_kwh: float = DEFAULT_TARIFF_GBP_PER_KWH,
) -> SavingsReport:
    """Per-class and total comparison of two schema-valid energy CSVs that
    cover the same duration (within one logging interval)."""
    smart = _read_energy_csv(smart_csv)
    baseline = _read_energy_csv(baseline_csv)
    interval = smart["interval_s"]
    if abs(smart["duration_s"] - baseline["duration_s"]) > interval:
        raise CsvSchemaError(
            f"duration mismatch: smart covers {smart['duration_s']:.0f} s, "
            f"baseline covers {baseline['duration_s']:.0f} s"
        )
    classes = {
        kind: ClassComparison.build(
            smart["kwh"][kind], baseline["kwh"][kind], tariff_gbp_per_kwh
        )
        for kind in ("led", "fan")
    }
    total = ClassComparison.build(
        sum(smart["kwh"].values()), sum(baseline["kwh"].values()), tariff_gbp_per_kwh
    )
    return SavingsReport(
        elapsed_s=smart["duration_s"],
        tariff_gbp_per_kwh=tariff_gbp_per_kwh,
        classes=classes,
        total=total,
    )


def _read_energy_csv(path: str | Path) -> dict:
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != list(CSV_FIELDS):
                raise CsvSchemaError(f"{path}: header does not match the energy log schema")
            led_wh = fan_wh = 0.0
            times: list[float] = []
            for line_no, row in enumerate(reader, start=2):
                if len(row) != len(CSV_FIELDS):
                    raise CsvSchemaError(f"{path}:{line_no}: expected {len(CSV_FIELDS)} fields")
                try:
                    times.append(parse_sim_timestamp(row[0]))
                    led_wh += float(row[9])
                    fan_wh += float(row[10])
                except ValueError as exc:
                    raise CsvSchemaError(f"{path}:{line_no}: {exc}") from exc
    except OSError as exc:
        raise CsvSchemaError(f"{path}: {exc}") from exc
    if not times:
        raise CsvSchemaError(f"{path}: no data rows")
    distinct = sorted(set(times))
    interval = distinct[1] - distinct[0] if len(distinct) > 1 else 30.0
    return {
        "kwh": {"led": led_wh / 1000.0, "fan": fan_wh / 1000.0},
        "duration_s": distinct[-1],
        "interval_s": interval,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smarthome",
        description="Two-room home automation simulator with energy accounting",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--scenario", default="reference", help="scenario file or 'reference'")
        p.add_argument("--manifest", default=None, help="hardware manifest file (default: built-in)")
        p.add_argument("--hours", type=float, default=None, help="override run duration")
        p.add_argument("--tick", type=float, default=1.0, dest="tick_s", help="tick length, simulated s")
        p.add_argument(
            "--log-interval", type=float, default=30.0, dest="log_interval_s",
            help="CSV logging cadence, simulated s",
        )
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--config", default=None, help="server config file (thresholds/tariff/credentials)")
        p.add_argument("--noise", action="store_true", help="enable seeded sensor noise")

    run_p = sub.add_parser("run", help="headless experiment run")
    common(run_p)
    run_p.add_argument(
        "--baseline", choices=["always-on"], default=None,
        help="pin every LED/fan at 100%% duty instead of automating",
    )

    serve_p = sub.add_parser("serve", help="live service with HTTP API")
    common(serve_p)
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument(
        "--time-scale", type=float, default=None, dest="time_scale",
        help="simulated seconds per wall second (default: scenario's)",
    )
    serve_p.add_argument(
        "--dashboard-dir", default=None,
        help="directory of built dashboard assets to serve at /dashboard",
    )

    cmp_p = sub.add_parser("compare", help="compare two energy CSVs")
    cmp_p.add_argument("smart_csv")
    cmp_p.add_argument("baseline_csv")
    cmp_p.add_argument("--tariff", type=float, default=DEFAULT_TARIFF_GBP_PER_KWH)
    cmp_p.add_argument("--json", action="store_true", dest="as_json")

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        out_dir=Path(args.out),
        scenario=args.scenario,
        manifest=args.manifest,
        hours=args.hours,
        time_scale=getattr(args, "time_scale", None),
        tick_s=args.tick_s,
        log_interval_s=args.log_interval_s,
        port=getattr(args, "port", 8000),
        host=getattr(args, "host", "127.0.0.1"),
        config_path=Path(args.config) if args.config else None,
        baseline=getattr(args, "baseline", None),
        noise=args.noise,
        dashboard_dir=Path(args.dashboard_dir) if getattr(args, "dashboard_dir", None) else None,
    ).validate()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1

    try:
        if args.command == "run":
            report = run_headless(_config_from_args(args))
            print(report.render_text())
            return 0
        if args.command == "serve":
            run_serve(_config_from_args(args))
            return 0
        if args.command == "compare":
            report = compare_runs(args.smart_csv, args.baseline_csv, args.tariff)
            print(json.dumps(report.to_json(), indent=2) if args.as_json else report.render_text())
            return 0
    except (ConfigError, ScenarioError, ManifestError, ThresholdError, CsvSchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RunnerError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


def cli() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    cli()

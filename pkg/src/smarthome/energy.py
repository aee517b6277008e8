"""Duty-cycle energy accounting, CSV logging and savings reporting.

Power is modelled linearly in duty (duty/100 x rated watts) and integrated
with rectangles at tick granularity, which is exact for piecewise-constant
duties. Costs are kept at full precision internally and rounded half-up to
3 decimals wherever they are displayed or written to CSV.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Mapping

from .engine import DeviceState
from .hal import SensorFrame

DEFAULT_TARIFF_GBP_PER_KWH = 0.34

CSV_FIELDS = (
    "timestamp",
    "room",
    "temp_c",
    "humidity_pct",
    "lux",
    "motion",
    "smoke",
    "led_duty_pct",
    "fan_duty_pct",
    "led_wh",
    "fan_wh",
    "cum_kwh",
    "cum_cost_gbp",
)
CSV_HEADER = ",".join(CSV_FIELDS)

# All simulated timestamps are anchored here so repeated runs are
# byte-identical regardless of wall time.
SIM_EPOCH = datetime(2025, 1, 1, 0, 0, 0, tzinfo=timezone.utc)


def sim_timestamp(t: float) -> str:
    """ISO-8601 timestamp of simulated second t."""
    return (SIM_EPOCH + timedelta(seconds=round(t))).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_sim_timestamp(value: str) -> float:
    """Inverse of sim_timestamp; accepts any ISO-8601 instant."""
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    stamp = datetime.fromisoformat(text)
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return (stamp - SIM_EPOCH).total_seconds()


def instantaneous_power(duty_pct: float, rated_watts: float) -> float:
    """Linear PWM power model: full duty draws the rated wattage."""
    return duty_pct / 100.0 * rated_watts


def cost_of(kwh: float, tariff_gbp_per_kwh: float) -> float:
    """Unrounded cost; use round_currency for display."""
    return kwh * tariff_gbp_per_kwh


def round_currency(gbp: float) -> float:
    """Half-up to 3 decimals, the display/CSV rule (0.48144 -> 0.481)."""
    return float(Decimal(repr(gbp)).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP))


class EnergyLedger:
    """Cumulative watt-hours per device. Mutated only from the tick path;
    readers take snapshots."""

    def __init__(self, tariff_gbp_per_kwh: float = DEFAULT_TARIFF_GBP_PER_KWH):
        self.tariff_gbp_per_kwh = tariff_gbp_per_kwh
        self._wh: dict[str, float] = {}
        self._lock = threading.Lock()

    def accumulate(self, device_id: str, watts: float, dt_s: float) -> None:
        if dt_s <= 0:
            raise ValueError(f"dt_s must be > 0, got {dt_s}")
        with self._lock:
            self._wh[device_id] = self._wh.get(device_id, 0.0) + watts * dt_s / 3600.0

    def wh(self, device_id: str) -> float:
        with self._lock:
            return self._wh.get(device_id, 0.0)

    def snapshot_wh(self) -> dict[str, float]:
        with self._lock:
            return dict(self._wh)

    @property
    def total_wh(self) -> float:
        with self._lock:
            return sum(self._wh.values())

    @property
    def total_kwh(self) -> float:
        return self.total_wh / 1000.0

    @property
    def total_cost_gbp(self) -> float:
        return cost_of(self.total_kwh, self.tariff_gbp_per_kwh)


@dataclass(frozen=True)
class EnergyRecord:
    """One 30 s log row for one room. Cumulative fields are system-wide."""

    timestamp: str
    room: int
    temp_c: float
    humidity_pct: float
    lux: float
    motion: int
    smoke: int | None  # None when the room has no smoke sensor (blank in CSV)
    led_duty_pct: int
    fan_duty_pct: int
    led_wh: float
    fan_wh: float
    cum_kwh: float
    cum_cost_gbp: float

    def to_csv_row(self) -> str:
        smoke = "" if self.smoke is None else str(self.smoke)
        return (
            f"{self.timestamp},{self.room},{self.temp_c:.2f},{self.humidity_pct:.2f},"
            f"{self.lux:.1f},{self.motion},{smoke},{self.led_duty_pct},{self.fan_duty_pct},"
            f"{self.led_wh:.6f},{self.fan_wh:.6f},{self.cum_kwh:.6f},{self.cum_cost_gbp:.3f}"
        )

    def to_json(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "room": self.room,
            "temp_c": round(self.temp_c, 2),
            "humidity_pct": round(self.humidity_pct, 2),
            "lux": round(self.lux, 1),
            "motion": self.motion,
            "smoke": self.smoke,
            "led_duty_pct": self.led_duty_pct,
            "fan_duty_pct": self.fan_duty_pct,
            "led_wh": round(self.led_wh, 6),
            "fan_wh": round(self.fan_wh, 6),
            "cum_kwh": round(self.cum_kwh, 6),
            "cum_cost_gbp": self.cum_cost_gbp,
        }


class EnergyLogWriter:
    """Append-only energy_log.csv writer.

    Creates the file with the header on first use, appends one line per
    record and flushes after every append. Interval watt-hours are computed
    against the per-device baseline captured at the previous log instant, so
    rows never double-count and never leave gaps.
    """

    def __init__(self, path: str | Path, ledger: EnergyLedger):
        self.path = Path(path)
        self.ledger = ledger
        self._baseline_wh: dict[str, float] = ledger.snapshot_wh()
        self._file = None
        self._lock = threading.Lock()
        self.write_failures = 0

    def _ensure_open(self) -> None:
        if self._file is None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            new = not self.path.exists() or self.path.stat().st_size == 0
            self._file = open(self.path, "a", encoding="utf-8", newline="")
            if new:
                self._file.write(CSV_HEADER + "\n")
                self._file.flush()

    def interval_wh(self, device_id: str) -> float:
        return self.ledger.wh(device_id) - self._baseline_wh.get(device_id, 0.0)

    def append(self, records: Iterable[EnergyRecord]) -> None:
        """Write all rows of one log instant as a single flush unit."""
        lines = "".join(record.to_csv_row() + "\n" for record in records)
        with self._lock:
            self._ensure_open()
            self._file.write(lines)
            self._file.flush()
        self._baseline_wh = self.ledger.snapshot_wh()

    def read_bytes(self) -> bytes:
        with self._lock:
            if self._file is not None:
                self._file.flush()
            return self.path.read_bytes() if self.path.exists() else b""

    def close(self) -> None:
        with self._lock:
            if self._file is not None:
                self._file.close()
                self._file = None


def log_tick(
    t: float,
    frames: Mapping[int, SensorFrame],
    devices: Mapping[str, DeviceState],
    ledger: EnergyLedger,
    writer: EnergyLogWriter,
) -> list[EnergyRecord]:
    """Build and append one record per room for the interval ending at t.

    Sorted by (timestamp, room). Duties are the current applied duties, i.e.
    what the actuators read back at the log instant.
    """
    by_room: dict[int, dict[str, list[DeviceState]]] = {}
    for device in devices.values():
        by_room.setdefault(device.room_id, {}).setdefault(device.kind, []).append(device)

    cum_kwh = ledger.total_kwh
    cum_cost = round_currency(ledger.total_cost_gbp)
    timestamp = sim_timestamp(t)

    records = []
    for room_id in sorted(frames):
        frame = frames[room_id]
        kinds = by_room.get(room_id, {})
        leds = sorted(kinds.get("led", []), key=lambda d: d.device_id)
        fans = sorted(kinds.get("fan", []), key=lambda d: d.device_id)
        records.append(
            EnergyRecord(
                timestamp=timestamp,
                room=room_id,
                temp_c=frame.temp_c,
                humidity_pct=frame.humidity_pct,
                lux=frame.lux,
                motion=int(frame.motion),
                smoke=None if frame.smoke is None else int(frame.smoke),
                led_duty_pct=leds[0].applied_duty_pct if leds else 0,
                fan_duty_pct=fans[0].applied_duty_pct if fans else 0,
                led_wh=sum(writer.interval_wh(d.device_id) for d in leds),
                fan_wh=sum(writer.interval_wh(d.device_id) for d in fans),
                cum_kwh=cum_kwh,
                cum_cost_gbp=cum_cost,
            )
        )
    writer.append(records)
    return records


@dataclass(frozen=True)
class ClassComparison:
    actual_kwh: float
    baseline_kwh: float
    actual_cost_gbp: float
    baseline_cost_gbp: float
    savings_pct: float | None  # None when the baseline is zero

    @staticmethod
    def build(actual_kwh: float, baseline_kwh: float, tariff: float) -> "ClassComparison":
        savings = None
        if baseline_kwh > 0:
            savings = 100.0 * (baseline_kwh - actual_kwh) / baseline_kwh
        return ClassComparison(
            actual_kwh=actual_kwh,
            baseline_kwh=baseline_kwh,
            actual_cost_gbp=cost_of(actual_kwh, tariff),
            baseline_cost_gbp=cost_of(baseline_kwh, tariff),
            savings_pct=savings,
        )


@dataclass(frozen=True)
class SavingsReport:
    """Always-on baseline vs actual consumption, per device class and total."""

    elapsed_s: float
    tariff_gbp_per_kwh: float
    classes: dict[str, ClassComparison]
    total: ClassComparison

    def to_json(self) -> dict:
        def one(c: ClassComparison) -> dict:
            return {
                "actual_kwh": round(c.actual_kwh, 6),
                "baseline_kwh": round(c.baseline_kwh, 6),
                "actual_cost_gbp": round_currency(c.actual_cost_gbp),
                "baseline_cost_gbp": round_currency(c.baseline_cost_gbp),
                # + 0.0 normalizes float negative zero
                "savings_pct": None if c.savings_pct is None else round(c.savings_pct, 2) + 0.0,
            }

        return {
            "elapsed_s": self.elapsed_s,
            "tariff_gbp_per_kwh": self.tariff_gbp_per_kwh,
            "classes": {kind: one(c) for kind, c in sorted(self.classes.items())},
            "total": one(self.total),
        }

    def render_text(self) -> str:
        def fmt_pct(c: ClassComparison) -> str:
            if c.savings_pct is None:
                return "n/a"
            return f"{round(c.savings_pct, 1) + 0.0:.1f}%"

        lines = [
            f"{'Configuration':<22}{'Always On':>12}{'Smart System':>14}",
        ]
        for kind in sorted(self.classes):
            c = self.classes[kind]
            lines.append(
                f"{kind.capitalize() + ' Energy (kWh)':<22}{c.baseline_kwh:>12.3f}{c.actual_kwh:>14.3f}"
            )
        lines.append(
            f"{'Total Energy (kWh)':<22}{self.total.baseline_kwh:>12.3f}{self.total.actual_kwh:>14.3f}"
        )
        lines.append(
            f"{'Cost (GBP)':<22}{round_currency(self.total.baseline_cost_gbp):>12.3f}"
            f"{round_currency(self.total.actual_cost_gbp):>14.3f}"
        )
        lines.append(f"{'Savings (%)':<22}{'-':>12}{fmt_pct(self.total):>14}")
        return "\n".join(lines)


def savings_report(
    ledger: EnergyLedger, devices: Mapping[str, DeviceState], elapsed_s: float
) -> SavingsReport:
    """Compare the run against an always-on baseline (every device at 100%
    duty for the whole elapsed window; buzzers are rated 0 W so they drop out)."""
    if elapsed_s <= 0:
        raise ValueError(f"elapsed_s must be > 0, got {elapsed_s}")
    tariff = ledger.tariff_gbp_per_kwh
    actual_by_kind: dict[str, float] = {}
    baseline_by_kind: dict[str, float] = {}
    for device in devices.values():
        actual_by_kind[device.kind] = actual_by_kind.get(device.kind, 0.0) + ledger.wh(
            device.device_id
        ) / 1000.0
        baseline_by_kind[device.kind] = (
            baseline_by_kind.get(device.kind, 0.0) + device.rated_watts * elapsed_s / 3600.0 / 1000.0
        )
    classes = {
        kind: ClassComparison.build(actual_by_kind[kind], baseline_by_kind[kind], tariff)
        for kind in actual_by_kind
    }
    total = ClassComparison.build(
        sum(actual_by_kind.values()), sum(baseline_by_kind.values()), tariff
    )
    return SavingsReport(
        elapsed_s=elapsed_s, tariff_gbp_per_kwh=tariff, classes=classes, total=total
    )

"""The sense->decide->actuate pipeline wired over one scenario.

One Service owns the simulated clock position, the engine state and the
energy ledger. The tick loop is the only writer; the HTTP layer interacts
through submit() (queued control messages consumed at tick boundaries) and
through immutable status snapshots, so handlers never observe a half-applied
configuration.

Tick order is fixed: drain control queue -> read sensors -> decide ->
apply commands -> accumulate energy -> log every log_interval_s.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from pathlib import Path

from . import engine
from .energy import (
    DEFAULT_TARIFF_GBP_PER_KWH,
    EnergyLedger,
    EnergyLogWriter,
    EnergyRecord,
    instantaneous_power,
    log_tick,
    round_currency,
    sim_timestamp,
)
from .engine import DeviceState, Mode, OccupancyTracker, Thresholds
from .envsim import Scenario
from .hal import ActuatorBank, HardwareManifest, NoiseModel, SensorHub


@dataclass(frozen=True)
class SetMode:
    device_id: str
    mode: Mode


@dataclass(frozen=True)
class SetDuty:
    device_id: str
    duty_pct: int


@dataclass(frozen=True)
class SetThresholds:
    thresholds: Thresholds


ControlMessage = SetMode | SetDuty | SetThresholds


class Service:
    """Composition of envsim -> hal -> engine -> energy over one scenario."""

    def __init__(
        self,
        scenario: Scenario,
        manifest: HardwareManifest,
        *,
        out_dir: str | Path,
        thresholds: Thresholds | None = None,
        tariff_gbp_per_kwh: float = DEFAULT_TARIFF_GBP_PER_KWH,
        tick_s: float = 1.0,
        log_interval_s: float = 30.0,
        noise: NoiseModel | None = None,
    ):
        self.scenario = scenario
        self.manifest = manifest
        self.tick_s = tick_s
        self.log_interval_s = log_interval_s
        self._ticks_per_log = round(log_interval_s / tick_s)

        self.hub = SensorHub(scenario, manifest, noise=noise)
        self.bank = ActuatorBank(manifest)
        self.devices: dict[str, DeviceState] = {}
        for room in manifest.rooms:
            for spec in room.devices:
                self.devices[spec.device_id] = DeviceState(
                    device_id=spec.device_id,
                    room_id=room.room_id,
                    kind=spec.kind,
                    rated_watts=spec.rated_watts,
                )
        self.thresholds = (thresholds or Thresholds()).validate()
        self.tracker = OccupancyTracker()
        self.ledger = EnergyLedger(tariff_gbp_per_kwh)
        self.out_dir = Path(out_dir)
        self.csv_path = self.out_dir / "energy_log.csv"
        self.writer = EnergyLogWriter(self.csv_path, self.ledger)

        self._queue: list[ControlMessage] = []
        self._queue_lock = threading.Lock()
        self._records: list[EnergyRecord] = []
        self._records_lock = threading.Lock()
        self._snapshot: dict | None = None
        self._n_ticks = 0

    # -- control surface (thread-safe) --

    def submit(self, message: ControlMessage) -> None:
        with self._queue_lock:
            self._queue.append(message)

    @property
    def snapshot(self) -> dict | None:
        return self._snapshot

    @property
    def records(self) -> list[EnergyRecord]:
        with self._records_lock:
            return list(self._records)

    def device_mode(self, device_id: str) -> Mode:
        return self.devices[device_id].mode

    def has_device(self, device_id: str) -> bool:
        return device_id in self.devices

    @property
    def sim_t(self) -> float:
        return self._n_ticks * self.tick_s

    # -- tick pipeline (single-threaded) --

    def _drain_queue(self) -> None:
        with self._queue_lock:
            pending, self._queue = self._queue, []
        for message in pending:
            if isinstance(message, SetMode):
                self.devices[message.device_id].mode = message.mode
            elif isinstance(message, SetDuty):
                self.devices[message.device_id].manual_duty_pct = message.duty_pct
            elif isinstance(message, SetThresholds):
                self.thresholds = message.thresholds.validate()

    def tick_once(self) -> None:
        self._drain_queue()
        t = self._n_ticks * self.tick_s
        frames = self.hub.read_all(t)
        commands = engine.tick(t, frames, self.devices, self.thresholds, self.tracker)
        for command in commands:
            applied = self.bank.apply(command)
            self.devices[command.device_id].applied_duty_pct = applied
        for device in self.devices.values():
            watts = instantaneous_power(device.applied_duty_pct, device.rated_watts)
            self.ledger.accumulate(device.device_id, watts, self.tick_s)
        self._n_ticks += 1
        if self._n_ticks % self._ticks_per_log == 0:
            records = log_tick(self.sim_t, frames, self.devices, self.ledger, self.writer)
            with self._records_lock:
                self._records.extend(records)
        self._snapshot = self._build_snapshot(t, frames)

    def step(self, n: int = 1) -> None:
        for _ in range(n):
            self.tick_once()

    def run_to(self, duration_s: float) -> None:
        """Headless free-run: as fast as possible, tick order preserved."""
        total = round(duration_s / self.tick_s)
        while self._n_ticks < total:
            self.tick_once()

    def run_paced(
        self, duration_s: float, time_scale: float, stop: threading.Event
    ) -> None:
        """Wall-paced loop for service mode: one tick every tick_s/time_scale
        wall seconds, scheduled against absolute deadlines so pacing does not
        drift. Stops early when the event is set."""
        total = round(duration_s / self.tick_s)
        start = time.monotonic()
        while not stop.is_set() and self._n_ticks < total:
            self.tick_once()
            deadline = start + (self._n_ticks * self.tick_s) / time_scale
            delay = deadline - time.monotonic()
            if delay > 0:
                stop.wait(delay)

    def force_always_on(self) -> None:
        """Baseline configuration: every LED and fan pinned at 100% duty."""
        for device in self.devices.values():
            if device.kind in ("led", "fan"):
                device.mode = Mode.ON

    def close(self) -> None:
        self.writer.close()

    # -- snapshot --

    def _build_snapshot(self, t: float, frames) -> dict:
        alarm = engine.smoke_detected(frames.values())
        rooms = []
        for room_id in sorted(frames):
            frame = frames[room_id]
            devices = [
                {
                    "device_id": d.device_id,
                    "kind": d.kind,
                    "mode": d.mode.value,
                    "manual_duty_pct": d.manual_duty_pct,
                    "applied_duty_pct": d.applied_duty_pct,
                }
                for d in sorted(self.devices.values(), key=lambda d: d.device_id)
                if d.room_id == room_id
            ]
            rooms.append(
                {
                    "room_id": room_id,
                    "temp_c": round(frame.temp_c, 2),
                    "humidity_pct": round(frame.humidity_pct, 2),
                    "lux": round(frame.lux, 1),
                    "motion": frame.motion,
                    "smoke": frame.smoke,
                    "occupancy_effective": self.tracker.occupied_effective(
                        room_id, t, self.thresholds.occupancy_hold_s
                    ),
                    "devices": devices,
                }
            )
        return {
            "t": t,
            "timestamp": sim_timestamp(t),
            "rooms": rooms,
            "alarm_active": alarm,
            "energy": {
                "cumulative_kwh": round(self.ledger.total_kwh, 6),
                "cumulative_cost_gbp": round_currency(self.ledger.total_cost_gbp),
                "tariff_gbp_per_kwh": self.ledger.tariff_gbp_per_kwh,
            },
        }

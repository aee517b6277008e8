"""Automation rules and the per-tick decision step.

The rule functions are pure and total over valid sensor values. Duty
percentages are integers 0-100. Tier boundaries are strict: a tier labelled
"above X" applies only for values > X.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .hal import ActuatorCommand, SensorFrame


class Mode(str, Enum):
    AUTO = "AUTO"
    MANUAL = "MANUAL"
    ON = "ON"
    OFF = "OFF"


class ThresholdError(ValueError):
    """A threshold set violated an ordering/range invariant."""


class MissingFrameError(ValueError):
    """tick() was called without a frame for a configured room."""


# Fan tier duties: >t1 -> 40%, >t2 -> 70%, >t3 with humidity gate -> 100%.
FAN_TIER1_DUTY = 40
FAN_TIER2_DUTY = 70
FAN_MAX_DUTY = 100


@dataclass(frozen=True)
class Thresholds:
    """User-editable rule parameters. Defaults are the deployed values."""

    lux_off: float = 2000.0
    lux_full: float = 100.0
    fan_t1_c: float = 24.0
    fan_t2_c: float = 27.0
    fan_t3_c: float = 30.0
    fan_h3_pct: float = 70.0
    occupancy_hold_s: float = 30.0

    def validate(self) -> "Thresholds":
        if self.lux_full >= self.lux_off:
            raise ThresholdError(f"lux_full must be < lux_off ({self.lux_full} >= {self.lux_off})")
        if self.lux_full < 0:
            raise ThresholdError(f"lux_full must be >= 0, got {self.lux_full}")
        if not self.fan_t1_c < self.fan_t2_c < self.fan_t3_c:
            raise ThresholdError(
                "fan temperature tiers must be ordered fan_t1_c < fan_t2_c < fan_t3_c "
                f"({self.fan_t1_c}, {self.fan_t2_c}, {self.fan_t3_c})"
            )
        if not 0 <= self.fan_h3_pct <= 100:
            raise ThresholdError(f"fan_h3_pct must be within 0-100, got {self.fan_h3_pct}")
        if self.occupancy_hold_s < 0:
            raise ThresholdError(f"occupancy_hold_s must be >= 0, got {self.occupancy_hold_s}")
        return self


@dataclass
class DeviceState:
    """Control state for one device; applied_duty_pct mirrors the actuator."""

    device_id: str
    room_id: int
    kind: str
    rated_watts: float
    mode: Mode = Mode.AUTO
    manual_duty_pct: int = 0
    applied_duty_pct: int = 0


def led_duty_from_lux(lux: float, thresholds: Thresholds = Thresholds()) -> int:
    """LED brightness from measured illuminance.

    Above lux_off the LED is off; below lux_full it jumps to full; between,
    the duty ramps linearly down toward lux_off with integer truncation.
    At default thresholds this is exactly int((2000 - lux) / 20), including
    the step from 100 to 95 as lux crosses 100.
    """
    if lux > thresholds.lux_off:
        return 0
    if lux < thresholds.lux_full:
        return 100
    duty = int((thresholds.lux_off - lux) * 100 / thresholds.lux_off)
    return max(0, min(100, duty))


def fan_duty_from_climate(
    temp_c: float, humidity_pct: float, thresholds: Thresholds = Thresholds()
) -> int:
    """Fan speed from temperature tiers, with a humidity gate on the top tier.

    At or below t1 the fan is off. The 100% tier needs both temp > t3 and
    humidity > h3; hot-but-dry air falls back to the 70% tier.
    """
    if temp_c <= thresholds.fan_t1_c:
        return 0
    if temp_c <= thresholds.fan_t2_c:
        return FAN_TIER1_DUTY
    if temp_c <= thresholds.fan_t3_c:
        return FAN_TIER2_DUTY
    if humidity_pct > thresholds.fan_h3_pct:
        return FAN_MAX_DUTY
    return FAN_TIER2_DUTY


def occupancy_gate(auto_duty: int, occupied_effective: bool) -> int:
    """Suppress automated output in vacant rooms."""
    return auto_duty if occupied_effective else 0


def resolve_device(mode: Mode, auto_duty: int, manual_duty: int) -> int:
    """Mode precedence: ON/OFF pin the duty, MANUAL takes the slider value,
    AUTO follows the (already gated) rule output."""
    if mode is Mode.ON:
        return 100
    if mode is Mode.OFF:
        return 0
    if mode is Mode.MANUAL:
        return manual_duty
    return auto_duty


def smoke_detected(frames: Iterable[SensorFrame]) -> bool:
    return any(frame.smoke for frame in frames if frame.smoke is not None)


def smoke_alarm(
    frames: Iterable[SensorFrame], buzzers: Iterable[DeviceState]
) -> list[ActuatorCommand]:
    """Safety fan-out: any detected smoke sounds every buzzer in the same
    tick, regardless of modes or occupancy; otherwise all buzzers are silent."""
    duty = 100 if smoke_detected(frames) else 0
    return [ActuatorCommand(buzzer.device_id, "buzzer", duty) for buzzer in buzzers]


@dataclass
class OccupancyTracker:
    """Last-motion timestamps per room; a room counts as occupied for
    occupancy_hold_s seconds after the last motion."""

    last_motion_t: dict[int, float] = field(default_factory=dict)

    def observe(self, frames: Mapping[int, SensorFrame], t: float) -> None:
        for room_id, frame in frames.items():
            if frame.motion:
                self.last_motion_t[room_id] = t

    def occupied_effective(self, room_id: int, t: float, hold_s: float) -> bool:
        last = self.last_motion_t.get(room_id)
        return last is not None and 0 <= t - last <= hold_s


def tick(
    t: float,
    frames: Mapping[int, SensorFrame],
    devices: Mapping[str, DeviceState],
    thresholds: Thresholds,
    tracker: OccupancyTracker,
) -> list[ActuatorCommand]:
    """One decision step: rule -> occupancy gate -> mode resolution for each
    LED/fan, plus the smoke fan-out for buzzers. Updates the tracker from the
    motion flags. Deterministic: identical inputs yield identical commands."""
    for device in devices.values():
        if device.room_id not in frames:
            raise MissingFrameError(f"no sensor frame for room {device.room_id}")
    tracker.observe(frames, t)

    alarm = smoke_detected(frames.values())
    commands: list[ActuatorCommand] = []
    for device_id in sorted(devices):
        device = devices[device_id]
        frame = frames[device.room_id]
        if device.kind == "buzzer":
            duty = 100 if alarm else 0
        else:
            if device.kind == "led":
                rule_duty = led_duty_from_lux(frame.lux, thresholds)
            else:
                rule_duty = fan_duty_from_climate(frame.temp_c, frame.humidity_pct, thresholds)
            occupied = tracker.occupied_effective(device.room_id, t, thresholds.occupancy_hold_s)
            auto_duty = occupancy_gate(rule_duty, occupied)
            duty = resolve_device(device.mode, auto_duty, device.manual_duty_pct)
        commands.append(ActuatorCommand(device_id, device.kind, duty))
    return commands

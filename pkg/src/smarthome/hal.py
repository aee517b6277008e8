"""Hardware abstraction boundary: sensor reads and actuator writes.

The simulated drivers are backed by the environment model; a real build
would swap in GPIO/I2C drivers behind the same surface. Pin labels in the
manifest are documentation only and are never driven.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass
from pathlib import Path

import yaml

from .envsim import Scenario, env_at

DEVICE_KINDS = ("led", "fan", "buzzer")
SENSOR_KINDS = ("pir", "dht22", "bh1750", "mq")


class HalError(ValueError):
    pass


class UnknownRoomError(HalError):
    pass


class UnknownDeviceError(HalError):
    pass


class DutyRangeError(HalError):
    pass


class ManifestError(HalError):
    """Manifest file failed to parse or validate."""


@dataclass(frozen=True)
class DeviceSpec:
    device_id: str
    kind: str
    rated_watts: float
    pin: str = ""  # e.g. "GPIO13"; informational only


@dataclass(frozen=True)
class RoomSpec:
    room_id: int
    devices: tuple[DeviceSpec, ...]
    sensors: tuple[str, ...]

    @property
    def has_smoke_sensor(self) -> bool:
        return "mq" in self.sensors


@dataclass(frozen=True)
class HardwareManifest:
    rooms: tuple[RoomSpec, ...]

    def room(self, room_id: int) -> RoomSpec:
        for room in self.rooms:
            if room.room_id == room_id:
                return room
        raise UnknownRoomError(f"room {room_id} not in manifest")

    def devices(self) -> tuple[DeviceSpec, ...]:
        return tuple(dev for room in self.rooms for dev in room.devices)

    def device_room(self, device_id: str) -> int:
        for room in self.rooms:
            for dev in room.devices:
                if dev.device_id == device_id:
                    return room.room_id
        raise UnknownDeviceError(f"device {device_id!r} not in manifest")


@dataclass(frozen=True)
class SensorFrame:
    """One room's instantaneous readings. smoke is None without an MQ sensor."""

    room_id: int
    t: float
    temp_c: float
    humidity_pct: float
    lux: float
    motion: bool
    smoke: bool | None


@dataclass(frozen=True)
class ActuatorCommand:
    device_id: str
    kind: str
    duty_pct: int


@dataclass(frozen=True)
class NoiseModel:
    """Optional Gaussian read noise, seeded per (seed, room, t) so replays match."""

    temp_sigma_c: float = 0.2
    humidity_sigma_pct: float = 1.0
    lux_sigma: float = 15.0


def validate_manifest(manifest: HardwareManifest) -> HardwareManifest:
    seen: set[str] = set()
    room_ids: set[int] = set()
    for room in manifest.rooms:
        if room.room_id in room_ids:
            raise ManifestError(f"duplicate room_id {room.room_id}")
        room_ids.add(room.room_id)
        for sensor in room.sensors:
            if sensor not in SENSOR_KINDS:
                raise ManifestError(f"room {room.room_id}: unknown sensor kind {sensor!r}")
        for dev in room.devices:
            if dev.device_id in seen:
                raise ManifestError(f"duplicate device_id {dev.device_id!r}")
            seen.add(dev.device_id)
            if dev.kind not in DEVICE_KINDS:
                raise ManifestError(f"device {dev.device_id!r}: unknown kind {dev.kind!r}")
            if dev.rated_watts < 0:
                raise ManifestError(f"device {dev.device_id!r}: rated_watts must be >= 0")
    return manifest


def default_manifest() -> HardwareManifest:
    """The two-room configuration the system was deployed with: one 9 W LED,
    one 50 W fan and a buzzer per room; PIR/DHT22/BH1750 everywhere, smoke
    sensor in room 2 only."""
    return validate_manifest(
        HardwareManifest(
            rooms=(
                RoomSpec(
                    room_id=1,
                    devices=(
                        DeviceSpec("led_1", "led", 9.0, pin="GPIO27"),
                        DeviceSpec("fan_1", "fan", 50.0, pin="GPIO13"),
                        DeviceSpec("buzzer_1", "buzzer", 0.0, pin="GPIO22"),
                    ),
                    sensors=("pir", "dht22", "bh1750"),
                ),
                RoomSpec(
                    room_id=2,
                    devices=(
                        DeviceSpec("led_2", "led", 9.0, pin="GPIO35"),
                        DeviceSpec("fan_2", "fan", 50.0, pin="GPIO19"),
                        DeviceSpec("buzzer_2", "buzzer", 0.0, pin="GPIO23"),
                    ),
                    sensors=("pir", "dht22", "bh1750", "mq"),
                ),
            )
        )
    )


def load_manifest(path: str | Path) -> HardwareManifest:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ManifestError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(raw, dict) or not isinstance(raw.get("rooms"), list):
        raise ManifestError(f"{path}: expected a mapping with a 'rooms' list")
    rooms = []
    for i, room in enumerate(raw["rooms"]):
        where = f"rooms[{i}]"
        try:
            devices = tuple(
                DeviceSpec(
                    device_id=str(dev["device_id"]),
                    kind=str(dev["kind"]),
                    rated_watts=float(dev["rated_watts"]),
                    pin=str(dev.get("pin", "")),
                )
                for dev in room.get("devices", [])
            )
            rooms.append(
                RoomSpec(
                    room_id=int(room["room_id"]),
                    devices=devices,
                    sensors=tuple(str(s) for s in room.get("sensors", [])),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"{path}: {where}: {exc}") from exc
    return validate_manifest(HardwareManifest(rooms=tuple(rooms)))


class SensorHub:
    """Simulated sensor drivers for every room in the manifest.

    Reads are pure functions of (scenario, room, t) unless noise is enabled,
    in which case the perturbation is derived from (scenario.seed, room, t)
    and therefore still replayable.
    """

    def __init__(
        self,
        scenario: Scenario,
        manifest: HardwareManifest,
        noise: NoiseModel | None = None,
    ):
        for room in manifest.rooms:
            if not 1 <= room.room_id <= len(scenario.rooms):
                raise UnknownRoomError(
                    f"room {room.room_id} has no script in scenario {scenario.name!r}"
                )
        self.scenario = scenario
        self.manifest = manifest
        self.noise = noise
        self._env_cache: tuple[float, object] | None = None

    def _env(self, t: float):
        # One env evaluation serves all rooms of the same tick.
        if self._env_cache is None or self._env_cache[0] != t:
            self._env_cache = (t, env_at(self.scenario, t))
        return self._env_cache[1]

    def read_sensors(self, room_id: int, t: float) -> SensorFrame:
        room = self.manifest.room(room_id)
        conditions = self._env(t).rooms[room_id - 1]
        temp, humidity, lux = conditions.temp_c, conditions.humidity_pct, conditions.lux
        if self.noise is not None:
            rng = random.Random(f"{self.scenario.seed}:{room_id}:{t}")
            temp += rng.gauss(0.0, self.noise.temp_sigma_c)
            humidity = min(100.0, max(0.0, humidity + rng.gauss(0.0, self.noise.humidity_sigma_pct)))
            lux = max(0.0, lux + rng.gauss(0.0, self.noise.lux_sigma))
        return SensorFrame(
            room_id=room_id,
            t=t,
            temp_c=temp,
            humidity_pct=humidity,
            lux=lux,
            motion=conditions.occupied,
            smoke=conditions.smoke if room.has_smoke_sensor else None,
        )

    def read_all(self, t: float) -> dict[int, SensorFrame]:
        return {room.room_id: self.read_sensors(room.room_id, t) for room in self.manifest.rooms}


class ActuatorBank:
    """Applied PWM duty per device. Single writer (the tick loop); readers get
    consistent values because writes are plain atomic replacements under a lock."""

    def __init__(self, manifest: HardwareManifest):
        self.manifest = manifest
        self._kinds = {dev.device_id: dev.kind for dev in manifest.devices()}
        self._duty = {dev.device_id: 0 for dev in manifest.devices()}
        self._lock = threading.Lock()

    def apply(self, command: ActuatorCommand) -> int:
        kind = self._kinds.get(command.device_id)
        if kind is None:
            raise UnknownDeviceError(f"device {command.device_id!r} not in manifest")
        duty = command.duty_pct
        if not isinstance(duty, int) or not 0 <= duty <= 100:
            raise DutyRangeError(f"device {command.device_id!r}: duty {duty!r} outside 0-100")
        if kind == "buzzer" and duty not in (0, 100):
            raise DutyRangeError(f"buzzer {command.device_id!r}: duty must be 0 or 100, got {duty}")
        with self._lock:
            self._duty[command.device_id] = duty
        return duty

    def applied_duty(self, device_id: str) -> int:
        try:
            with self._lock:
                return self._duty[device_id]
        except KeyError:
            raise UnknownDeviceError(f"device {device_id!r} not in manifest") from None

    def snapshot(self) -> dict[str, int]:
        with self._lock:
            return dict(self._duty)

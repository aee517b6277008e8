from __future__ import annotations

import pytest

from smarthome.envsim import builtin_reference_scenario, env_at
from smarthome.hal import (
    ActuatorBank,
    ActuatorCommand,
    DeviceSpec,
    DutyRangeError,
    HardwareManifest,
    ManifestError,
    NoiseModel,
    RoomSpec,
    SensorHub,
    UnknownDeviceError,
    UnknownRoomError,
    default_manifest,
    load_manifest,
    validate_manifest,
)
from tests.conftest import const_room, make_scenario


class TestManifest:
    def test_default_matches_deployed_wiring(self):
        manifest = default_manifest()
        assert [r.room_id for r in manifest.rooms] == [1, 2]
        watts = {d.device_id: d.rated_watts for d in manifest.devices()}
        assert watts == {
            "led_1": 9.0,
            "fan_1": 50.0,
            "buzzer_1": 0.0,
            "led_2": 9.0,
            "fan_2": 50.0,
            "buzzer_2": 0.0,
        }
        pins = {d.device_id: d.pin for d in manifest.devices()}
        assert pins["fan_1"] == "GPIO13" and pins["fan_2"] == "GPIO19"
        assert pins["led_1"] == "GPIO27" and pins["led_2"] == "GPIO35"
        assert pins["buzzer_1"] == "GPIO22" and pins["buzzer_2"] == "GPIO23"
        assert not manifest.room(1).has_smoke_sensor
        assert manifest.room(2).has_smoke_sensor

    def test_shipped_file_matches_builtin(self):
        assert load_manifest("manifests/default.yaml") == default_manifest()

    def test_duplicate_device_id_rejected(self):
        with pytest.raises(ManifestError, match="duplicate device_id"):
            validate_manifest(
                HardwareManifest(
                    rooms=(
                        RoomSpec(1, (DeviceSpec("led_1", "led", 9.0),), ("pir",)),
                        RoomSpec(2, (DeviceSpec("led_1", "led", 9.0),), ("pir",)),
                    )
                )
            )

    def test_negative_watts_rejected(self):
        with pytest.raises(ManifestError, match="rated_watts"):
            validate_manifest(
                HardwareManifest(
                    rooms=(RoomSpec(1, (DeviceSpec("x", "led", -1.0),), ()),)
                )
            )

    def test_unknown_kind_rejected(self):
        with pytest.raises(ManifestError, match="unknown kind"):
            validate_manifest(
                HardwareManifest(
                    rooms=(RoomSpec(1, (DeviceSpec("x", "heater", 5.0),), ()),)
                )
            )


class TestSensorHub:
    def test_frame_reflects_environment_without_noise(self):
        scenario = make_scenario(
            room1=const_room(lux=800.0, temp=25.0, humidity=50.0, occupied=True)
        )
        hub = SensorHub(scenario, default_manifest())
        frame = hub.read_sensors(1, 0.0)
        assert frame.temp_c == 25.0
        assert frame.humidity_pct == 50.0
        assert frame.lux == 800.0
        assert frame.motion is True
        assert frame.smoke is None  # room 1 has no smoke sensor

    def test_smoke_field_present_only_with_sensor(self):
        scenario = make_scenario(room2=const_room(smoke_events=((10.0, 20.0),)))
        hub = SensorHub(scenario, default_manifest())
        assert hub.read_sensors(1, 15.0).smoke is None
        assert hub.read_sensors(2, 15.0).smoke is True
        assert hub.read_sensors(2, 25.0).smoke is False

    def test_unknown_room_rejected(self):
        hub = SensorHub(make_scenario(), default_manifest())
        with pytest.raises(UnknownRoomError):
            hub.read_sensors(3, 0.0)

    def test_noise_is_deterministic_per_seed(self):
        scenario = make_scenario(seed=42)
        noise = NoiseModel()
        hub_a = SensorHub(scenario, default_manifest(), noise=noise)
        hub_b = SensorHub(scenario, default_manifest(), noise=noise)
        frames_a = [hub_a.read_sensors(1, float(t)) for t in range(20)]
        frames_b = [hub_b.read_sensors(1, float(t)) for t in range(20)]
        assert frames_a == frames_b
        # and it actually perturbs the clean value
        clean = SensorHub(scenario, default_manifest()).read_sensors(1, 0.0)
        assert any(f.temp_c != clean.temp_c for f in frames_a[:1])

    def test_frame_invariants_over_full_reference_sweep(self):
        scenario = builtin_reference_scenario()
        manifest = default_manifest()
        hub = SensorHub(scenario, manifest, noise=NoiseModel())
        for t in range(0, 43200, 7):
            for room in manifest.rooms:
                frame = hub.read_sensors(room.room_id, float(t))
                assert frame.lux >= 0
                assert 0 <= frame.humidity_pct <= 100
                assert (frame.smoke is not None) == room.has_smoke_sensor
                assert frame.motion == env_at(scenario, float(t)).rooms[room.room_id - 1].occupied


class TestActuatorBank:
    def test_apply_then_read_back(self):
        bank = ActuatorBank(default_manifest())
        assert bank.apply(ActuatorCommand("led_1", "led", 50)) == 50
        assert bank.applied_duty("led_1") == 50

    def test_out_of_range_duty_rejected(self):
        bank = ActuatorBank(default_manifest())
        with pytest.raises(DutyRangeError):
            bank.apply(ActuatorCommand("fan_2", "fan", 101))
        with pytest.raises(DutyRangeError):
            bank.apply(ActuatorCommand("fan_2", "fan", -1))

    def test_buzzer_is_binary(self):
        bank = ActuatorBank(default_manifest())
        bank.apply(ActuatorCommand("buzzer_1", "buzzer", 100))
        assert bank.applied_duty("buzzer_1") == 100
        bank.apply(ActuatorCommand("buzzer_1", "buzzer", 0))
        assert bank.applied_duty("buzzer_1") == 0
        with pytest.raises(DutyRangeError):
            bank.apply(ActuatorCommand("buzzer_1", "buzzer", 50))

    def test_unknown_device_rejected(self):
        bank = ActuatorBank(default_manifest())
        with pytest.raises(UnknownDeviceError):
            bank.apply(ActuatorCommand("led_9", "led", 10))
        with pytest.raises(UnknownDeviceError):
            bank.applied_duty("led_9")

    def test_idempotent_for_equal_duty(self):
        bank = ActuatorBank(default_manifest())
        bank.apply(ActuatorCommand("fan_1", "fan", 70))
        bank.apply(ActuatorCommand("fan_1", "fan", 70))
        assert bank.applied_duty("fan_1") == 70

    def test_read_back_equals_last_write_under_concurrent_readers(self):
        import threading

        bank = ActuatorBank(default_manifest())
        written = list(range(0, 101, 5))
        seen: list[int] = []
        stop = threading.Event()

        def reader():
            while not stop.is_set():
                seen.append(bank.applied_duty("fan_1"))

        threads = [threading.Thread(target=reader) for _ in range(3)]
        for thread in threads:
            thread.start()
        for duty in written:
            bank.apply(ActuatorCommand("fan_1", "fan", duty))
        stop.set()
        for thread in threads:
            thread.join()
        assert bank.applied_duty("fan_1") == written[-1]
        assert set(seen) <= set(written) | {0}  # never a torn or invented value

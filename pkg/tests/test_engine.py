from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from smarthome.engine import (
    DeviceState,
    MissingFrameError,
    Mode,
    OccupancyTracker,
    ThresholdError,
    Thresholds,
    fan_duty_from_climate,
    led_duty_from_lux,
    occupancy_gate,
    resolve_device,
    smoke_alarm,
    tick,
)
from smarthome.hal import SensorFrame


# Independent re-implementations of the published rules, kept deliberately
# dumb so they can serve as oracles for the production functions.

def published_led_duty(lux: float) -> int:
    if lux > 2000:
        return 0
    elif lux < 100:
        return 100
    else:
        return int((2000 - lux) / 20)


def published_fan_duty(temp_c: float, humidity_pct: float) -> int:
    # Three tiers, strict boundaries, humidity gate only on the top tier;
    # off below the first tier, 70% fallback when hot but dry.
    if temp_c > 30.0:
        return 100 if humidity_pct > 70.0 else 70
    if temp_c > 27.0:
        return 70
    if temp_c > 24.0:
        return 40
    return 0


def frame(room_id=1, t=0.0, temp=25.0, humidity=50.0, lux=500.0, motion=True, smoke=None):
    return SensorFrame(
        room_id=room_id, t=t, temp_c=temp, humidity_pct=humidity, lux=lux,
        motion=motion, smoke=smoke,
    )


def make_devices() -> dict[str, DeviceState]:
    return {
        "led_1": DeviceState("led_1", 1, "led", 9.0),
        "fan_1": DeviceState("fan_1", 1, "fan", 50.0),
        "buzzer_1": DeviceState("buzzer_1", 1, "buzzer", 0.0),
        "led_2": DeviceState("led_2", 2, "led", 9.0),
        "fan_2": DeviceState("fan_2", 2, "fan", 50.0),
        "buzzer_2": DeviceState("buzzer_2", 2, "buzzer", 0.0),
    }


class TestLedRule:
    @pytest.mark.parametrize(
        "lux,expected",
        [
            (2500, 0),    # off above the cutoff
            (50, 100),    # full below the floor
            (1000, 50),   # (2000-1000)/20
            (2000, 0),    # cutoff itself takes the ramp branch: (2000-2000)/20
            (100, 95),    # ramp branch at the floor: int((2000-100)/20)
            (99, 100),    # one below the floor jumps to full
        ],
    )
    def test_published_values(self, lux, expected):
        assert led_duty_from_lux(lux) == expected
        assert published_led_duty(lux) == expected  # oracle agrees

    def test_exhaustive_integer_sweep_matches_published_listing(self):
        for lux in range(0, 3001):
            assert led_duty_from_lux(lux) == published_led_duty(lux), f"lux={lux}"

    def test_fractional_lux_matches_published_listing(self):
        lux = 0.0
        while lux <= 3000.0:
            assert led_duty_from_lux(lux) == published_led_duty(lux), f"lux={lux}"
            lux += 0.25

    def test_non_increasing_with_single_jump_at_floor(self):
        duties = [led_duty_from_lux(lux) for lux in range(0, 3001)]
        drops = []
        for lux in range(1, 3001):
            assert duties[lux] <= duties[lux - 1], f"increased at lux={lux}"
            if duties[lux - 1] - duties[lux] > 1:
                drops.append(lux)
        # the only step bigger than the ramp's own 1% quantum is the
        # published discontinuity at the full-brightness floor
        assert drops == [100]

    def test_custom_thresholds_keep_the_published_shape(self):
        thr = Thresholds(lux_off=1500.0, lux_full=100.0)
        assert led_duty_from_lux(1600, thr) == 0
        assert led_duty_from_lux(1500, thr) == 0
        assert led_duty_from_lux(50, thr) == 100
        # ramp anchored at the cutoff, integer-truncated
        assert led_duty_from_lux(750, thr) == int((1500 - 750) * 100 / 1500)

    @given(lux=st.floats(0.0, 65535.0))
    def test_total_and_in_range(self, lux):
        duty = led_duty_from_lux(lux)
        assert 0 <= duty <= 100


class TestFanRule:
    @pytest.mark.parametrize(
        "temp,humidity,expected",
        [
            (23.0, 50.0, 0),
            (25.0, 50.0, 40),
            (28.0, 50.0, 70),
            (31.0, 80.0, 100),
            (31.0, 60.0, 70),   # humidity gate fails -> falls back a tier
            (24.0, 90.0, 0),    # boundaries are strict: "above 24" excludes 24.0
            (27.0, 90.0, 40),
            (30.0, 90.0, 70),
            (30.5, 70.0, 70),   # humidity must be strictly > 70
        ],
    )
    def test_tier_table(self, temp, humidity, expected):
        assert fan_duty_from_climate(temp, humidity) == expected
        assert published_fan_duty(temp, humidity) == expected  # oracle agrees

    def test_exhaustive_grid_matches_oracle(self):
        temp = 15.0
        while temp <= 35.0:
            for humidity in range(0, 101, 5):
                assert fan_duty_from_climate(temp, humidity) == published_fan_duty(
                    temp, humidity
                ), f"temp={temp} humidity={humidity}"
            temp += 0.5

    @given(
        t1=st.floats(15.0, 40.0),
        t2=st.floats(15.0, 40.0),
        humidity=st.floats(0.0, 100.0),
    )
    def test_monotone_in_temperature(self, t1, t2, humidity):
        lo, hi = sorted((t1, t2))
        assert fan_duty_from_climate(lo, humidity) <= fan_duty_from_climate(hi, humidity)

    @given(
        temp=st.floats(15.0, 40.0),
        h1=st.floats(0.0, 100.0),
        h2=st.floats(0.0, 100.0),
    )
    def test_monotone_in_humidity(self, temp, h1, h2):
        lo, hi = sorted((h1, h2))
        assert fan_duty_from_climate(temp, lo) <= fan_duty_from_climate(temp, hi)


class TestThresholds:
    def test_defaults_are_valid(self):
        Thresholds().validate()

    def test_lux_ordering_enforced(self):
        with pytest.raises(ThresholdError, match="lux_full must be < lux_off"):
            Thresholds(lux_off=100.0, lux_full=2000.0).validate()

    def test_fan_tier_ordering_enforced(self):
        with pytest.raises(ThresholdError, match="fan temperature tiers"):
            Thresholds(fan_t1_c=28.0, fan_t2_c=26.0).validate()

    def test_negative_hold_rejected(self):
        with pytest.raises(ThresholdError, match="occupancy_hold_s"):
            Thresholds(occupancy_hold_s=-1.0).validate()


class TestGateAndModes:
    @pytest.mark.parametrize("duty,occupied,expected", [(70, True, 70), (70, False, 0), (0, False, 0)])
    def test_occupancy_gate(self, duty, occupied, expected):
        assert occupancy_gate(duty, occupied) == expected

    @pytest.mark.parametrize(
        "mode,auto,manual,expected",
        [
            (Mode.AUTO, 40, 90, 40),
            (Mode.MANUAL, 40, 90, 90),
            (Mode.OFF, 100, 100, 0),
            (Mode.ON, 0, 0, 100),
        ],
    )
    def test_resolve_device(self, mode, auto, manual, expected):
        assert resolve_device(mode, auto, manual) == expected

    @given(auto=st.integers(0, 100), manual=st.integers(0, 100))
    def test_on_off_ignore_all_inputs(self, auto, manual):
        assert resolve_device(Mode.OFF, auto, manual) == 0
        assert resolve_device(Mode.ON, auto, manual) == 100


class TestSmokeAlarm:
    def test_smoke_in_one_room_sounds_every_buzzer(self):
        frames = [frame(1, smoke=None), frame(2, smoke=True)]
        buzzers = [DeviceState("buzzer_1", 1, "buzzer", 0.0), DeviceState("buzzer_2", 2, "buzzer", 0.0)]
        commands = smoke_alarm(frames, buzzers)
        assert [(c.device_id, c.duty_pct) for c in commands] == [("buzzer_1", 100), ("buzzer_2", 100)]

    def test_no_smoke_silences_both(self):
        frames = [frame(1, smoke=None), frame(2, smoke=False)]
        buzzers = [DeviceState("buzzer_1", 1, "buzzer", 0.0), DeviceState("buzzer_2", 2, "buzzer", 0.0)]
        assert all(c.duty_pct == 0 for c in smoke_alarm(frames, buzzers))

    def test_rooms_without_sensor_never_trigger(self):
        frames = [frame(1, smoke=None), frame(2, smoke=None)]
        buzzers = [DeviceState("buzzer_1", 1, "buzzer", 0.0)]
        assert smoke_alarm(frames, buzzers)[0].duty_pct == 0


class TestOccupancyTracker:
    def test_hold_window_is_inclusive(self):
        tracker = OccupancyTracker()
        tracker.observe({1: frame(motion=True)}, 100.0)
        assert tracker.occupied_effective(1, 100.0, 30.0)
        assert tracker.occupied_effective(1, 130.0, 30.0)
        assert not tracker.occupied_effective(1, 131.0, 30.0)

    def test_never_seen_motion_means_vacant(self):
        assert not OccupancyTracker().occupied_effective(1, 50.0, 30.0)

    def test_new_motion_refreshes_hold(self):
        tracker = OccupancyTracker()
        tracker.observe({1: frame(motion=True)}, 0.0)
        tracker.observe({1: frame(motion=True)}, 20.0)
        assert tracker.occupied_effective(1, 50.0, 30.0)


class TestTick:
    def run_tick(self, devices, frames, t=0.0, thresholds=None, tracker=None):
        thresholds = thresholds or Thresholds()
        tracker = tracker or OccupancyTracker()
        commands = tick(t, frames, devices, thresholds, tracker)
        return {c.device_id: c.duty_pct for c in commands}, tracker

    def test_occupied_dark_room_drives_led_full(self):
        duties, _ = self.run_tick(
            make_devices(), {1: frame(1, lux=50.0, motion=True), 2: frame(2, motion=False)}
        )
        assert duties["led_1"] == 100

    def test_vacant_beyond_hold_gates_to_zero(self):
        devices = make_devices()
        tracker = OccupancyTracker()
        self.run_tick(devices, {1: frame(1, lux=50.0, motion=True, t=0.0), 2: frame(2)}, t=0.0, tracker=tracker)
        duties, _ = self.run_tick(
            devices, {1: frame(1, lux=50.0, motion=False, t=31.0), 2: frame(2)}, t=31.0, tracker=tracker
        )
        assert duties["led_1"] == 0

    def test_on_mode_bypasses_gating(self):
        devices = make_devices()
        devices["fan_1"].mode = Mode.ON
        duties, _ = self.run_tick(
            devices, {1: frame(1, motion=False), 2: frame(2, motion=False)}
        )
        assert duties["fan_1"] == 100

    def test_manual_mode_uses_slider_and_bypasses_gate(self):
        devices = make_devices()
        devices["fan_1"].mode = Mode.MANUAL
        devices["fan_1"].manual_duty_pct = 55
        duties, _ = self.run_tick(
            devices, {1: frame(1, motion=False), 2: frame(2, motion=False)}
        )
        assert duties["fan_1"] == 55

    def test_smoke_overrides_modes_and_occupancy(self):
        devices = make_devices()
        devices["buzzer_1"].mode = Mode.OFF
        devices["buzzer_2"].mode = Mode.OFF
        duties, _ = self.run_tick(
            devices,
            {1: frame(1, motion=False), 2: frame(2, motion=False, smoke=True)},
        )
        assert duties["buzzer_1"] == 100
        assert duties["buzzer_2"] == 100

    def test_missing_frame_rejected(self):
        with pytest.raises(MissingFrameError):
            self.run_tick(make_devices(), {1: frame(1)})

    def test_identical_inputs_give_identical_commands(self):
        devices = make_devices()
        frames = {1: frame(1, lux=600.0), 2: frame(2, temp=29.0)}
        tracker = OccupancyTracker()
        first = tick(5.0, frames, devices, Thresholds(), tracker)
        second = tick(5.0, frames, devices, Thresholds(), tracker)
        assert first == second

    @given(
        lux=st.floats(0.0, 65535.0),
        temp=st.floats(-10.0, 60.0),
        humidity=st.floats(0.0, 100.0),
    )
    def test_gating_soundness_vacant_auto_is_always_zero(self, lux, temp, humidity):
        devices = make_devices()
        frames = {
            1: frame(1, lux=lux, temp=temp, humidity=humidity, motion=False),
            2: frame(2, motion=False),
        }
        commands = tick(0.0, frames, devices, Thresholds(), OccupancyTracker())
        for command in commands:
            if command.kind in ("led", "fan"):
                assert command.duty_pct == 0

    def test_sensor_change_reflected_within_two_ticks(self):
        # Step change: a dark reading must reach the LED command no later
        # than the second tick after the frame changes.
        devices = make_devices()
        tracker = OccupancyTracker()
        bright = {1: frame(1, lux=2500.0, motion=True, t=0.0), 2: frame(2, t=0.0)}
        dark = {1: frame(1, lux=50.0, motion=True, t=1.0), 2: frame(2, t=1.0)}
        first = {c.device_id: c.duty_pct for c in tick(0.0, bright, devices, Thresholds(), tracker)}
        assert first["led_1"] == 0
        second = {c.device_id: c.duty_pct for c in tick(1.0, dark, devices, Thresholds(), tracker)}
        assert second["led_1"] == 100  # latency: 1 tick, within the 2-tick budget

from __future__ import annotations

import pytest

from smarthome.envsim import RoomScript, Scenario, validate_scenario
from smarthome.hal import default_manifest
from smarthome.service import Service


def const_room(
    lux: float = 500.0,
    temp: float = 25.0,
    humidity: float = 50.0,
    occupied: bool = True,
    duration: float = 600.0,
    smoke_events=(),
    lux_curve=None,
    temp_curve=None,
    humidity_curve=None,
    occupancy_windows=None,
) -> RoomScript:
    """Room script with constant conditions unless a curve is given."""
    if occupancy_windows is None:
        occupancy_windows = ((0.0, duration),) if occupied else ()
    return RoomScript(
        occupancy_windows=tuple(tuple(w) for w in occupancy_windows),
        lux_curve=tuple(lux_curve) if lux_curve else ((0.0, lux),),
        temp_curve=tuple(temp_curve) if temp_curve else ((0.0, temp),),
        humidity_curve=tuple(humidity_curve) if humidity_curve else ((0.0, humidity),),
        smoke_events=tuple(tuple(e) for e in smoke_events),
    )


def make_scenario(
    room1: RoomScript | None = None,
    room2: RoomScript | None = None,
    duration: float = 600.0,
    name: str = "test",
    seed: int = 0,
) -> Scenario:
    return validate_scenario(
        Scenario(
            name=name,
            duration_s=duration,
            time_scale=1.0,
            rooms=(room1 or const_room(duration=duration), room2 or const_room(duration=duration)),
            seed=seed,
        )
    )


@pytest.fixture
def service_factory(tmp_path):
    """Builds Services over throwaway output dirs and closes them at teardown."""
    created = []
    counter = [0]

    def build(scenario=None, manifest=None, **kwargs) -> Service:
        counter[0] += 1
        out = tmp_path / f"svc{counter[0]}"
        service = Service(
            scenario or make_scenario(),
            manifest or default_manifest(),
            out_dir=kwargs.pop("out_dir", out),
            **kwargs,
        )
        created.append(service)
        return service

    yield build
    for service in created:
        service.close()

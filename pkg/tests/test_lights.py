"""Unit mapping, memory store and bridge client/simulator tests."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stageflow.errors import InputError, NotFoundError, RangeError
from stageflow.bridge_sim import SimulatedBridge
from stageflow.lights import (
    BridgeClient,
    BridgeCommandError,
    BridgeTransportError,
    LightMemory,
    LightState,
    MemoryStore,
    command_for,
    map_to_bridge_units,
)

RED = LightState(on=True, brightness_pct=100, hue_deg=0, saturation_pct=100)


# -- unit mapping --------------------------------------------------------------


def test_map_endpoints():
    bri, hue, sat, on = map_to_bridge_units(RED)
    assert (bri, hue, sat) == (254, 0, 254)
    assert on is True


def test_map_hand_computed_midpoints():
    # bri floor of 1 at 0%, hue 180 deg = half the u16 circle, sat 50% of 254
    bri, hue, sat, on = map_to_bridge_units(LightState(True, 0, 180, 50))
    assert (bri, hue, sat) == (1, 32768, 127)
    assert on is False  # 0% brightness switches the lamp off


def test_map_hue_wraps_to_zero():
    bri, hue, sat, _ = map_to_bridge_units(LightState(True, 50, 359.999, 0))
    assert hue == 0
    assert sat == 0
    assert bri == 127


@given(st.floats(min_value=0, max_value=100), st.floats(min_value=0, max_value=100))
def test_map_monotone_in_brightness_and_saturation(lo, hi):
    lo, hi = min(lo, hi), max(lo, hi)
    bri_lo, _, sat_lo, _ = map_to_bridge_units(LightState(True, lo, 0, lo))
    bri_hi, _, sat_hi, _ = map_to_bridge_units(LightState(True, hi, 0, hi))
    assert bri_lo <= bri_hi
    assert sat_lo <= sat_hi


def test_map_hits_api_range_endpoints():
    assert map_to_bridge_units(LightState(True, 100, 0, 100))[0] == 254
    assert map_to_bridge_units(LightState(True, 0, 0, 0))[0] == 1
    assert map_to_bridge_units(LightState(True, 50, 359.995, 0))[1] == 65535
    assert map_to_bridge_units(LightState(True, 50, 0, 0))[1] == 0


def test_light_state_validation():
    with pytest.raises(InputError):
        LightState(brightness_pct=101)
    with pytest.raises(InputError):
        LightState(hue_deg=360)
    with pytest.raises(InputError):
        LightState(saturation_pct=-1)


# -- memory store ---------------------------------------------------------------


def test_save_out_of_range():
    store = MemoryStore()
    with pytest.raises(RangeError):
        store.save(21, {"lamp-a": RED})
    with pytest.raises(RangeError):
        store.save(0, {"lamp-a": RED})


def test_save_empty_states():
    with pytest.raises(InputError):
        MemoryStore().save(1, {})


def test_save_recall_round_trip():
    store = MemoryStore()
    store.save(1, {"lamp-a": RED}, label="red wash")
    commands = store.recall(1)
    assert len(commands) == 1
    cmd = commands[0]
    assert (cmd.lamp_id, cmd.hue_u16, cmd.sat, cmd.bri, cmd.on) == ("lamp-a", 0, 254, 254, True)


def test_save_overwrites():
    store = MemoryStore()
    store.save(1, {"lamp-a": RED})
    dim = LightState(True, 10, 120, 30)
    store.save(1, {"lamp-a": dim})
    assert store.get(1).states["lamp-a"] == dim


def test_recall_unsaved_is_not_found():
    with pytest.raises(NotFoundError):
        MemoryStore().recall(7)


def test_recall_sorted_by_lamp_id():
    store = MemoryStore()
    store.save(2, {"lamp-c": RED, "lamp-a": RED, "lamp-b": RED})
    assert [c.lamp_id for c in store.recall(2)] == ["lamp-a", "lamp-b", "lamp-c"]


def test_store_never_exceeds_20():
    store = MemoryStore()
    for i in range(1, 21):
        store.save(i, {"lamp-a": RED})
    assert len(store) == 20
    with pytest.raises(RangeError):
        store.save(21, {"lamp-a": RED})
    assert len(store) == 20


state_st = st.builds(
    LightState,
    on=st.booleans(),
    brightness_pct=st.floats(min_value=0, max_value=100),
    hue_deg=st.floats(min_value=0, max_value=359.999),
    saturation_pct=st.floats(min_value=0, max_value=100),
)


@given(st.dictionaries(st.sampled_from(["a", "b", "c", "d"]), state_st, min_size=1))
def test_recall_reproduces_unit_mapping(states):
    store = MemoryStore()
    store.save(5, states)
    for cmd in store.recall(5):
        bri, hue, sat, on = map_to_bridge_units(states[cmd.lamp_id])
        assert (cmd.bri, cmd.hue_u16, cmd.sat, cmd.on) == (bri, hue, sat, on)


def test_memory_index_validation():
    with pytest.raises(RangeError):
        LightMemory(index=21, states={"a": RED})


# -- bridge client against the simulator -----------------------------------------


@pytest.fixture()
def bridge():
    with SimulatedBridge(api_key="testkey", light_names={1: "Lamp A", 2: "Lamp B"}) as sim:
        yield sim


def test_apply_updates_simulated_lamp(bridge):
    client = BridgeClient(bridge.base_url, "testkey", {"lamp-a": 1})
    body = client.apply(command_for("lamp-a", RED))
    assert any("success" in entry for entry in body)
    assert bridge.light_state(1) == {"on": True, "bri": 254, "hue": 0, "sat": 254, "reachable": True}
    assert len(bridge.commands) == 1
    assert bridge.commands[0].body["transitiontime"] == 4


def test_apply_unknown_lamp_is_command_error(bridge):
    client = BridgeClient(bridge.base_url, "testkey", {"ghost": 9})
    with pytest.raises(BridgeCommandError, match="not available"):
        client.apply(command_for("ghost", RED))


def test_apply_unmapped_lamp_is_command_error(bridge):
    client = BridgeClient(bridge.base_url, "testkey", {"lamp-a": 1})
    with pytest.raises(BridgeCommandError, match="lamp map"):
        client.apply(command_for("nope", RED))


def test_apply_bad_key_is_command_error(bridge):
    client = BridgeClient(bridge.base_url, "wrong", {"lamp-a": 1})
    with pytest.raises(BridgeCommandError, match="unauthorized"):
        client.apply(command_for("lamp-a", RED))


def test_offline_bridge_transport_error_after_retries():
    client = BridgeClient(
        "http://127.0.0.1:1", "k", {"lamp-a": 1}, timeout_s=0.2, retries=3, backoff_s=0.01
    )
    with pytest.raises(BridgeTransportError, match="3 attempts"):
        client.apply(command_for("lamp-a", RED))


def test_observer_sees_puts(bridge):
    seen = []
    bridge.observer = seen.append
    client = BridgeClient(bridge.base_url, "testkey", {"lamp-a": 1})
    client.apply(command_for("lamp-a", RED))
    assert len(seen) == 1
    assert seen[0].light_id == 1
    assert seen[0].body["hue"] == 0

import dataclasses

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ceisim.scenario import (
    PRESETS,
    ConfigError,
    car_following,
    gap_sweep_protocol,
    load_config,
    parse_config,
    preset,
    to_ini,
)
from ceisim.track import StraightTrack, TrackGeometry


def thresholds(d):
    return (d.rho_l, d.rho_u, d.v_0, d.v_d, d.x_0)


def test_preset_values():
    assert thresholds(preset("A").left) == (0.2, 0.5, 10.0, 10.0, 0.0)
    assert thresholds(preset("A").right) == (0.2, 0.5, 9.0, 9.0, 0.0)
    assert preset("B").right.x_0 == 1.2
    assert thresholds(preset("B").left) == thresholds(preset("A").left)
    c = preset("C")
    assert (c.left.rho_l, c.left.rho_u) == (0.2, 0.4)
    assert (c.right.rho_l, c.right.rho_u) == (0.3, 0.6)
    assert c.left.v_0 == c.right.v_0 == 10.0
    d = preset("D")
    assert (d.left.rho_l, d.left.rho_u) == (0.3, 0.4)
    assert (d.right.rho_l, d.right.rho_u) == (0.3, 0.6)


def test_all_presets_share_saturation_time():
    for name in PRESETS:
        cfg = preset(name)
        assert cfg.left.tau == cfg.right.tau == 2.0


def test_car_following_preset():
    cfg = preset("car_following")
    assert isinstance(cfg.track, StraightTrack)
    assert cfg.track.length == 400.0
    assert cfg.left.v_0 == cfg.left.v_d == 10.0
    assert cfg.right.v_0 == cfg.right.v_d == 9.0
    assert (cfg.left.rho_l, cfg.left.rho_u) == (0.2, 0.5)


def test_unknown_preset():
    with pytest.raises(ConfigError, match="unknown scenario"):
        preset("E")


def test_empty_overrides_equal_preset():
    assert parse_config("[scenario]\npreset = A\n") == preset("A")


def test_threshold_order_rejected():
    text = "[scenario]\npreset = A\n[left]\nrho_l = 0.6\nrho_u = 0.5\n"
    with pytest.raises(ConfigError, match="thresholds ordered"):
        parse_config(text)


def test_single_field_override():
    cfg = parse_config("[scenario]\npreset = A\n[dynamics]\nalpha = 0.001\n")
    base = preset("A")
    assert cfg.dynamics.alpha == 0.001
    assert dataclasses.replace(cfg, dynamics=base.dynamics) == base


@pytest.mark.parametrize(
    "text, key",
    [
        ("[scenario]\npreset = A\n[left]\nspeed = 3\n", "left.speed"),
        ("[scenario]\npreset = A\n[weather]\nrain = 1\n", "weather"),
        ("[scenario]\npreset = A\n[right]\nv_0 = fast\n", "right.v_0"),
        ("[scenario]\npreset = A\n[dynamics]\ndt = nan\n", "dynamics.dt"),
        ("[left]\nv_0 = 10\nv_d = 10\n[right]\nv_0 = 9\n", "right.v_d"),
        ("[scenario]\nschema_version = 7\n", "schema_version"),
        ("[scenario]\npreset = A\n[left]\nx_0 = 500\n", "left.x_0"),
        ("[scenario]\ntrack = straight\n[track]\nl_a = 3\n", "track.l_a"),
    ],
)
def test_bad_configs_name_the_key(text, key):
    with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
        parse_config(text)


def test_config_without_preset():
    cfg = parse_config(
        "[scenario]\ntrack = straight\nsim_cap = 20\n[track]\nlength = 150\n"
        "[left]\nv_0 = 8\nv_d = 8\n[right]\nv_0 = 6\nv_d = 6\nx_0 = 20\n"
    )
    assert cfg.track == StraightTrack(length=150.0)
    assert cfg.right.x_0 == 20.0 and cfg.left.rho_u == 0.5
    assert cfg.sim_cap == 20.0


def test_load_config(tmp_path):
    path = tmp_path / "b.ini"
    path.write_text("[scenario]\npreset = B\n", encoding="utf-8")
    assert load_config(path) == preset("B")
    with pytest.raises(OSError):
        load_config(tmp_path / "missing.ini")


@pytest.mark.parametrize("name", list(PRESETS))
def test_presets_round_trip(name):
    cfg = preset(name)
    assert parse_config(to_ini(cfg)) == cfg


@given(
    st.floats(0.0, 0.45), st.floats(0.01, 0.5), st.floats(0.1, 5.0),
    st.floats(0.0, 20.0), st.floats(0.0, 20.0), st.floats(10.0, 40.0),
)
def test_custom_configs_round_trip(rho_l, gap, tau, v0, vd, l_a):
    base = preset("C")
    left = dataclasses.replace(base.left, rho_l=rho_l, rho_u=min(1.0, rho_l + gap), tau=tau, v_0=v0, v_d=vd)
    cfg = dataclasses.replace(base, left=left, track=TrackGeometry(l_a=l_a))
    assert parse_config(to_ini(cfg)) == cfg


def test_gap_sweep_protocol():
    a, b = gap_sweep_protocol([8.0, 12.0])
    assert a.left.v_0 == 8.0 and b.left.v_0 == 12.0
    for cfg in (a, b):
        assert cfg.right.v_0 / cfg.left.v_0 == pytest.approx(0.9, abs=1e-12)
        assert cfg.right.v_d == cfg.right.v_0
        gap = cfg.right.x_0 - cfg.left.x_0 - cfg.track.vehicle_length
        assert gap == pytest.approx(cfg.left.v_0 * 1.0)
    assert dataclasses.replace(a, name=b.name, left=b.left, right=b.right, sim_cap=b.sim_cap) == b


def test_sweep_protocol_ten_metres_at_ten():
    cfg = car_following(10.0)
    assert cfg.right.v_0 == 9.0
    assert cfg.right.x_0 - cfg.left.x_0 == pytest.approx(10.0 + 4.5)


@given(st.floats(0.5, 40.0))
def test_sweep_ratio_exact(v):
    (cfg,) = gap_sweep_protocol([v])
    assert abs(cfg.right.v_0 / cfg.left.v_0 - 0.9) <= 1e-12


@pytest.mark.parametrize("v", [0.0, -3.0])
def test_sweep_rejects_non_positive(v):
    with pytest.raises(ConfigError):
        gap_sweep_protocol([v])

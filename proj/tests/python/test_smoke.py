# SPDX-License-Identifier: Apache-2.0
"""Smoke tests for the python module against the shipped factory scenario."""

import json
import math
import os

import pwesim as pw

SCENARIO = os.environ.get("PWE_SCENARIO", "scenarios/factory.json")

MINI = {
    "floorplan": {
        "ceiling_height_m": 3.0,
        "walls": [
            {"id": "w1", "origin_m": [0, 0, 0], "edge_u_m": [0, 0, 3], "edge_v_m": [4, 0, 0]},
            {"id": "w2", "origin_m": [0, 4, 0], "edge_u_m": [4, 0, 0], "edge_v_m": [0, 0, 3]},
            {"id": "c", "origin_m": [0, 0, 3], "edge_u_m": [0, 4, 0], "edge_v_m": [4, 0, 0]},
        ],
    },
    "users": [
        {"id": "tx", "position_m": [1.0, 2.0, 1.0]},
        {
            "id": "rx",
            "position_m": [3.0, 2.0, 1.0],
            "trajectory": {"waypoints_m": [[3.0, 1.0, 1.0], [3.0, 3.0, 1.0]], "speed_mps": 1.0},
        },
    ],
    "objectives": [{"tx_id": "tx", "rx_id": "rx", "metrics": ["MAX_RX_POWER"]}],
    "optimizer": {"name": "kpaths", "k": 1},
    "simulation": {"time_step_s": 0.25, "modes": ["on", "off"]},
}


def test_version():
    assert pw.__version__


def test_rms_delay_spread_oracle():
    # P=[1,3] W, tau=[10,20] ns -> 4.330127 ns
    got = pw.rms_delay_spread_of([(1.0, 10e-9), (3.0, 20e-9)])
    assert abs(got - 4.330127018922193e-9) < 1e-18


def test_merge_bias_mode_rule():
    merged, effs = pw.merge_bias([([1, 1, 2, 2], 0.8), ([1, 3, 3, 2], 0.9)])
    assert merged == [1, 1, 2, 2]
    assert abs(effs[0] - 0.8) < 1e-12
    assert abs(effs[1] - 0.45) < 1e-12


def test_factory_scenario_builds_and_serves():
    s = pw.load_scenario(SCENARIO)
    assert set(s.users) == {"tx", "rx"}
    g = s.build()
    assert g.tile_count() > 100
    assert g.first_contact_tiles("tx")

    pdp = pw.compute_pdp(g, s, "tx", "rx")
    csv = pw.pdp_to_csv(pdp, g)
    assert csv.startswith("path_index,power_dbm,delay_ns")

    resp = json.loads(
        pw.handle_pdp_request(g, s, json.dumps({"tx_id": "tx", "rx_id": "rx"}))
    )
    assert resp["status"] == "ok"
    assert len(resp["entries"]) == len(pdp)
    resp = json.loads(
        pw.handle_pdp_request(g, s, json.dumps({"tx_id": "tx", "rx_id": "ghost"}))
    )
    assert resp["status"] == "unknown_user"


def test_mini_run_is_deterministic():
    s = pw.load_scenario_text(json.dumps(MINI))
    first = pw.run_scenario(s)
    second = pw.run_scenario(s)
    assert [ts.mode for ts in first] == ["on", "off"]
    for a, b in zip(first, second):
        assert pw.timeseries_to_csv(a) == pw.timeseries_to_csv(b)
    on = first[0]
    assert len(on.samples) >= 8
    assert all(
        t.doppler_spread_hz >= 0 and not math.isnan(t.rx_power_dbm) for t in on.samples
    )


def test_configure_kpaths_assigns_tiles():
    s = pw.load_scenario_text(json.dumps(MINI))
    g = s.build()
    cfg = pw.configure_kpaths(g, s, 1)
    assert len(cfg) >= 1
    pdp = pw.compute_pdp(g, s, "tx", "rx", cfg)
    assert len(pdp) >= 1


def test_serialize_round_trip_fixed_point():
    s = pw.load_scenario(SCENARIO)
    canon = pw.serialize_scenario(s)
    s2 = pw.load_scenario_text(canon)
    assert pw.serialize_scenario(s2) == canon

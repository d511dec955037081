import json

import pytest

from d2drange.scenario import ScenarioError, load_scenario, scenario_from_dict

MINIMAL = {
    "classes": [
        {"id": "news", "phi": 0.2, "beta_s": 900.0, "kappa": 5.0},
        {"id": "updates", "phi": 0.8, "beta_s": 900.0, "kappa": 5.0, "timeout_s": 600.0},
    ]
}


def write(tmp_path, doc):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc))
    return path


def test_minimal_scenario_gets_standard_defaults(tmp_path):
    sc = load_scenario(write(tmp_path, MINIMAL))
    assert sc.layout.ue_density == 1.1e-3
    assert sc.layout.apothem_m == pytest.approx(300.0)
    assert sc.layout.ring_count == 1
    assert sc.radio.bandwidth_hz == 1e6
    assert sc.radio.slot_duration_s == 1.0
    assert sc.radio.noise_psd_dbm_hz == -174.0
    assert sc.radio.noise_figure_db == 11.0
    assert sc.radio.packet_bits == 1e6
    assert sc.channel.d2d.slope_db_per_decade == 22.7
    assert sc.channel.i2d.slope_db_per_decade == 22.0
    assert sc.n_realizations == 100
    # omitted shares default to an equal split
    assert sc.classes[0].load_share == pytest.approx(0.5)
    mix = sc.mix
    assert len(mix.entries) == 2


def test_unknown_keys_rejected_with_name(tmp_path):
    doc = dict(MINIMAL)
    doc["radios"] = {}
    with pytest.raises(ScenarioError, match="radios"):
        load_scenario(write(tmp_path, doc))
    doc2 = {"classes": MINIMAL["classes"], "radio": {"bandwith_hz": 1e6}}
    with pytest.raises(ScenarioError, match="bandwith_hz"):
        load_scenario(write(tmp_path, doc2))


def test_duplicate_class_ids_rejected():
    doc = {
        "classes": [
            {"id": "a", "phi": 0.2, "beta_s": 900.0, "kappa": 5.0},
            {"id": "a", "phi": 0.4, "beta_s": 900.0, "kappa": 5.0},
        ]
    }
    with pytest.raises(ScenarioError, match="duplicate"):
        scenario_from_dict(doc)


def test_bad_share_sum_rejected():
    doc = {
        "classes": [
            {"phi": 0.2, "beta_s": 900.0, "kappa": 5.0, "load_share": 0.4},
            {"phi": 0.4, "beta_s": 900.0, "kappa": 5.0, "load_share": 0.5},
        ]
    }
    with pytest.raises(ScenarioError, match="sum to 1"):
        scenario_from_dict(doc)


def test_partial_shares_rejected():
    doc = {
        "classes": [
            {"phi": 0.2, "beta_s": 900.0, "kappa": 5.0, "load_share": 0.5},
            {"phi": 0.4, "beta_s": 900.0, "kappa": 5.0},
        ]
    }
    with pytest.raises(ScenarioError, match="load_share"):
        scenario_from_dict(doc)


def test_both_radius_keys_rejected():
    doc = dict(MINIMAL)
    doc["network"] = {"cell_inner_radius_m": 300.0, "cell_circumradius_m": 346.4}
    with pytest.raises(ScenarioError, match="not both"):
        scenario_from_dict(doc)


def test_invalid_values_carry_section_context():
    doc = {"classes": [{"phi": 1.4, "beta_s": 900.0, "kappa": 5.0}]}
    with pytest.raises(ScenarioError, match=r"classes\[0\]"):
        scenario_from_dict(doc)
    doc2 = dict(MINIMAL)
    doc2["radio"] = {"bandwidth_hz": -5.0}
    with pytest.raises(ScenarioError, match="radio"):
        scenario_from_dict(doc2)


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"classes": [\n  {"phi": }\n]}')
    with pytest.raises(ScenarioError, match="line"):
        load_scenario(path)


def test_missing_classes_section():
    with pytest.raises(ScenarioError, match="classes"):
        scenario_from_dict({"radio": {}})


def test_circumradius_form_accepted():
    doc = dict(MINIMAL)
    doc["network"] = {"cell_circumradius_m": 400.0, "ue_density_per_m2": 5e-4}
    sc = scenario_from_dict(doc)
    assert sc.layout.cell_circumradius_m == 400.0
    assert sc.layout.ue_density == 5e-4

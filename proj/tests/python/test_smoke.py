import os

import pytest

import _mediatrix as mx

MODELS = os.environ.get("MEDIATRIX_MODEL_DIR", "models")


def model(name):
    return mx.load_model(os.path.join(MODELS, name + ".json"))


def test_truth_matches_the_worked_example():
    effects = mx.truth(model("collegeprep8"))
    assert effects["TE"] == 1.625
    assert effects["NDE(.0)"] + effects["NIE(1.)"] == pytest.approx(effects["TE"], abs=1e-9)
    assert effects["NIE(0.)"] + effects["NDE(.1)"] == pytest.approx(effects["TE"], abs=1e-9)
    assert effects["IDE(.0)"] + effects["IIE(1.)"] == pytest.approx(effects["OE"], abs=1e-9)


def test_model_round_trips_through_json():
    m = model("bullying")
    again = mx.model_from_json(m.to_json())
    assert again.name == "bullying"
    assert again.to_json() == m.to_json()


def test_identify_reports_the_ladder():
    rungs = mx.identify(model("l_model"))
    assert [r["name"] for r in rungs] == ["TE", "CDE/GIDE", "IDE/IIE", "NDE/NIE"]
    assert rungs[0]["identified"] and rungs[1]["identified"] and rungs[2]["identified"]
    assert not rungs[3]["identified"]
    assert rungs[3]["witness"] == "L"
    assert all(r["identified"] for r in mx.identify(model("collegeprep8_unconfounded")))


def test_sample_and_estimate_round_trip():
    m = model("collegeprep8_unconfounded")
    csv = mx.sample_csv(m, 4000, seed=11)
    assert csv == mx.sample_csv(m, 4000, seed=11)
    assert csv.splitlines()[3] == "C,A,M,Y"

    truth = mx.truth(m)
    estimates = mx.estimate_csv(m, csv, seed=11)
    for label in ("TE", "NDE(.0)", "NIE(1.)", "IDE(.0)", "IIE(1.)", "OE"):
        est = estimates[label]
        assert est["n"] == 4000
        assert est["se"] is not None
        assert abs(est["estimate"] - truth[label]) <= 6 * est["se"]

    rows = mx.sample_rows(m, 5, seed=3)
    assert len(rows) == 5
    assert set(rows[0]) == {"C", "A", "M", "Y"}


def test_worlds_and_contrasts():
    m = model("collegeprep8")
    left = mx.expected_outcome(m, "A=1")
    right = mx.expected_outcome(m, "A=0")
    assert left - right == pytest.approx(1.625, abs=1e-12)
    te = mx.contrast(m, "A=1 || A=0")
    assert te["value"] == pytest.approx(1.625, abs=1e-12)
    cde = mx.controlled_direct_effect(m, "high")
    assert cde["label"] == "CDE(high)"


def test_errors_surface_as_exceptions():
    with pytest.raises(mx.MediatrixError):
        mx.model_from_json("{not json")
    with pytest.raises(mx.MediatrixError):
        mx.expected_outcome(model("nullmodel"), "A=7")

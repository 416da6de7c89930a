import io
import json
import subprocess
import sys

import pytest

from skipseq import cli


def call(*argv, stdin=None):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err, io.StringIO(stdin or ""))
    return code, out.getvalue(), err.getvalue()


def call_json(*argv, **kw):
    code, out, err = call(*argv, "--format", "json", **kw)
    assert code == 0, err
    return json.loads(out)


def test_region_nr_skip():
    doc = call_json("region", "nr-skip", "--p-y-resp", "0.8508", "--mean-resp", "0.4039",
                    "--p-x-open-y-miss", "0.0197", "--p-x-miss", "0.0723")
    assert (round(doc["lo"], 4), round(doc["hi"], 4)) == (0.3436, 0.4356)
    assert doc["schema_version"] == 1 and doc["command"] == "region"


def test_region_table_text():
    code, out, _ = call("region", "nr-all", "--p-nonresp", "0.08", "--mean-resp", "0.4039")
    assert code == 0 and out.strip() == "nr-all: [0.3716, 0.4516]  width 0.0800"


def test_region_mc_and_none():
    doc = call_json("region", "mc-skip", "--p-report", "0.073", "--p-x-report", "0.092",
                    "--lambda", "0.25", "--assumption", "per-value")
    assert round(doc["hi"], 4) == 0.0973
    assert call_json("region", "none")["width"] == 1.0


def test_decide_hrs_preset():
    doc = call_json("decide", "--preset", "hrs", "--gamma", "0.5")
    assert doc["chosen"] == "skip"
    assert call_json("decide", "--preset", "hrs", "--gamma", "0.05")["chosen"] == "all"
    assert call_json("decide", "--preset", "hrs", "--gamma", "2")["chosen"] == "none"


def test_sweep_nlsom():
    doc = call_json("sweep", "--preset", "nlsom", "--assumption", "per-value")
    bps = [round(b, 4) for b in doc["breakpoints"]]
    assert bps == [0.0126, 9.8116]
    assert [c["chosen"] for c in doc["cells"]] == ["all", "skip", "none"]


def test_loss_command():
    doc = call_json("loss", "--preset", "hrs", "--option", "skip", "--gamma", "1")
    (row,) = doc["losses"]
    assert row["option"] == "skip" and row["loss"] == pytest.approx(0.8705 + 0.092)


def test_json_output_is_byte_stable():
    args = ("sweep", "--preset", "hrs", "--format", "json")
    assert call(*args)[1] == call(*args)[1]


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"p_nonresp": 0.2, "mean-resp": 0.5}))
    doc = call_json("region", "nr-all", "--config", str(cfg))
    assert (doc["lo"], doc["hi"]) == pytest.approx((0.4, 0.6))
    doc = call_json("region", "nr-all", "--config", str(cfg), "--p-nonresp", "0.1")
    assert (doc["lo"], doc["hi"]) == pytest.approx((0.45, 0.55))


def test_config_overrides_preset(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"lambda_all": 0.25}))
    doc = call_json("sweep", "--preset", "nlsom", "--config", str(cfg))
    assert [c["chosen"] for c in doc["cells"]] == ["skip", "none"]


@pytest.mark.parametrize("argv", [
    ("region", "nr-all", "--p-nonresp", "1.2", "--mean-resp", "0.5"),
    ("region", "nr-all", "--mean-resp", "0.5"),
    ("region", "nr-skip", "--p-y-resp", "0.5", "--mean-resp", "0.5",
     "--p-x-open-y-miss", "0.1", "--p-x-miss", "0.1", "--p-asked", "0.7"),
    ("decide", "--gamma", "1"),
    ("decide", "--preset", "hrs", "--gamma", "-1"),
    ("region", "nr-all", "--config", "/nonexistent.json"),
])
def test_invalid_input_exit_2(argv):
    code, out, err = call(*argv)
    assert code == 2 and out == "" and err.startswith("error:")


def test_usage_error_exit_2():
    assert call("region", "bogus")[0] == 2


def test_internal_error_exit_1(monkeypatch):
    def boom(ns):
        raise RuntimeError("kaput")
    monkeypatch.setitem(cli.COMMANDS, "region", boom)
    code, _, err = call("region", "none")
    assert code == 1 and "kaput" in err


def test_lambda_ordering_warning():
    code, _, err = call("sweep", "--preset", "nlsom", "--lambda-all", "0.3")
    assert code == 0 and err.startswith("warning:")


def test_table2_reports_mismatches():
    code, out, _ = call("table2")
    assert code == 0
    assert "120/126 reference cells within 0.0005" in out
    assert out.count("mismatch (") == 6


def test_simulate_pipes_into_ingest():
    code, data, report = call("simulate", "--n", "2000", "--seed", "1", "--format", "json")
    assert code == 0
    sim = json.loads(report)
    ing = call_json("ingest", stdin=data)
    assert ing["scenario"] == sim["scenario"] and ing["n_rejects"] == 0


def test_simulate_misclass_to_file(tmp_path):
    out = tmp_path / "m.csv"
    code, stdout, _ = call("simulate", "--kind", "misclass", "--p-x", "0.3", "--lambda", "0.1",
                           "--assumption", "per-value", "--out", str(out), "--seed", "3")
    assert code == 0 and "covered: True" in stdout
    doc = call_json("ingest", "--input", str(out), "--kind", "misclass", "--lambda", "0.1",
                    "--assumption", "per-value")
    assert doc["scenario"]["type"] == "MisclassSkipScenario"


def test_simulate_calibrated_hrs(tmp_path):
    out = tmp_path / "hrs.csv"
    assert call("simulate", "--calibrated", "hrs", "--out", str(out))[0] == 0
    doc = call_json("ingest", "--input", str(out), "--support-max", "100")
    s = doc["scenario"]
    assert doc["n_records"] == 10748
    assert round(s["p_y_resp"], 4) == 0.8508 and round(s["p_asked"], 4) == 0.8705


def test_ingest_reports_rejects():
    text = ("respondent_id,opening_asked,opening_value,followup_asked,followup_value\n"
            "a,1,1,1,0.5\nb,1,1,0,0.3\n")
    doc = call_json("ingest", stdin=text)
    assert doc["n_rejects"] == 1 and doc["rejects"][0]["line"] == 3


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "skipseq.cli", "region", "none"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "width 1.0000" in res.stdout

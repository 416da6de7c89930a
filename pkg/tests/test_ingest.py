import io
import math

import pytest

from skipseq import (
    DesignOption,
    ErrorAssumption,
    IngestError,
    IngestSchema,
    MisclassModel,
    NonresponseModel,
    PopulationConfig,
    ValidationError,
    apply_design,
    compute_mc_all_scenario,
    compute_mc_scenario,
    compute_nr_all_scenario,
    compute_nr_scenario,
    coverage_check,
    empirical_quantities,
    gen_population,
    parse_microdata,
    region,
)
from skipseq.errors import UndefinedMeanError

HEADER = "respondent_id,opening_asked,opening_value,followup_asked,followup_value\n"


def _parse(body, **schema):
    return parse_microdata(io.StringIO(HEADER + body), IngestSchema(**schema))


def test_three_valid_rows():
    res = _parse("a,1,1,1,0.5\nb,1,0,0,\nc,1,,0,\n")
    assert len(res.records) == 3 and res.rejects == []
    assert res.records[0].followup_value == 0.5
    assert res.records[2].opening_value is None


def test_followup_value_without_ask_is_rejected():
    res = _parse("a,1,1,1,0.5\nb,1,1,0,0.3\n")
    assert len(res.records) == 1
    (rej,) = res.rejects
    assert rej.line == 3 and rej.respondent_id == "b"
    assert "skip logic" in rej.reason


@pytest.mark.parametrize("row,reason", [
    ("x,1,0,1,0.2", "negative opening"),
    ("x,1,,1,0.2", "without an answered opening"),
    ("x,0,1,0,", "opening_asked is false"),
    ("x,1,1,1,1.5", "outside"),
    ("x,maybe,1,1,0.5", "not a boolean"),
    ("x,1,abc,1,0.5", "not a number"),
    ("x,1,1,1", "expected 5 fields"),
])
def test_rejects_and_keeps_going(row, reason):
    res = _parse(f"{row}\nok,1,1,1,0.4\n")
    assert [r.respondent_id for r in res.records] == ["ok"]
    assert reason in res.rejects[0].reason
    assert res.n_rows == 2


def test_duplicate_id_is_hard_error():
    with pytest.raises(IngestError, match="duplicate"):
        _parse("a,1,1,1,0.5\na,1,0,0,\n")


def test_bad_header_is_hard_error():
    with pytest.raises(IngestError, match="missing required"):
        parse_microdata(io.StringIO("id,foo\n1,2\n"))
    with pytest.raises(IngestError):
        parse_microdata(io.StringIO(""))


def test_sources_bytes_and_path(tmp_path):
    body = HEADER + "a,1,1,1,0.5\n"
    assert len(parse_microdata(body.encode()).records) == 1
    path = tmp_path / "m.csv"
    path.write_text(body)
    assert len(parse_microdata(path).records) == 1
    assert len(parse_microdata(io.BytesIO(body.encode())).records) == 1


def test_custom_schema_and_passthrough():
    text = "id;asked_x;x;asked_y;y;proxy\n1;yes;NA;no;NA;0\n2;yes;40;yes;35;1\n"
    schema = IngestSchema("id", "asked_x", "x", "asked_y", "y", missing="NA", delimiter=";",
                          support_max=100)
    res = parse_microdata(io.StringIO(text), schema)
    assert res.rejects == []
    assert res.records[1].extra == {"proxy": "1"}
    s = compute_nr_scenario(res.records, schema)
    assert s.mean_resp == 0.35 and s.p_x_nonresp == 0.5


def test_numeric_sentinel_refused():
    with pytest.raises(ValidationError):
        IngestSchema(missing="-9")


def test_nr_scenario_ratios_exact():
    res = _parse("a,1,1,1,0.5\nb,1,1,1,\nc,1,,0,\nd,1,0,0,\ne,1,1,1,0.25\n")
    s = compute_nr_scenario(res.records)
    assert (s.p_y_resp, s.p_x_resp_y_nonresp, s.p_x_nonresp, s.p_asked) == \
        (2 / 5, 1 / 5, 1 / 5, 3 / 5)
    assert s.mean_resp == 0.375
    for v in (s.p_y_resp, s.p_x_resp_y_nonresp, s.p_x_nonresp, s.p_asked):
        assert math.isclose(v * 5, round(v * 5), abs_tol=1e-12)


def test_everyone_answers():
    res = _parse("a,1,1,1,0.5\nb,1,1,1,0.1\n")
    s = compute_nr_scenario(res.records)
    assert s.p_x_nonresp == 0 and s.p_x_resp_y_nonresp == 0


def test_no_followups_undefined_mean():
    res = _parse("a,1,0,0,\nb,1,,0,\n")
    with pytest.raises(UndefinedMeanError):
        compute_nr_scenario(res.records)


def test_empty_records_rejected():
    with pytest.raises(ValidationError):
        compute_nr_scenario([])


def test_all_design_file():
    body = "a,0,,1,0.5\nb,0,,1,\nc,0,,1,1.0\n"
    res = _parse(body, design=DesignOption.ALL)
    assert res.rejects == []
    s = compute_nr_all_scenario(res.records, IngestSchema(design=DesignOption.ALL))
    assert s.p_nonresp == 1 / 3 and s.mean_resp == 0.75


def test_mc_scenarios():
    res = _parse("a,1,1,1,1\nb,1,1,1,0\nc,1,0,0,\nd,1,1,1,1\n")
    assumption = ErrorAssumption("joint", 0.1)
    s = compute_mc_scenario(res.records, None, assumption)
    assert (s.p_report, s.p_x_report) == (0.5, 0.75)
    zero = _parse("a,1,1,1,0\nb,1,0,0,\n")
    assert compute_mc_scenario(zero.records, None, assumption).p_report == 0.0
    bad = _parse("a,1,1,1,0.5\n")
    with pytest.raises(ValidationError, match="binary"):
        compute_mc_scenario(bad.records, None, assumption)
    allres = _parse("a,0,,1,1\nb,0,,1,0\n", design=DesignOption.ALL)
    assert compute_mc_all_scenario(allres.records, None, assumption).p_report == 0.5


def test_nlsom_calibrated_file():
    # 2092 respondents, 192 positive openers, 153 of whom report the follow-up item.
    rows = [f"r{i},1,{1 if i < 192 else 0},{1 if i < 192 else 0},"
            f"{'' if i >= 192 else (1 if i < 153 else 0)}" for i in range(2092)]
    res = _parse("\n".join(rows) + "\n")
    s = compute_mc_scenario(res.records, None, ErrorAssumption("joint", 0.25))
    assert round(s.p_report, 3) == 0.073 and round(s.p_x_report, 3) == 0.092


@pytest.mark.parametrize("model,design", [
    (NonresponseModel(0.1, 0.05, 0.08, "high"), DesignOption.SKIP),
    (NonresponseModel(0.1, 0.05, 0.08, "mar"), DesignOption.ALL),
])
def test_simulator_roundtrip_nonresponse(model, design):
    pop = gen_population(3000, PopulationConfig(0.8, "beta", support_max=100, integer=True),
                         seed=2)
    obs = apply_design(pop, design, model, seed=3)
    buf = io.StringIO()
    obs.write(buf)
    res = parse_microdata(io.StringIO(buf.getvalue()), obs.schema())
    assert res.rejects == [] and len(res.records) == len(obs)
    fn = compute_nr_scenario if design is DesignOption.SKIP else compute_nr_all_scenario
    s = fn(res.records, obs.schema())
    assert s == empirical_quantities(obs)
    assert coverage_check(obs.true_mean, region(s))


def test_simulator_roundtrip_misclass():
    pop = gen_population(3000, PopulationConfig(0.2, "binary", 0.6), seed=4)
    model = MisclassModel(0.15, "per-value", "false-negative")
    obs = apply_design(pop, DesignOption.SKIP, model, seed=5)
    buf = io.StringIO()
    obs.write(buf)
    res = parse_microdata(io.StringIO(buf.getvalue()), obs.schema())
    s = compute_mc_scenario(res.records, obs.schema(), model.assumption)
    assert s == empirical_quantities(obs)
    assert coverage_check(obs.true_p1, region(s))

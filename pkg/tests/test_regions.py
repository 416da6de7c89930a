import pytest
from hypothesis import given, strategies as st

from skipseq import (
    ErrorAssumption,
    ErrorBound,
    MisclassAllScenario,
    MisclassSkipScenario,
    MixtureAssumption,
    NonresponseAllScenario,
    NonresponseSkipScenario,
    UnitInterval,
    ValidationError,
    mixture_to_misclass,
    region_mc_all,
    region_mc_skip,
    region_none,
    region_nr_all,
    region_nr_skip,
)
from skipseq.regions import check_probability

J, PV = ErrorBound.JOINT, ErrorBound.PER_VALUE
probs = st.floats(0.0, 1.0)
lams = st.floats(0.0, 0.99)


def test_nr_all_hrs_conjecture():
    iv = region_nr_all(NonresponseAllScenario(0.08, 0.4039))
    assert iv.lo == pytest.approx(0.3716, abs=5e-5)
    assert iv.hi == pytest.approx(0.4516, abs=5e-5)


@pytest.mark.parametrize("m", [0.0, 0.37, 1.0])
def test_nr_all_edges(m):
    assert region_nr_all(NonresponseAllScenario(0.0, m)).as_tuple() == (m, m)
    assert region_nr_all(NonresponseAllScenario(1.0, m)).as_tuple() == (0.0, 1.0)


def test_nr_skip_hrs(hrs_skip):
    iv = region_nr_skip(hrs_skip)
    assert iv.lo == pytest.approx(0.3436, abs=5e-5)
    assert iv.hi == pytest.approx(0.4356, abs=5e-5)


def test_nr_skip_small_example():
    # lo = 0.2 * 0.5, hi = lo + 0.1 + 0.2
    iv = region_nr_skip(NonresponseSkipScenario(0.5, 0.2, 0.1, 0.2))
    assert iv.lo == pytest.approx(0.10, abs=1e-15)
    assert iv.hi == pytest.approx(0.40, abs=1e-15)


def test_nr_skip_no_nonresponse():
    assert region_nr_skip(NonresponseSkipScenario(1.0, 0.3, 0.0, 0.0)).as_tuple() == (0.3, 0.3)


def test_nr_skip_rejects_broken_accounting():
    with pytest.raises(ValidationError) as err:
        NonresponseSkipScenario(0.8508, 0.4039, 0.0197, 0.0723, p_asked=0.9)
    assert err.value.field == "p_asked"


def test_nr_skip_rejects_overfull_shares():
    with pytest.raises(ValidationError):
        NonresponseSkipScenario(0.8, 0.5, 0.1, 0.2)


@pytest.mark.parametrize("field,kwargs", [
    ("p_nonresp", dict(p_nonresp=1.2, mean_resp=0.4)),
    ("mean_resp", dict(p_nonresp=0.1, mean_resp=-0.1)),
    ("p_nonresp", dict(p_nonresp=float("nan"), mean_resp=0.4)),
])
def test_invalid_probability_names_field(field, kwargs):
    with pytest.raises(ValidationError) as err:
        NonresponseAllScenario(**kwargs)
    assert err.value.field == field
    assert field in str(err.value)


def test_probability_rounding_slop_is_clamped():
    assert check_probability(1 + 5e-13, "p") == 1.0
    assert check_probability(-5e-13, "p") == 0.0
    with pytest.raises(ValidationError):
        check_probability(1 + 1e-10, "p")


def test_region_none():
    iv = region_none()
    assert iv.as_tuple() == (0.0, 1.0)
    assert iv.width == 1.0
    assert region_nr_all(NonresponseAllScenario(0.3, 0.5)).issubset(iv)


@pytest.mark.parametrize("variant,lam,expected", [
    (J, 0.15, (0.0, 0.2230)),
    (PV, 0.15, (0.0, 0.0859)),
])
def test_mc_all_nlsom(variant, lam, expected):
    iv = region_mc_all(MisclassAllScenario(0.073, ErrorAssumption(variant, lam)))
    assert iv.lo == pytest.approx(expected[0], abs=5e-5)
    assert iv.hi == pytest.approx(expected[1], abs=5e-5)


@pytest.mark.parametrize("variant,lam,expected", [
    (J, 0.25, (0.0, 0.3230)),
    (PV, 0.25, (0.0, 0.0973)),
])
def test_mc_skip_nlsom(variant, lam, expected):
    iv = region_mc_skip(MisclassSkipScenario(0.073, 0.092, ErrorAssumption(variant, lam)))
    assert iv.lo == pytest.approx(expected[0], abs=5e-5)
    assert iv.hi == pytest.approx(expected[1], abs=5e-5)


@pytest.mark.parametrize("variant", [J, PV])
def test_mc_error_free_is_point(variant):
    assert region_mc_all(MisclassAllScenario(0.5, ErrorAssumption(variant, 0.0))).as_tuple() \
        == (0.5, 0.5)


def _brute_joint_region(p, lam, step=0.005):
    # Grid over (pi_10, pi_01) = P(y=1, report 0), P(y=0, report 1).
    n = round(1 / step)
    vals = []
    for i in range(n + 1):
        for j in range(n + 1):
            p10, p01 = i * step, j * step
            p11, p00 = p - p01, 1 - p - p10
            if min(p11, p00) < -1e-12 or p00 + p11 < 1 - lam - 1e-12:
                continue
            vals.append(p10 + p11)
    return min(vals), max(vals)


def test_mc_all_joint_matches_enumeration():
    lo, hi = _brute_joint_region(0.3, 0.1)
    assert (lo, hi) == pytest.approx((0.2, 0.4), abs=1e-12)
    iv = region_mc_all(MisclassAllScenario(0.3, ErrorAssumption(J, 0.1)))
    assert iv.as_tuple() == pytest.approx((lo, hi), abs=1e-12)


@pytest.mark.parametrize("lam", [0.0, 0.1, 0.5, 0.9])
def test_mc_skip_zero_report(lam):
    assert region_mc_skip(MisclassSkipScenario(0.0, 0.3, ErrorAssumption(J, lam))).as_tuple() \
        == (0.0, lam)
    assert region_mc_skip(MisclassSkipScenario(0.0, 0.3, ErrorAssumption(PV, lam))).as_tuple() \
        == (0.0, 0.0)


def test_mc_rejects_lambda_one():
    with pytest.raises(ValidationError):
        ErrorAssumption(J, 1.0)


def test_mc_skip_rejects_skip_logic_violation():
    with pytest.raises(ValidationError) as err:
        MisclassSkipScenario(0.2, 0.1, ErrorAssumption(J, 0.1))
    assert err.value.field == "p_report"


def test_p_x_report_does_not_move_region():
    a = ErrorAssumption(PV, 0.2)
    assert region_mc_skip(MisclassSkipScenario(0.1, 0.1, a)) == \
        region_mc_skip(MisclassSkipScenario(0.1, 0.9, a))


@pytest.mark.parametrize("lam,independent,expected", [
    (0.25, False, ErrorAssumption(J, 0.25)),
    (0.0, True, ErrorAssumption(PV, 0.0)),
    (0.4, True, ErrorAssumption(PV, 0.4)),
])
def test_mixture_translation(lam, independent, expected):
    assert mixture_to_misclass(MixtureAssumption(lam, independent)) == expected


def test_unit_interval_invariants():
    with pytest.raises(ValidationError):
        UnitInterval(0.6, 0.4)
    with pytest.raises(ValidationError):
        UnitInterval(-0.1, 0.4)
    assert UnitInterval(0.2, 0.5).contains(0.5)
    assert not UnitInterval(0.2, 0.5).contains(0.51)


@given(probs, probs)
def test_nr_all_width_identity(p, m):
    iv = region_nr_all(NonresponseAllScenario(p, m))
    assert iv.width == pytest.approx(p, abs=1e-12)
    assert 0.0 <= iv.lo <= iv.hi <= 1.0


@given(probs, probs, probs, probs)
def test_nr_skip_width_identity(q, m, a, b):
    total = q + a + b
    if total > 1:
        q, a, b = q / total, a / total, b / total
    iv = region_nr_skip(NonresponseSkipScenario(q, m, a, b))
    assert iv.width == pytest.approx(a + b, abs=1e-12)
    assert 0.0 <= iv.lo <= iv.hi <= 1.0


@given(probs, lams, lams, st.sampled_from([J, PV]))
def test_mc_regions_grow_with_lambda(p, l1, l2, variant):
    small, big = sorted((l1, l2))
    a = region_mc_all(MisclassAllScenario(p, ErrorAssumption(variant, small)))
    b = region_mc_all(MisclassAllScenario(p, ErrorAssumption(variant, big)))
    assert a.issubset(b, eps=1e-12)


@given(probs, lams)
def test_per_value_region_inside_joint(p, lam):
    pv = region_mc_all(MisclassAllScenario(p, ErrorAssumption(PV, lam)))
    j = region_mc_all(MisclassAllScenario(p, ErrorAssumption(J, lam)))
    assert pv.issubset(j, eps=1e-12)


@given(probs, probs, lams, st.sampled_from([J, PV]))
def test_mc_regions_nonempty_in_unit(p, px, lam, variant):
    p, px = sorted((p, px))
    iv = region_mc_skip(MisclassSkipScenario(p, px, ErrorAssumption(variant, lam)))
    assert 0.0 <= iv.lo <= iv.hi <= 1.0
    assert iv.contains(p, eps=1e-12)

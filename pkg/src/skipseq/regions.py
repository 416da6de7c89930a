"""Identification regions for a survey item under the All / Skip / None designs.

Two error models are covered:

* item nonresponse with truthful answers, where the target is the mean of a
  monotone transform ``g(y)`` normalised to ``[0, 1]``;
* full response with misclassification of a binary item, where the target is
  ``P(y = 1)`` and a bound ``lam`` on the error rate is assumed.

Every function here is pure. Inputs are probabilities that may come from
ratios of counts, so values within ``PROB_TOL`` of ``[0, 1]`` are clamped
instead of rejected.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ValidationError

PROB_TOL = 1e-12
ACCOUNTING_TOL = 1e-9


def check_probability(value, field):
    """Return ``value`` as a float in [0, 1], clamping rounding slop."""
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{field} must be a number, got {value!r}", field) from None
    if not math.isfinite(v):
        raise ValidationError(f"{field} must be finite, got {v}", field)
    if v < 0.0:
        if v < -PROB_TOL:
            raise ValidationError(f"{field} must lie in [0, 1], got {v}", field)
        return 0.0
    if v > 1.0:
        if v > 1.0 + PROB_TOL:
            raise ValidationError(f"{field} must lie in [0, 1], got {v}", field)
        return 1.0
    return v


def check_lambda(value, field="lam"):
    v = check_probability(value, field)
    if v >= 1.0:
        raise ValidationError(f"{field} must be strictly below 1, got {v}", field)
    return v


@dataclass(frozen=True)
class UnitInterval:
    """Closed interval ``[lo, hi]`` inside ``[0, 1]``."""

    lo: float
    hi: float

    def __post_init__(self):
        lo = check_probability(self.lo, "lo")
        hi = check_probability(self.hi, "hi")
        if lo > hi:
            if lo - hi > PROB_TOL:
                raise ValidationError(f"empty interval: lo={lo} > hi={hi}", "lo")
            hi = lo
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float, eps: float = 0.0) -> bool:
        return self.lo - eps <= value <= self.hi + eps

    def issubset(self, other: UnitInterval, eps: float = 0.0) -> bool:
        return other.lo - eps <= self.lo and self.hi <= other.hi + eps

    def as_tuple(self) -> tuple[float, float]:
        return (self.lo, self.hi)


def _clamped(lo: float, hi: float) -> UnitInterval:
    return UnitInterval(min(max(lo, 0.0), 1.0), min(max(hi, 0.0), 1.0))


# --------------------------------------------------------------------------
# Nonresponse scenarios


@dataclass(frozen=True)
class NonresponseAllScenario:
    """Observables when every respondent is asked the item.

    p_nonresp: share of respondents who do not answer the item.
    mean_resp: mean of ``g(y)`` among those who answer.
    """

    p_nonresp: float
    mean_resp: float

    def __post_init__(self):
        object.__setattr__(self, "p_nonresp", check_probability(self.p_nonresp, "p_nonresp"))
        object.__setattr__(self, "mean_resp", check_probability(self.mean_resp, "mean_resp"))


@dataclass(frozen=True)
class NonresponseSkipScenario:
    """Observables when the item is only asked after a positive opening answer.

    All shares are fractions of the full sample:

    p_y_resp: answered the follow-up.
    mean_resp: mean of ``g(y)`` among follow-up answerers.
    p_x_resp_y_nonresp: answered the opening positively, skipped the follow-up.
    p_x_nonresp: did not answer the opening question.
    p_asked: answered the opening positively (so was asked the follow-up).
    """

    p_y_resp: float
    mean_resp: float
    p_x_resp_y_nonresp: float
    p_x_nonresp: float
    p_asked: float | None = None

    def __post_init__(self):
        for name in ("p_y_resp", "mean_resp", "p_x_resp_y_nonresp", "p_x_nonresp"):
            object.__setattr__(self, name, check_probability(getattr(self, name), name))
        implied = self.p_y_resp + self.p_x_resp_y_nonresp
        if self.p_asked is None:
            object.__setattr__(self, "p_asked", check_probability(implied, "p_asked"))
        else:
            asked = check_probability(self.p_asked, "p_asked")
            if abs(asked - implied) > ACCOUNTING_TOL:
                raise ValidationError(
                    f"p_asked={asked} must equal p_y_resp + p_x_resp_y_nonresp={implied}",
                    "p_asked",
                )
            object.__setattr__(self, "p_asked", asked)
        if self.p_asked + self.p_x_nonresp > 1.0 + ACCOUNTING_TOL:
            raise ValidationError(
                f"p_asked + p_x_nonresp = {self.p_asked + self.p_x_nonresp} exceeds 1",
                "p_x_nonresp",
            )


def region_nr_all(s: NonresponseAllScenario) -> UnitInterval:
    """Worst-case bounds on E[g(y)] when everyone is asked."""
    observed = s.mean_resp * (1.0 - s.p_nonresp)
    return _clamped(observed, observed + s.p_nonresp)


def region_nr_skip(s: NonresponseSkipScenario) -> UnitInterval:
    """Worst-case bounds on E[g(y)] under skip sequencing.

    Skipped opening answers leave both ``x`` and ``y`` unknown, so their whole
    mass joins the follow-up nonrespondents in the upper bound.
    """
    observed = s.mean_resp * s.p_y_resp
    return _clamped(observed, observed + s.p_x_resp_y_nonresp + s.p_x_nonresp)


def region_none() -> UnitInterval:
    return UnitInterval(0.0, 1.0)


# --------------------------------------------------------------------------
# Misclassification scenarios


class ErrorBound(enum.Enum):
    """How the error-rate bound ``lam`` is imposed.

    JOINT: reported and true values agree with probability at least ``1 - lam``.
    PER_VALUE: for every true value, it is reported correctly with conditional
    probability at least ``1 - lam``.
    """

    JOINT = "joint"
    PER_VALUE = "per-value"


@dataclass(frozen=True)
class ErrorAssumption:
    variant: ErrorBound
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "variant", ErrorBound(self.variant))
        object.__setattr__(self, "lam", check_lambda(self.lam))


@dataclass(frozen=True)
class MisclassAllScenario:
    """Share reporting ``y = 1`` when everyone is asked, plus the error bound."""

    p_report: float
    assumption: ErrorAssumption

    def __post_init__(self):
        object.__setattr__(self, "p_report", check_probability(self.p_report, "p_report"))


@dataclass(frozen=True)
class MisclassSkipScenario:
    """Shares reporting ``y = 1`` and ``x = 1`` under skip sequencing.

    A negative opening answer skips the follow-up, so ``p_report`` can never
    exceed ``p_x_report``.
    """

    p_report: float
    p_x_report: float
    assumption: ErrorAssumption

    def __post_init__(self):
        p = check_probability(self.p_report, "p_report")
        px = check_probability(self.p_x_report, "p_x_report")
        if p > px + PROB_TOL:
            raise ValidationError(
                f"p_report={p} exceeds p_x_report={px}: a follow-up answer "
                "without a positive opening answer violates skip logic",
                "p_report",
            )
        object.__setattr__(self, "p_report", min(p, px))
        object.__setattr__(self, "p_x_report", px)


def misclass_interval(p_report: float, assumption: ErrorAssumption) -> UnitInterval:
    p = check_probability(p_report, "p_report")
    lam = assumption.lam
    if assumption.variant is ErrorBound.JOINT:
        return _clamped(p - lam, p + lam)
    return _clamped((p - lam) / (1.0 - lam), p / (1.0 - lam))


def region_mc_all(s: MisclassAllScenario) -> UnitInterval:
    return misclass_interval(s.p_report, s.assumption)


def region_mc_skip(s: MisclassSkipScenario) -> UnitInterval:
    # p_x_report only changes how many people are asked, never the bounds.
    return misclass_interval(s.p_report, s.assumption)


# --------------------------------------------------------------------------
# Mixture (contaminated / corrupted sampling) view of reporting errors


@dataclass(frozen=True)
class MixtureAssumption:
    """Reported value is ``w*y + (1-w)*e`` with ``P(w = 0) <= lam``.

    ``independent_errors`` adds ``y`` independent of ``w``.
    """

    lam: float
    independent_errors: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lam", check_lambda(self.lam))


def mixture_to_misclass(m: MixtureAssumption) -> ErrorAssumption:
    """Translate a mixture-model bound into the equivalent misclassification bound.

    With an unrestricted error distribution, a bound on the error share alone
    is a bound on ``P(reported != true)``; adding independence of ``y`` and
    ``w`` gives the same bound for each true value separately.
    """
    variant = ErrorBound.PER_VALUE if m.independent_errors else ErrorBound.JOINT
    return ErrorAssumption(variant, m.lam)


def region(scenario) -> UnitInterval:
    """Dispatch on scenario type; ``None`` means the item is not asked."""
    if scenario is None:
        return region_none()
    if isinstance(scenario, NonresponseAllScenario):
        return region_nr_all(scenario)
    if isinstance(scenario, NonresponseSkipScenario):
        return region_nr_skip(scenario)
    if isinstance(scenario, MisclassAllScenario):
        return region_mc_all(scenario)
    if isinstance(scenario, MisclassSkipScenario):
        return region_mc_skip(scenario)
    raise ValidationError(f"unsupported scenario type {type(scenario).__name__}", "scenario")

"""Linear loss over design options, the optimal choice, and gamma partitions.

Each option ``k`` has loss ``gamma * f_k + d_k`` where ``f_k`` is the share of
respondents asked the item and ``d_k`` is the width of its identification
region. Not asking the item costs nothing and leaves the full unit interval,
so its loss is identically 1.
"""

from __future__ import annotations

import enum
import itertools
import warnings
from dataclasses import dataclass, field

from .errors import ValidationError
from .regions import (
    ErrorAssumption,
    ErrorBound,
    MisclassAllScenario,
    MisclassSkipScenario,
    NonresponseAllScenario,
    NonresponseSkipScenario,
    check_lambda,
    check_probability,
    misclass_interval,
    region,
)

TIE_TOL = 1e-12
DEFAULT_GAMMA_MAX = 10.0


class DesignOption(enum.Enum):
    ALL = "all"
    SKIP = "skip"
    NONE = "none"


# Ties go to the cheaper design: informativeness is equal at a tie.
TIE_ORDER = (DesignOption.NONE, DesignOption.SKIP, DesignOption.ALL)


class ScenarioKind(enum.Enum):
    NONRESPONSE = "nonresponse"
    MISCLASSIFICATION = "misclassification"


@dataclass(frozen=True)
class DecisionScenario:
    """Observables (or conjectures) for options All and Skip of the same item."""

    all_data: NonresponseAllScenario | MisclassAllScenario
    skip_data: NonresponseSkipScenario | MisclassSkipScenario

    def __post_init__(self):
        nr = (NonresponseAllScenario, NonresponseSkipScenario)
        mc = (MisclassAllScenario, MisclassSkipScenario)
        if isinstance(self.all_data, nr[0]) and isinstance(self.skip_data, nr[1]):
            return
        if isinstance(self.all_data, mc[0]) and isinstance(self.skip_data, mc[1]):
            a, s = self.all_data.assumption, self.skip_data.assumption
            if a.variant is not s.variant:
                raise ValidationError(
                    "All and Skip must use the same error-bound family "
                    f"(got {a.variant.value} and {s.variant.value})",
                    "assumption",
                )
            if a.lam > s.lam:
                warnings.warn(
                    f"lambda for All ({a.lam}) exceeds lambda for Skip ({s.lam}); "
                    "errors are usually assumed no more frequent when the item "
                    "stands alone",
                    stacklevel=2,
                )
            return
        raise ValidationError(
            "all_data and skip_data must both be nonresponse or both be "
            f"misclassification scenarios (got {type(self.all_data).__name__}, "
            f"{type(self.skip_data).__name__})",
            "scenario",
        )

    @property
    def kind(self) -> ScenarioKind:
        if isinstance(self.all_data, NonresponseAllScenario):
            return ScenarioKind.NONRESPONSE
        return ScenarioKind.MISCLASSIFICATION

    @classmethod
    def misclassification(cls, p_report_all, p_report_skip, p_x_report, lam_all, lam_skip,
                          variant=ErrorBound.JOINT):
        variant = ErrorBound(variant)
        return cls(
            MisclassAllScenario(p_report_all, ErrorAssumption(variant, lam_all)),
            MisclassSkipScenario(p_report_skip, p_x_report, ErrorAssumption(variant, lam_skip)),
        )


@dataclass(frozen=True)
class LossBreakdown:
    option: DesignOption
    cost_fraction: float
    width: float

    def loss_at(self, gamma: float) -> float:
        return gamma * self.cost_fraction + self.width

    __call__ = loss_at


def _skip_cost_fraction(skip_data) -> float:
    if isinstance(skip_data, NonresponseSkipScenario):
        return skip_data.p_asked
    return skip_data.p_x_report


def loss(option: DesignOption, scenario: DecisionScenario) -> LossBreakdown:
    if not isinstance(scenario, DecisionScenario):
        raise ValidationError(f"expected a DecisionScenario, got {type(scenario).__name__}",
                              "scenario")
    option = DesignOption(option)
    if option is DesignOption.ALL:
        return LossBreakdown(option, 1.0, region(scenario.all_data).width)
    if option is DesignOption.SKIP:
        return LossBreakdown(option, _skip_cost_fraction(scenario.skip_data),
                             region(scenario.skip_data).width)
    return LossBreakdown(option, 0.0, 1.0)


def all_losses(scenario: DecisionScenario) -> dict[DesignOption, LossBreakdown]:
    return {opt: loss(opt, scenario) for opt in DesignOption}


def _check_gamma(gamma) -> float:
    try:
        g = float(gamma)
    except (TypeError, ValueError):
        raise ValidationError(f"gamma must be a number, got {gamma!r}", "gamma") from None
    if not g >= 0.0 or g == float("inf"):
        raise ValidationError(f"gamma must be finite and nonnegative, got {g}", "gamma")
    return g


def _minimizers(losses, gamma):
    values = {opt: lb.loss_at(gamma) for opt, lb in losses.items()}
    best = min(values.values())
    return frozenset(opt for opt, v in values.items() if v - best <= TIE_TOL), values


def _preferred(minimizers):
    return next(opt for opt in TIE_ORDER if opt in minimizers)


@dataclass(frozen=True)
class Decision:
    gamma: float
    chosen: DesignOption
    minimizers: frozenset
    losses: dict
    values: dict


def decide(gamma: float, scenario: DecisionScenario) -> Decision:
    """Pick the loss-minimising design at cost weight ``gamma``."""
    gamma = _check_gamma(gamma)
    losses = all_losses(scenario)
    mins, values = _minimizers(losses, gamma)
    return Decision(gamma, _preferred(mins), mins, losses, values)


@dataclass(frozen=True)
class Cell:
    lo: float
    hi: float
    optimal: frozenset

    @property
    def chosen(self) -> DesignOption:
        return _preferred(self.optimal)

    def __contains__(self, gamma):
        return self.lo <= gamma <= self.hi


@dataclass(frozen=True)
class GammaPartition:
    gamma_max: float
    breakpoints: tuple
    cells: tuple
    losses: dict = field(repr=False, default_factory=dict)

    def cell_at(self, gamma: float) -> Cell:
        for cell in self.cells:
            if gamma <= cell.hi:
                return cell
        return self.cells[-1]

    def interval_for(self, option: DesignOption):
        """Span of gamma on which ``option`` is optimal on a cell of positive length."""
        spans = [(c.lo, c.hi) for c in self.cells if option in c.optimal and c.hi > c.lo]
        if not spans:
            return None
        return (spans[0][0], spans[-1][1])


def _intersections(losses, gamma_max):
    out = []
    for a, b in itertools.combinations(losses.values(), 2):
        df = a.cost_fraction - b.cost_fraction
        if abs(df) <= TIE_TOL:
            continue
        g = (b.width - a.width) / df
        if 0.0 < g < gamma_max:
            out.append(g)
    return sorted(out)


def gamma_partition(scenario: DecisionScenario,
                    gamma_max: float = DEFAULT_GAMMA_MAX) -> GammaPartition:
    """Split ``[0, gamma_max]`` into intervals with a constant optimal set.

    Candidate breakpoints are the pairwise intersections of the three loss
    lines. Each elementary segment is labelled by the minimiser set at its
    midpoint and neighbours with equal labels are merged, which drops
    intersections that lie above the lower envelope.
    """
    gamma_max = _check_gamma(gamma_max)
    if gamma_max == 0.0:
        raise ValidationError("gamma_max must be positive", "gamma_max")
    losses = all_losses(scenario)
    points = [0.0]
    for g in _intersections(losses, gamma_max):
        if g - points[-1] > TIE_TOL:
            points.append(g)
    if gamma_max - points[-1] > TIE_TOL:
        points.append(gamma_max)
    else:
        points[-1] = gamma_max
    if len(points) == 1:
        points.append(gamma_max)

    cells: list[Cell] = []
    for lo, hi in zip(points[:-1], points[1:]):
        mins, _ = _minimizers(losses, 0.5 * (lo + hi))
        if cells and cells[-1].optimal == mins:
            cells[-1] = Cell(cells[-1].lo, hi, mins)
        else:
            cells.append(Cell(lo, hi, mins))
    breakpoints = tuple(c.hi for c in cells[:-1])
    return GammaPartition(gamma_max, breakpoints, tuple(cells), losses)


# --------------------------------------------------------------------------
# Width regimes for the misclassification bounds


class Regime(enum.Enum):
    UNINFORMATIVE = "1−λ≤P≤λ"
    LOW = "P≤min{λ,1−λ}"
    INTERIOR = "λ≤P≤1−λ"
    HIGH = "P≥max{λ,1−λ}"

    @property
    def label(self) -> str:
        return self.value


def table1_widths(p_report: float, lam: float, variant) -> tuple[Regime, float]:
    """Closed-form region width by regime of the reported share and ``lam``.

    Regime boundaries overlap; the formulas agree on the overlaps so the first
    matching regime is returned.
    """
    p = check_probability(p_report, "p_report")
    lam = check_lambda(lam)
    per_value = ErrorBound(variant) is ErrorBound.PER_VALUE
    if 1.0 - lam <= p <= lam:
        return Regime.UNINFORMATIVE, 1.0
    if p <= min(lam, 1.0 - lam):
        return Regime.LOW, (p / (1.0 - lam) if per_value else p + lam)
    if lam <= p <= 1.0 - lam:
        return Regime.INTERIOR, (lam / (1.0 - lam) if per_value else 2.0 * lam)
    return Regime.HIGH, ((1.0 - p) / (1.0 - lam) if per_value else 1.0 - p + lam)


def regime_width_from_region(p_report: float, lam: float, variant) -> float:
    return misclass_interval(p_report, ErrorAssumption(ErrorBound(variant), lam)).width


# --------------------------------------------------------------------------
# Table of gamma thresholds over (lambda_all, lambda_skip) pairs

NLSOM_P_REPORT = 0.073
NLSOM_P_X_REPORT = 0.092
TABLE2_LAMBDAS = (0.100, 0.125, 0.170, 0.200, 0.360, 0.400)
TABLE2_PAIRS = tuple((a, s) for i, a in enumerate(TABLE2_LAMBDAS) for s in TABLE2_LAMBDAS[i:])

# Reference thresholds: (all_upper or None for "Never", skip_lower, skip_upper)
# for the joint family then the per-value family.
TABLE2_REFERENCE = {
    (0.100, 0.100): ((None, 0.000, 8.989), (None, 0.000, 9.988)),
    (0.100, 0.125): ((0.027, 0.027, 8.717), (0.003, 0.003, 9.963)),
    (0.100, 0.170): ((0.077, 0.077, 8.228), (0.007, 0.007, 9.914)),
    (0.100, 0.200): ((0.110, 0.110, 7.902), (0.011, 0.011, 9.878)),
    (0.100, 0.360): ((0.286, 0.286, 6.163), (0.036, 0.036, 9.630)),
    (0.100, 0.400): ((0.330, 0.330, 5.728), (0.045, 0.045, 9.547)),
    (0.125, 0.125): ((None, 0.000, 8.717), (None, 0.000, 9.963)),
    (0.125, 0.170): ((0.050, 0.050, 8.228), (0.005, 0.005, 9.914)),
    (0.125, 0.200): ((0.083, 0.083, 7.902), (0.008, 0.008, 9.878)),
    (0.125, 0.360): ((0.259, 0.259, 6.163), (0.034, 0.034, 9.630)),
    (0.125, 0.400): ((0.303, 0.303, 5.728), (0.042, 0.042, 9.547)),
    (0.170, 0.170): ((None, 0.000, 8.228), (None, 0.000, 9.914)),
    (0.170, 0.200): ((0.033, 0.033, 7.902), (0.004, 0.004, 9.878)),
    (0.170, 0.360): ((0.209, 0.209, 6.163), (0.029, 0.029, 9.630)),
    (0.170, 0.400): ((0.253, 0.253, 5.728), (0.037, 0.037, 9.547)),
    (0.200, 0.200): ((None, 0.000, 7.902), (None, 0.000, 9.878)),
    (0.200, 0.360): ((0.176, 0.176, 6.163), (0.025, 0.025, 9.630)),
    (0.200, 0.400): ((0.220, 0.220, 5.728), (0.033, 0.033, 9.547)),
    (0.360, 0.360): ((None, 0.000, 6.163), (None, 0.000, 9.630)),
    (0.360, 0.400): ((0.044, 0.044, 5.728), (0.008, 0.008, 9.547)),
    (0.400, 0.400): ((None, 0.000, 5.728), (None, 0.000, 9.547)),
}


@dataclass(frozen=True)
class FamilyThresholds:
    """Where All and Skip are chosen for one error-bound family.

    ``all_interval`` is ``None`` when All is never strictly optimal.
    """

    variant: ErrorBound
    all_interval: tuple | None
    skip_interval: tuple | None


@dataclass(frozen=True)
class Table2Row:
    lam_all: float
    lam_skip: float
    joint: FamilyThresholds
    per_value: FamilyThresholds


def family_thresholds(scenario: DecisionScenario, gamma_max: float = 1e3) -> FamilyThresholds:
    part = gamma_partition(scenario, gamma_max)
    return FamilyThresholds(
        scenario.all_data.assumption.variant,
        part.interval_for(DesignOption.ALL),
        part.interval_for(DesignOption.SKIP),
    )


def reproduce_table2(p_report_skip: float = NLSOM_P_REPORT,
                     p_x_report: float = NLSOM_P_X_REPORT,
                     p_report_all: float = NLSOM_P_REPORT,
                     lambda_pairs=TABLE2_PAIRS) -> list[Table2Row]:
    rows = []
    with warnings.catch_warnings():
        # Pairs with lam_all > lam_skip are accepted here on purpose.
        warnings.simplefilter("ignore")
        for lam_all, lam_skip in lambda_pairs:
            fams = [
                family_thresholds(DecisionScenario.misclassification(
                    p_report_all, p_report_skip, p_x_report, lam_all, lam_skip, variant))
                for variant in (ErrorBound.JOINT, ErrorBound.PER_VALUE)
            ]
            rows.append(Table2Row(lam_all, lam_skip, *fams))
    return rows


@dataclass(frozen=True)
class CellCheck:
    lam_all: float
    lam_skip: float
    variant: ErrorBound
    column: str
    reference: float | None
    computed: float | None
    ok: bool


def _close(a, b, tol):
    if a is None or b is None:
        return a is None and b is None
    return abs(a - b) <= tol


def compare_table2(rows: list[Table2Row], reference=TABLE2_REFERENCE,
                   tol: float = 5e-4) -> list[CellCheck]:
    """Cell-by-cell comparison of computed thresholds with reference ones."""
    checks = []
    for row in rows:
        key = (row.lam_all, row.lam_skip)
        if key not in reference:
            continue
        for fam, pub in zip((row.joint, row.per_value), reference[key]):
            all_upper = fam.all_interval[1] if fam.all_interval else None
            skip_lo, skip_hi = fam.skip_interval if fam.skip_interval else (None, None)
            for column, pub_v, got in (("all_upper", pub[0], all_upper),
                                       ("skip_lower", pub[1], skip_lo),
                                       ("skip_upper", pub[2], skip_hi)):
                checks.append(CellCheck(row.lam_all, row.lam_skip, fam.variant, column,
                                        pub_v, got, _close(pub_v, got, tol)))
    return checks

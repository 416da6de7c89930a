"""Synthetic populations and survey response processes with known truth.

A population holds the true opening answer ``x`` and item ``y`` for every
member, with ``x = 0`` forcing ``y = 0``. A response model turns it into what
a survey would record under a design option. Three families exist:

* :class:`NonresponseModel`: truthful answers with item nonresponse, chosen
  at random or concentrated on the highest or lowest outcomes;
* :class:`MisclassModel`: complete response with misreports whose realised
  rate never exceeds the declared budget, overall or per true value;
* :class:`MixtureModel`: reports drawn as ``w*y + (1-w)*e``.

Applying a model to the whole population gives exact population observables
("population mode"); applying it to ``Population.sample(n, seed)`` gives a
finite sample. All randomness flows from explicit seeds through numpy's
PCG64 generator, so runs are reproducible across platforms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .decision import DesignOption, ScenarioKind
from .errors import ValidationError
from .gfunc import GFunction
from .ingest import (
    Columns,
    IngestSchema,
    mc_all_from_columns,
    mc_skip_from_columns,
    nr_all_from_columns,
    nr_skip_from_columns,
    write_microdata,
)
from .regions import (
    ErrorAssumption,
    ErrorBound,
    MixtureAssumption,
    UnitInterval,
    check_lambda,
    check_probability,
    mixture_to_misclass,
)

COVERAGE_EPS = 1e-9
_NAN = float("nan")


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


# --------------------------------------------------------------------------
# Populations


@dataclass(frozen=True)
class PopulationConfig:
    """Generative parameters for a population.

    ``outcome='binary'`` draws ``y`` in {0, 1} with ``P(y=1 | x=1) =
    p_y_given_x``. ``outcome='beta'`` draws ``y = support_max * Beta(a, b)``
    for members with ``x = 1``, optionally rounded to integers (as for answers
    on a 0-100 percent-chance scale).
    """

    p_x: float
    outcome: str = "binary"
    p_y_given_x: float = 0.5
    beta_a: float = 2.0
    beta_b: float = 3.0
    support_max: float = 1.0
    integer: bool = False

    def __post_init__(self):
        check_probability(self.p_x, "p_x")
        check_probability(self.p_y_given_x, "p_y_given_x")
        if self.outcome not in ("binary", "beta"):
            raise ValidationError(f"unknown outcome kind {self.outcome!r}", "outcome")
        if self.outcome == "binary" and self.support_max != 1.0:
            raise ValidationError("a binary outcome needs support_max=1", "support_max")
        if self.beta_a <= 0 or self.beta_b <= 0:
            raise ValidationError("beta parameters must be positive", "beta_a")


@dataclass(frozen=True, eq=False)
class Population:
    x: np.ndarray
    y: np.ndarray
    g: GFunction = field(default_factory=GFunction)

    def __post_init__(self):
        if len(self.x) != len(self.y) or len(self.x) == 0:
            raise ValidationError("population needs equal-length, nonempty x and y", "x")
        if np.any((self.x == 0) & (self.y != 0)):
            raise ValidationError("x = 0 must imply y = 0", "y")
        if np.any((self.y < 0) | (self.y > self.g.support_max)):
            raise ValidationError("y outside [0, support_max]", "y")

    def __len__(self):
        return len(self.x)

    @property
    def support_max(self) -> float:
        return self.g.support_max

    @property
    def is_binary(self) -> bool:
        return self.support_max == 1.0 and bool(np.all((self.y == 0) | (self.y == 1)))

    @property
    def true_mean(self) -> float:
        return math.fsum(self.g(self.y).tolist()) / len(self)

    @property
    def true_p1(self) -> float | None:
        if not self.is_binary:
            return None
        return int((self.y == 1).sum()) / len(self)

    def sample(self, n: int, seed) -> Population:
        """Simple random sample of ``n`` members, with replacement."""
        idx = _rng(seed).integers(0, len(self), size=n)
        return Population(self.x[idx], self.y[idx], self.g)


def gen_population(n: int, config: PopulationConfig, seed, g: GFunction | None = None):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}", "n")
    rng = _rng(seed)
    x = (rng.random(n) < config.p_x).astype(np.int8)
    if config.outcome == "binary":
        y = ((rng.random(n) < config.p_y_given_x) & (x == 1)).astype(float)
    else:
        draws = config.support_max * rng.beta(config.beta_a, config.beta_b, size=n)
        if config.integer:
            draws = np.round(draws)
        y = np.where(x == 1, draws, 0.0)
    return Population(x, y, g or GFunction.linear(config.support_max))


# --------------------------------------------------------------------------
# Response models


class MissingnessRule(enum.Enum):
    MAR = "mar"
    HIGH = "high"  # nonrespondents are the members with the largest g(y)
    LOW = "low"


class ErrorRule(enum.Enum):
    RANDOM = "random"
    FALSE_NEGATIVE = "false-negative"  # misreports only push the report down
    FALSE_POSITIVE = "false-positive"


@dataclass(frozen=True)
class NonresponseModel:
    """Item nonresponse shares.

    p_miss_open: opening-question nonresponse (Skip design).
    p_miss_follow: follow-up nonresponse among those asked (Skip design).
    p_miss_all: item nonresponse when everyone is asked (All design).
    """

    p_miss_open: float = 0.0
    p_miss_follow: float = 0.0
    p_miss_all: float = 0.0
    rule: MissingnessRule = MissingnessRule.MAR

    def __post_init__(self):
        for name in ("p_miss_open", "p_miss_follow", "p_miss_all"):
            check_probability(getattr(self, name), name)
        object.__setattr__(self, "rule", MissingnessRule(self.rule))


@dataclass(frozen=True)
class MisclassModel:
    """Misreports of a binary item within a declared error budget.

    ``usage`` is the share of the budget actually spent; the realised error
    count in each constrained group is ``floor(usage * lam_budget * size)``
    capped by the number of members whose report can flip under ``flip_rule``.
    """

    lam_budget: float
    bound: ErrorBound = ErrorBound.JOINT
    flip_rule: ErrorRule = ErrorRule.RANDOM
    usage: float = 1.0

    def __post_init__(self):
        check_lambda(self.lam_budget, "lam_budget")
        check_probability(self.usage, "usage")
        object.__setattr__(self, "bound", ErrorBound(self.bound))
        object.__setattr__(self, "flip_rule", ErrorRule(self.flip_rule))

    @property
    def assumption(self) -> ErrorAssumption:
        return ErrorAssumption(self.bound, self.lam_budget)


@dataclass(frozen=True)
class MixtureModel:
    """Reports ``w*y + (1-w)*e`` for a binary item, ``e ~ Bernoulli(p_e1)``.

    The error share ``P(w = 0)`` is ``p_w0``. With ``independent`` the errors
    are allocated in equal shares within each value of ``y``; otherwise
    ``concentrate_on`` may pile them onto one true value.
    """

    p_w0: float
    p_e1: float = 0.5
    independent: bool = False
    concentrate_on: int | None = None

    def __post_init__(self):
        check_lambda(self.p_w0, "p_w0")
        check_probability(self.p_e1, "p_e1")
        if self.concentrate_on not in (None, 0, 1):
            raise ValidationError("concentrate_on must be None, 0 or 1", "concentrate_on")

    def assumption(self, lam=None) -> ErrorAssumption:
        lam = self.p_w0 if lam is None else lam
        return mixture_to_misclass(MixtureAssumption(lam, self.independent))


# --------------------------------------------------------------------------
# Observed datasets


@dataclass(eq=False)
class ObservedDataset:
    """What the survey records, plus the truth kept aside for checks."""

    design: DesignOption
    kind: ScenarioKind | None
    columns: Columns
    g: GFunction
    true_mean: float
    true_p1: float | None
    assumption: ErrorAssumption | None = None
    error_rates: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.columns)

    @property
    def ids(self):
        width = max(7, len(str(len(self))))
        return [f"r{i:0{width}d}" for i in range(1, len(self) + 1)]

    def records(self):
        return self.columns.to_records(self.ids)

    def schema(self, **kw) -> IngestSchema:
        design = self.design if self.design is not DesignOption.NONE else DesignOption.SKIP
        return IngestSchema(support_max=self.g.support_max, g=self.g, design=design, **kw)

    def write(self, dest, **schema_kw):
        write_microdata(self.records(), dest, self.schema(**schema_kw))


def _pick(rng, scores, candidates, k, rule):
    """Choose ``k`` of the ``candidates`` indices under a missingness rule."""
    candidates = np.asarray(candidates)
    k = min(int(k), len(candidates))
    if k <= 0:
        return candidates[:0]
    if rule is MissingnessRule.MAR:
        return rng.choice(candidates, size=k, replace=False)
    tiebreak = rng.random(len(candidates))
    key = scores[candidates]
    if rule is MissingnessRule.HIGH:
        key = -key
    order = np.lexsort((tiebreak, key))
    return candidates[order[:k]]


def _budget(usage, lam, size):
    return math.floor(usage * lam * size + 1e-9)


def _skip_columns(opening_value, followup_value, asked):
    n = len(opening_value)
    return Columns(
        np.ones(n, dtype=bool),
        opening_value,
        asked,
        np.where(asked, followup_value, _NAN),
    )


def _all_columns(followup_value):
    n = len(followup_value)
    return Columns(np.zeros(n, dtype=bool), np.full(n, _NAN), np.ones(n, dtype=bool),
                   followup_value)


def _apply_nonresponse(pop, option, model, rng):
    n = len(pop)
    gy = pop.g(pop.y)
    # x=1 members rank above x=0 at equal g so worst-case rules hide them first.
    scores = gy + 1e-9 * pop.x
    if option is DesignOption.ALL:
        miss = _pick(rng, scores, np.arange(n), round(model.p_miss_all * n), model.rule)
        fv = pop.y.astype(float).copy()
        fv[miss] = _NAN
        return _all_columns(fv)
    miss_open = _pick(rng, scores, np.arange(n), round(model.p_miss_open * n), model.rule)
    ov = pop.x.astype(float)
    ov[miss_open] = _NAN
    asked = ov == 1.0
    asked_idx = np.flatnonzero(asked)
    miss_follow = _pick(rng, scores, asked_idx, round(model.p_miss_follow * len(asked_idx)),
                        model.rule)
    fv = pop.y.astype(float).copy()
    fv[miss_follow] = _NAN
    return _skip_columns(ov, fv, asked)


# Cells of (x, y) for the skip design: 0 -> (0,0), 1 -> (1,0), 2 -> (1,1).
_CELL_X = np.array([0.0, 1.0, 1.0])
_CELL_Y = np.array([0.0, 0.0, 1.0])


def _flip_targets(true_cells, rule, rng, n_cells):
    """Reported cell for each erring member, never equal to the true cell."""
    out = np.empty(len(true_cells), dtype=int)
    for i, c in enumerate(true_cells):
        if rule is ErrorRule.FALSE_NEGATIVE:
            options = list(range(c))
        elif rule is ErrorRule.FALSE_POSITIVE:
            options = list(range(c + 1, n_cells))
        else:
            options = [d for d in range(n_cells) if d != c]
        out[i] = options[rng.integers(len(options))]
    return out


def _eligible(cells, rule, n_cells):
    if rule is ErrorRule.FALSE_NEGATIVE:
        return cells > 0
    if rule is ErrorRule.FALSE_POSITIVE:
        return cells < n_cells - 1
    return np.ones(len(cells), dtype=bool)


def _misreport(cells, model, rng, n_cells):
    """Reported cells with the error count held inside the declared budget."""
    n = len(cells)
    reported = cells.copy()
    eligible = _eligible(cells, model.flip_rule, n_cells)
    if model.bound is ErrorBound.JOINT:
        groups = [np.flatnonzero(eligible)]
        sizes = [n]
    else:
        groups = [np.flatnonzero(eligible & (cells == c)) for c in range(n_cells)]
        sizes = [int((cells == c).sum()) for c in range(n_cells)]
    for members, size in zip(groups, sizes):
        k = min(_budget(model.usage, model.lam_budget, size), len(members))
        if k == 0:
            continue
        chosen = rng.choice(members, size=k, replace=False)
        reported[chosen] = _flip_targets(cells[chosen], model.flip_rule, rng, n_cells)
    return reported


def _error_rates(true_cells, reported, n_cells):
    wrong = true_cells != reported
    rates = {"overall": float(wrong.mean())}
    for c in range(n_cells):
        mask = true_cells == c
        rates[f"cell{c}"] = float(wrong[mask].mean()) if mask.any() else 0.0
    return rates


def _apply_misclass(pop, option, model, rng):
    if option is DesignOption.ALL:
        cells = pop.y.astype(int)
        reported = _misreport(cells, model, rng, 2)
        return _all_columns(reported.astype(float)), _error_rates(cells, reported, 2)
    cells = (pop.x.astype(int) + pop.y.astype(int))
    reported = _misreport(cells, model, rng, 3)
    ov = _CELL_X[reported]
    return (_skip_columns(ov, _CELL_Y[reported], ov == 1.0),
            _error_rates(cells, reported, 3))


def _apply_mixture(pop, model, rng):
    n = len(pop)
    y = pop.y.astype(int)
    if model.independent:
        w0 = np.concatenate([
            rng.choice(np.flatnonzero(y == v), size=_budget(1.0, model.p_w0, int((y == v).sum())),
                       replace=False)
            for v in (0, 1)
        ])
    else:
        k = _budget(1.0, model.p_w0, n)
        if model.concentrate_on is None:
            w0 = rng.choice(n, size=k, replace=False)
        else:
            pref = np.flatnonzero(y == model.concentrate_on)
            rest = np.flatnonzero(y != model.concentrate_on)
            rng.shuffle(pref)
            rng.shuffle(rest)
            w0 = np.concatenate([pref, rest])[:k]
    w = np.ones(n, dtype=int)
    w[w0] = 0
    e = (rng.random(n) < model.p_e1).astype(int)
    reported = w * y + (1 - w) * e
    rates = _error_rates(y, reported, 2)
    rates["p_w0"] = float((w == 0).mean())
    for v in (0, 1):
        mask = y == v
        rates[f"p_w0_given_y{v}"] = float((w[mask] == 0).mean()) if mask.any() else 0.0
    return _all_columns(reported.astype(float)), rates


def apply_design(pop: Population, option: DesignOption, model, seed) -> ObservedDataset:
    """Record what a survey using ``option`` would observe on ``pop``."""
    option = DesignOption(option)
    rng = _rng(seed)
    truth = dict(true_mean=pop.true_mean, true_p1=pop.true_p1)
    if option is DesignOption.NONE:
        n = len(pop)
        cols = Columns(np.zeros(n, dtype=bool), np.full(n, _NAN), np.zeros(n, dtype=bool),
                       np.full(n, _NAN))
        kind = ScenarioKind.NONRESPONSE if isinstance(model, NonresponseModel) else (
            ScenarioKind.MISCLASSIFICATION)
        return ObservedDataset(option, kind, cols, pop.g, **truth)
    if isinstance(model, NonresponseModel):
        cols = _apply_nonresponse(pop, option, model, rng)
        return ObservedDataset(option, ScenarioKind.NONRESPONSE, cols, pop.g, **truth)
    if isinstance(model, (MisclassModel, MixtureModel)) and not pop.is_binary:
        raise ValidationError("reporting-error models need a binary outcome", "model")
    if isinstance(model, MisclassModel):
        cols, rates = _apply_misclass(pop, option, model, rng)
        return ObservedDataset(option, ScenarioKind.MISCLASSIFICATION, cols, pop.g,
                               assumption=model.assumption, error_rates=rates, **truth)
    if isinstance(model, MixtureModel):
        if option is not DesignOption.ALL:
            raise ValidationError("the mixture model is defined for the All design only",
                                  "option")
        cols, rates = _apply_mixture(pop, model, rng)
        return ObservedDataset(option, ScenarioKind.MISCLASSIFICATION, cols, pop.g,
                               assumption=model.assumption(), error_rates=rates, **truth)
    raise ValidationError(f"unknown response model {type(model).__name__}", "model")


def empirical_quantities(obs: ObservedDataset, g: GFunction | None = None,
                         assumption: ErrorAssumption | None = None):
    """Scenario quantities as exact count ratios over the dataset."""
    if obs.design is DesignOption.NONE:
        raise ValidationError("nothing is asked under design 'none'", "design")
    schema = obs.schema() if g is None else IngestSchema(
        support_max=g.support_max, g=g, design=obs.design)
    if obs.kind is ScenarioKind.NONRESPONSE:
        if obs.design is DesignOption.ALL:
            return nr_all_from_columns(obs.columns, schema)
        return nr_skip_from_columns(obs.columns, schema)
    assumption = assumption or obs.assumption
    if assumption is None:
        raise ValidationError("an error bound is needed for misclassification data",
                              "assumption")
    if obs.design is DesignOption.ALL:
        return mc_all_from_columns(obs.columns, schema, assumption)
    return mc_skip_from_columns(obs.columns, schema, assumption)


def coverage_check(truth: float, region: UnitInterval, eps: float = COVERAGE_EPS) -> bool:
    return region.lo - eps <= truth <= region.hi + eps


# --------------------------------------------------------------------------
# Count-calibrated skip datasets


@dataclass(frozen=True)
class SkipCounts:
    """Exact counts for a skip-sequenced item with nonresponse."""

    n: int
    n_open_missing: int
    n_asked: int
    n_follow_missing: int

    def __post_init__(self):
        if min(self.n, self.n_open_missing, self.n_asked, self.n_follow_missing) < 0:
            raise ValidationError("counts must be nonnegative", "n")
        if self.n_open_missing + self.n_asked > self.n:
            raise ValidationError("opening nonrespondents plus asked exceed n", "n_asked")
        if self.n_follow_missing > self.n_asked:
            raise ValidationError("follow-up nonrespondents exceed those asked",
                                  "n_follow_missing")

    @property
    def n_answered(self):
        return self.n_asked - self.n_follow_missing


def _integer_values_with_sum(rng, n, total, support_max, a, b):
    vals = np.round(support_max * rng.beta(a, b, size=n)).astype(np.int64)
    step = 1 if total > vals.sum() else -1
    while vals.sum() != total:
        room = vals < support_max if step > 0 else vals > 0
        idx = np.flatnonzero(room)
        if len(idx) == 0:
            raise ValidationError("target total is unreachable", "mean")
        need = min(abs(int(total - vals.sum())), len(idx))
        vals[rng.choice(idx, size=need, replace=False)] += step
    return vals


def skip_dataset_from_counts(counts: SkipCounts, mean_resp: float, support_max: float,
                             seed, beta=(2.0, 3.0)) -> ObservedDataset:
    """Skip-design dataset whose count ratios are fixed in advance.

    Answered follow-ups are integers in ``[0, support_max]`` whose mean of
    ``y / support_max`` is as close to ``mean_resp`` as the count allows.
    Hidden values (``x`` for opening nonrespondents, ``y`` for follow-up
    nonrespondents) are drawn from the same distributions so the dataset
    carries a true mean.
    """
    rng = _rng(seed)
    n = counts.n
    s = float(support_max)
    total = round(mean_resp * s * counts.n_answered)
    answered_vals = _integer_values_with_sum(rng, counts.n_answered, total, int(s), *beta)

    order = rng.permutation(n)
    open_missing = order[:counts.n_open_missing]
    asked = order[counts.n_open_missing:counts.n_open_missing + counts.n_asked]
    answered_idx, silent_idx = asked[:counts.n_answered], asked[counts.n_answered:]

    x = np.zeros(n, dtype=np.int8)
    x[asked] = 1
    share_x = counts.n_asked / max(n - counts.n_open_missing, 1)
    x[open_missing] = rng.random(len(open_missing)) < share_x
    y = np.zeros(n)
    y[answered_idx] = answered_vals
    hidden = np.concatenate([silent_idx, open_missing[x[open_missing] == 1]])
    y[hidden] = np.round(s * rng.beta(*beta, size=len(hidden)))
    pop = Population(x, y, GFunction.linear(s))

    ov = x.astype(float)
    ov[open_missing] = _NAN
    fv = y.copy()
    fv[silent_idx] = _NAN
    cols = _skip_columns(ov, fv, ov == 1.0)
    return ObservedDataset(DesignOption.SKIP, ScenarioKind.NONRESPONSE, cols, pop.g,
                           pop.true_mean, pop.true_p1)


HRS_COUNTS = SkipCounts(n=10748, n_open_missing=777, n_asked=9356, n_follow_missing=212)
HRS_MEAN_RESP = 0.4039

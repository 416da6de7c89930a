"""Questionnaire design by loss minimisation over identification regions.

Choose between asking an item of everyone (All), only after a positive
opening answer (Skip), or not at all (None), trading interviewing cost
against the width of the identification region for the item's mean.
"""

from .decision import (
    Decision,
    DecisionScenario,
    DesignOption,
    GammaPartition,
    LossBreakdown,
    ScenarioKind,
    compare_table2,
    decide,
    gamma_partition,
    loss,
    reproduce_table2,
    table1_widths,
)
from .errors import IngestError, SkipSeqError, UndefinedMeanError, ValidationError
from .gfunc import GFunction
from .ingest import (
    IngestSchema,
    MicroRecord,
    compute_mc_all_scenario,
    compute_mc_scenario,
    compute_nr_all_scenario,
    compute_nr_scenario,
    parse_microdata,
    write_microdata,
)
from .oracle import sharpness_oracle
from .regions import (
    ErrorAssumption,
    ErrorBound,
    MisclassAllScenario,
    MisclassSkipScenario,
    MixtureAssumption,
    NonresponseAllScenario,
    NonresponseSkipScenario,
    UnitInterval,
    mixture_to_misclass,
    region,
    region_mc_all,
    region_mc_skip,
    region_none,
    region_nr_all,
    region_nr_skip,
)
from .simulator import (
    MisclassModel,
    MixtureModel,
    NonresponseModel,
    ObservedDataset,
    Population,
    PopulationConfig,
    apply_design,
    coverage_check,
    empirical_quantities,
    gen_population,
)

__version__ = "0.1.0"

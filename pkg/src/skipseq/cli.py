"""Command-line entry point: ``skipseq <command> [options]``.

Commands: region {nr-all,nr-skip,mc-all,mc-skip,none}, loss, decide, sweep,
table2, simulate, ingest. Every command accepts ``--format {table,json}``,
``--seed`` and ``--config FILE`` (a JSON object keyed by option name, e.g.
``{"p_y_resp": 0.8508}``). Explicit flags override the config file, which
overrides ``--preset`` values.

Exit status: 0 on success, 2 on invalid input, 1 on an internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

from . import __version__
from .decision import (
    DEFAULT_GAMMA_MAX,
    DecisionScenario,
    DesignOption,
    all_losses,
    compare_table2,
    decide,
    gamma_partition,
    reproduce_table2,
    NLSOM_P_REPORT,
    NLSOM_P_X_REPORT,
)
from .errors import SkipSeqError, ValidationError
from .ingest import (
    IngestSchema,
    compute_mc_all_scenario,
    compute_mc_scenario,
    compute_nr_all_scenario,
    compute_nr_scenario,
    parse_microdata,
)
from .regions import (
    ErrorAssumption,
    ErrorBound,
    MisclassAllScenario,
    MisclassSkipScenario,
    NonresponseAllScenario,
    NonresponseSkipScenario,
    region,
)
from .simulator import (
    HRS_COUNTS,
    HRS_MEAN_RESP,
    MisclassModel,
    MixtureModel,
    NonresponseModel,
    PopulationConfig,
    apply_design,
    coverage_check,
    empirical_quantities,
    gen_population,
    skip_dataset_from_counts,
)

SCHEMA_VERSION = 1

PRESETS = {
    "hrs": dict(kind="nonresponse", p_nonresp_all=0.08, mean_resp_all=0.4039,
                p_y_resp=0.8508, mean_resp=0.4039, p_x_open_y_miss=0.0197,
                p_x_miss=0.0723, p_asked=0.8705),
    "nlsom": dict(kind="misclass", p_report_all=NLSOM_P_REPORT, p_report=NLSOM_P_REPORT,
                  p_x_report=NLSOM_P_X_REPORT, lambda_all=0.15, lambda_skip=0.25,
                  assumption="joint"),
}

# Applied after presets, config and flags, for options still unset.
DEFAULTS = dict(
    format="table", seed=0, gamma_max=DEFAULT_GAMMA_MAX, assumption="joint", tol=5e-4,
    kind=None, design="skip", n=10000, p_x=0.9, outcome="beta", p_y_given_x=0.5,
    beta_a=2.0, beta_b=3.0, support_max=1.0, p_miss_open=0.07, p_miss_follow=0.02,
    p_miss_all=0.08, rule="mar", flip_rule="random", usage=1.0, p_w0=0.1, p_e1=0.5,
    out="-", input="-", delimiter=",", missing="", positive_code=1.0,
    table2_p_report=NLSOM_P_REPORT, table2_p_x_report=NLSOM_P_X_REPORT,
    table2_p_report_all=NLSOM_P_REPORT,
)


# --------------------------------------------------------------------------
# Argument parsing


def _common(p):
    p.add_argument("--format", choices=["table", "json"], default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None, help="JSON file of option values")


def _assumption_arg(p):
    p.add_argument("--assumption", choices=["joint", "per-value"], default=None,
                   help="joint: bound on P(report != truth); per-value: bound per true value")


def _scenario_args(p):
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)
    p.add_argument("--kind", choices=["nonresponse", "misclass"], default=None)
    g = p.add_argument_group("nonresponse scenario")
    for flag in ("--p-nonresp-all", "--mean-resp-all", "--p-y-resp", "--mean-resp",
                 "--p-x-open-y-miss", "--p-x-miss", "--p-asked"):
        g.add_argument(flag, type=float, default=None)
    g = p.add_argument_group("misclassification scenario")
    for flag in ("--p-report-all", "--p-report", "--p-x-report", "--lambda-all",
                 "--lambda-skip"):
        g.add_argument(flag, type=float, default=None)
    _assumption_arg(g)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skipseq", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"skipseq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    reg = sub.add_parser("region", help="identification region for one design")
    rsub = reg.add_subparsers(dest="region_kind", required=True)
    p = rsub.add_parser("nr-all", help="nonresponse, item asked of all")
    p.add_argument("--p-nonresp", type=float, default=None)
    p.add_argument("--mean-resp", type=float, default=None)
    _common(p)
    p = rsub.add_parser("nr-skip", help="nonresponse, skip sequencing")
    for flag in ("--p-y-resp", "--mean-resp", "--p-x-open-y-miss", "--p-x-miss",
                 "--p-asked"):
        p.add_argument(flag, type=float, default=None)
    _common(p)
    p = rsub.add_parser("mc-all", help="misclassification, item asked of all")
    p.add_argument("--p-report", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    _assumption_arg(p)
    _common(p)
    p = rsub.add_parser("mc-skip", help="misclassification, skip sequencing")
    p.add_argument("--p-report", type=float, default=None)
    p.add_argument("--p-x-report", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    _assumption_arg(p)
    _common(p)
    p = rsub.add_parser("none", help="item not asked")
    _common(p)

    p = sub.add_parser("loss", help="loss lines of the three designs")
    _scenario_args(p)
    p.add_argument("--option", choices=[o.value for o in DesignOption], default=None)
    p.add_argument("--gamma", type=float, default=None,
                   help="also evaluate each loss at this gamma")
    _common(p)

    p = sub.add_parser("decide", help="optimal design at a given gamma")
    _scenario_args(p)
    p.add_argument("--gamma", type=float, default=None)
    _common(p)

    p = sub.add_parser("sweep", help="partition of [0, gamma_max] by optimal design")
    _scenario_args(p)
    p.add_argument("--gamma-max", type=float, default=None)
    _common(p)

    p = sub.add_parser("table2", help="gamma thresholds over error-bound pairs")
    p.add_argument("--p-report", dest="table2_p_report", type=float, default=None)
    p.add_argument("--p-x-report", dest="table2_p_x_report", type=float, default=None)
    p.add_argument("--p-report-all", dest="table2_p_report_all", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    _common(p)

    p = sub.add_parser("simulate", help="synthetic microdata plus a coverage report")
    p.add_argument("--kind", choices=["nonresponse", "misclass", "mixture"], default=None)
    p.add_argument("--design", choices=[o.value for o in DesignOption], default=None)
    p.add_argument("--calibrated", choices=["hrs"], default=None,
                   help="emit the count-calibrated 10,748-respondent skip file")
    p.add_argument("--n", type=int, default=None, help="population size")
    p.add_argument("--sample", type=int, default=None,
                   help="draw a sample of this size instead of using the full population")
    for flag, typ in (("--p-x", float), ("--p-y-given-x", float), ("--beta-a", float),
                      ("--beta-b", float), ("--support-max", float),
                      ("--p-miss-open", float), ("--p-miss-follow", float),
                      ("--p-miss-all", float), ("--lambda", float), ("--usage", float),
                      ("--p-w0", float), ("--p-e1", float)):
        kw = {"dest": "lam"} if flag == "--lambda" else {}
        p.add_argument(flag, type=typ, default=None, **kw)
    p.add_argument("--outcome", choices=["binary", "beta"], default=None)
    p.add_argument("--integer", action="store_true", default=None)
    p.add_argument("--rule", choices=["mar", "high", "low"], default=None)
    p.add_argument("--flip-rule", choices=["random", "false-negative", "false-positive"],
                   default=None)
    p.add_argument("--independent", action="store_true", default=None)
    _assumption_arg(p)
    p.add_argument("--out", default=None, help="microdata destination ('-' = stdout)")
    _common(p)

    p = sub.add_parser("ingest", help="scenario quantities from a microdata file")
    p.add_argument("--input", default=None, help="microdata source ('-' = stdin)")
    p.add_argument("--kind", choices=["nonresponse", "misclass"], default=None)
    p.add_argument("--design", choices=["skip", "all"], default=None)
    p.add_argument("--support-max", type=float, default=None)
    p.add_argument("--delimiter", default=None)
    p.add_argument("--missing", default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--positive-code", type=float, default=None)
    _assumption_arg(p)
    _common(p)
    return parser


def resolve(argv=None) -> argparse.Namespace:
    """Parse flags and merge preset < config file < flags < defaults-for-unset."""
    args = build_parser().parse_args(argv)
    merged = {}
    preset = getattr(args, "preset", None)
    if preset:
        merged.update(PRESETS[preset])
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}", "config") from None
        if not isinstance(cfg, dict):
            raise ValidationError("config must be a JSON object", "config")
        merged.update({k.replace("-", "_"): v for k, v in cfg.items()})
    merged.update({k: v for k, v in vars(args).items() if v is not None})
    for k, v in DEFAULTS.items():
        merged.setdefault(k, v)
    return argparse.Namespace(**merged)


# --------------------------------------------------------------------------
# Helpers


def _need(ns, *names):
    missing = [n for n in names if getattr(ns, n, None) is None]
    if missing:
        flags = ", ".join("--" + m.replace("_", "-") for m in missing)
        raise ValidationError(f"missing required option(s): {flags}", missing[0])
    return [getattr(ns, n) for n in names]


def _interval_doc(iv):
    return {"lo": iv.lo, "hi": iv.hi, "width": iv.width}


def _scenario_doc(s):
    if s is None:
        return None
    doc = {"type": type(s).__name__}
    for k, v in vars(s).items():
        if isinstance(v, ErrorAssumption):
            doc["assumption"] = v.variant.value
            doc["lambda"] = v.lam
        else:
            doc[k] = v
    return doc


def _decision_scenario(ns) -> DecisionScenario:
    kind = ns.kind
    if kind is None:
        raise ValidationError("give --kind or --preset", "kind")
    if kind == "nonresponse":
        pa, ma, q, m, a, b = _need(ns, "p_nonresp_all", "mean_resp_all", "p_y_resp",
                                   "mean_resp", "p_x_open_y_miss", "p_x_miss")
        return DecisionScenario(
            NonresponseAllScenario(pa, ma),
            NonresponseSkipScenario(q, m, a, b, getattr(ns, "p_asked", None)),
        )
    if kind == "misclass":
        pa, ps, px, la, ls = _need(ns, "p_report_all", "p_report", "p_x_report",
                                   "lambda_all", "lambda_skip")
        return DecisionScenario.misclassification(pa, ps, px, la, ls, ns.assumption)
    raise ValidationError(f"unknown kind {kind!r}", "kind")


def _loss_doc(lb, gamma=None):
    doc = {"option": lb.option.value, "cost_fraction": lb.cost_fraction, "width": lb.width}
    if gamma is not None:
        doc["loss"] = lb.loss_at(gamma)
    return doc


def _f4(v):
    return "-" if v is None else f"{v:.4f}"


def _table(rows, header):
    cols = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cols) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cols]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


# --------------------------------------------------------------------------
# Commands: each returns (json document, human text)


def cmd_region(ns):
    kind = ns.region_kind
    if kind == "nr-all":
        p, m = _need(ns, "p_nonresp", "mean_resp")
        s = NonresponseAllScenario(p, m)
    elif kind == "nr-skip":
        q, m, a, b = _need(ns, "p_y_resp", "mean_resp", "p_x_open_y_miss", "p_x_miss")
        s = NonresponseSkipScenario(q, m, a, b, getattr(ns, "p_asked", None))
    elif kind == "mc-all":
        p, lam = _need(ns, "p_report", "lam")
        s = MisclassAllScenario(p, ErrorAssumption(ErrorBound(ns.assumption), lam))
    elif kind == "mc-skip":
        p, px, lam = _need(ns, "p_report", "p_x_report", "lam")
        s = MisclassSkipScenario(p, px, ErrorAssumption(ErrorBound(ns.assumption), lam))
    else:
        s = None
    iv = region(s)
    doc = {"region": kind, "scenario": _scenario_doc(s), **_interval_doc(iv)}
    text = f"{kind}: [{iv.lo:.4f}, {iv.hi:.4f}]  width {iv.width:.4f}"
    return doc, text


def cmd_loss(ns):
    scen = _decision_scenario(ns)
    losses = all_losses(scen)
    opts = [DesignOption(ns.option)] if getattr(ns, "option", None) else list(DesignOption)
    gamma = getattr(ns, "gamma", None)
    docs = [_loss_doc(losses[o], gamma) for o in opts]
    rows = [[d["option"], _f4(d["cost_fraction"]), _f4(d["width"]),
             f"{d['cost_fraction']:.4f}*gamma + {d['width']:.4f}"] for d in docs]
    header = ["option", "cost_fraction", "width", "loss"]
    if gamma is not None:
        header.append(f"loss@{gamma:g}")
        for r, d in zip(rows, docs):
            r.append(_f4(d["loss"]))
    return {"kind": scen.kind.value, "losses": docs}, _table(rows, header)


def cmd_decide(ns):
    (gamma,) = _need(ns, "gamma")
    scen = _decision_scenario(ns)
    d = decide(gamma, scen)
    order = list(DesignOption)
    doc = {
        "kind": scen.kind.value,
        "gamma": d.gamma,
        "chosen": d.chosen.value,
        "minimizers": [o.value for o in order if o in d.minimizers],
        "losses": [_loss_doc(d.losses[o], d.gamma) for o in order],
    }
    rows = [[o.value, _f4(d.losses[o].cost_fraction), _f4(d.losses[o].width),
             _f4(d.values[o]), "*" if o in d.minimizers else ""] for o in order]
    text = _table(rows, ["option", "cost_fraction", "width", "loss", "min"])
    text += f"\nchosen: {d.chosen.value}"
    return doc, text


def cmd_sweep(ns):
    scen = _decision_scenario(ns)
    part = gamma_partition(scen, ns.gamma_max)
    order = list(DesignOption)
    cells = [{"lo": c.lo, "hi": c.hi, "optimal": [o.value for o in order if o in c.optimal],
              "chosen": c.chosen.value} for c in part.cells]
    doc = {"kind": scen.kind.value, "gamma_max": part.gamma_max,
           "breakpoints": list(part.breakpoints), "cells": cells}
    rows = [[_f4(c["lo"]), _f4(c["hi"]), ",".join(c["optimal"]), c["chosen"]] for c in cells]
    return doc, _table(rows, ["gamma_lo", "gamma_hi", "optimal", "chosen"])


def cmd_table2(ns):
    rows = reproduce_table2(ns.table2_p_report, ns.table2_p_x_report, ns.table2_p_report_all)
    checks = compare_table2(rows, tol=ns.tol)
    failed = [c for c in checks if not c.ok]

    def fam_doc(f):
        return {"all": list(f.all_interval) if f.all_interval else None,
                "skip": list(f.skip_interval) if f.skip_interval else None}

    doc = {
        "inputs": {"p_report": ns.table2_p_report, "p_x_report": ns.table2_p_x_report,
                   "p_report_all": ns.table2_p_report_all},
        "rows": [{"lambda_all": r.lam_all, "lambda_skip": r.lam_skip,
                  "joint": fam_doc(r.joint), "per_value": fam_doc(r.per_value)}
                 for r in rows],
        "checks": [{"lambda_all": c.lam_all, "lambda_skip": c.lam_skip,
                    "assumption": c.variant.value, "column": c.column,
                    "reference": c.reference, "computed": c.computed, "ok": c.ok}
                   for c in checks],
        "n_cells": len(checks),
        "n_match": len(checks) - len(failed),
        "tolerance": ns.tol,
    }

    def fmt(f):
        a = "Never" if f.all_interval is None else f"g<={f.all_interval[1]:.4f}"
        s = "-" if f.skip_interval is None else (
            f"{f.skip_interval[0]:.4f}<=g<={f.skip_interval[1]:.4f}")
        return a, s

    by_key = {}
    for c in checks:
        by_key.setdefault((c.lam_all, c.lam_skip), []).append(c.ok)
    trows = []
    for r in rows:
        ok = by_key.get((r.lam_all, r.lam_skip))
        status = "n/a" if ok is None else ("ok" if all(ok) else "MISMATCH")
        trows.append([f"{r.lam_all:.3f}", f"{r.lam_skip:.3f}", *fmt(r.joint),
                      *fmt(r.per_value), status])
    text = _table(trows, ["lam_A", "lam_S", "A joint", "S joint", "A per-value", "S per-value",
                          "reference"])
    text += f"\n{doc['n_match']}/{doc['n_cells']} reference cells within {ns.tol:g}"
    for c in failed:
        text += (f"\n  mismatch ({c.lam_all:.3f}, {c.lam_skip:.3f}) {c.variant.value} "
                 f"{c.column}: reference {c.reference}, computed {_f4(c.computed)}")
    return doc, text


def _simulate_dataset(ns):
    design = DesignOption(ns.design)
    if getattr(ns, "calibrated", None) == "hrs":
        return skip_dataset_from_counts(HRS_COUNTS, HRS_MEAN_RESP, 100, ns.seed), "nonresponse"
    kind = ns.kind or "nonresponse"
    outcome = ns.outcome if kind == "nonresponse" else "binary"
    support = ns.support_max if outcome == "beta" else 1.0
    cfg = PopulationConfig(ns.p_x, outcome, ns.p_y_given_x, ns.beta_a, ns.beta_b, support,
                           bool(getattr(ns, "integer", False)))
    pop = gen_population(ns.n, cfg, ns.seed)
    if getattr(ns, "sample", None):
        pop = pop.sample(ns.sample, ns.seed + 1)
    if kind == "nonresponse":
        model = NonresponseModel(ns.p_miss_open, ns.p_miss_follow, ns.p_miss_all, ns.rule)
    elif kind == "misclass":
        (lam,) = _need(ns, "lam")
        model = MisclassModel(lam, ns.assumption, ns.flip_rule, ns.usage)
    else:
        model = MixtureModel(ns.p_w0, ns.p_e1, bool(getattr(ns, "independent", False)))
    return apply_design(pop, design, model, ns.seed + 2), kind


def cmd_simulate(ns, stdout):
    obs, kind = _simulate_dataset(ns)
    doc = {"kind": kind, "design": obs.design.value, "n": len(obs),
           "true_mean": obs.true_mean, "true_p1": obs.true_p1,
           "error_rates": obs.error_rates}
    if obs.design is not DesignOption.NONE:
        scen = empirical_quantities(obs)
        iv = region(scen)
        truth = obs.true_mean if kind == "nonresponse" else obs.true_p1
        doc.update(scenario=_scenario_doc(scen), region=_interval_doc(iv),
                   covered=coverage_check(truth, iv))
    else:
        doc.update(scenario=None, region=_interval_doc(region(None)), covered=True)
    if ns.out == "-":
        obs.write(stdout)
    else:
        with open(ns.out, "w", encoding="utf-8", newline="") as fh:
            obs.write(fh)
    text = "\n".join(f"{k}: {v}" for k, v in doc.items() if k != "scenario")
    return doc, text


def cmd_ingest(ns, stdin):
    design = DesignOption(ns.design)
    schema = IngestSchema(missing=ns.missing, delimiter=ns.delimiter,
                          support_max=ns.support_max, design=design)
    source = stdin.buffer if ns.input == "-" and hasattr(stdin, "buffer") else (
        stdin if ns.input == "-" else ns.input)
    parsed = parse_microdata(source, schema)
    kind = ns.kind or "nonresponse"
    if kind == "nonresponse":
        fn = compute_nr_scenario if design is DesignOption.SKIP else compute_nr_all_scenario
        scen = fn(parsed.records, schema)
    else:
        (lam,) = _need(ns, "lam")
        assumption = ErrorAssumption(ErrorBound(ns.assumption), lam)
        fn = compute_mc_scenario if design is DesignOption.SKIP else compute_mc_all_scenario
        scen = fn(parsed.records, schema, assumption, ns.positive_code)
    iv = region(scen)
    doc = {"kind": kind, "design": design.value, "n_records": len(parsed.records),
           "n_rejects": len(parsed.rejects),
           "rejects": [{"line": r.line, "respondent_id": r.respondent_id, "reason": r.reason}
                       for r in parsed.rejects],
           "scenario": _scenario_doc(scen), "region": _interval_doc(iv)}
    lines = [f"records: {len(parsed.records)}  rejects: {len(parsed.rejects)}"]
    lines += [f"{k}: {v:.4f}" for k, v in doc["scenario"].items()
              if isinstance(v, float)]
    lines.append(f"region: [{iv.lo:.4f}, {iv.hi:.4f}]  width {iv.width:.4f}")
    lines += [f"reject line {r.line}: {r.reason}" for r in parsed.rejects]
    return doc, "\n".join(lines)


COMMANDS = {"region": cmd_region, "loss": cmd_loss, "decide": cmd_decide,
            "sweep": cmd_sweep, "table2": cmd_table2}


def run(argv=None, stdout=None, stderr=None, stdin=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    stdin = stdin or sys.stdin
    try:
        try:
            ns = resolve(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if ns.command == "simulate":
                # Microdata owns stdout when written there; the report moves to stderr.
                report_to = stderr if ns.out == "-" else stdout
                doc, text = cmd_simulate(ns, stdout)
            elif ns.command == "ingest":
                report_to = stdout
                doc, text = cmd_ingest(ns, stdin)
            else:
                report_to = stdout
                doc, text = COMMANDS[ns.command](ns)
        for w in caught:
            print(f"warning: {w.message}", file=stderr)
    except SkipSeqError as exc:
        field = getattr(exc, "field", None)
        print(f"error: {field + ': ' if field else ''}{exc}", file=stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=stderr)
        return 1
    if ns.format == "json":
        doc = {"schema_version": SCHEMA_VERSION, "command": ns.command, **doc}
        print(json.dumps(doc, indent=2), file=report_to)
    else:
        print(text, file=report_to)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

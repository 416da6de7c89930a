"""Respondent-level microdata: parsing, validation and scenario quantities.

A microdata file is delimited UTF-8 text with a header row and one row per
respondent. Five columns are required (names are configurable through
:class:`IngestSchema`)::

    respondent_id,opening_asked,opening_value,followup_asked,followup_value
    r0000001,1,1,1,0.35
    r0000002,1,,0,

Item nonresponse is marked by the missing-value sentinel (empty by default).
Boolean columns accept 1/0, true/false, yes/no. Any other columns are kept on
each record as passthrough metadata.

Bad rows never abort a parse; they are collected in a rejects list with the
line number and the reason. A malformed header or a duplicate respondent id
is a hard error.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .decision import DesignOption
from .errors import IngestError, UndefinedMeanError, ValidationError
from .gfunc import GFunction
from .regions import (
    ErrorAssumption,
    MisclassAllScenario,
    MisclassSkipScenario,
    NonresponseAllScenario,
    NonresponseSkipScenario,
)

_TRUE = {"1", "true", "t", "yes", "y"}
_FALSE = {"0", "false", "f", "no", "n"}


def positive_value(values):
    """Default branch rule: the follow-up is asked after an answer above zero."""
    return np.asarray(values) > 0


@dataclass(frozen=True)
class MicroRecord:
    respondent_id: str
    opening_asked: bool
    opening_value: float | None
    followup_asked: bool
    followup_value: float | None
    extra: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class IngestSchema:
    """Column names, coding conventions and the item transform.

    ``positive_branch`` receives a numpy array of answered opening values and
    returns a boolean array. ``design`` selects which skip-logic checks apply:
    under ``ALL`` the item is asked regardless of the opening question.
    """

    respondent_id: str = "respondent_id"
    opening_asked: str = "opening_asked"
    opening_value: str = "opening_value"
    followup_asked: str = "followup_asked"
    followup_value: str = "followup_value"
    missing: str = ""
    delimiter: str = ","
    positive_branch: object = positive_value
    support_max: float = 1.0
    g: GFunction | None = None
    design: DesignOption = DesignOption.SKIP

    def __post_init__(self):
        try:
            float(self.missing)
        except ValueError:
            pass
        else:
            raise ValidationError(
                f"missing sentinel {self.missing!r} parses as a number", "missing")
        if not (self.support_max > 0):
            raise ValidationError("support_max must be positive", "support_max")
        if self.g is None:
            object.__setattr__(self, "g", GFunction.linear(self.support_max))
        object.__setattr__(self, "design", DesignOption(self.design))
        if self.design is DesignOption.NONE:
            raise ValidationError("no item is asked under design 'none'", "design")

    @property
    def columns(self) -> tuple[str, ...]:
        return (self.respondent_id, self.opening_asked, self.opening_value,
                self.followup_asked, self.followup_value)


@dataclass(frozen=True)
class Reject:
    line: int
    respondent_id: str | None
    reason: str


@dataclass
class ParseResult:
    records: list
    rejects: list

    @property
    def n_rows(self) -> int:
        return len(self.records) + len(self.rejects)


def _open_text(source):
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8")), False
    if isinstance(source, (str, os.PathLike)):
        return open(source, encoding="utf-8", newline=""), True
    if isinstance(source, io.TextIOBase) or hasattr(source, "encoding"):
        return source, False
    return io.TextIOWrapper(source, encoding="utf-8", newline=""), False


def _parse_bool(raw, name):
    v = raw.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ValueError(f"{name}: not a boolean: {raw!r}")


def _parse_value(raw, name, missing):
    if raw == missing or raw is None:
        return None
    try:
        v = float(raw)
    except ValueError:
        raise ValueError(f"{name}: not a number: {raw!r}") from None
    if not math.isfinite(v):
        raise ValueError(f"{name}: not finite: {raw!r}")
    return v


def _row_problem(rec: MicroRecord, schema: IngestSchema):
    if rec.opening_value is not None and not rec.opening_asked:
        return "opening_value present but opening_asked is false"
    if rec.followup_value is not None and not rec.followup_asked:
        return "skip logic: followup_value present but followup_asked is false"
    if schema.design is DesignOption.SKIP and rec.followup_asked:
        if not rec.opening_asked or rec.opening_value is None:
            return "skip logic: follow-up asked without an answered opening question"
        if not bool(schema.positive_branch(np.array([rec.opening_value]))[0]):
            return "skip logic: follow-up asked after a negative opening answer"
    fv = rec.followup_value
    if fv is not None and not (0.0 <= fv <= schema.support_max):
        return f"followup_value {fv} outside [0, {schema.support_max}]"
    return None


def parse_microdata(source, schema: IngestSchema | None = None) -> ParseResult:
    """Parse a microdata stream into validated records plus a rejects list.

    ``source`` may be a path, raw bytes, or a text or binary file object.
    """
    schema = schema or IngestSchema()
    fh, close = _open_text(source)
    try:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError("empty input: no header row", "header") from None
        header = [h.strip() for h in header]
        if header and header[0].startswith("﻿"):
            header[0] = header[0][1:]
        absent = [c for c in schema.columns if c not in header]
        if absent:
            raise IngestError(f"header is missing required columns: {', '.join(absent)}",
                              "header")
        if len(set(header)) != len(header):
            raise IngestError("header has duplicate column names", "header")
        pos = {name: i for i, name in enumerate(header)}
        extras = [h for h in header if h not in schema.columns]

        records, rejects, seen = [], [], set()
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                rejects.append(Reject(line, None,
                                      f"expected {len(header)} fields, found {len(row)}"))
                continue
            rid = row[pos[schema.respondent_id]].strip()
            if not rid:
                rejects.append(Reject(line, None, "empty respondent_id"))
                continue
            if rid in seen:
                raise IngestError(f"duplicate respondent_id {rid!r} on line {line}",
                                  "respondent_id")
            seen.add(rid)
            try:
                rec = MicroRecord(
                    rid,
                    _parse_bool(row[pos[schema.opening_asked]], "opening_asked"),
                    _parse_value(row[pos[schema.opening_value]], "opening_value",
                                 schema.missing),
                    _parse_bool(row[pos[schema.followup_asked]], "followup_asked"),
                    _parse_value(row[pos[schema.followup_value]], "followup_value",
                                 schema.missing),
                    {h: row[pos[h]] for h in extras},
                )
            except ValueError as exc:
                rejects.append(Reject(line, rid, str(exc)))
                continue
            problem = _row_problem(rec, schema)
            if problem:
                rejects.append(Reject(line, rid, problem))
            else:
                records.append(rec)
    finally:
        if close:
            fh.close()
    return ParseResult(records, rejects)


# --------------------------------------------------------------------------
# Columnar form shared with the simulator


@dataclass
class Columns:
    """Record fields as arrays; NaN marks an absent value."""

    opening_asked: np.ndarray
    opening_value: np.ndarray
    followup_asked: np.ndarray
    followup_value: np.ndarray

    def __len__(self):
        return len(self.opening_asked)

    @classmethod
    def from_records(cls, records):
        nan = float("nan")
        return cls(
            np.array([r.opening_asked for r in records], dtype=bool),
            np.array([nan if r.opening_value is None else r.opening_value for r in records],
                     dtype=float),
            np.array([r.followup_asked for r in records], dtype=bool),
            np.array([nan if r.followup_value is None else r.followup_value for r in records],
                     dtype=float),
        )

    def to_records(self, ids):
        out = []
        for rid, oa, ov, fa, fv in zip(ids, self.opening_asked, self.opening_value,
                                       self.followup_asked, self.followup_value):
            out.append(MicroRecord(rid, bool(oa), None if np.isnan(ov) else float(ov),
                                   bool(fa), None if np.isnan(fv) else float(fv)))
        return out


def _as_columns(data):
    if isinstance(data, Columns):
        return data
    return Columns.from_records(list(data))


def _nonempty(cols):
    if len(cols) == 0:
        raise ValidationError("no records: scenario quantities are undefined", "records")
    return len(cols)


def _positive_openers(cols, schema):
    answered = ~np.isnan(cols.opening_value)
    positive = np.zeros(len(cols), dtype=bool)
    if answered.any():
        positive[answered] = np.asarray(
            schema.positive_branch(cols.opening_value[answered]), dtype=bool)
    return answered, positive


def _answered_mean(values, schema):
    if len(values) == 0:
        raise UndefinedMeanError("no follow-up answers: the respondent mean is undefined",
                                 "followup_value")
    return math.fsum(schema.g(values).tolist()) / len(values)


def nr_skip_from_columns(cols: Columns, schema: IngestSchema) -> NonresponseSkipScenario:
    n = _nonempty(cols)
    answered_open, positive = _positive_openers(cols, schema)
    answered_follow = ~np.isnan(cols.followup_value)
    n_follow = int(answered_follow.sum())
    n_asked = int(positive.sum())
    n_silent = int((positive & ~answered_follow).sum())
    n_open_missing = int((~answered_open).sum())
    mean = _answered_mean(cols.followup_value[answered_follow], schema)
    return NonresponseSkipScenario(
        p_y_resp=n_follow / n,
        mean_resp=mean,
        p_x_resp_y_nonresp=n_silent / n,
        p_x_nonresp=n_open_missing / n,
        p_asked=n_asked / n,
    )


def nr_all_from_columns(cols: Columns, schema: IngestSchema) -> NonresponseAllScenario:
    n = _nonempty(cols)
    answered = ~np.isnan(cols.followup_value)
    mean = _answered_mean(cols.followup_value[answered], schema)
    return NonresponseAllScenario(p_nonresp=int((~answered).sum()) / n, mean_resp=mean)


def _binary_reports(cols, positive_code):
    answered = ~np.isnan(cols.followup_value)
    vals = cols.followup_value[answered]
    bad = (vals != positive_code) & (vals != 0.0)
    if bad.any():
        raise ValidationError(
            f"follow-up values must be 0 or {positive_code} for a binary item; "
            f"found {sorted(set(vals[bad].tolist()))[:5]}",
            "followup_value",
        )
    return int((cols.followup_value == positive_code).sum())


def mc_skip_from_columns(cols, schema, assumption: ErrorAssumption,
                         positive_code=1.0) -> MisclassSkipScenario:
    n = _nonempty(cols)
    n_report = _binary_reports(cols, positive_code)
    _, positive = _positive_openers(cols, schema)
    return MisclassSkipScenario(n_report / n, int(positive.sum()) / n, assumption)


def mc_all_from_columns(cols, schema, assumption: ErrorAssumption,
                        positive_code=1.0) -> MisclassAllScenario:
    n = _nonempty(cols)
    return MisclassAllScenario(_binary_reports(cols, positive_code) / n, assumption)


def compute_nr_scenario(records, schema: IngestSchema | None = None) -> NonresponseSkipScenario:
    """Nonresponse observables for a skip-sequenced item, as exact count ratios."""
    return nr_skip_from_columns(_as_columns(records), schema or IngestSchema())


def compute_nr_all_scenario(records, schema: IngestSchema | None = None):
    return nr_all_from_columns(_as_columns(records),
                               schema or IngestSchema(design=DesignOption.ALL))


def compute_mc_scenario(records, schema: IngestSchema | None, assumption: ErrorAssumption,
                        positive_code=1.0) -> MisclassSkipScenario:
    return mc_skip_from_columns(_as_columns(records), schema or IngestSchema(), assumption,
                                positive_code)


def compute_mc_all_scenario(records, schema: IngestSchema | None, assumption: ErrorAssumption,
                            positive_code=1.0) -> MisclassAllScenario:
    return mc_all_from_columns(_as_columns(records),
                               schema or IngestSchema(design=DesignOption.ALL), assumption,
                               positive_code)


# --------------------------------------------------------------------------
# Writing


def _fmt_value(v, missing):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return missing
    return repr(float(v))


def write_microdata(records, dest, schema: IngestSchema | None = None):
    """Write records in the format :func:`parse_microdata` reads.

    Floats are written with ``repr`` so a re-parse recovers them bit for bit.
    """
    schema = schema or IngestSchema()
    extras = sorted({k for r in records for k in r.extra})
    writer = csv.writer(dest, delimiter=schema.delimiter, lineterminator="\n")
    writer.writerow(list(schema.columns) + extras)
    for r in records:
        writer.writerow([
            r.respondent_id,
            "1" if r.opening_asked else "0",
            _fmt_value(r.opening_value, schema.missing),
            "1" if r.followup_asked else "0",
            _fmt_value(r.followup_value, schema.missing),
        ] + [r.extra.get(k, "") for k in extras])

"""File formats: accident CSV, model-spec JSON, generator-config JSON, atomic report writes.

CSV schema: UTF-8, comma-separated, one header row. Required columns are
outcome, road_class, location, accident_type; period and weight are optional;
every remaining column is a numeric covariate. Outcome cells hold the outcome
label, case-sensitively. Lines starting with '#' before the header are
metadata comments (emitted datasets record their RNG there) and are skipped.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path
from typing import Optional

import numpy as np

from .data import Dataset, Observation, OutcomeSet, SegmentKey
from .errors import ConfigError, IngestionError, ModelSpecError, SchemaError
from .modelspec import ModelSpec, TermSpec, build_layout
from .simulate import (
    CategoricalDist,
    ConstantDist,
    GeneratorConfig,
    IndicatorDist,
    SegmentComponent,
    UniformDist,
)

REQUIRED_COLUMNS = ("outcome", "road_class", "location", "accident_type")
OPTIONAL_COLUMNS = ("period", "weight")


def ingest_csv(path, outcome_set: Optional[OutcomeSet] = None) -> Dataset:
    """Read an accident CSV into a Dataset, reporting every malformed line at once."""
    outcome_set = outcome_set or OutcomeSet()
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        lines = list(handle)

    header_line = 0
    while header_line < len(lines) and lines[header_line].startswith("#"):
        header_line += 1
    if header_line >= len(lines):
        raise SchemaError(f"{path}: no header row found")

    rows = list(csv.reader(lines[header_line:]))
    header = rows[0]
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing required column(s) {missing}")
    if len(set(header)) != len(header):
        raise SchemaError(f"{path}: duplicate column names in header")

    col = {name: i for i, name in enumerate(header)}
    covariate_names = tuple(
        name for name in header if name not in REQUIRED_COLUMNS and name not in OPTIONAL_COLUMNS
    )

    observations = []
    problems: list[tuple[int, str]] = []
    for offset, row in enumerate(rows[1:], start=2):
        line_no = header_line + offset  # 1-based physical line in the file
        if not row or all(not cell for cell in row):
            continue
        if len(row) != len(header):
            problems.append((line_no, f"expected {len(header)} cells, got {len(row)}"))
            continue
        row_problems = []

        outcome_label = row[col["outcome"]]
        outcome_idx = None
        try:
            outcome_idx = outcome_set.index_of(outcome_label)
        except KeyError:
            row_problems.append(
                f"unknown outcome label {outcome_label!r} (expected one of {outcome_set.labels})"
            )

        segment = None
        try:
            segment = SegmentKey(
                road_class=row[col["road_class"]],
                location=row[col["location"]],
                accident_type=row[col["accident_type"]],
            )
        except ValueError as exc:
            row_problems.append(str(exc))

        period = None
        if "period" in col:
            cell = row[col["period"]]
            period = cell if cell else None

        weight = 1.0
        if "weight" in col:
            cell = row[col["weight"]]
            if cell:
                try:
                    weight = float(cell)
                    if not weight > 0:
                        row_problems.append(f"weight must be positive, got {cell}")
                except ValueError:
                    row_problems.append(f"non-numeric weight {cell!r}")

        covariates = {}
        for name in covariate_names:
            cell = row[col[name]]
            if cell == "":
                row_problems.append(f"missing value for covariate {name!r}")
                continue
            try:
                covariates[name] = float(cell)
            except ValueError:
                row_problems.append(f"non-numeric value {cell!r} for covariate {name!r}")

        if row_problems:
            problems.extend((line_no, msg) for msg in row_problems)
            continue
        observations.append(Observation(covariates, outcome_idx, segment, period, weight))

    if problems:
        listing = "\n".join(f"  line {n}: {msg}" for n, msg in problems)
        raise IngestionError(
            f"{path}: {len(problems)} problem(s) while ingesting:\n{listing}",
            lines=[n for n, _ in problems],
        )
    return Dataset(outcome_set, tuple(observations), covariate_names)


def _format_value(value: float) -> str:
    # repr round-trips float64 exactly, preserving emit -> ingest identity
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def write_csv(dataset: Dataset, path, note: Optional[str] = None) -> None:
    """Emit a dataset in the ingestion schema; `note` becomes a '#' metadata line."""
    include_period = any(o.period is not None for o in dataset.observations)
    include_weight = any(o.weight != 1.0 for o in dataset.observations)
    header = list(REQUIRED_COLUMNS)
    if include_period:
        header.append("period")
    if include_weight:
        header.append("weight")
    header.extend(dataset.variable_names)

    out = []
    if note:
        out.append(f"# {note}")
    out.append(",".join(header))
    for obs in dataset.observations:
        row = [
            dataset.outcome_set.labels[obs.outcome],
            obs.segment.road_class,
            obs.segment.location,
            obs.segment.accident_type,
        ]
        if include_period:
            row.append(obs.period or "")
        if include_weight:
            row.append(_format_value(obs.weight))
        row.extend(_format_value(obs.covariates[name]) for name in dataset.variable_names)
        out.append(",".join(row))
    write_text_atomic(path, "\n".join(out) + "\n")


def write_text_atomic(path, text: str) -> None:
    """Write via a temp file in the target directory plus rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_model_spec(path) -> ModelSpec:
    """Parse a model-spec JSON file: outcomes (base first) and terms."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelSpecError(f"{path}: not valid JSON ({exc})") from None
    return model_spec_from_dict(doc, source=str(path))


def model_spec_from_dict(doc: dict, source: str = "<inline>") -> ModelSpec:
    if not isinstance(doc, dict) or "outcomes" not in doc or "terms" not in doc:
        raise ModelSpecError(f"{source}: expected an object with 'outcomes' and 'terms'")
    try:
        outcome_set = OutcomeSet(tuple(str(lab) for lab in doc["outcomes"]))
    except ValueError as exc:
        raise ModelSpecError(f"{source}: {exc}") from None

    terms = []
    for i, raw in enumerate(doc["terms"]):
        if not isinstance(raw, dict) or "variable" not in raw or "outcomes" not in raw:
            raise ModelSpecError(f"{source}: term {i} needs 'variable' and 'outcomes'")
        outs = []
        for item in raw["outcomes"]:
            if isinstance(item, str):
                try:
                    outs.append(outcome_set.index_of(item))
                except KeyError as exc:
                    raise ModelSpecError(f"{source}: term {i}: {exc}") from None
            else:
                outs.append(int(item))
        terms.append(TermSpec(str(raw["variable"]), tuple(outs), bool(raw.get("shared", False))))
    return ModelSpec(outcome_set, tuple(terms))


def model_spec_to_dict(model: ModelSpec) -> dict:
    return {
        "outcomes": list(model.outcome_set.labels),
        "terms": [
            {
                "variable": t.variable,
                "outcomes": [model.outcome_set.labels[i] for i in t.outcomes],
                "shared": t.shared,
            }
            for t in model.terms
        ],
    }


_DIST_PARSERS = {
    "constant": lambda d: ConstantDist(float(d["value"])),
    "uniform": lambda d: UniformDist(float(d["low"]), float(d["high"])),
    "categorical": lambda d: CategoricalDist(tuple(d["values"]), tuple(d["probs"])),
    "indicator": lambda d: IndicatorDist(float(d["p"])),
}


def _parse_distribution(name: str, raw: dict):
    if not isinstance(raw, dict) or "dist" not in raw:
        raise ConfigError(f"covariate {name!r}: expected an object with a 'dist' key")
    kind = raw["dist"]
    parser = _DIST_PARSERS.get(kind)
    if parser is None:
        raise ConfigError(
            f"covariate {name!r}: unknown distribution {kind!r} "
            f"(expected one of {sorted(_DIST_PARSERS)})"
        )
    try:
        return parser(raw)
    except KeyError as exc:
        raise ConfigError(f"covariate {name!r}: missing distribution parameter {exc}") from None


def _parse_theta(raw, model: ModelSpec) -> np.ndarray:
    layout = build_layout(model)
    if isinstance(raw, dict):
        names = layout.slot_names()
        missing = [n for n in names if n not in raw]
        unknown = [n for n in raw if n not in names]
        if missing or unknown:
            raise ConfigError(f"theta mapping mismatch (missing {missing}, unknown {unknown})")
        return np.array([float(raw[n]) for n in names])
    values = np.asarray([float(v) for v in raw], dtype=np.float64)
    if values.shape != (layout.n_params,):
        raise ConfigError(
            f"theta needs {layout.n_params} values (slot order {list(layout.slot_names())}), "
            f"got {values.shape[0]}"
        )
    return values


def load_generator_config(path) -> tuple[GeneratorConfig, Optional[str]]:
    """Parse a generator-config JSON file; returns the config and an optional period label."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a JSON object")

    model_raw = doc.get("model")
    if isinstance(model_raw, str):
        model = load_model_spec(path.parent / model_raw)
    elif isinstance(model_raw, dict):
        model = model_spec_from_dict(model_raw, source=f"{path}#model")
    else:
        raise ConfigError(f"{path}: 'model' must be a spec object or a path to one")

    for key in ("theta", "n", "covariates"):
        if key not in doc:
            raise ConfigError(f"{path}: missing required key {key!r}")

    covariates = {
        name: _parse_distribution(name, raw) for name, raw in doc["covariates"].items()
    }

    segments = []
    for i, raw in enumerate(doc.get("segments", [])):
        try:
            key = SegmentKey(
                road_class=raw.get("road_class", "other"),
                location=raw.get("location", "other"),
                accident_type=raw.get("accident_type", "other"),
            )
        except ValueError as exc:
            raise ConfigError(f"{path}: segment {i}: {exc}") from None
        theta = _parse_theta(raw["theta"], model) if "theta" in raw else None
        segments.append(SegmentComponent(key, float(raw.get("weight", 1.0)), theta))

    config = GeneratorConfig(
        model=model,
        true_theta=_parse_theta(doc["theta"], model),
        n_obs=int(doc["n"]),
        covariates=covariates,
        segments=tuple(segments),
        seed=int(doc.get("seed", 0)),
    )
    period = doc.get("period")
    return config, (str(period) if period is not None else None)

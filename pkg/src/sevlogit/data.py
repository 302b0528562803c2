"""Core record and dataset types: outcomes, observations, segments, partitioning, summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import SchemaError

ROAD_CLASSES = ("county-road", "city-street", "state-route", "us-route", "interstate", "other")
LOCATIONS = ("rural", "urban", "other")
ACCIDENT_TYPES = ("one-vehicle", "C+C", "C+LT", "LT+LT", "C/LT+C/LT", "C/LT+HT", "other")

PARTITION_DIMS = ("road_class", "location", "accident_type", "period")

DEFAULT_OUTCOME_LABELS = ("property-damage-only", "injury", "fatality")


@dataclass(frozen=True)
class OutcomeSet:
    """Ordered severity outcomes. Index 0 is the base outcome (utility pinned to zero)."""

    labels: tuple[str, ...] = DEFAULT_OUTCOME_LABELS

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) < 2:
            raise ValueError("an outcome set needs at least two outcomes")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate outcome labels: {self.labels}")
        if any(not lab for lab in self.labels):
            raise ValueError("outcome labels must be non-empty")

    @property
    def n_outcomes(self) -> int:
        return len(self.labels)

    @property
    def base_label(self) -> str:
        return self.labels[0]

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown outcome label {label!r}") from None


@dataclass(frozen=True)
class SegmentKey:
    """Where and how the accident happened; all three fields are closed enumerations."""

    road_class: str = "other"
    location: str = "other"
    accident_type: str = "other"

    def __post_init__(self):
        if self.road_class not in ROAD_CLASSES:
            raise ValueError(f"unknown road_class {self.road_class!r}; expected one of {ROAD_CLASSES}")
        if self.location not in LOCATIONS:
            raise ValueError(f"unknown location {self.location!r}; expected one of {LOCATIONS}")
        if self.accident_type not in ACCIDENT_TYPES:
            raise ValueError(
                f"unknown accident_type {self.accident_type!r}; expected one of {ACCIDENT_TYPES}"
            )


@dataclass(frozen=True)
class Observation:
    """One accident record: covariates, observed outcome index, segment, optional period."""

    covariates: Mapping[str, float]
    outcome: int
    segment: SegmentKey = SegmentKey()
    period: Optional[str] = None
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "covariates", dict(self.covariates))
        if self.outcome < 0:
            raise ValueError(f"outcome index must be non-negative, got {self.outcome}")
        if not (self.weight > 0) or not math.isfinite(self.weight):
            raise ValueError(f"weight must be positive and finite, got {self.weight}")
        for name, value in self.covariates.items():
            if not math.isfinite(value):
                raise ValueError(f"covariate {name!r} is not finite: {value}")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable collection of observations over a fixed outcome set and variable list."""

    outcome_set: OutcomeSet
    observations: tuple[Observation, ...]
    variable_names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "observations", tuple(self.observations))
        object.__setattr__(self, "variable_names", tuple(self.variable_names))
        declared = set(self.variable_names)
        if len(declared) != len(self.variable_names):
            raise ValueError("duplicate variable names")
        n_out = self.outcome_set.n_outcomes
        for idx, obs in enumerate(self.observations):
            if obs.outcome >= n_out:
                raise ValueError(
                    f"observation {idx}: outcome index {obs.outcome} out of range for {n_out} outcomes"
                )
            keys = set(obs.covariates)
            if keys != declared:
                missing = sorted(declared - keys)
                extra = sorted(keys - declared)
                raise ValueError(
                    f"observation {idx}: covariates do not match declared variables "
                    f"(missing {missing}, unexpected {extra})"
                )

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.outcome_set == other.outcome_set
            and self.variable_names == other.variable_names
            and self.observations == other.observations
        )

    @property
    def n_obs(self) -> int:
        return len(self.observations)

    @cached_property
    def covariate_matrix(self) -> np.ndarray:
        """(n_obs, n_variables) float64 matrix in variable_names column order."""
        out = np.empty((self.n_obs, len(self.variable_names)))
        for i, obs in enumerate(self.observations):
            for j, name in enumerate(self.variable_names):
                out[i, j] = obs.covariates[name]
        out.flags.writeable = False
        return out

    @cached_property
    def outcome_indices(self) -> np.ndarray:
        out = np.fromiter((o.outcome for o in self.observations), dtype=np.int64, count=self.n_obs)
        out.flags.writeable = False
        return out

    @cached_property
    def weights(self) -> np.ndarray:
        out = np.fromiter((o.weight for o in self.observations), dtype=np.float64, count=self.n_obs)
        out.flags.writeable = False
        return out

    def outcome_counts(self) -> np.ndarray:
        return np.bincount(self.outcome_indices, minlength=self.outcome_set.n_outcomes)

    def with_period(self, period: Optional[str]) -> "Dataset":
        """Copy of the dataset with every observation relabelled to the given period."""
        obs = tuple(
            Observation(o.covariates, o.outcome, o.segment, period, o.weight)
            for o in self.observations
        )
        return Dataset(self.outcome_set, obs, self.variable_names)


def concatenate(datasets: Sequence[Dataset]) -> Dataset:
    """Pool datasets sharing an outcome set and variable list."""
    if not datasets:
        raise ValueError("nothing to concatenate")
    first = datasets[0]
    for ds in datasets[1:]:
        if ds.outcome_set != first.outcome_set:
            raise ValueError("outcome sets differ")
        if ds.variable_names != first.variable_names:
            raise ValueError("variable lists differ")
    obs = tuple(o for ds in datasets for o in ds.observations)
    return Dataset(first.outcome_set, obs, first.variable_names)


def _dim_value(obs: Observation, dim: str):
    if dim == "period":
        return obs.period
    return getattr(obs.segment, dim)


def partition(dataset: Dataset, dims: Sequence[str]) -> dict[tuple, Dataset]:
    """Split a dataset by segment/period dimensions.

    Parameters
    ----------
    dataset : Dataset
    dims : subset of {"road_class", "location", "accident_type", "period"}

    Returns
    -------
    dict mapping a tuple of dimension values (in canonical PARTITION_DIMS order)
    to the sub-dataset of observations carrying those values. Sub-datasets are
    disjoint, cover the input, and preserve the outcome set and variable list.
    Keys are sorted for deterministic iteration.
    """
    dims = tuple(dims)
    if not dims:
        raise ValueError("dims must be non-empty")
    bad = [d for d in dims if d not in PARTITION_DIMS]
    if bad:
        raise ValueError(f"unknown partition dims {bad}; expected subset of {PARTITION_DIMS}")
    dims = tuple(d for d in PARTITION_DIMS if d in dims)

    groups: dict[tuple, list[Observation]] = {}
    for obs in dataset.observations:
        key = tuple(_dim_value(obs, d) for d in dims)
        groups.setdefault(key, []).append(obs)

    ordered = sorted(groups, key=lambda k: tuple("" if v is None else str(v) for v in k))
    return {
        key: Dataset(dataset.outcome_set, tuple(groups[key]), dataset.variable_names)
        for key in ordered
    }


@dataclass(frozen=True)
class SummaryBin:
    """One speed-limit band of a severity-distribution summary."""

    label: str
    lower: float  # -inf for the open bottom band
    upper: float  # +inf for the open top band
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def shares(self) -> Optional[tuple[float, ...]]:
        """Outcome shares within the band, or None for an empty band."""
        if self.total == 0:
            return None
        return tuple(c / self.total for c in self.counts)


@dataclass(frozen=True)
class SummaryTable:
    """Severity distribution by speed-limit band (rows: bands, columns: outcomes)."""

    outcome_labels: tuple[str, ...]
    variable: str
    bins: tuple[SummaryBin, ...]

    @property
    def total(self) -> int:
        return sum(b.total for b in self.bins)


def _band_label(lower: float, upper: float) -> str:
    if lower == -math.inf:
        return f"<= {upper:g}"
    if upper == math.inf:
        return f"> {lower:g}"
    return f"({lower:g}, {upper:g}]"


def summarize(dataset: Dataset, bins: Sequence[float], variable: str = "speed_limit") -> SummaryTable:
    """Tabulate outcome shares by bands of a speed-limit-like variable.

    `bins` are strictly increasing interior edges; with m edges the table has
    m + 1 bands: (-inf, b0], (b0, b1], ..., (b_{m-1}, +inf), so every
    observation lands in exactly one band and band counts sum to the dataset size.
    """
    if variable not in dataset.variable_names:
        raise SchemaError(f"dataset has no {variable!r} variable")
    edges = [float(b) for b in bins]
    if not edges:
        raise ValueError("bins must be non-empty")
    if any(b >= c for b, c in zip(edges, edges[1:])):
        raise ValueError(f"bin edges must be strictly increasing, got {edges}")

    n_out = dataset.outcome_set.n_outcomes
    bounds = [-math.inf, *edges, math.inf]
    counts = np.zeros((len(bounds) - 1, n_out), dtype=np.int64)

    col = dataset.variable_names.index(variable)
    values = dataset.covariate_matrix[:, col]
    # side="left" against the interior edges yields the (a, b] band index
    band = np.searchsorted(np.asarray(edges), values, side="left")
    for b, out in zip(band, dataset.outcome_indices):
        counts[b, out] += 1

    rows = tuple(
        SummaryBin(
            label=_band_label(bounds[i], bounds[i + 1]),
            lower=bounds[i],
            upper=bounds[i + 1],
            counts=tuple(int(c) for c in counts[i]),
        )
        for i in range(len(bounds) - 1)
    )
    return SummaryTable(dataset.outcome_set.labels, variable, rows)

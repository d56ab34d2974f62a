"""Domain types, file ingestion, covariate standardization, and rank utilities.

Delimited-file conventions (comma-separated, UTF-8, header row):

* ``census.csv``   -- household_id, community_id, one column per covariate
  (columns whose name starts with ``elite_`` are treated as elite-connection
  covariates).
* ``rankings.csv`` -- community_id, ranker_id, household_id, rank.
* ``survey.csv``   -- household_id, community_id, y, covariate columns.
* ``quotas.csv``   -- community_id, quota.

Rank orientation throughout: rank 1 is the most needy household and targeting
selects the *lowest* scores.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    CommunityMismatch,
    DuplicateHouseholdId,
    MissingColumn,
    NonNumericCovariate,
    NotAPermutation,
    RankTieWarning,
    UnknownHousehold,
    ZeroVarianceColumn,
)

CENSUS_ID_COLUMNS = ("household_id", "community_id")
RANKING_COLUMNS = ("community_id", "ranker_id", "household_id", "rank")
ELITE_PREFIX = "elite_"


@dataclass(frozen=True, eq=False)
class Household:
    """One potential beneficiary.

    ``x`` holds the raw (unscaled) covariate row; scaling is applied at the
    dataset level so that train/test subsets share identical divisors.
    ``y`` is log expenditure per capita and is present only for households
    covered by an expenditure survey. Identity semantics: two loads of the
    same row are distinct objects.
    """

    id: str
    community_id: str
    x: np.ndarray
    elite_cols: tuple[int, ...] = ()
    y: float | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        if any(c < 0 or c >= x.shape[0] for c in self.elite_cols):
            raise ValueError(f"elite column index out of range for household {self.id}")


@dataclass(frozen=True)
class RankingScheme:
    """One ranker's complete ordering of one community, rank 1 = most needy."""

    community_id: str
    ranker_id: str
    ranks: Mapping[str, int]

    def __post_init__(self):
        n = len(self.ranks)
        if sorted(self.ranks.values()) != list(range(1, n + 1)):
            raise NotAPermutation(
                f"ranks for community {self.community_id!r}, ranker "
                f"{self.ranker_id!r} are not a permutation of 1..{n}"
            )

    @property
    def n(self) -> int:
        return len(self.ranks)

    def ordered_ids(self) -> list[str]:
        """Household ids in ascending rank order (most needy first)."""
        return sorted(self.ranks, key=self.ranks.__getitem__)


@dataclass(frozen=True)
class ColumnScaling:
    kind: str  # "binary" | "continuous"
    divisor: float

    def __post_init__(self):
        if self.divisor <= 0:
            raise ValueError("scaling divisor must be positive")


@dataclass(frozen=True)
class ScalingInfo:
    """Per-column divisors recorded so new data can be scaled identically."""

    columns: tuple[str, ...]
    scalings: tuple[ColumnScaling, ...]

    @property
    def divisors(self) -> np.ndarray:
        return np.array([s.divisor for s in self.scalings])

    def apply(self, raw: np.ndarray) -> np.ndarray:
        raw = np.asarray(raw, dtype=float)
        return raw / self.divisors

    def coefficients_to_raw(self, coefs: np.ndarray) -> np.ndarray:
        """Map coefficients on the scaled covariates to raw-covariate scale."""
        return np.asarray(coefs, dtype=float) / self.divisors

    def coefficients_to_scaled(self, coefs: np.ndarray) -> np.ndarray:
        """Map raw-scale coefficients to the scale the model is fit on."""
        return np.asarray(coefs, dtype=float) * self.divisors

    @classmethod
    def identity(cls, columns: Sequence[str]) -> "ScalingInfo":
        return cls(tuple(columns), tuple(ColumnScaling("binary", 1.0) for _ in columns))


def standardize_covariates(
    raw: np.ndarray,
    columns: Sequence[str] | None = None,
    kind_overrides: Mapping[str, str] | None = None,
) -> tuple[np.ndarray, ScalingInfo]:
    """Divide continuous columns by twice their sample standard deviation.

    Binary columns (value set within {0, 1}) are left untouched, which puts
    every covariate on a comparable scale: a binary flag with equal
    probabilities has standard deviation 0.5, so a one-unit change in it
    matches a two-standard-deviation change in a scaled continuous column.

    Binary detection is by value set; ``kind_overrides`` (column name ->
    "binary" | "continuous") forces a kind regardless of the values.
    Returns the scaled matrix together with the recorded divisors so that
    test or census data can be scaled identically later.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2:
        raise ValueError("expected a 2-d covariate matrix")
    if raw.shape[0] < 2:
        raise ValueError("standardization needs at least 2 rows")
    if columns is None:
        columns = [f"x{j + 1}" for j in range(raw.shape[1])]
    if len(columns) != raw.shape[1]:
        raise ValueError("column-name count does not match matrix width")

    overrides = dict(kind_overrides or {})
    unknown = set(overrides) - set(columns)
    if unknown:
        raise ValueError(f"scaling overrides for unknown columns: {sorted(unknown)}")

    scalings = []
    for j, name in enumerate(columns):
        col = raw[:, j]
        kind = overrides.get(name)
        if kind is None:
            kind = "binary" if set(np.unique(col)) <= {0.0, 1.0} else "continuous"
        elif kind not in ("binary", "continuous"):
            raise ValueError(f"bad scaling kind {kind!r} for column {name!r}")
        if kind == "binary":
            scalings.append(ColumnScaling("binary", 1.0))
            continue
        sd = col.std(ddof=1)
        if sd == 0.0:
            raise ZeroVarianceColumn(f"column {name!r} is constant")
        scalings.append(ColumnScaling("continuous", 2.0 * sd))
    info = ScalingInfo(tuple(columns), tuple(scalings))
    return info.apply(raw), info


def rank_of(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Ranks of a latent vector: the smallest value gets rank 1.

    Exact ties cannot occur for continuous latents; if they do occur (for
    degenerate inputs) they are broken by index order and a RankTieWarning
    is emitted.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("rank_of expects a non-empty 1-d vector")
    order = np.argsort(v, kind="stable")
    if np.any(np.diff(v[order]) == 0.0):
        warnings.warn("exact ties broken by index order", RankTieWarning, stacklevel=2)
    ranks = np.empty(v.size, dtype=int)
    ranks[order] = np.arange(1, v.size + 1)
    return ranks


@dataclass(frozen=True)
class Dataset:
    """Households plus community rankings, quotas, and the covariate scaling.

    Households appear exactly once each; those belonging to an expenditure
    survey carry ``y``. All types are immutable after construction and safe
    to share across threads.
    """

    households: tuple[Household, ...]
    rankings: tuple[RankingScheme, ...]
    quotas: Mapping[str, int] = field(default_factory=dict)
    covariate_names: tuple[str, ...] = ()
    scaling: ScalingInfo | None = None

    def __post_init__(self):
        object.__setattr__(self, "households", tuple(self.households))
        object.__setattr__(self, "rankings", tuple(self.rankings))
        if not self.households:
            raise ValueError("dataset has no households")
        dims = {h.x.shape[0] for h in self.households}
        if len(dims) != 1:
            raise ValueError("households have inconsistent covariate dimensions")
        if not self.covariate_names:
            object.__setattr__(
                self, "covariate_names",
                tuple(f"x{j + 1}" for j in range(dims.pop())),
            )
        elites = {h.elite_cols for h in self.households}
        if len(elites) != 1:
            raise ValueError("households disagree on elite column indices")
        ids = [h.id for h in self.households]
        if len(set(ids)) != len(ids):
            raise DuplicateHouseholdId("duplicate household ids in dataset")
        members = self.community_members
        for scheme in self.rankings:
            have = set(scheme.ranks)
            want = {h.id for h in members.get(scheme.community_id, [])}
            if not have <= want:
                raise UnknownHousehold(
                    f"ranking for {scheme.community_id!r}/{scheme.ranker_id!r} "
                    "references households outside the dataset"
                )
            if have != want:
                raise CommunityMismatch(
                    f"ranking for {scheme.community_id!r}/{scheme.ranker_id!r} "
                    "does not cover the full community"
                )
        for cid, q in self.quotas.items():
            n_k = len(members.get(cid, []))
            if n_k and not 1 <= q <= n_k:
                raise ValueError(f"quota {q} out of range for community {cid!r}")

    # -- cached lookups -------------------------------------------------

    @cached_property
    def index_of(self) -> dict[str, int]:
        return {h.id: i for i, h in enumerate(self.households)}

    @cached_property
    def community_members(self) -> dict[str, list[Household]]:
        out: dict[str, list[Household]] = {}
        for h in self.households:
            out.setdefault(h.community_id, []).append(h)
        return out

    @cached_property
    def X_raw(self) -> np.ndarray:
        m = np.vstack([h.x for h in self.households])
        m.setflags(write=False)
        return m

    @cached_property
    def X(self) -> np.ndarray:
        """Covariate matrix with the dataset's scaling applied."""
        m = self.X_raw if self.scaling is None else self.scaling.apply(self.X_raw)
        m = np.ascontiguousarray(m)
        m.setflags(write=False)
        return m

    @property
    def elite_cols(self) -> tuple[int, ...]:
        return self.households[0].elite_cols

    @property
    def ranked_community_ids(self) -> tuple[str, ...]:
        return tuple(sorted({s.community_id for s in self.rankings}))

    @property
    def ranker_ids(self) -> tuple[str, ...]:
        return tuple(sorted({s.ranker_id for s in self.rankings}))

    def survey_households(self) -> tuple[Household, ...]:
        return tuple(h for h in self.households if h.y is not None)

    def subset(self, community_ids: Iterable[str]) -> "Dataset":
        """Restrict to the given communities, keeping the parent scaling."""
        keep = set(community_ids)
        return Dataset(
            households=tuple(h for h in self.households if h.community_id in keep),
            rankings=tuple(s for s in self.rankings if s.community_id in keep),
            quotas={c: q for c, q in self.quotas.items() if c in keep},
            covariate_names=self.covariate_names,
            scaling=self.scaling,
        )

    def restricted_view(
        self,
        ranked_communities: Iterable[str],
        survey_communities: Iterable[str] = (),
    ) -> "Dataset":
        """A fitting view: rankings only from ``ranked_communities`` and
        expenditures only on households of ``survey_communities``."""
        ranked = set(ranked_communities)
        surveyed = set(survey_communities)
        households = []
        for h in self.households:
            if h.community_id not in ranked | surveyed:
                continue
            if h.community_id not in surveyed and h.y is not None:
                h = replace(h, y=None)
            households.append(h)
        return Dataset(
            households=tuple(households),
            rankings=tuple(s for s in self.rankings if s.community_id in ranked),
            quotas={c: q for c, q in self.quotas.items() if c in ranked | surveyed},
            covariate_names=self.covariate_names,
            scaling=self.scaling,
        )


def assemble_dataset(
    households: Sequence[Household],
    rankings: Sequence[RankingScheme] = (),
    quotas: Mapping[str, int] | None = None,
    covariate_names: Sequence[str] | None = None,
    standardize: bool = True,
    kind_overrides: Mapping[str, str] | None = None,
) -> Dataset:
    """Build a Dataset, computing the covariate scaling over all households."""
    names = tuple(covariate_names) if covariate_names else tuple(
        f"x{j + 1}" for j in range(households[0].x.shape[0])
    )
    if standardize:
        raw = np.vstack([h.x for h in households])
        _, info = standardize_covariates(raw, names, kind_overrides)
    else:
        info = ScalingInfo.identity(names)
    return Dataset(
        households=tuple(households),
        rankings=tuple(rankings),
        quotas=dict(quotas or {}),
        covariate_names=names,
        scaling=info,
    )


# ---------------------------------------------------------------------------
# file ingestion
# ---------------------------------------------------------------------------


def _read_rows(path: str | Path, required: Sequence[str]) -> tuple[list[str], list[dict]]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise MissingColumn(f"{path.name}: missing column(s) {', '.join(missing)}")
        rows = list(reader)
    return list(header), rows


def _parse_covariates(row: dict, columns: Sequence[str], path_name: str, line: int) -> np.ndarray:
    vals = []
    for col in columns:
        cell = (row.get(col) or "").strip()
        if not cell:
            raise NonNumericCovariate(f"{path_name}: empty value in column {col!r} at row {line}")
        try:
            vals.append(float(cell))
        except ValueError:
            raise NonNumericCovariate(
                f"{path_name}: non-numeric value {cell!r} in column {col!r} at row {line}"
            ) from None
    return np.array(vals)


def load_census(path: str | Path) -> list[Household]:
    """Read census rows into households; covariate columns keep header order."""
    header, rows = _read_rows(path, CENSUS_ID_COLUMNS)
    covariates = [c for c in header if c not in CENSUS_ID_COLUMNS]
    elite = tuple(j for j, c in enumerate(covariates) if c.startswith(ELITE_PREFIX))
    name = Path(path).name
    seen: set[str] = set()
    out = []
    for line, row in enumerate(rows, start=2):
        hid = row["household_id"].strip()
        if hid in seen:
            raise DuplicateHouseholdId(f"{name}: duplicate household_id {hid!r}")
        seen.add(hid)
        out.append(
            Household(
                id=hid,
                community_id=row["community_id"].strip(),
                x=_parse_covariates(row, covariates, name, line),
                elite_cols=elite,
            )
        )
    return out


def load_survey(path: str | Path) -> list[Household]:
    """Read survey rows (covariates plus log expenditure per capita ``y``)."""
    header, rows = _read_rows(path, CENSUS_ID_COLUMNS + ("y",))
    covariates = [c for c in header if c not in CENSUS_ID_COLUMNS and c != "y"]
    elite = tuple(j for j, c in enumerate(covariates) if c.startswith(ELITE_PREFIX))
    name = Path(path).name
    seen: set[str] = set()
    out = []
    for line, row in enumerate(rows, start=2):
        hid = row["household_id"].strip()
        if hid in seen:
            raise DuplicateHouseholdId(f"{name}: duplicate household_id {hid!r}")
        seen.add(hid)
        try:
            y = float(row["y"])
        except (TypeError, ValueError):
            raise NonNumericCovariate(
                f"{name}: non-numeric y at row {line}"
            ) from None
        out.append(
            Household(
                id=hid,
                community_id=row["community_id"].strip(),
                x=_parse_covariates(row, covariates, name, line),
                elite_cols=elite,
                y=y,
            )
        )
    return out


def merge_survey(census: Sequence[Household], survey: Sequence[Household]) -> list[Household]:
    """Overlay survey expenditures on the census; new survey households are appended."""
    position = {h.id: i for i, h in enumerate(census)}
    merged = list(census)
    for s in survey:
        i = position.get(s.id)
        if i is None:
            merged.append(s)
            continue
        base = merged[i]
        if not np.array_equal(base.x, s.x):
            raise CommunityMismatch(
                f"survey covariates for household {s.id!r} disagree with the census"
            )
        merged[i] = replace(base, y=s.y)
    return merged


def load_rankings(path: str | Path, census: Sequence[Household]) -> list[RankingScheme]:
    """Read ranking rows and group them into validated per-ranker schemes."""
    _, rows = _read_rows(path, RANKING_COLUMNS)
    community_of = {h.id: h.community_id for h in census}
    name = Path(path).name
    grouped: dict[tuple[str, str], dict[str, int]] = {}
    for line, row in enumerate(rows, start=2):
        cid = row["community_id"].strip()
        rid = row["ranker_id"].strip()
        hid = row["household_id"].strip()
        if hid not in community_of:
            raise UnknownHousehold(f"{name}: household {hid!r} at row {line} not in census")
        if community_of[hid] != cid:
            raise CommunityMismatch(
                f"{name}: household {hid!r} belongs to {community_of[hid]!r}, "
                f"not {cid!r} (row {line})"
            )
        try:
            rank = int(row["rank"])
        except (TypeError, ValueError):
            raise NotAPermutation(f"{name}: non-integer rank at row {line}") from None
        grouped.setdefault((cid, rid), {})[hid] = rank
    return [
        RankingScheme(community_id=cid, ranker_id=rid, ranks=ranks)
        for (cid, rid), ranks in sorted(grouped.items())
    ]


def load_quotas(path: str | Path) -> dict[str, int]:
    _, rows = _read_rows(path, ("community_id", "quota"))
    return {row["community_id"].strip(): int(row["quota"]) for row in rows}


# ---------------------------------------------------------------------------
# serialization (the same formats the loaders read)
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(float(v))


def write_census(path: str | Path, households: Sequence[Household],
                 covariate_names: Sequence[str]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(CENSUS_ID_COLUMNS) + list(covariate_names))
        for h in households:
            w.writerow([h.id, h.community_id] + [_fmt(v) for v in h.x])


def write_survey(path: str | Path, households: Sequence[Household],
                 covariate_names: Sequence[str]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(CENSUS_ID_COLUMNS) + ["y"] + list(covariate_names))
        for h in households:
            if h.y is None:
                continue
            w.writerow([h.id, h.community_id, _fmt(h.y)] + [_fmt(v) for v in h.x])


def write_rankings(path: str | Path, rankings: Sequence[RankingScheme]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RANKING_COLUMNS)
        for scheme in rankings:
            for hid in scheme.ordered_ids():
                w.writerow([scheme.community_id, scheme.ranker_id, hid, scheme.ranks[hid]])


def write_quotas(path: str | Path, quotas: Mapping[str, int]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["community_id", "quota"])
        for cid in sorted(quotas):
            w.writerow([cid, quotas[cid]])


def write_scaling(path: str | Path, info: ScalingInfo) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["column", "kind", "divisor"])
        for name, s in zip(info.columns, info.scalings):
            w.writerow([name, s.kind, _fmt(s.divisor)])


def load_scaling(path: str | Path) -> ScalingInfo:
    _, rows = _read_rows(path, ("column", "kind", "divisor"))
    return ScalingInfo(
        tuple(r["column"] for r in rows),
        tuple(ColumnScaling(r["kind"], float(r["divisor"])) for r in rows),
    )

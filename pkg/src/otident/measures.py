"""Discrete univariate laws and conditional-law tables over a covariate grid."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtri
from scipy.stats import norm

from .errors import InvalidArgument, InvalidDistribution, ParseError

MERGE_TOL = 1e-12
NORM_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiscreteDist:
    """A univariate law with finitely many atoms.

    Use :func:`make_discrete` to build one; the constructor assumes the
    atoms are already in canonical form.
    """

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        object.__setattr__(self, "probs", _frozen(self.probs))
        if self.values.ndim != 1 or self.values.shape != self.probs.shape or self.values.size == 0:
            raise InvalidDistribution("values and probs must be non-empty 1-d arrays of equal length")
        if np.any(self.probs < 0):
            raise InvalidDistribution("negative probability")
        if abs(self.probs.sum() - 1.0) > NORM_TOL:
            raise InvalidDistribution(f"probabilities sum to {self.probs.sum()!r}, not 1")
        if np.any(np.diff(self.values) <= 0):
            raise InvalidDistribution("values must be strictly increasing")

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.probs.tolist()))

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, DiscreteDist):
            return NotImplemented
        return np.array_equal(self.values, other.values) and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash((self.values.tobytes(), self.probs.tobytes()))

    def mean(self) -> float:
        return float(self.values @ self.probs)

    def second_moment(self) -> float:
        return float((self.values**2) @ self.probs)

    def cdf(self, y) -> np.ndarray:
        cum = np.cumsum(self.probs)
        idx = np.searchsorted(self.values, np.asarray(y, dtype=float), side="right")
        return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)

    def quantile(self, u) -> np.ndarray:
        """Left-continuous quantile ``inf{y : F(y) >= u}``."""
        cum = np.cumsum(self.probs)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, np.asarray(u, dtype=float), side="left")
        return self.values[np.minimum(idx, self.values.size - 1)]

    def scaled(self, factor: float) -> "DiscreteDist":
        return make_discrete(zip(self.values * factor, self.probs))


def make_discrete(pairs: Iterable[tuple[float, float]]) -> DiscreteDist:
    """Turn ``(value, prob)`` pairs into a sorted law with unit mass.

    Values closer than 1e-12 to their sorted predecessor are merged into it.
    """
    arr = np.array([(float(v), float(p)) for v, p in pairs], dtype=float).reshape(-1, 2)
    if arr.shape[0] == 0:
        raise InvalidDistribution("empty distribution")
    vals, probs = arr[:, 0], arr[:, 1]
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(probs))):
        raise InvalidDistribution("non-finite value or probability")
    if np.any(probs < 0):
        raise InvalidDistribution("negative probability")
    total = probs.sum()
    if total <= 0:
        raise InvalidDistribution("total mass must be positive")
    order = np.argsort(vals, kind="stable")
    vals, probs = vals[order], probs[order]
    # chain-merge: an atom joins the group of its predecessor when within MERGE_TOL
    new_group = np.concatenate(([True], np.diff(vals) > MERGE_TOL))
    group = np.cumsum(new_group) - 1
    merged_vals = vals[new_group]
    merged_probs = np.bincount(group, weights=probs)
    mass = merged_probs.sum()
    if abs(mass - 1.0) > 8 * np.finfo(float).eps * merged_probs.size:
        merged_probs = merged_probs / mass  # leave already-normalized input bit-for-bit unchanged
    return DiscreteDist(merged_vals, merged_probs)


def dirac(value: float) -> DiscreteDist:
    return DiscreteDist([float(value)], [1.0])


def bernoulli(p: float, low: float = 0.0, high: float = 1.0) -> DiscreteDist:
    if not 0.0 <= p <= 1.0:
        raise InvalidDistribution(f"Bernoulli parameter {p!r} outside [0, 1]")
    return make_discrete([(low, 1.0 - p), (high, p)])


@dataclass(frozen=True)
class GaussianSpec:
    mean: float
    sd: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.sd)) or self.sd < 0:
            raise InvalidArgument(f"invalid Gaussian spec mean={self.mean!r} sd={self.sd!r}")


def standard_normal_nodes(n: int) -> np.ndarray:
    """Conditional means of N(0,1) on the n equal-probability quantile cells.

    The nodes are increasing and antisymmetric, so they average exactly to zero.
    """
    if n < 1:
        raise InvalidArgument("need at least one atom")
    if n == 1:
        return np.zeros(1)
    edges = ndtri(np.arange(n + 1) / n)
    dens = norm.pdf(edges)
    nodes = n * (dens[:-1] - dens[1:])
    # exact antisymmetry, so the mean is zero to rounding
    return 0.5 * (nodes - nodes[::-1])


def discretize_gaussian(spec: GaussianSpec, n: int) -> DiscreteDist:
    """n equal-weight atoms, one per quantile cell of the Gaussian."""
    if n < 1:
        raise InvalidArgument("n must be a positive integer")
    if spec.sd == 0:
        return dirac(spec.mean)
    return make_discrete(zip(spec.mean + spec.sd * standard_normal_nodes(n), np.full(n, 1.0 / n)))


@dataclass(frozen=True)
class LawRow:
    weight: float
    law1: DiscreteDist
    law0: DiscreteDist
    label: str | None = None


@dataclass(frozen=True)
class ConditionalLawTable:
    """Pairs of conditional laws on a weighted covariate grid."""

    rows: tuple[LawRow, ...] = field(default_factory=tuple)

    def __post_init__(self):
        rows = tuple(self.rows)
        if not rows:
            raise InvalidArgument("a law table needs at least one row")
        w = np.array([r.weight for r in rows], dtype=float)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidArgument("row weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > NORM_TOL:
            raise InvalidArgument(f"row weights sum to {w.sum()!r}, not 1")
        for r in rows:
            if not isinstance(r.law1, DiscreteDist) or not isinstance(r.law0, DiscreteDist):
                raise InvalidArgument("row laws must be DiscreteDist values")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_rows(cls, rows: Sequence[tuple]) -> "ConditionalLawTable":
        """Build from ``(weight, law1, law0[, label])`` tuples."""
        return cls(tuple(LawRow(*r) for r in rows))

    @property
    def weights(self) -> np.ndarray:
        return np.array([r.weight for r in self.rows])

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


def table_from_json(obj) -> ConditionalLawTable:
    """Parse ``{"rows": [{"weight": w, "law1": [[v, p], ...], "law0": [...]}, ...]}``."""

    if not isinstance(obj, dict) or "rows" not in obj:
        raise ParseError("law table: expected an object with a 'rows' array")
    rows = []
    for i, row in enumerate(obj["rows"]):
        try:
            rows.append(
                LawRow(
                    float(row["weight"]),
                    make_discrete(row["law1"]),
                    make_discrete(row["law0"]),
                    row.get("label"),
                )
            )
        except KeyError as exc:
            raise ParseError(f"rows[{i}]: missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ParseError(f"rows[{i}]: {exc}") from None
    try:
        return ConditionalLawTable(tuple(rows))
    except InvalidArgument as exc:
        raise ParseError(f"rows: {exc}") from None


def table_to_json(table: ConditionalLawTable) -> dict:
    out = []
    for r in table.rows:
        row = {"weight": r.weight, "law1": [list(a) for a in r.law1.atoms], "law0": [list(a) for a in r.law0.atoms]}
        if r.label is not None:
            row["label"] = r.label
        out.append(row)
    return {"rows": out}

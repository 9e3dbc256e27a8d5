"""Categorical probability tables for mediation data.

Variables and coding
--------------------
a : binary exposure, coded 0/1
m : categorical mediator, coded 0..m_card-1
y : binary outcome, coded 0/1 (record data); table entries are pr(Y=1|...)
c : categorical covariate stratum, coded 0..c_card-1

A :class:`ConditionalModel` stores, per stratum, the two conditional tables
that every downstream effect formula consumes:

    y_prob[a][m] = pr(Y=1 | a, m, c)      (or E[Y | a, m, c] in mean mode)
    m_prob[a][m] = pr(m | a, c)

plus the outcome marginal y_marg[a] = pr(Y=1 | a, c), which always equals
sum_m y_prob[a][m] * m_prob[a][m] by the law of total probability.

Zero cells are legal in mediator tables (degenerate mediator distributions
are meaningful inputs), but a y_prob cell is only meaningful where some
formula can weight it: pr(Y=1|0,m,c) is weighted by pr(m|0,c) alone, while
pr(Y=1|1,m,c) is weighted by both pr(m|0,c) and pr(m|1,c).  Estimation fills
never-weighted cells with 0.0 and raises :class:`~medsens.errors.EmptyCell`
for weighted cells it cannot estimate.

All probabilities are 64-bit floats; tolerance constants are module level.
Every type is immutable after construction and every function is pure.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Iterable, Literal, Sequence

from .errors import (
    BadCode,
    BadParameter,
    EmptyCell,
    NotNormalized,
    OutOfRangeProbability,
    ParseError,
)

#: conditional distributions must sum to one within this
SUM_TOL = 1e-12
#: a stored outcome marginal must match the law of total probability within this
MARGIN_TOL = 1e-12

OutcomeMode = Literal["probability", "mean"]

Row = tuple[int, int, int, int, int]  # (a, m, y, c, count)


def _check_code(name: str, value: int, card: int) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise BadCode(f"{name} must be an integer code, got {value!r}")
    if not 0 <= value < card:
        raise BadCode(f"{name}={value} outside 0..{card - 1}")
    return value


@dataclass(frozen=True)
class RecordTable:
    """Weighted integer-coded records (a, m, y, c, count) with declared cardinalities."""

    rows: tuple[Row, ...]
    m_card: int
    c_card: int

    def __post_init__(self) -> None:
        if self.m_card < 1 or self.c_card < 1:
            raise BadParameter("cardinalities must be at least 1")
        for row in self.rows:
            if len(row) != 5:
                raise BadParameter(f"record row must have 5 fields, got {row!r}")
            a, m, y, c, count = row
            _check_code("a", a, 2)
            _check_code("m", m, self.m_card)
            _check_code("y", y, 2)
            _check_code("c", c, self.c_card)
            if not isinstance(count, int) or isinstance(count, bool) or count <= 0:
                raise BadParameter(f"count must be a positive integer, got {count!r}")

    @classmethod
    def from_rows(
        cls,
        rows: Iterable[Sequence[int]],
        m_card: int | None = None,
        c_card: int | None = None,
    ) -> "RecordTable":
        """Build a table, inferring cardinalities as max code + 1 when not declared."""
        fixed = tuple(tuple(int(v) for v in row) for row in rows)
        if not fixed:
            raise BadParameter("record table needs at least one row")
        if m_card is None:
            m_card = max(r[1] for r in fixed) + 1
        if c_card is None:
            c_card = max(r[3] for r in fixed) + 1
        return cls(rows=fixed, m_card=m_card, c_card=c_card)

    def total(self) -> int:
        return sum(r[4] for r in self.rows)


def read_records_csv(path: str) -> RecordTable:
    """Read records from a CSV file with header ``a,m,y,c`` or ``a,m,y,c,count``.

    Integer-coded, comma-separated, UTF-8.  A missing count column means
    count 1.  Raises :class:`ParseError` naming the offending line.
    """
    rows: list[Row] = []
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip().lower() for h in header]
        if header not in (["a", "m", "y", "c"], ["a", "m", "y", "c", "count"]):
            raise ParseError(f"{path}: line 1: header must be a,m,y,c[,count], got {header}")
        has_count = len(header) == 5
        for lineno, raw in enumerate(reader, start=2):
            if not raw or all(not f.strip() for f in raw):
                continue
            if len(raw) != len(header):
                raise ParseError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(raw)}")
            try:
                vals = [int(f.strip()) for f in raw]
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: non-integer field in {raw}") from None
            a, m, y, c = vals[:4]
            count = vals[4] if has_count else 1
            if a not in (0, 1):
                raise ParseError(f"{path}: line {lineno}: exposure code must be 0 or 1, got {a}")
            if y not in (0, 1):
                raise ParseError(f"{path}: line {lineno}: outcome code must be 0 or 1, got {y}")
            if m < 0 or c < 0:
                raise ParseError(f"{path}: line {lineno}: negative category code")
            if count <= 0:
                raise ParseError(f"{path}: line {lineno}: count must be positive, got {count}")
            rows.append((a, m, y, c, count))
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return RecordTable.from_rows(rows)


def swap_exposure_records(records: RecordTable) -> RecordTable:
    """Relabel exposure codes 0 <-> 1 in every row."""
    return RecordTable(
        rows=tuple((1 - a, m, y, c, n) for a, m, y, c, n in records.rows),
        m_card=records.m_card,
        c_card=records.c_card,
    )


@dataclass(frozen=True)
class StratumTable:
    """Conditional tables for one covariate stratum.

    y_prob[a][m] and m_prob[a][m] are indexed by exposure then mediator;
    y_marg[a] is the outcome marginal pr(Y=1|a,c), filled by :func:`validate`
    when absent.
    """

    c: int
    y_prob: tuple[tuple[float, ...], tuple[float, ...]]
    m_prob: tuple[tuple[float, ...], tuple[float, ...]]
    y_marg: tuple[float, float] | None = None


@dataclass(frozen=True)
class ConditionalModel:
    """Observed conditional probability tables for one or more strata."""

    strata: tuple[StratumTable, ...]
    mode: OutcomeMode = "probability"

    def stratum(self, c: int) -> StratumTable:
        for s in self.strata:
            if s.c == c:
                return s
        raise BadCode(f"no stratum with code c={c}")

    @property
    def m_card(self) -> int:
        return len(self.strata[0].m_prob[0])

    @property
    def stratum_codes(self) -> tuple[int, ...]:
        return tuple(s.c for s in self.strata)


def swap_exposure(model: ConditionalModel) -> ConditionalModel:
    """Relabel exposure codes 0 <-> 1 in every stratum table."""
    strata = tuple(
        StratumTable(
            c=s.c,
            y_prob=(s.y_prob[1], s.y_prob[0]),
            m_prob=(s.m_prob[1], s.m_prob[0]),
            y_marg=None if s.y_marg is None else (s.y_marg[1], s.y_marg[0]),
        )
        for s in model.strata
    )
    return ConditionalModel(strata=strata, mode=model.mode)


def _marginal(table: StratumTable, a: int) -> float:
    return sum(yp * mp for yp, mp in zip(table.y_prob[a], table.m_prob[a]))


def validate(model: ConditionalModel) -> ConditionalModel:
    """Check all table invariants; return the model with y_marg filled in.

    Raises :class:`NotNormalized` when a mediator distribution does not sum
    to one (or a stored marginal disagrees with the law of total
    probability), and :class:`OutOfRangeProbability` for entries outside
    their range, naming the offending cell.
    """
    if not model.strata:
        raise BadParameter("model has no strata")
    m_card = model.m_card
    new_strata: list[StratumTable] = []
    for s in model.strata:
        for a in (0, 1):
            if len(s.m_prob[a]) != m_card or len(s.y_prob[a]) != m_card:
                raise BadParameter(f"stratum c={s.c}: tables must share one mediator cardinality")
            total = math.fsum(s.m_prob[a])
            if not math.isfinite(total) or abs(total - 1.0) > SUM_TOL:
                raise NotNormalized(f"pr(m|a={a},c={s.c}) sums to {total!r}, not 1")
            for m in range(m_card):
                mp = s.m_prob[a][m]
                if not math.isfinite(mp) or mp < 0.0 or mp > 1.0:
                    raise OutOfRangeProbability(f"pr(m={m}|a={a},c={s.c}) = {mp!r}")
                yp = s.y_prob[a][m]
                if model.mode == "probability":
                    if not math.isfinite(yp) or yp < 0.0 or yp > 1.0:
                        raise OutOfRangeProbability(f"pr(Y=1|a={a},m={m},c={s.c}) = {yp!r}")
                else:
                    if not math.isfinite(yp) or yp < 0.0:
                        raise OutOfRangeProbability(f"E[Y|a={a},m={m},c={s.c}] = {yp!r}")
        marg = (_marginal(s, 0), _marginal(s, 1))
        if s.y_marg is None:
            new_strata.append(replace(s, y_marg=marg))
        else:
            for a in (0, 1):
                if abs(s.y_marg[a] - marg[a]) > MARGIN_TOL:
                    raise NotNormalized(
                        f"y_marg[a={a}] for c={s.c} is {s.y_marg[a]!r}; "
                        f"law of total probability gives {marg[a]!r}"
                    )
            new_strata.append(s)
    return ConditionalModel(strata=tuple(new_strata), mode=model.mode)


def estimate_from_records(records: RecordTable, smoothing: float = 0.0) -> ConditionalModel:
    """Empirical conditional tables with optional add-k smoothing.

    Smoothing adds ``k`` to every cell count of each conditional table
    before normalizing, so k -> infinity shrinks every conditional toward
    the uniform distribution.  With k = 0 the estimate is the plain
    frequency table; cells that downstream formulas weight must then have
    positive count or :class:`EmptyCell` is raised.
    """
    if not (isinstance(smoothing, (int, float)) and math.isfinite(smoothing)) or smoothing < 0:
        raise BadParameter(f"smoothing must be a finite nonnegative real, got {smoothing!r}")
    k = float(smoothing)
    m_card, c_card = records.m_card, records.c_card

    # n[c][a][m][y] accumulated counts
    n = [[[[0] * 2 for _ in range(m_card)] for _ in range(2)] for _ in range(c_card)]
    for a, m, y, c, count in records.rows:
        n[c][a][m][y] += count

    strata = []
    for c in range(c_card):
        m_prob: list[tuple[float, ...]] = []
        arm_m_counts = []
        for a in (0, 1):
            counts_m = [n[c][a][m][0] + n[c][a][m][1] for m in range(m_card)]
            arm_m_counts.append(counts_m)
            total = sum(counts_m)
            if total == 0 and k == 0.0:
                raise EmptyCell(f"no records for exposure a={a} in stratum c={c}")
            denom = total + k * m_card
            m_prob.append(tuple((counts_m[m] + k) / denom for m in range(m_card)))
        y_prob: list[tuple[float, ...]] = []
        for a in (0, 1):
            row = []
            for m in range(m_card):
                needed = m_prob[0][m] > 0.0 or (a == 1 and m_prob[1][m] > 0.0)
                cell_total = arm_m_counts[a][m]
                if cell_total == 0 and k == 0.0:
                    if needed:
                        raise EmptyCell(f"no records for cell a={a}, m={m} in stratum c={c}")
                    row.append(0.0)
                else:
                    row.append((n[c][a][m][1] + k) / (cell_total + 2.0 * k))
            y_prob.append(tuple(row))
        strata.append(StratumTable(c=c, y_prob=(y_prob[0], y_prob[1]), m_prob=(m_prob[0], m_prob[1])))
    return validate(ConditionalModel(strata=tuple(strata)))


def expand_to_records(model: ConditionalModel, denominator: int) -> RecordTable:
    """Exact inverse of :func:`estimate_from_records` for rational tables.

    Emits per-cell counts ``denominator * pr(m|a,c) * pr(y|a,m,c)``; every
    such product must be an integer (within 1e-6), otherwise the model
    cannot be represented by weighted records and :class:`BadParameter`
    is raised.  Only meaningful in probability mode.
    """
    if model.mode != "probability":
        raise BadParameter("only probability-mode models expand to binary-outcome records")
    if denominator < 1:
        raise BadParameter("denominator must be a positive integer")
    rows: list[Row] = []
    for s in model.strata:
        for a in (0, 1):
            for m in range(model.m_card):
                for y, share in ((1, s.y_prob[a][m]), (0, 1.0 - s.y_prob[a][m])):
                    raw = denominator * s.m_prob[a][m] * share
                    count = round(raw)
                    if abs(raw - count) > 1e-6:
                        raise BadParameter(
                            f"cell a={a},m={m},y={y},c={s.c}: {raw!r} is not an integer count"
                        )
                    if count > 0:
                        rows.append((a, m, y, s.c, int(count)))
    return RecordTable(rows=tuple(rows), m_card=model.m_card, c_card=len(model.strata))

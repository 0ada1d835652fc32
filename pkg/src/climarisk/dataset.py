"""Indicator panels: CSV ingestion, min-max normalisation, deviations.

CSV dialect: comma separated, ``.`` decimal point, mandatory header row,
first column is the row label. An optional leading line of the form
``#direction:,positive,negative,...`` tags every indicator column.
"""
import csv
import io
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateColumn,
    DirectionUnassigned,
    DimensionMismatch,
    DuplicateColumn,
    EmptyPanel,
    MissingCell,
    NonNumeric,
    NonPositivePremium,
    PanelError,
    UnknownColumn,
)

POSITIVE = "positive"
NEGATIVE = "negative"
DIRECTIONS = (POSITIVE, NEGATIVE)
DIRECTION_TAG = "#direction:"


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def fmt(x):
    """Round-trip safe text for a float (17 significant digits)."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class IndicatorPanel:
    row_ids: tuple
    names: tuple
    directions: tuple
    values: np.ndarray
    id_name: str = "id"

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 2:
            raise PanelError("panel values must be a 2-d matrix")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "row_ids", tuple(str(r) for r in self.row_ids))
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "directions", tuple(self.directions))
        n, m = values.shape
        if len(self.row_ids) != n:
            raise PanelError(f"{len(self.row_ids)} row ids for {n} rows")
        if len(self.names) != m or len(self.directions) != m:
            raise PanelError("names/directions do not match column count")
        seen = set()
        for name in self.names:
            if name in seen:
                raise DuplicateColumn(f"duplicate column {name!r}", column=name)
            seen.add(name)
        for name, d in zip(self.names, self.directions):
            if d not in DIRECTIONS:
                raise DirectionUnassigned(
                    f"column {name!r} has direction {d!r}", column=name)
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise NonNumeric(
                f"non-finite value in column {self.names[bad[1]]!r} row {bad[0] + 1}",
                column=self.names[bad[1]], row=int(bad[0]) + 1)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def m(self):
        return self.values.shape[1]

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownColumn(f"no column {name!r}", column=name) from None

    def column(self, name):
        return self.values[:, self.index(name)]

    def select(self, names):
        idx = [self.index(n) for n in names]
        return IndicatorPanel(self.row_ids, tuple(names),
                              tuple(self.directions[i] for i in idx),
                              self.values[:, idx], self.id_name)

    def with_directions(self, mapping):
        dirs = list(self.directions)
        for name, d in mapping.items():
            dirs[self.index(name)] = d
        return IndicatorPanel(self.row_ids, self.names, tuple(dirs), self.values,
                              self.id_name)


@dataclass(frozen=True)
class NormalizedPanel(IndicatorPanel):
    """Min-max normalised panel that remembers the source extremes."""

    x_min: np.ndarray = None
    x_max: np.ndarray = None
    degenerate: tuple = field(default=())

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "x_min", _frozen(self.x_min))
        object.__setattr__(self, "x_max", _frozen(self.x_max))
        object.__setattr__(self, "degenerate", tuple(self.degenerate))

    def transform(self, raw, clip=False):
        """Normalise new raw rows with the recorded extremes.

        Returns ``(values, clipped)`` where ``clipped`` says whether any
        entry fell outside [0, 1] and was clamped (only when ``clip``).
        """
        raw = np.asarray(raw, dtype=float)
        if raw.shape[-1] != self.m:
            raise DimensionMismatch(f"expected {self.m} indicators, got {raw.shape[-1]}")
        out = _scale(raw, self.x_min, self.x_max, self.directions)
        clipped = False
        if clip:
            c = np.clip(out, 0.0, 1.0)
            clipped = bool(np.any(c != out))
            out = c
        return out, clipped

    def extremes(self):
        return {
            "names": list(self.names),
            "directions": list(self.directions),
            "x_min": self.x_min.tolist(),
            "x_max": self.x_max.tolist(),
        }


@dataclass(frozen=True)
class DeviationTable:
    row_ids: tuple
    names: tuple
    means: np.ndarray
    deviations: np.ndarray


def _scale(raw, lo, hi, directions):
    span = hi - lo
    degenerate = span == 0
    safe = np.where(degenerate, 1.0, span)
    neg = np.array([d == NEGATIVE for d in directions])
    out = np.where(neg, (hi - raw) / safe, (raw - lo) / safe)
    return np.where(degenerate, 0.5, out)


# --------------------------------------------------------------------------
# CSV


def _read_text(source):
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8-sig")
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read().decode("utf-8-sig")
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8-sig")
    return data.removeprefix("\ufeff")


def load_panel(source, directions=None, default_direction=POSITIVE):
    """Parse a CSV panel.

    Parameters
    ----------
    source : bytes, path or file object
        UTF-8 CSV with a header row; the first column holds row labels.
    directions : mapping, optional
        Column name -> ``"positive"``/``"negative"``. Overrides any
        ``#direction:`` line in the file.
    default_direction : str or None
        Direction for columns not covered above. ``None`` makes every
        column mandatory and raises :class:`DirectionUnassigned`.
    """
    rows = list(csv.reader(io.StringIO(_read_text(source))))
    file_dirs = None
    while rows and rows[0] and rows[0][0].strip().startswith(DIRECTION_TAG):
        file_dirs = [c.strip() for c in rows[0][1:]]
        rows.pop(0)
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise PanelError("CSV has no header row")
    header = [c.strip() for c in rows[0]]
    if len(header) < 2:
        raise PanelError("CSV needs an id column and at least one indicator")
    id_name, names = header[0], header[1:]
    seen = set()
    for name in names:
        if name in seen:
            raise DuplicateColumn(f"duplicate column {name!r}", column=name)
        seen.add(name)

    row_ids, values = [], []
    for r, rec in enumerate(rows[1:], start=1):
        if len(rec) > len(header):
            raise PanelError(f"row {r} has {len(rec)} fields, header has {len(header)}",
                             row=r)
        rec = rec + [""] * (len(header) - len(rec))
        row_ids.append(rec[0].strip())
        parsed = []
        for name, cell in zip(names, rec[1:]):
            cell = cell.strip()
            if cell == "":
                raise MissingCell(f"missing value in column {name!r} at row {r}",
                                  column=name, row=r)
            try:
                v = float(cell)
            except ValueError:
                raise NonNumeric(f"non-numeric value {cell!r} in column {name!r} at row {r}",
                                 column=name, row=r) from None
            if not math.isfinite(v):
                raise NonNumeric(f"non-finite value {cell!r} in column {name!r} at row {r}",
                                 column=name, row=r)
            parsed.append(v)
        values.append(parsed)

    dirs = {}
    if file_dirs is not None:
        for name, d in zip(names, file_dirs):
            if d:
                dirs[name] = d
    for name, d in (directions or {}).items():
        if name not in seen:
            raise UnknownColumn(f"direction given for unknown column {name!r}", column=name)
        dirs[name] = d
    resolved = []
    for name in names:
        d = dirs.get(name, default_direction)
        if d is None:
            raise DirectionUnassigned(f"no direction for column {name!r}", column=name)
        if d not in DIRECTIONS:
            raise DirectionUnassigned(f"bad direction {d!r} for column {name!r}", column=name)
        resolved.append(d)

    arr = np.array(values, dtype=float).reshape(len(values), len(names))
    return IndicatorPanel(tuple(row_ids), tuple(names), tuple(resolved), arr, id_name)


def write_panel(panel, dest):
    """Write a panel (raw or normalised) back to CSV with a direction line."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([DIRECTION_TAG, *panel.directions])
    w.writerow([panel.id_name, *panel.names])
    for rid, row in zip(panel.row_ids, panel.values):
        w.writerow([rid, *(fmt(v) for v in row)])
    return _emit(buf.getvalue(), dest)


def write_deviation(table, dest, directions=None, id_name="id"):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if directions is not None:
        w.writerow([DIRECTION_TAG, *directions])
    w.writerow([id_name, *table.names])
    w.writerow(["mean", *(fmt(v) for v in table.means)])
    for rid, row in zip(table.row_ids, table.deviations):
        w.writerow([rid, *(fmt(v) for v in row)])
    return _emit(buf.getvalue(), dest)


def _emit(text, dest):
    if dest is None:
        return text
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        dest.write(text)
    return text


# --------------------------------------------------------------------------
# transforms


def net_premium_margin(total_premium, claim_payout):
    """``(premium - payout) / premium``; negative in loss years.

    Works elementwise on arrays.
    """
    p = np.asarray(total_premium, dtype=float)
    c = np.asarray(claim_payout, dtype=float)
    if np.any(p <= 0):
        raise NonPositivePremium("total premium must be > 0")
    out = (p - c) / p
    return float(out) if out.ndim == 0 else out


def normalize(panel):
    """Min-max normalise every column according to its direction.

    Constant columns become 0.5 everywhere and are reported through a
    :class:`DegenerateColumn` warning and ``NormalizedPanel.degenerate``.
    """
    x = panel.values
    if panel.n == 0:
        raise EmptyPanel("cannot normalise an empty panel")
    lo = x.min(axis=0)
    hi = x.max(axis=0)
    out = _scale(x, lo, hi, panel.directions)
    degenerate = tuple(name for name, a, b in zip(panel.names, lo, hi) if a == b)
    for name in degenerate:
        warnings.warn(f"column {name!r} is constant; normalised to 0.5",
                      DegenerateColumn, stacklevel=2)
    return NormalizedPanel(panel.row_ids, panel.names, panel.directions, out,
                           panel.id_name, x_min=lo, x_max=hi, degenerate=degenerate)


def indicator_deviation(panel):
    x = panel.values
    if x.shape[0] == 0:
        raise EmptyPanel("deviation of an empty panel")
    means = x.sum(axis=0) / x.shape[0]
    return DeviationTable(panel.row_ids, panel.names, means, x - means)

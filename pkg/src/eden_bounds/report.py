"""Per-dimension comparison of the axis upper bounds with the diagonal lower bound."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import __version__
from .config import BoxConfig
from .diagonal import diag_lower_bound
from .leveln import MAX_LEVEL, compute_chain
from .rounding import round_down, round_up

CSV_COLUMNS = ("d", "diag_lower", "tau1", "tau2_over_2", "tau3_over_3", "tau4_over_4",
               "tau5_over_5", "first_disproving_level", "verdict")
_LEVEL_COLUMNS = CSV_COLUMNS[2:7]

# (d, config json) -> (start values by level, seconds by level)
_CHAIN_CACHE: dict[tuple[int, str], tuple[dict[int, float], dict[int, float]]] = {}


@dataclass(frozen=True)
class DimensionReport:
    """One table row.  ``axis_upper[n]`` bounds E[tau_n]/n from above."""

    d: int
    diag_lower: float
    axis_upper: dict[int, float] = field(default_factory=dict)
    first_disproving_level: int | None = None
    verdict: bool = False
    seconds: dict[int, float] = field(default_factory=dict)
    error: str | None = None

    @classmethod
    def from_bounds(cls, d: int, axis_upper: dict[int, float],
                    seconds: dict[int, float] | None = None) -> "DimensionReport":
        diag = diag_lower_bound(d)
        first = next((lv for lv in sorted(axis_upper) if axis_upper[lv] < diag), None)
        return cls(d=d, diag_lower=diag, axis_upper=dict(sorted(axis_upper.items())),
                   first_disproving_level=first, verdict=first is not None,
                   seconds=dict(seconds or {}))

    @classmethod
    def failed(cls, d: int, message: str) -> "DimensionReport":
        return cls(d=d, diag_lower=diag_lower_bound(d), error=message or "unknown error")


def _config_key(d: int, config: BoxConfig) -> str:
    return json.dumps(config.for_dimension(d).to_dict()["levels"], sort_keys=True)


def chain_bounds(d: int, max_level: int, config: BoxConfig) -> tuple[dict[int, float], dict[int, float]]:
    """E[tau_n]/n for n = 1..max_level, memoized per (d, boxes).

    A level's start value does not depend on the boxes above it, so a
    longer cached chain answers shorter requests.
    """
    key = (d, _config_key(d, config))
    cached = _CHAIN_CACHE.get(key)
    if cached is None or max(cached[0]) < max_level:
        res = compute_chain(d, max_level, config)
        cached = ({lv: v / lv for lv, v in res.start_values.items()}, dict(res.seconds))
        _CHAIN_CACHE[key] = cached
    bounds, seconds = cached
    keep = range(1, max_level + 1)
    return {lv: bounds[lv] for lv in keep}, {lv: seconds[lv] for lv in keep}


def _row(args) -> DimensionReport:
    d, max_level, config = args
    try:
        bounds, seconds = chain_bounds(d, max_level, config)
    except Exception as exc:  # noqa: BLE001 - a bad row must not sink the batch
        return DimensionReport.failed(d, f"{type(exc).__name__}: {exc}")
    return DimensionReport.from_bounds(d, bounds, seconds)


def build_report(dims: Iterable[int], max_level: int, config: BoxConfig, *,
                 workers: int = 1) -> list[DimensionReport]:
    """One row per dimension, ordered by d whatever the completion order."""
    if not 1 <= max_level <= MAX_LEVEL:
        raise ValueError(f"max_level must be in 1..{MAX_LEVEL}, got {max_level}")
    jobs = [(d, max_level, config) for d in sorted(set(dims))]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row, jobs))
    else:
        rows = [_row(j) for j in jobs]
    return sorted(rows, key=lambda r: r.d)


def find_disproof_dimension(level: int, d_range: Sequence[int] | range,
                            config: BoxConfig) -> int | None:
    """Smallest d whose level-``level`` bound falls below the diagonal bound."""
    if not 1 <= level <= MAX_LEVEL:
        raise ValueError(f"level must be in 1..{MAX_LEVEL}, got {level}")
    for d in sorted(d_range):
        bounds, _ = chain_bounds(d, level, config)
        if bounds[level] < diag_lower_bound(d):
            return d
    return None


# ---- machine output -------------------------------------------------------

def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def to_csv(rows: Sequence[DimensionReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        levels = [_fmt(r.axis_upper.get(lv)) for lv in range(1, 6)]
        verdict = f"error: {r.error}" if r.error is not None else str(r.verdict).lower()
        first = "" if r.first_disproving_level is None else str(r.first_disproving_level)
        w.writerow([r.d, _fmt(r.diag_lower), *levels, first, verdict])
    return buf.getvalue()


def from_csv(text: str) -> list[DimensionReport]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        upper = {lv: float(rec[col]) for lv, col in enumerate(_LEVEL_COLUMNS, start=1)
                 if rec[col]}
        verdict = rec["verdict"]
        error = verdict[len("error: "):] if verdict.startswith("error: ") else None
        first = rec["first_disproving_level"]
        rows.append(DimensionReport(
            d=int(rec["d"]), diag_lower=float(rec["diag_lower"]), axis_upper=upper,
            first_disproving_level=int(first) if first else None,
            verdict=verdict == "true", error=error))
    return rows


def to_json(rows: Sequence[DimensionReport], config: BoxConfig | None = None,
            mode: str | None = None) -> str:
    doc = {
        "version": __version__,
        "mode": mode,
        "config": config.to_dict() if config is not None else None,
        "rows": [{
            "d": r.d,
            "diag_lower": r.diag_lower,
            "axis_upper": {str(lv): v for lv, v in r.axis_upper.items()},
            "first_disproving_level": r.first_disproving_level,
            "verdict": r.verdict,
            "seconds": {str(lv): v for lv, v in r.seconds.items()},
            "error": r.error,
        } for r in rows],
    }
    return json.dumps(doc, indent=2) + "\n"


def from_json(text: str) -> tuple[list[DimensionReport], dict]:
    """Rows plus the remaining metadata (version, mode, config)."""
    doc = json.loads(text)
    rows = [DimensionReport(
        d=r["d"], diag_lower=r["diag_lower"],
        axis_upper={int(k): v for k, v in r["axis_upper"].items()},
        first_disproving_level=r["first_disproving_level"], verdict=r["verdict"],
        seconds={int(k): v for k, v in r["seconds"].items()}, error=r["error"])
        for r in doc.pop("rows")]
    return rows, doc


# ---- human output ---------------------------------------------------------

def to_table(rows: Sequence[DimensionReport]) -> str:
    """Fixed-width table; uppers rounded up, lowers down, first disproof starred."""
    levels = sorted({lv for r in rows for lv in r.axis_upper}) or [1]
    head = ["d", "mu_diag >="] + [f"E tau{lv}/{lv} <=" if lv > 1 else "E tau1 <="
                                  for lv in levels]
    lines = []
    for r in rows:
        cells = [str(r.d), f"{round_down(r.diag_lower):.4f}"]
        if r.error is not None:
            cells.append(f"error: {r.error}")
        else:
            for lv in levels:
                v = r.axis_upper.get(lv)
                if v is None or math.isnan(v):
                    cells.append("-")
                else:
                    star = "*" if lv == r.first_disproving_level else ""
                    cells.append(f"{round_up(v):.4f}{star}")
        lines.append(cells)
    widths = [max(len(row[i]) if i < len(row) else 0 for row in [head, *lines])
              for i in range(len(head))]
    out = ["  ".join(h.rjust(w) for h, w in zip(head, widths))]
    out += ["  ".join(c.rjust(w) for c, w in zip(cells, widths)) for cells in lines]
    out.append("* first level whose upper bound is below the diagonal lower bound")
    return "\n".join(out) + "\n"

"""Reader for the polarauth results CSV schema.

Rows are ``experiment,params,metric,value,stderr,trials`` with ``params`` a
semicolon-joined ``key=value`` list and ``#`` header comments.  The renderer
never recomputes metrics; it only selects and groups rows.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

HEADER = "experiment,params,metric,value,stderr,trials"


class SchemaError(ValueError):
    """The input file does not follow the results schema."""


class MissingSeries(KeyError):
    """A series the recipe requires is absent from the input."""


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    params: dict
    metric: str
    value: float
    stderr: float
    trials: int
    raw: str

    def param(self, key: str) -> str:
        try:
            return self.params[key]
        except KeyError as err:
            raise SchemaError(f"row lacks parameter {key!r}: {self.raw}") from err


def parse_params(text: str) -> dict:
    out = {}
    if not text:
        return out
    for item in text.split(";"):
        if "=" not in item:
            raise SchemaError(f"malformed params field {text!r}")
        k, v = item.split("=", 1)
        out[k] = v
    return out


def load_results(path: Path) -> list:
    lines = Path(path).read_text().splitlines()
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    if not body or body[0] != HEADER:
        raise SchemaError(f"{path}: missing schema header {HEADER!r}")
    rows = []
    for ln in body[1:]:
        fields = ln.split(",")
        if len(fields) != 6:
            raise SchemaError(f"{path}: expected 6 fields, got {len(fields)}: {ln!r}")
        exp, params, metric, value, stderr, trials = fields
        rows.append(ResultRow(
            experiment=exp,
            params=parse_params(params),
            metric=metric,
            value=float(value),
            stderr=float(stderr),
            trials=int(trials),
            raw=ln,
        ))
    return rows


def load_experiment(input_dir: Path, experiment: str) -> list:
    path = Path(input_dir) / f"{experiment}.csv"
    if not path.exists():
        raise MissingSeries(f"no results file for experiment {experiment!r} "
                            f"(expected {path})")
    return load_results(path)


def select(rows: list, metric: str, **filters) -> list:
    out = [
        r for r in rows
        if r.metric == metric
        and all(r.params.get(k) == str(v) for k, v in filters.items())
    ]
    return out


def series(rows: list, metric: str, x_key: str, series_keys: tuple, **filters) -> dict:
    """Group rows of one metric into {series_label: (x, y, err, raws)}."""
    groups: dict = {}
    for r in select(rows, metric, **filters):
        label = ", ".join(f"{k}={r.param(k)}" for k in series_keys) or metric
        groups.setdefault(label, []).append(
            (float(r.param(x_key)), r.value, r.stderr, r.raw)
        )
    if not groups:
        raise MissingSeries(
            f"metric {metric!r} with filters {filters or '{}'} not found"
        )
    out = {}
    for label, pts in groups.items():
        pts.sort()
        xs, ys, es, raws = zip(*pts)
        out[label] = (list(xs), list(ys), list(es), list(raws))
    return out


def rows_digest(raw_lines: list) -> str:
    blob = "\n".join(sorted(raw_lines)).encode()
    return hashlib.sha256(blob).hexdigest()

"""Reading and writing scenario files.

Scenario files are TOML: an ``[economics]`` table and one ``[[stages]]``
table per screening process::

    [economics]
    demand = 50000.0
    order_cost = 100.0
    ...

    [[stages]]
    label = "S1"
    rate_units_per_min = 1.0
    unit_cost = 0.5
    dist = "uniform_beta"     # or "point_mass"
    value = 0.01

A file may list more stages than any one run uses; checks that depend on
which stages are combined (rate order, total defective share) happen when
a selection is evaluated.
"""

from __future__ import annotations

import re
import sys
from importlib import resources
from pathlib import Path

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import DomainError, ScenarioError
from .model import (DEFAULT_MINUTES_PER_YEAR, Diagnostic, PointMass, Scenario, ScreeningStage,
                    UniformOnZeroBeta, uniform_defects, validate_scenario)

ECONOMICS_REQUIRED = ("demand", "order_cost", "purchase_cost", "sell_price", "salvage",
                      "hold_good", "backorder_cost")
ECONOMICS_DEFAULTS = {"hold_defective": 0.0, "minutes_per_year": DEFAULT_MINUTES_PER_YEAR}
STAGE_REQUIRED = ("label", "rate_units_per_min", "unit_cost", "dist", "value")
DIST_KINDS = ("uniform_beta", "point_mass")


class ScenarioFileError(ScenarioError):
    """Problem in a scenario file, anchored to a field and, when known, a line."""

    def __init__(self, message, field=None, line=None, path=None):
        where = f"{path or '<scenario>'}"
        if line is not None:
            where += f":{line}"
        text = f"{where}: {message}"
        if field:
            text += f" (field {field!r})"
        super().__init__(text, [Diagnostic("scenario-file", text)])
        self.field = field
        self.line = line
        self.path = path


def bundled_table1_path() -> Path:
    """Path of the bundled scenario holding the seven-screen example set."""
    return Path(str(resources.files("screeneoq") / "examples" / "table1.scn"))


def _line_of(text, key, after_line=0):
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=", re.M)
    for m in pat.finditer(text):
        line = text.count("\n", 0, m.start()) + 1
        if line > after_line:
            return line
    return None


def _stage_header_lines(text):
    return [i + 1 for i, ln in enumerate(text.splitlines()) if ln.strip() == "[[stages]]"]


def _number(raw, field, line, path):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ScenarioFileError(f"expected a number, got {type(raw).__name__}", field, line, path)
    return float(raw)


def loads_scenario(text: str, path=None) -> Scenario:
    """Parse scenario-file text; see :func:`parse_scenario`."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ScenarioFileError(f"syntax error: {exc}", None,
                                int(m.group(1)) if m else None, path) from exc

    econ = doc.get("economics")
    if not isinstance(econ, dict):
        raise ScenarioFileError("missing [economics] table", "economics", None, path)
    values = {}
    for key in ECONOMICS_REQUIRED:
        if key not in econ:
            raise ScenarioFileError("missing field", f"economics.{key}", None, path)
        values[key] = _number(econ[key], f"economics.{key}", _line_of(text, key), path)
    for key, default in ECONOMICS_DEFAULTS.items():
        values[key] = (_number(econ[key], f"economics.{key}", _line_of(text, key), path)
                       if key in econ else default)
    unknown = set(econ) - set(ECONOMICS_REQUIRED) - set(ECONOMICS_DEFAULTS)
    if unknown:
        key = sorted(unknown)[0]
        raise ScenarioFileError("unknown field", f"economics.{key}", _line_of(text, key), path)

    raw_stages = doc.get("stages")
    if not isinstance(raw_stages, list) or not raw_stages:
        raise ScenarioFileError("at least one [[stages]] table is required", "stages", None, path)
    headers = _stage_header_lines(text)
    stages = []
    for i, blk in enumerate(raw_stages):
        start = headers[i] if i < len(headers) else None
        name = f"stages[{i}]"
        for key in STAGE_REQUIRED:
            if key not in blk:
                raise ScenarioFileError("missing field", f"{name}.{key}", start, path)
        def line(key):
            return _line_of(text, key, start or 0)
        label = blk["label"]
        if not isinstance(label, str):
            raise ScenarioFileError("label must be a string", f"{name}.label", line("label"), path)
        kind = blk["dist"]
        if kind not in DIST_KINDS:
            raise ScenarioFileError(f"dist must be one of {DIST_KINDS}", f"{name}.dist",
                                    line("dist"), path)
        value = _number(blk["value"], f"{name}.value", line("value"), path)
        try:
            dist = uniform_defects(value) if kind == "uniform_beta" else PointMass(value)
            stage = ScreeningStage(
                rate_raw=_number(blk["rate_units_per_min"], f"{name}.rate_units_per_min",
                                 line("rate_units_per_min"), path),
                unit_cost=_number(blk["unit_cost"], f"{name}.unit_cost", line("unit_cost"), path),
                defect_dist=dist,
                label=label)
        except DomainError as exc:
            raise ScenarioFileError(str(exc), name, start, path) from exc
        stages.append(stage)
    labels = [st.label for st in stages]
    dup = sorted({lab for lab in labels if labels.count(lab) > 1})
    if dup:
        raise ScenarioFileError(f"duplicate stage labels {dup}", "stages.label", None, path)

    try:
        scenario = Scenario(stages=tuple(stages), **values)
    except ScenarioError as exc:
        key = str(exc).split()[0]
        raise ScenarioFileError(str(exc), f"economics.{key}", _line_of(text, key), path) from exc

    # Checks that each stage must pass on its own, whatever it is combined with.
    for i, st in enumerate(stages):
        alone = validate_scenario(scenario.replace(stages=(st,)))
        if alone:
            d = alone[0]
            field = "economics.salvage" if d.code == "salvage-price" else f"stages[{i}]"
            raise ScenarioFileError(d.message, field,
                                    _line_of(text, "salvage") if d.code == "salvage-price"
                                    else (headers[i] if i < len(headers) else None), path)
    return scenario


def parse_scenario(path) -> Scenario:
    """Read and validate a scenario file.

    ``hold_defective`` defaults to 0 and ``minutes_per_year`` to 175200.
    Raises :class:`ScenarioFileError` naming the offending field.
    """
    p = Path(path)
    return loads_scenario(p.read_text(), path=str(p))


def _dist_entry(dist):
    if isinstance(dist, UniformOnZeroBeta):
        return "uniform_beta", dist.beta
    return "point_mass", dist.p


def dumps_scenario(scenario: Scenario) -> str:
    econ = {
        "demand": scenario.demand,
        "order_cost": scenario.order_cost,
        "purchase_cost": scenario.purchase_cost,
        "sell_price": scenario.sell_price,
        "salvage": scenario.salvage,
        "hold_good": scenario.hold_good,
        "hold_defective": scenario.hold_defective,
        "backorder_cost": scenario.backorder_cost,
        "minutes_per_year": scenario.minutes_per_year,
    }
    stages = []
    for st in scenario.stages:
        kind, value = _dist_entry(st.defect_dist)
        stages.append({"label": st.label, "rate_units_per_min": float(st.rate_raw),
                       "unit_cost": float(st.unit_cost), "dist": kind, "value": float(value)})
    return tomli_w.dumps({"economics": {k: float(v) for k, v in econ.items()}, "stages": stages})


def write_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(dumps_scenario(scenario))

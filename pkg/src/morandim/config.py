"""YAML run configurations.

A configuration names one construction, one measure and the budgets of
every estimator. Example::

    schema_version: 1
    construction:
      ratios:
        period: [["1/3", "1/3"]]
      layout: uniform-gaps
    measure:
      period: [[0.3, 0.7]]
    budgets:
      n_max: 30
      seed: 0

Malformed input raises :class:`InputError` carrying the dotted path of the
offending field.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from .dimension import Budgets
from .geometry import EXPLICIT, UNIFORM_GAPS, MoranGeometrySpec, as_fraction, spaces_agree
from .symbolic import InvalidWordError, ProductMeasureSpec, check_word, parse_word

SCHEMA_VERSION = 1
FORMATS = ("csv", "doc")


class InputError(ValueError):
    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


@dataclass(frozen=True)
class EnergyConfig:
    s: float | None = None
    x: float | None = None
    epsilon_ladder: tuple[float, ...] | None = None
    bisect: tuple[float, float, float] | None = None


@dataclass(frozen=True)
class LocalDimConfig:
    # explicit path; with ``periodic`` it is repeated out to budgets.depth
    path: tuple[int, ...] | None = None
    periodic: bool = False


@dataclass(frozen=True)
class ValidateConfig:
    depth: int = 8
    filtration_levels: int | None = None
    gamma_threshold: float = 1e-2


@dataclass(frozen=True)
class ClusterConfig:
    points: int = 100
    r_levels: int = 12


@dataclass(frozen=True)
class RunConfig:
    geometry: MoranGeometrySpec
    measure: ProductMeasureSpec
    budgets: Budgets = field(default_factory=Budgets)
    output_format: str = "doc"
    output_path: str | None = None
    energy: EnergyConfig = field(default_factory=EnergyConfig)
    localdim: LocalDimConfig = field(default_factory=LocalDimConfig)
    validate: ValidateConfig = field(default_factory=ValidateConfig)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    schema_version: int = SCHEMA_VERSION
    digest: str = ""

    def with_budgets(self, **overrides) -> "RunConfig":
        given = {k: v for k, v in overrides.items() if v is not None}
        if not given:
            return self
        for k, v in given.items():
            _positive_int(v, f"--{k.replace('_', '-')}", allow_zero=(k == "seed"))
        return replace(self, budgets=replace(self.budgets, **given))


def _mapping(obj, where: str) -> dict:
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise InputError(where, f"expected a mapping, got {type(obj).__name__}")
    return obj


def _no_extra(block: dict, allowed, where: str) -> None:
    extra = sorted(set(block) - set(allowed))
    if extra:
        raise InputError(f"{where}.{extra[0]}" if where else extra[0], "unknown field")


def _positive_int(v, where: str, allow_zero: bool = False) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise InputError(where, f"expected an integer, got {v!r}")
    if v < 0 or (v == 0 and not allow_zero):
        raise InputError(where, f"must be {'>= 0' if allow_zero else '> 0'}, got {v}")
    return v


def _real(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InputError(where, f"expected a number, got {v!r}")
    return float(v)


def _rows(obj, where: str) -> list[list]:
    if obj is None:
        return []
    if not isinstance(obj, list) or any(not isinstance(r, list) for r in obj):
        raise InputError(where, "expected a list of per-level lists")
    return obj


def _fraction_rows(obj, where: str):
    out = []
    for k, row in enumerate(_rows(obj, where)):
        vals = []
        for i, v in enumerate(row):
            try:
                vals.append(as_fraction(v))
            except (TypeError, ValueError, ZeroDivisionError):
                raise InputError(f"{where}[{k}][{i}]", f"cannot read {v!r} as an exact number") from None
        out.append(tuple(vals))
    return tuple(out)


def _parse_construction(block: dict) -> MoranGeometrySpec:
    where = "construction"
    _no_extra(block, ("ratios", "layout", "offsets"), where)
    ratios = _mapping(block.get("ratios"), f"{where}.ratios")
    _no_extra(ratios, ("preperiod", "period"), f"{where}.ratios")
    pre = _fraction_rows(ratios.get("preperiod"), f"{where}.ratios.preperiod")
    per = _fraction_rows(ratios.get("period"), f"{where}.ratios.period")
    if not per:
        raise InputError(f"{where}.ratios.period", "must list at least one level")
    layout = block.get("layout", UNIFORM_GAPS if "offsets" not in block else EXPLICIT)
    if layout not in (UNIFORM_GAPS, EXPLICIT):
        raise InputError(f"{where}.layout", f"expected {UNIFORM_GAPS!r} or {EXPLICIT!r}, got {layout!r}")
    opre = oper = None
    if layout == EXPLICIT:
        offsets = _mapping(block.get("offsets"), f"{where}.offsets")
        if not offsets:
            raise InputError(f"{where}.offsets", "required for the explicit layout")
        _no_extra(offsets, ("preperiod", "period"), f"{where}.offsets")
        opre = _fraction_rows(offsets.get("preperiod"), f"{where}.offsets.preperiod")
        oper = _fraction_rows(offsets.get("period"), f"{where}.offsets.period")
    elif "offsets" in block:
        raise InputError(f"{where}.offsets", f"offsets given with layout {UNIFORM_GAPS!r}")
    try:
        return MoranGeometrySpec(pre, per, opre, oper)
    except ValueError as exc:
        raise InputError(where, str(exc)) from None


def _parse_measure(block: dict) -> tuple[tuple, tuple] | str:
    where = "measure"
    _no_extra(block, ("preperiod", "period", "uniform"), where)
    if block.get("uniform"):
        if "preperiod" in block or "period" in block:
            raise InputError(where, "give either uniform: true or probability vectors")
        return "uniform"
    tables = []
    for part in ("preperiod", "period"):
        rows = []
        for k, row in enumerate(_rows(block.get(part), f"{where}.{part}")):
            vec = tuple(_real(v, f"{where}.{part}[{k}][{i}]") for i, v in enumerate(row))
            try:
                ProductMeasureSpec((), (vec,))
            except ValueError as exc:
                raise InputError(f"{where}.{part}[{k}]", str(exc)) from None
            rows.append(vec)
        tables.append(tuple(rows))
    if not tables[1]:
        raise InputError(f"{where}.period", "must list at least one probability vector")
    return tables[0], tables[1]


def _parse_budgets(block: dict) -> Budgets:
    names = [f.name for f in fields(Budgets)]
    _no_extra(block, names, "budgets")
    vals = {}
    for k, v in block.items():
        vals[k] = _positive_int(v, f"budgets.{k}", allow_zero=(k == "seed"))
    return Budgets(**vals)


def _parse_energy(block: dict) -> EnergyConfig:
    _no_extra(block, ("s", "x", "epsilon_ladder", "bisect"), "energy")
    s = _real(block["s"], "energy.s") if block.get("s") is not None else None
    if s is not None and s < 0:
        raise InputError("energy.s", "must be >= 0")
    x = _real(block["x"], "energy.x") if block.get("x") is not None else None
    if x is not None and not 0 <= x <= 1:
        raise InputError("energy.x", "must lie in [0, 1]")
    ladder = None
    if block.get("epsilon_ladder") is not None:
        raw = block["epsilon_ladder"]
        if not isinstance(raw, list):
            raise InputError("energy.epsilon_ladder", "expected a list of radii")
        ladder = tuple(_real(v, f"energy.epsilon_ladder[{i}]") for i, v in enumerate(raw))
        if len(ladder) < 4:
            raise InputError("energy.epsilon_ladder", f"needs at least 4 rungs, got {len(ladder)}")
        if any(b >= a for a, b in zip(ladder, ladder[1:])) or min(ladder) <= 0:
            raise InputError("energy.epsilon_ladder", "must be positive and strictly decreasing")
    bisect = None
    if block.get("bisect") is not None:
        b = _mapping(block["bisect"], "energy.bisect")
        _no_extra(b, ("lo", "hi", "tol"), "energy.bisect")
        lo = _real(b.get("lo", 0.0), "energy.bisect.lo")
        hi = _real(b.get("hi", 1.0), "energy.bisect.hi")
        tol = _real(b.get("tol", 0.05), "energy.bisect.tol")
        if not 0 <= lo < hi:
            raise InputError("energy.bisect", f"need 0 <= lo < hi, got lo={lo}, hi={hi}")
        if tol <= 0:
            raise InputError("energy.bisect.tol", "must be positive")
        bisect = (lo, hi, tol)
    return EnergyConfig(s, x, ladder, bisect)


def _parse_localdim(block: dict, measure: ProductMeasureSpec) -> LocalDimConfig:
    _no_extra(block, ("path", "periodic"), "localdim")
    path = None
    if block.get("path") is not None:
        raw = block["path"]
        try:
            path = parse_word(str(raw))
            check_word(measure.space, path)
        except InvalidWordError as exc:
            raise InputError("localdim.path", str(exc)) from None
        except ValueError:
            raise InputError("localdim.path", f"cannot read {raw!r} as a word") from None
        if not path:
            raise InputError("localdim.path", "empty word")
    periodic = block.get("periodic", False)
    if not isinstance(periodic, bool):
        raise InputError("localdim.periodic", "expected true or false")
    return LocalDimConfig(path, periodic)


def _parse_validate(block: dict) -> ValidateConfig:
    _no_extra(block, ("depth", "filtration_levels", "gamma_threshold"), "validate")
    depth = _positive_int(block.get("depth", 8), "validate.depth")
    levels = block.get("filtration_levels")
    if levels is not None:
        levels = _positive_int(levels, "validate.filtration_levels")
    thr = _real(block.get("gamma_threshold", 1e-2), "validate.gamma_threshold")
    if not 0 < thr < 1:
        raise InputError("validate.gamma_threshold", "must lie in (0, 1)")
    return ValidateConfig(depth, levels, thr)


def _parse_cluster(block: dict) -> ClusterConfig:
    _no_extra(block, ("points", "r_levels"), "cluster")
    return ClusterConfig(
        _positive_int(block.get("points", 100), "cluster.points"),
        _positive_int(block.get("r_levels", 12), "cluster.r_levels"),
    )


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise InputError(where, f"YAML syntax error: {exc.problem}") from None
    except yaml.YAMLError as exc:
        raise InputError("", f"YAML error: {exc}") from None
    doc = _mapping(doc, "(document)")
    _no_extra(
        doc,
        ("schema_version", "construction", "measure", "budgets", "output", "energy", "localdim", "validate", "cluster"),
        "",
    )
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise InputError("schema_version", f"unsupported version {version!r}; expected {SCHEMA_VERSION}")
    if "construction" not in doc:
        raise InputError("construction", "required")
    geom = _parse_construction(_mapping(doc["construction"], "construction"))
    m = _parse_measure(_mapping(doc.get("measure"), "measure"))
    measure = ProductMeasureSpec.uniform(geom.space) if m == "uniform" else ProductMeasureSpec(*m)
    if not spaces_agree(measure.space, geom.space):
        raise InputError(
            "measure",
            f"alphabet sizes {measure.space.preperiod}+{measure.space.period}* do not match "
            f"the construction's {geom.space.preperiod}+{geom.space.period}*",
        )
    out = _mapping(doc.get("output"), "output")
    _no_extra(out, ("format", "path"), "output")
    fmt = out.get("format", "doc")
    if fmt not in FORMATS:
        raise InputError("output.format", f"expected one of {FORMATS}, got {fmt!r}")
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        raise InputError("output.path", "expected a file path")
    return RunConfig(
        geometry=geom,
        measure=measure,
        budgets=_parse_budgets(_mapping(doc.get("budgets"), "budgets")),
        output_format=fmt,
        output_path=path,
        energy=_parse_energy(_mapping(doc.get("energy"), "energy")),
        localdim=_parse_localdim(_mapping(doc.get("localdim"), "localdim"), measure),
        validate=_parse_validate(_mapping(doc.get("validate"), "validate")),
        cluster=_parse_cluster(_mapping(doc.get("cluster"), "cluster")),
        schema_version=SCHEMA_VERSION,
        digest=hashlib.sha256(text.encode("utf-8")).hexdigest(),
    )


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(str(path), f"cannot read configuration: {exc.strerror}") from None
    return parse_config(text)

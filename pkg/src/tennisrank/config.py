"""Run configuration (INI).  Relative paths resolve against the config file."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError
from .evaluation import PredictorKind
from .ranking import PageRankConfig
from .search import SearchGrid
from .weights import WeightParams, parse_params

SCHEMA = {
    "store": {"path", "raw_dir", "column_map"},
    "evaluation": {"years", "workers"},
    "predictor": {"kind", "params", "uniform_age", "damping", "tolerance", "max_iterations"},
    "search": {"seed", "per_year", "test_years", "age", "decay", "surface", "round", "init"},
    "probability": {"min_bin_total", "leaf_threshold", "mirrored"},
    "output": {"dir"},
}


@dataclass
class RunConfig:
    store: Path | None = None
    raw_dir: Path | None = None
    column_map: Path | None = None
    years: list[int] = field(default_factory=lambda: list(range(2005, 2014)))
    workers: int = 1
    predictor: PredictorKind = PredictorKind.PARAMETRIC
    params: WeightParams = field(default_factory=WeightParams)
    uniform_age: int = 1
    pagerank: PageRankConfig = field(default_factory=PageRankConfig)
    seed: int = 0
    per_year: int = 10
    test_years: list[int] | None = None
    grid: SearchGrid = field(default_factory=SearchGrid)
    init: WeightParams = field(default_factory=lambda: WeightParams(5, 5.0, 0.5, 1.3))
    min_bin_total: int = 5
    leaf_threshold: int = 200
    mirrored: bool = False
    out_dir: Path = Path("out")

    def override(self, **changes) -> "RunConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def parse_years(text: str) -> list[int]:
    """``2005-2013`` or ``2005,2007,2009`` (ranges may be mixed in)."""
    years: set[int] = set()
    for part in filter(None, (p.strip() for p in text.split(","))):
        lo, sep, hi = part.partition("-")
        if sep:
            years.update(range(int(lo), int(hi) + 1))
        else:
            years.add(int(part))
    if not years:
        raise ConfigError(f"empty year list {text!r}")
    return sorted(years)


def parse_grid(text: str, cast=float) -> tuple:
    """Comma list, or ``lo:hi:step``."""
    text = text.strip()
    if text.count(":") == 2:
        lo, hi, step = (float(x) for x in text.split(":"))
        n = int(round((hi - lo) / step))
        return tuple(cast(round(lo + i * step, 10)) for i in range(n + 1))
    return tuple(cast(x) for x in text.split(",") if x.strip())


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc

    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        unknown = set(parser[section]) - SCHEMA[section]
        if unknown:
            raise ConfigError(f"{path}: unknown keys in [{section}]: {sorted(unknown)}")

    base = path.parent
    cfg = RunConfig()

    def get(section, key):
        return parser.get(section, key, fallback=None)

    def resolve(text):
        p = Path(text)
        return p if p.is_absolute() else base / p

    try:
        if (v := get("store", "path")) is not None:
            cfg.store = resolve(v)
        if (v := get("store", "raw_dir")) is not None:
            cfg.raw_dir = resolve(v)
        if (v := get("store", "column_map")) is not None:
            cfg.column_map = resolve(v)
        if (v := get("evaluation", "years")) is not None:
            cfg.years = parse_years(v)
        if (v := get("evaluation", "workers")) is not None:
            cfg.workers = int(v)
        if (v := get("predictor", "kind")) is not None:
            cfg.predictor = PredictorKind(v.strip().lower())
        if (v := get("predictor", "params")) is not None:
            cfg.params = parse_params(v)
        if (v := get("predictor", "uniform_age")) is not None:
            cfg.uniform_age = int(v)
        pr = {}
        if (v := get("predictor", "damping")) is not None:
            pr["damping"] = float(v)
        if (v := get("predictor", "tolerance")) is not None:
            pr["tolerance"] = float(v)
        if (v := get("predictor", "max_iterations")) is not None:
            pr["max_iterations"] = int(v)
        cfg.pagerank = PageRankConfig(**pr)
        if (v := get("search", "seed")) is not None:
            cfg.seed = int(v)
        if (v := get("search", "per_year")) is not None:
            cfg.per_year = int(v)
        if (v := get("search", "test_years")) is not None:
            cfg.test_years = parse_years(v)
        grid = {}
        for key, attr, cast in (("age", "age_years", int), ("decay", "decay_lambda", float),
                                ("surface", "surface_factor", float), ("round", "round_base", float)):
            if (v := get("search", key)) is not None:
                grid[attr] = parse_grid(v, cast)
        cfg.grid = SearchGrid(**grid)
        if (v := get("search", "init")) is not None:
            cfg.init = parse_params(v, cfg.init)
        if (v := get("probability", "min_bin_total")) is not None:
            cfg.min_bin_total = int(v)
        if (v := get("probability", "leaf_threshold")) is not None:
            cfg.leaf_threshold = int(v)
        if (v := get("probability", "mirrored")) is not None:
            cfg.mirrored = _bool(v)
        if (v := get("output", "dir")) is not None:
            cfg.out_dir = resolve(v)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return cfg

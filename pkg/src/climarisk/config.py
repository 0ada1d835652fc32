"""Run configuration: JSON loading, schema validation and defaults."""
import copy
import csv
import json
import os
from dataclasses import dataclass
from importlib import resources

import jsonschema

from .errors import ConfigError

DEFAULTS = {
    "insure": {
        "schema": {
            "directions": {},
            "npm_as_feature": False,
            "label_policy": {"lowest_npm": 1},
        },
        "params": {
            "C": 1.0,
            "tol": 1e-6,
            "max_iter": None,
            "cv_folds": 5,
            "offset": 1.0,
            "smote": {"k": None, "n_synthetic": None, "neighbor_pool": "minority"},
            "lambda_grid": {"start": 0.0, "stop": 1.0, "num": 101},
            "svg": True,
        },
    },
    "develop": {
        "schema": {"directions": {}},
        "params": {
            "k_percent": 15.0,
            "reweight": "after_normalization",
            "restarts": 10,
            "tol": 1e-10,
            "max_iter": 300,
            "svg": True,
        },
    },
    "preserve": {
        "schema": {"directions": {}},
        "params": {
            "alpha": 0.5,
            "allow_inconsistent": False,
            "robustness": None,
            "svg": True,
        },
    },
}

ROBUSTNESS_DEFAULTS = {"sigma": 0.5, "trials": 100, "recompute_weights": True, "clamp": False}


def _schema_doc(name):
    text = resources.files("climarisk").joinpath("schemas", name).read_text(encoding="utf-8")
    return json.loads(text)


def config_schema():
    return _schema_doc("config.schema.json")


def summary_schema():
    return _schema_doc("summary.schema.json")


def _merge(defaults, given):
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict) and out[key]:
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


@dataclass
class RunConfig:
    pipeline: str
    inputs: dict
    schema: dict
    params: dict
    seed: int
    output_dir: str
    base_dir: str
    raw: dict

    def echo(self):
        """Config as written by the user with effective seed, minus output_dir."""
        doc = {k: v for k, v in self.raw.items() if k != "output_dir"}
        doc["seed"] = self.seed
        return doc


def _header(path):
    with open(path, encoding="utf-8-sig", newline="") as fh:
        for row in csv.reader(fh):
            if not row or not any(c.strip() for c in row):
                continue
            if row[0].strip().startswith("#"):
                continue
            return [c.strip() for c in row]
    return []


def _require_columns(header, names, what):
    missing = [n for n in names if n not in header[1:]]
    if missing:
        raise ConfigError(f"{what}: column(s) {', '.join(map(repr, missing))} not in panel")


def _check_columns(cfg):
    header = _header(cfg.inputs["panel"])
    s = cfg.schema
    _require_columns(header, s["features"], "schema.features")
    _require_columns(header, list(s.get("directions", {})), "schema.directions")
    if cfg.pipeline == "insure":
        _require_columns(header, [s["weather"]], "schema.weather")
        _require_columns(header, s.get("weather_components", []), "schema.weather_components")
        responsive = s.get("responsive") or []
        _require_columns(header, responsive, "schema.responsive")
        bad = [r for r in responsive if r not in s["features"]]
        if bad:
            raise ConfigError(f"schema.responsive names non-features: {bad}")
        if "label_column" in s:
            _require_columns(header, [s["label_column"]], "schema.label_column")
        elif "npm" in s:
            _require_columns(header, list(s["npm"].values()), "schema.npm")
        else:
            raise ConfigError("insure needs schema.npm or schema.label_column")
        grid = cfg.params["lambda_grid"]
        if isinstance(grid, dict) and grid["num"] > 1 and not grid["stop"] > grid["start"]:
            raise ConfigError("lambda_grid.stop must exceed start")
        if isinstance(grid, list) and any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("lambda_grid must be strictly increasing")
    elif cfg.pipeline == "develop":
        _require_columns(header, [s["population"]], "schema.population")
        if s["population"] not in s["features"]:
            raise ConfigError("schema.population must be one of schema.features")
        has_col = "benchmark_column" in s
        has_model = "benchmark_model" in cfg.inputs
        if has_col == has_model:
            raise ConfigError("develop needs exactly one of schema.benchmark_column "
                              "or inputs.benchmark_model")
        if has_col:
            _require_columns(header, [s["benchmark_column"]], "schema.benchmark_column")


def parse_config(doc, base_dir=".", seed=None, output_dir=None):
    """Validate a config mapping and fill in defaults.

    Raises :class:`ConfigError` on unknown keys, out-of-range values,
    missing files or columns the panel does not have.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    pipeline = doc.get("pipeline")
    if pipeline not in DEFAULTS:
        raise ConfigError(f"pipeline must be one of {sorted(DEFAULTS)}, got {pipeline!r}")
    full = config_schema()
    sub = {"$schema": full["$schema"], "$defs": full["$defs"], "$ref": f"#/$defs/{pipeline}"}
    validator = jsonschema.Draft202012Validator(sub)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {e.message}")
    for key in ("inputs", "schema"):
        if key not in doc:
            raise ConfigError(f"config missing {key!r}")

    merged = _merge(DEFAULTS[pipeline], {"schema": doc["schema"],
                                         "params": doc.get("params", {})})
    params = merged["params"]
    if pipeline == "preserve" and params.get("robustness") is not None:
        params["robustness"] = _merge(ROBUSTNESS_DEFAULTS, params["robustness"])

    inputs = {}
    for key, rel in doc["inputs"].items():
        path = rel if os.path.isabs(rel) else os.path.join(base_dir, rel)
        if not os.path.isfile(path):
            raise ConfigError(f"inputs.{key}: file not found: {rel}")
        inputs[key] = path

    out = output_dir if output_dir is not None else doc.get("output_dir", "out")
    if output_dir is None and not os.path.isabs(out):
        out = os.path.join(base_dir, out)
    cfg = RunConfig(
        pipeline=pipeline,
        inputs=inputs,
        schema=merged["schema"],
        params=params,
        seed=int(seed if seed is not None else doc.get("seed", 0)),
        output_dir=out,
        base_dir=base_dir,
        raw=copy.deepcopy(doc),
    )
    _check_columns(cfg)
    return cfg


def load_config(path, seed=None, output_dir=None):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(doc, os.path.dirname(os.path.abspath(path)), seed, output_dir)

"""Experiment configuration: parsing, validation, defaults and hashing."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any

from .measures import GeneratorSet
from .moving_average import Coefficients
from .paths import MODES
from .verify import CHECKS, load_defaults

SCHEMA_VERSION = 1
SUBCOMMANDS = ("choquet", "functionals", "series", "bound", "dp", "simulate", "probe", "ma-lil", "verify")
TOP_KEYS = {"subcommand", "dist", "params", "seed", "threads", "out", "tolerances", "schema_version"}
NEEDS_DIST = set(SUBCOMMANDS) - {"verify"}


class ConfigError(ValueError):
    """Schema or invariant violation; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


# parameter name -> default; None means optional with no default
PARAMS: dict[str, dict[str, Any]] = {
    "choquet": {"tol": 1e-8, "t_cap": 1e6, "r": None},
    "functionals": {"r": 1.0, "tol": 1e-8},
    "series": {"which": "both", "p": 3.0, "delta": 1.0, "r": 1.0, "N": 2**20, "integral_form": True},
    "bound": {"kind": "blocking", "r": 1.0, "p": 3.0, "z": 1.0, "sigma_bar_sq": None, "K_max": 40,
              "integrate": False, "n": 64, "x": 1.0},
    "dp": {"functional": "max_stat", "N": 2, "r": 1.0, "mode": "positive", "lower": False, "cap": 10**6},
    "simulate": {"N": 1024, "r": 1.0, "mode": "positive", "replications": 1000, "policies": ["constant:0"],
                 "dump_paths": 0},
    "probe": {"r": 1.0, "mode": "absolute", "k_min": 10, "k_max": 20, "replications": 200,
              "policy": "constant:0"},
    "ma-lil": {"coefficients": {"kind": "identity"}, "N": 2**16, "seeds": 16, "n0": None, "m": None,
               "convention": "one-sided", "policy": "constant:0", "coverage": False, "dump_full_paths": False},
    "verify": {"suite": "quick", "checks": None},
}

_CHOICES = {
    ("series", "which"): ("truncated", "excess", "both"),
    ("bound", "kind"): ("blocking", "exp"),
    ("dp", "functional"): ("max_stat", "partial_sum", "abs_partial_sum"),
    ("dp", "mode"): MODES,
    ("simulate", "mode"): MODES,
    ("probe", "mode"): MODES,
    ("ma-lil", "convention"): ("one-sided", "bi-directional"),
}
_INTS = {"N", "K_max", "n", "cap", "replications", "dump_paths", "k_min", "k_max", "n0", "m"}
_POSITIVE = {"tol", "t_cap", "r", "p", "delta", "z", "x", "N", "K_max", "n", "cap", "replications"}
_BOOLS = {"integral_form", "integrate", "lower", "coverage", "dump_full_paths"}


def reject_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ConfigError(k, "duplicate key")
        out[k] = v
    return out


def loads(text: str):
    """``json.loads`` that refuses duplicate object keys."""
    try:
        return json.loads(text, object_pairs_hook=reject_duplicates)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from exc


def parse_policy_spec(spec: str) -> tuple[str, list[int]]:
    """``constant:i``, ``cyclic:i,j,...`` or ``mean-seeking``."""
    if not isinstance(spec, str):
        raise ValueError("policy must be a string")
    name, _, arg = spec.partition(":")
    if name == "mean-seeking" and not arg:
        return name, []
    if name in ("constant", "cyclic") and arg:
        try:
            idx = [int(a) for a in arg.split(",")]
        except ValueError:
            raise ValueError(f"bad policy indices in {spec!r}") from None
        if name == "constant" and len(idx) != 1:
            raise ValueError("constant policy takes one index")
        if any(i < 0 for i in idx):
            raise ValueError("policy indices must be nonnegative")
        return name, idx
    raise ValueError(f"unknown policy {spec!r}")


@dataclass
class ExperimentConfig:
    subcommand: str
    dist: dict | None = None
    params: dict = field(default_factory=dict)
    seed: int = 0
    threads: int = 1
    out: str | None = None
    tolerances: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "subcommand": self.subcommand, "dist": self.dist,
                "params": self.params, "seed": self.seed, "threads": self.threads, "out": self.out,
                "tolerances": self.tolerances}

    def content_hash(self) -> str:
        """sha256 of the canonical config; output path and thread count do not change numerics."""
        doc = {k: v for k, v in self.resolved().items() if k not in ("out", "threads")}
        canon = json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)
        return hashlib.sha256(canon.encode()).hexdigest()

    def generator_set(self) -> GeneratorSet:
        return GeneratorSet.from_dict(self.dist)


def _check_param(sub: str, name: str, value, path: str):
    if value is None:
        return
    if name in _BOOLS:
        if not isinstance(value, bool):
            raise ConfigError(path, "must be a boolean")
        return
    if (sub, name) in _CHOICES:
        if value not in _CHOICES[(sub, name)]:
            raise ConfigError(path, f"must be one of {list(_CHOICES[(sub, name)])}")
        return
    if name in _INTS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, "must be an integer")
    if name in _POSITIVE or name == "sigma_bar_sq":
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(path, "must be a finite number")
        if name in _POSITIVE and not value > 0:
            raise ConfigError(path, "must be positive")
        if name == "sigma_bar_sq" and value < 0:
            raise ConfigError(path, "must be nonnegative")


def _validate_params(sub: str, params: dict) -> None:
    for name, value in params.items():
        _check_param(sub, name, value, f"params.{name}")
    if sub == "bound" and params["kind"] == "blocking":
        r, p = params["r"], params["p"]
        if not p > max(2.0, r):
            raise ConfigError("params.p", f"need p > 2∨r (got p={p}, r={r})")
    if sub == "simulate":
        pols = params["policies"]
        if not isinstance(pols, list) or not pols:
            raise ConfigError("params.policies", "must be a nonempty list")
        for i, spec in enumerate(pols):
            try:
                parse_policy_spec(spec)
            except ValueError as exc:
                raise ConfigError(f"params.policies[{i}]", str(exc)) from None
    if sub in ("probe", "ma-lil"):
        try:
            parse_policy_spec(params["policy"])
        except ValueError as exc:
            raise ConfigError("params.policy", str(exc)) from None
    if sub == "probe" and not 0 < params["k_min"] < params["k_max"] <= 30:
        raise ConfigError("params.k_min", "need 0 < k_min < k_max <= 30")
    if sub == "ma-lil":
        try:
            Coefficients.from_dict(params["coefficients"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("params.coefficients", f"invalid coefficients: {exc}") from None
        seeds = params["seeds"]
        ok = (isinstance(seeds, int) and not isinstance(seeds, bool) and seeds > 0) or (
            isinstance(seeds, list) and seeds and all(isinstance(s, int) and s >= 0 for s in seeds))
        if not ok:
            raise ConfigError("params.seeds", "must be a positive count or a list of nonnegative integers")
    if sub == "verify":
        defaults = load_defaults()
        if params["suite"] not in defaults["suites"]:
            raise ConfigError("params.suite", f"must be one of {sorted(defaults['suites'])}")
        checks = params["checks"]
        if checks is not None:
            if not isinstance(checks, list) or not checks:
                raise ConfigError("params.checks", "must be a nonempty list of check names")
            bad = [c for c in checks if c not in CHECKS]
            if bad:
                raise ConfigError("params.checks", f"unknown checks {bad}")


def parse_config(doc: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Validate a config document, apply flag ``overrides`` and fill defaults.

    A run report is accepted as well; its embedded config is used.
    """
    doc = copy.deepcopy(doc or {})
    if not isinstance(doc, dict):
        raise ConfigError("", "config must be a JSON object")
    if "config" in doc and "config_hash" in doc:
        doc = doc["config"]
    overrides = overrides or {}
    for key in ("subcommand", "dist", "seed", "threads", "out"):
        if overrides.get(key) is not None:
            doc[key] = overrides[key]
    if overrides.get("params"):
        doc["params"] = {**(doc.get("params") or {}), **overrides["params"]}
    if overrides.get("tolerances"):
        doc["tolerances"] = {**(doc.get("tolerances") or {}), **overrides["tolerances"]}

    unknown = set(doc) - TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    if doc.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {doc['schema_version']!r}")
    sub = doc.get("subcommand")
    if sub not in SUBCOMMANDS:
        raise ConfigError("subcommand", f"unknown subcommand {sub!r}")

    defaults = load_defaults()
    seed = doc.get("seed", defaults["seed"])
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("seed", "must be an integer in [0, 2^64)")
    threads = doc.get("threads", 1)
    if isinstance(threads, bool) or not isinstance(threads, int) or threads < 1:
        raise ConfigError("threads", "must be a positive integer")
    out = doc.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("out", "must be a path string")

    tols = doc.get("tolerances") or {}
    if not isinstance(tols, dict):
        raise ConfigError("tolerances", "must be an object")
    for name, value in tols.items():
        if name not in defaults["tolerances"]:
            raise ConfigError(f"tolerances.{name}", "unknown tolerance")
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"tolerances.{name}", "must be a finite number")
    tolerances = {**defaults["tolerances"], **tols}

    params_in = doc.get("params") or {}
    if not isinstance(params_in, dict):
        raise ConfigError("params", "must be an object")
    schema = PARAMS[sub]
    for name in params_in:
        if name not in schema:
            raise ConfigError(f"params.{name}", f"unknown parameter for {sub}")
    params = {**copy.deepcopy(schema), **params_in}
    _validate_params(sub, params)

    dist = doc.get("dist")
    if sub in NEEDS_DIST:
        if dist is None:
            raise ConfigError("dist", f"{sub} needs a distribution")
        try:
            GeneratorSet.from_dict(dist)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("dist", f"invalid generator set: {exc}") from None
    elif dist is not None:
        raise ConfigError("dist", f"{sub} takes no distribution")

    return ExperimentConfig(sub, dist, params, seed, threads, out, tolerances)

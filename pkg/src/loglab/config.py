"""Strict TOML run configuration shared by every CLI command."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .resource import PRESETS, ResourceProfile

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

__all__ = ["RunConfig", "HuntConfig", "load_config", "parse_config"]

_SECTIONS = {
    "resource": None,  # keys depend on preset; checked separately
    "grid": {"n"},
    "mu": {"value", "min", "max", "count", "log", "values"},
    "options": {"tol", "max_iters", "parallel", "moment_p", "lambda0", "levels", "large_mu", "h_mu"},
    "hunt": {"family", "c", "lo", "hi", "budget", "samples"},
    "output": {"dir"},
}


@dataclass(frozen=True)
class HuntConfig:
    family: str = "cosine"
    c: float = 1.0
    lo: float = 0.0
    hi: float = 4.0
    budget: int = 41
    samples: Optional[tuple] = None  # (x, phi, phi') triples for a sampled family


@dataclass(frozen=True)
class RunConfig:
    profile: Optional[ResourceProfile] = None
    n: int = 1025
    mu_value: Optional[float] = None
    mu_values: Optional[tuple] = None
    tol: Optional[float] = None
    max_iters: int = 50
    parallel: bool = False
    moment_p: int = 3
    lambda0: float = 1e-2
    levels: int = 4
    large_mu: tuple = (1e3, 3e3, 1e4)
    h_mu: float = 1e-3
    hunt: HuntConfig = field(default_factory=HuntConfig)
    out_dir: Optional[str] = None


def _number(section, key, value, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{section}] {key} must be a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"[{section}] {key} must be an integer, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"[{section}] {key} must be finite")
    if positive and not value > 0:
        raise ConfigError(f"[{section}] {key} must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _triples(section, key, value):
    if not isinstance(value, list) or len(value) < 2:
        raise ConfigError(f"[{section}] {key} must be a list of at least two [x, m, dm] triples")
    out = []
    for item in value:
        if not isinstance(item, list) or len(item) != 3:
            raise ConfigError(f"[{section}] {key} entries must be [x, m, dm] triples")
        out.append(tuple(_number(section, key, v) for v in item))
    return tuple(out)


def _parse_resource(table) -> ResourceProfile:
    table = dict(table)
    if "samples" in table:
        extra = set(table) - {"samples"}
        if extra:
            raise ConfigError(f"[resource] sampled profile takes only 'samples'; got {sorted(extra)}")
        rows = _triples("resource", "samples", table["samples"])
        try:
            return ResourceProfile.sampled(*zip(*rows))
        except ValueError as exc:
            raise ConfigError(f"[resource] {exc}") from exc
    name = table.pop("preset", None)
    if name is None:
        raise ConfigError("[resource] needs 'preset' or 'samples'")
    if name not in PRESETS:
        raise ConfigError(f"[resource] unknown preset {name!r}; choose from {sorted(PRESETS)}")
    allowed = set(PRESETS[name].params)
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"[resource] unknown keys for {name!r}: {sorted(unknown)}")
    params = {k: _number("resource", k, v) for k, v in table.items()}
    try:
        return ResourceProfile.preset(name, **params)
    except ValueError as exc:
        raise ConfigError(f"[resource] {exc}") from exc


def _parse_mu(table):
    table = dict(table)
    if "value" in table and len(table) > 1:
        raise ConfigError("[mu] 'value' cannot be combined with a range")
    if "value" in table:
        return _number("mu", "value", table["value"], positive=True), None
    if "values" in table:
        if len(table) > 1:
            raise ConfigError("[mu] 'values' cannot be combined with a range")
        vals = table["values"]
        if not isinstance(vals, list) or not vals:
            raise ConfigError("[mu] values must be a non-empty list")
        vals = tuple(_number("mu", "values", v, positive=True) for v in vals)
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError("[mu] values must be strictly increasing")
        return None, vals
    if not table:
        return None, None
    missing = {"min", "max", "count"} - set(table)
    if missing:
        raise ConfigError(f"[mu] range needs {sorted(missing)}")
    lo = _number("mu", "min", table["min"], positive=True)
    hi = _number("mu", "max", table["max"], positive=True)
    count = _number("mu", "count", table["count"], positive=True, integer=True)
    use_log = table.get("log", True)
    if not isinstance(use_log, bool):
        raise ConfigError("[mu] log must be true or false")
    if count < 2 or not hi > lo:
        raise ConfigError("[mu] range needs count >= 2 and max > min")
    if use_log:
        ratio = (hi / lo) ** (1.0 / (count - 1))
        vals = [lo * ratio**k for k in range(count)]
    else:
        vals = [lo + (hi - lo) * k / (count - 1) for k in range(count)]
    vals[0], vals[-1] = lo, hi
    return None, tuple(vals)


def parse_config(data: dict) -> RunConfig:
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    for name, keys in _SECTIONS.items():
        section = data.get(name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"[{name}] must be a table")
        if keys is not None:
            bad = set(section) - keys
            if bad:
                raise ConfigError(f"[{name}] unknown keys: {sorted(bad)}")

    kw = {}
    if "resource" in data:
        kw["profile"] = _parse_resource(data["resource"])
    grid = data.get("grid", {})
    if "n" in grid:
        kw["n"] = _check_n(_number("grid", "n", grid["n"], positive=True, integer=True))
    kw["mu_value"], kw["mu_values"] = _parse_mu(data.get("mu", {}))

    opt = data.get("options", {})
    if "tol" in opt:
        kw["tol"] = _number("options", "tol", opt["tol"], positive=True)
    if "max_iters" in opt:
        kw["max_iters"] = _number("options", "max_iters", opt["max_iters"], positive=True, integer=True)
    if "parallel" in opt:
        if not isinstance(opt["parallel"], bool):
            raise ConfigError("[options] parallel must be true or false")
        kw["parallel"] = opt["parallel"]
    if "moment_p" in opt:
        kw["moment_p"] = _number("options", "moment_p", opt["moment_p"], positive=True, integer=True)
    if "lambda0" in opt:
        lam = _number("options", "lambda0", opt["lambda0"], positive=True)
        if lam > 1:
            raise ConfigError("[options] lambda0 must be <= 1")
        kw["lambda0"] = lam
    if "levels" in opt:
        kw["levels"] = _number("options", "levels", opt["levels"], positive=True, integer=True)
        if kw["levels"] < 2:
            raise ConfigError("[options] levels must be >= 2")
    if "large_mu" in opt:
        vals = opt["large_mu"]
        if not isinstance(vals, list) or len(vals) < 2:
            raise ConfigError("[options] large_mu must list at least two values")
        vals = tuple(_number("options", "large_mu", v, positive=True) for v in vals)
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError("[options] large_mu must be strictly increasing")
        kw["large_mu"] = vals
    if "h_mu" in opt:
        kw["h_mu"] = _number("options", "h_mu", opt["h_mu"], positive=True)

    hunt = data.get("hunt", {})
    if hunt:
        hk = {}
        fam = hunt.get("family", "cosine")
        if fam not in ("cosine", "constant", "sampled"):
            raise ConfigError(f"[hunt] family must be cosine, constant or sampled; got {fam!r}")
        hk["family"] = fam
        for key in ("c", "lo", "hi"):
            if key in hunt:
                hk[key] = _number("hunt", key, hunt[key])
        if "budget" in hunt:
            hk["budget"] = _number("hunt", "budget", hunt["budget"], positive=True, integer=True)
        if "samples" in hunt:
            hk["samples"] = _triples("hunt", "samples", hunt["samples"])
        if fam == "sampled" and "samples" not in hk:
            raise ConfigError("[hunt] sampled family needs 'samples'")
        h = HuntConfig(**hk)
        if not h.hi >= h.lo:
            raise ConfigError("[hunt] needs hi >= lo")
        kw["hunt"] = h

    out = data.get("output", {})
    if "dir" in out:
        if not isinstance(out["dir"], str) or not out["dir"]:
            raise ConfigError("[output] dir must be a non-empty string")
        kw["out_dir"] = out["dir"]
    return RunConfig(**kw)


def _check_n(n: int) -> int:
    if n < 65 or n % 2 == 0:
        raise ConfigError(f"grid n must be odd and >= 65, got {n}")
    return n


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return parse_config(data)

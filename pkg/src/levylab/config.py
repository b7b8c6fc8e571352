"""Model and experiment configuration (TOML).

A model file holds a ``[model]`` table (top-level keys are accepted too)::

    [model]
    kind = "piecewise"          # stable | piecewise | tabulated | gaussian
                                # | dyadic-alternating | switching-exponent
    gaussian_coef = 0.0
    sidedness = "one-sided"     # or "two-sided"

    [[model.bands]]             # piecewise: θ(x) = c·x^p on (lo, hi]
    c = 1.0
    p = 2.5
    lo = 0.0
    hi = "inf"

Kind-specific keys: ``alpha``, ``scale`` (stable); ``knots`` as a list of
``[x, density]`` pairs (tabulated); ``c1``, ``c2``, ``alpha``, ``depth``
(dyadic-alternating); ``alpha1``, ``alpha2``, ``slack``, ``floor``
(switching-exponent).  See docs/formats.md for the experiment schema.
"""
from __future__ import annotations

import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

from . import measure as ms
from .measure import LevyModel, MeasureError

__all__ = ["BUILTIN_MODELS", "ConfigError", "ExperimentConfig", "load_model", "model_from_dict",
           "load_experiment", "resolve_seed"]


class ConfigError(ValueError):
    pass


def _builtin(name: str) -> LevyModel:
    if name == "stable15":
        return ms.stable(1.5, name="stable15")
    if name == "example51":
        return ms.dyadic_alternating(name="example51")
    if name == "example52":
        return ms.switching_exponent(name="example52")
    if name == "brownian":
        return ms.gaussian_only(1.0)
    raise KeyError(name)


BUILTIN_MODELS = ("stable15", "example51", "example52", "brownian")


def _num(v: Any) -> float:
    if isinstance(v, str) and v.strip().lower() in ("inf", "infinity"):
        return math.inf
    return float(v)


def model_from_dict(d: dict) -> LevyModel:
    d = dict(d.get("model", d))
    kind = d.pop("kind", None)
    if kind is None:
        raise ConfigError("model config needs 'kind'")
    side = d.pop("sidedness", "one-sided")
    a = _num(d.pop("gaussian_coef", 0.0))
    name = d.pop("name", kind)
    try:
        if kind == "stable":
            m = ms.stable(_num(d.pop("alpha")), _num(d.pop("scale", 1.0)), a, side, name)
        elif kind == "piecewise":
            bands = [{k: _num(b[k]) for k in ("c", "p", "lo", "hi")} for b in d.pop("bands")]
            m = ms.piecewise(bands, a, side, name)
        elif kind == "tabulated":
            m = ms.tabulated([tuple(map(_num, kv)) for kv in d.pop("knots")], a, side, name)
        elif kind == "gaussian":
            m = ms.gaussian_only(a if a > 0 else 1.0, name)
        elif kind == "dyadic-alternating":
            kw = {k: _num(d.pop(k)) for k in ("c1", "c2", "alpha", "depth") if k in d}
            m = ms.dyadic_alternating(**kw, sidedness=side, name=name)
        elif kind == "switching-exponent":
            kw = {k: _num(d.pop(k)) for k in ("alpha1", "alpha2", "slack", "floor") if k in d}
            m = ms.switching_exponent(**kw, sidedness=side, name=name)
        else:
            raise ConfigError(f"unknown model kind {kind!r}")
    except KeyError as e:
        raise ConfigError(f"model kind {kind!r} needs key {e.args[0]!r}") from None
    except MeasureError as e:
        raise ConfigError(str(e)) from None
    if d:
        raise ConfigError(f"unknown model keys: {sorted(d)}")
    return m


def load_model(ref: str | os.PathLike) -> LevyModel:
    """A built-in name (stable15, example51, example52, brownian) or a TOML file."""
    s = str(ref)
    if s in BUILTIN_MODELS:
        return _builtin(s)
    p = Path(s)
    if not p.exists():
        raise ConfigError(f"no built-in model or file named {s!r}")
    with p.open("rb") as fh:
        try:
            return model_from_dict(tomllib.load(fh))
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{p}: {e}") from None


def resolve_seed(seed: int | None) -> int:
    """Explicit seed, else $LEVYLAB_SEED, else 0."""
    if seed is not None:
        return int(seed)
    env = os.environ.get("LEVYLAB_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"LEVYLAB_SEED={env!r} is not an integer") from None
    return 0


@dataclass
class ExperimentConfig:
    suites: list[str]
    model: str = "stable15"
    seed: int = 0
    out_dir: str = "levylab-out"
    jobs: int = 1
    svg: bool = False
    tolerances: dict[str, float] = field(default_factory=dict)
    params: dict[str, dict] = field(default_factory=dict)  # per-suite parameter overrides


def load_experiment(path: str | os.PathLike, seed: int | None = None) -> ExperimentConfig:
    """Parse an experiment file: a ``[run]`` table plus optional ``[tolerances]``
    and ``[params.<suite>]`` tables."""
    with open(path, "rb") as fh:
        d = tomllib.load(fh)
    run = d.get("run", {})
    suites = run.get("suites", run.get("suite", []))
    if isinstance(suites, str):
        suites = [suites]
    cfg = ExperimentConfig(
        suites=list(suites),
        model=str(run.get("model", "stable15")),
        seed=resolve_seed(seed if seed is not None else run.get("seed")),
        out_dir=str(run.get("out", "levylab-out")),
        jobs=int(run.get("jobs", 1)),
        svg=bool(run.get("svg", False)),
        tolerances={k: float(v) for k, v in d.get("tolerances", {}).items()},
        params={k: dict(v) for k, v in d.get("params", {}).items()},
    )
    load_model(cfg.model)  # fail early on a bad reference
    return cfg

"""TOML run configuration.

Every section and key is optional; unknown ones are rejected. Example::

    [model]
    kind = "rods"            # homogeneous | rods | fcc
    eps_rod = 13.0
    air_fraction = 0.82

    [basis]
    order = 2
    grid = 32

    [path]
    samples = 10
    segments = ["GX", "XM", "MR"]

    [quadratic]
    omega_over_2pi = [0.05, 0.1]   # or omega_min / omega_max / omega_count
    tau = "auto"                    # or a number
    M = 1.0
    nev = 16

    [solver]
    method = "auto"                 # auto | dense | arnoldi
    strict = false

    [output]
    dir = "out"
"""

from __future__ import annotations

import copy
import math
import sys
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .materials import (
    EPS_CORE,
    FccCoatedSpheres,
    Homogeneous,
    LorentzParams,
    RodScaffold,
    rod_width_for_fill,
)
from .sweeps import DEFAULT_SEGMENTS

SEGMENT_NAMES = [s.name for s in DEFAULT_SEGMENTS]

DEFAULTS: dict = {
    "model": {
        "kind": "rods",
        "eps": 1.0,
        "eps_rod": 13.0,
        "air_fraction": 0.82,
        "rod_width": None,
        "delta": 0.9,
        "eps_core": EPS_CORE,
        "dispersive": True,
        "coating_eps": None,
        "eps1": 7.0,
        "omega0": 0.489,
        "gamma0": 0.3,
        "Lambda": math.sqrt(1.9),
        "subsamples": 4,
    },
    "basis": {"order": 2, "grid": 32},
    "path": {"samples": 10, "segments": list(SEGMENT_NAMES)},
    "quadratic": {
        "omega_over_2pi": None,
        "omega_min": 0.02,
        "omega_max": 0.6,
        "omega_count": 60,
        "tau": "auto",
        "M": 1.0,
        "nev": 16,
        "segments": list(SEGMENT_NAMES),
    },
    "solver": {
        "method": "auto",
        "res_tol": 1e-8,
        "diag_tol": 1e-8,
        "arnoldi_tol": 1e-12,
        "im_tol": 1e-6,
        "path_margin": 1e-6,
        "seed": 0,
        "max_restarts": 300,
        "strict": False,
    },
    "output": {"dir": "out"},
    "run": {"workers": 1},
    "converge": {"k_ref_over_pi": [0.5, 0.0, 0.0], "omega_over_2pi": 0.14492297, "orders": [1, 2, 3], "nev": 8},
    "standard": {"nbands": 6, "freeze_omega_over_2pi": None},
}

_NUMBER = (int, float)


_LOOSE = {("quadratic", "tau")}


def _check_type(section: str, key: str, value, default):
    if default is None or value is None or (section, key) in _LOOSE:
        return
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, _NUMBER):
        ok = isinstance(value, _NUMBER) and not isinstance(value, bool)
    else:
        ok = isinstance(value, type(default))
    if not ok:
        raise ConfigError(f"[{section}] {key}: expected {type(default).__name__}, got {value!r}")


def merge_config(raw: dict) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    for section, body in raw.items():
        if section not in cfg:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, value in body.items():
            if key not in cfg[section]:
                raise ConfigError(f"unknown key [{section}] {key}")
            _check_type(section, key, value, cfg[section][key])
            cfg[section][key] = value
    validate(cfg)
    return cfg


def validate(cfg: dict) -> None:
    m = cfg["model"]
    if m["kind"] not in ("homogeneous", "rods", "fcc"):
        raise ConfigError(f"[model] kind must be homogeneous, rods or fcc, got {m['kind']!r}")
    if cfg["basis"]["order"] < 0:
        raise ConfigError("[basis] order must be >= 0")
    if cfg["solver"]["method"] not in ("auto", "dense", "arnoldi"):
        raise ConfigError("[solver] method must be auto, dense or arnoldi")
    for sec in ("path", "quadratic"):
        for name in cfg[sec]["segments"]:
            if name not in SEGMENT_NAMES:
                raise ConfigError(f"[{sec}] unknown segment {name!r}; choose from {SEGMENT_NAMES}")
    tau = cfg["quadratic"]["tau"]
    if not (tau == "auto" or isinstance(tau, _NUMBER)):
        raise ConfigError("[quadratic] tau must be 'auto' or a number")
    if cfg["path"]["samples"] < 1:
        raise ConfigError("[path] samples must be >= 1")
    if cfg["run"]["workers"] < 1:
        raise ConfigError("[run] workers must be >= 1")


def load_config(path) -> dict:
    """Read and validate a TOML file; a missing path gives the defaults."""
    if path is None:
        return merge_config({})
    p = Path(path)
    try:
        raw = tomllib.loads(p.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {p}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    return merge_config(raw)


def build_model(cfg: dict):
    m = cfg["model"]
    if m["kind"] == "homogeneous":
        return Homogeneous(eps=m["eps"])
    if m["kind"] == "rods":
        t = m["rod_width"] if m["rod_width"] is not None else rod_width_for_fill(m["air_fraction"])
        try:
            return RodScaffold(eps_rod=m["eps_rod"], rod_width=t)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if m["dispersive"]:
        coating = LorentzParams(eps1=m["eps1"], omega0=m["omega0"], gamma0=m["gamma0"], Lambda=m["Lambda"])
    else:
        coating = complex(m["coating_eps"] if m["coating_eps"] is not None else m["eps_core"])
    try:
        return FccCoatedSpheres(delta=m["delta"], eps_core=m["eps_core"], coating=coating, subsamples=m["subsamples"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def omega_grid(cfg: dict) -> list[float]:
    """Angular frequencies of the quadratic sweep."""
    q = cfg["quadratic"]
    if q["omega_over_2pi"] is not None:
        nus = [float(v) for v in q["omega_over_2pi"]]
    else:
        if q["omega_count"] < 1:
            raise ConfigError("[quadratic] omega_count must be >= 1")
        nus = list(np.linspace(q["omega_min"], q["omega_max"], int(q["omega_count"])))
    if any(v <= 0 for v in nus):
        raise ConfigError("[quadratic] frequencies must be positive")
    return [2 * math.pi * v for v in nus]


def segment_indices(names) -> list[int]:
    return [SEGMENT_NAMES.index(n) for n in names]

"""Strict JSON experiment configs: validation, canonical hashing, builders.

Configs are plain JSON documents, one per command invocation.  Validation is
total and happens before any computation: unknown keys anywhere in the tree
are rejected, as are wrong types and out-of-range values, so a typo can never
silently fall back to a default.  A canonical hash of the effective config is
embedded in every output file, which makes rerun comparisons trivial.
"""

from __future__ import annotations

import hashlib
import json
from typing import Optional

import numpy as np

from .geometry import DampedGeometryConfig
from .oracle import GaussianMixtureOracle
from .schedule import COSINE, VE, VP_LINEAR, NoiseSchedule
from .samplers import FIXED_LEVEL_VARIANTS

__all__ = [
    "ConfigError",
    "validate_config",
    "config_hash",
    "canonical_json",
    "build_schedule",
    "build_oracle",
    "build_geometry",
    "COMMAND_SCHEMAS",
    "COMPARE_VARIANTS",
    "DEFAULT_GEOMETRY_GRID",
]


class ConfigError(ValueError):
    """Invalid config document; message carries the offending key path."""


# Matrix rows understood by the compare command.
COMPARE_VARIANTS = ("baseline-o1", "baseline-o2", "annealed", "LML-o1", "LML-o2")

# Default damping/EMA tuning grid swept by compare's guided variants.
DEFAULT_GEOMETRY_GRID = tuple(
    {"lam": lam, "kappa": kappa} for lam in (1e-4, 1e-3, 1e-2) for kappa in (1e-8, 1e-4, 1e-2)
)


# ---------------------------------------------------------------------------
# schema machinery
#
# A schema node is a dict with a "type" and per-type refinements:
#   object: keys {name: node}, required [names]
#   number/int: min/max (inclusive), exclusive_min
#   string: choices
#   array: items node, min_len
#   bool
# Any node may set nullable: true.  Objects reject unknown keys.


def _type_ok(value, kind: str) -> bool:
    if kind == "object":
        return isinstance(value, dict)
    if kind == "array":
        return isinstance(value, list)
    if kind == "string":
        return isinstance(value, str)
    if kind == "bool":
        return isinstance(value, bool)
    if kind == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    raise AssertionError(f"unknown schema type {kind!r}")


def validate_config(value, schema: dict, path: str = "config") -> None:
    """Recursively check value against schema; raise ConfigError on any mismatch."""
    if value is None:
        if schema.get("nullable"):
            return
        raise ConfigError(f"{path}: must not be null")
    kind = schema["type"]
    if not _type_ok(value, kind):
        raise ConfigError(f"{path}: expected {kind}, got {type(value).__name__}")
    if kind in ("number", "int"):
        val = float(value)
        if not np.isfinite(val):
            raise ConfigError(f"{path}: must be finite")
        if "min" in schema and val < schema["min"]:
            raise ConfigError(f"{path}: must be >= {schema['min']}")
        if "exclusive_min" in schema and val <= schema["exclusive_min"]:
            raise ConfigError(f"{path}: must be > {schema['exclusive_min']}")
        if "max" in schema and val > schema["max"]:
            raise ConfigError(f"{path}: must be <= {schema['max']}")
    if kind == "string" and "choices" in schema and value not in schema["choices"]:
        raise ConfigError(f"{path}: must be one of {sorted(schema['choices'])}, got {value!r}")
    if kind == "array":
        if len(value) < schema.get("min_len", 0):
            raise ConfigError(f"{path}: needs at least {schema['min_len']} entries")
        for i, item in enumerate(value):
            validate_config(item, schema["items"], f"{path}[{i}]")
    if kind == "object":
        keys = schema.get("keys", {})
        unknown = sorted(set(value) - set(keys))
        if unknown:
            raise ConfigError(f"{path}: unknown keys {unknown}")
        for name in schema.get("required", ()):
            if name not in value:
                raise ConfigError(f"{path}: missing required key {name!r}")
        for name, sub in keys.items():
            if name in value:
                validate_config(value[name], sub, f"{path}.{name}")


def canonical_json(obj) -> str:
    """Canonical serialization used for hashing: sorted keys, no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict) -> str:
    """First 16 hex chars of the sha256 of the canonical serialization."""
    return hashlib.sha256(canonical_json(cfg).encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# shared blocks


_SCHEDULE_SCHEMA = {
    "type": "object",
    "keys": {
        "kind": {"type": "string", "choices": [VP_LINEAR, VE, COSINE]},
        "beta_min": {"type": "number", "exclusive_min": 0.0},
        "beta_max": {"type": "number", "exclusive_min": 0.0},
        "sigma_min": {"type": "number", "exclusive_min": 0.0},
        "sigma_max": {"type": "number", "exclusive_min": 0.0},
        "offset": {"type": "number", "exclusive_min": 0.0},
        "t_max": {"type": "number", "exclusive_min": 0.0, "max": 1.0},
    },
    "required": ["kind"],
}

_ORACLE_SCHEMA = {
    "type": "object",
    "keys": {
        "centers": {
            "type": "array",
            "min_len": 1,
            "items": {"type": "array", "min_len": 1, "items": {"type": "number"}},
        },
        "centers_csv": {"type": "string"},
        "weights": {"type": "array", "min_len": 1, "items": {"type": "number", "exclusive_min": 0.0}},
    },
}

_GEOMETRY_SCHEMA = {
    "type": "object",
    "nullable": True,
    "keys": {
        "lam": {"type": "number", "exclusive_min": 0.0},
        "kappa": {"type": "number", "min": 0.0, "max": 1.0 - 1e-12},
    },
    "required": ["lam"],
}

_SAMPLER_SCHEMA = {
    "type": "object",
    "keys": {
        "n_steps": {"type": "int", "min": 1},
        "order": {"type": "int", "min": 1, "max": 2},
        "geometry": _GEOMETRY_SCHEMA,
        "chains": {"type": "int", "min": 1},
        "seed": {"type": "int", "min": 0},
        "eps_clip": {"type": "number", "exclusive_min": 0.0},
        "dtype": {"type": "string", "choices": ["float64", "float32"]},
    },
    "required": ["n_steps"],
}

_INIT_SCHEMA = {
    "type": "object",
    "keys": {
        "mean": {"type": "number"},
        "std": {"type": "number", "exclusive_min": 0.0},
    },
}

_DIAG_SCHEMA = {
    "type": "object",
    "keys": {"n_projections": {"type": "int", "min": 1}},
}

_GRID_ITEM = {
    "type": "object",
    "keys": {
        "lam": {"type": "number", "exclusive_min": 0.0},
        "kappa": {"type": "number", "min": 0.0, "max": 1.0 - 1e-12},
    },
    "required": ["lam"],
}


# ---------------------------------------------------------------------------
# per-command schemas


COMMAND_SCHEMAS = {
    "sample": {
        "type": "object",
        "keys": {
            "schedule": _SCHEDULE_SCHEMA,
            "oracle": _ORACLE_SCHEMA,
            "sampler": _SAMPLER_SCHEMA,
            "diagnostics": _DIAG_SCHEMA,
        },
        "required": ["schedule", "oracle", "sampler"],
    },
    "compare": {
        "type": "object",
        "keys": {
            "schedule": _SCHEDULE_SCHEMA,
            "oracle": _ORACLE_SCHEMA,
            "nfe": {"type": "array", "min_len": 1, "items": {"type": "int", "min": 1}},
            "variants": {
                "type": "array",
                "min_len": 1,
                "items": {"type": "string", "choices": list(COMPARE_VARIANTS)},
            },
            "chains": {"type": "int", "min": 2},
            "seeds": {"type": "array", "min_len": 1, "items": {"type": "int", "min": 0}},
            "geometry_grid": {"type": "array", "min_len": 1, "items": _GRID_ITEM},
            "annealed": {
                "type": "object",
                "keys": {
                    "inner_steps": {"type": "int", "min": 1},
                    "step_scale": {"type": "number", "exclusive_min": 0.0},
                },
            },
            "eps_clip": {"type": "number", "exclusive_min": 0.0},
            "diagnostics": _DIAG_SCHEMA,
            "assert": {
                "type": "object",
                "keys": {"lml_not_worse": {"type": "bool"}},
            },
        },
        "required": ["schedule", "oracle", "nfe", "chains", "seeds"],
    },
    "stationarity": {
        "type": "object",
        "keys": {
            "schedule": _SCHEDULE_SCHEMA,
            "oracle": _ORACLE_SCHEMA,
            "t": {"type": "number", "exclusive_min": 0.0},
            "variant": {"type": "string", "choices": list(FIXED_LEVEL_VARIANTS)},
            "lam": {"type": "number", "min": 0.0},
            "h": {"type": "number", "exclusive_min": 0.0},
            "n_steps": {"type": "int", "min": 1},
            "chains": {"type": "int", "min": 1},
            "burn_in": {"type": "int", "min": 0},
            "init": _INIT_SCHEMA,
            "seed": {"type": "int", "min": 0},
            "histogram_bins": {"type": "int", "min": 2},
            "assert": {
                "type": "object",
                "keys": {"ks_max": {"type": "number", "exclusive_min": 0.0}},
            },
        },
        "required": ["schedule", "oracle", "t", "variant", "h", "n_steps", "chains"],
    },
    "convergence": {
        "type": "object",
        "keys": {
            "schedule": _SCHEDULE_SCHEMA,
            "oracle": _ORACLE_SCHEMA,
            "t": {"type": "number", "exclusive_min": 0.0},
            "variant": {"type": "string", "choices": list(FIXED_LEVEL_VARIANTS)},
            "lams": {"type": "array", "min_len": 1, "items": {"type": "number", "min": 0.0}},
            "h": {"type": "number", "exclusive_min": 0.0},
            "n_steps": {"type": "int", "min": 1},
            "chains": {"type": "int", "min": 2},
            "snapshot_every": {"type": "int", "min": 1},
            "init": _INIT_SCHEMA,
            "seed": {"type": "int", "min": 0},
            "fit_window": {
                "type": "array",
                "min_len": 2,
                "items": {"type": "number", "exclusive_min": 0.0},
            },
            "assert": {
                "type": "object",
                "keys": {
                    "rate_rel_tol": {"type": "number", "exclusive_min": 0.0},
                    "r2_min": {"type": "number", "min": 0.0, "max": 1.0},
                },
            },
        },
        "required": ["schedule", "oracle", "t", "variant", "lams", "h", "n_steps", "chains"],
    },
    "hessian-error": {
        "type": "object",
        "keys": {
            "schedule": _SCHEDULE_SCHEMA,
            "oracle": _ORACLE_SCHEMA,
            "ts": {"type": "array", "min_len": 1, "items": {"type": "number", "exclusive_min": 0.0}},
            "n_points": {"type": "int", "min": 1},
            "fd_step": {"type": "number", "exclusive_min": 0.0},
            "seed": {"type": "int", "min": 0},
            "assert": {
                "type": "object",
                "keys": {"max_violations": {"type": "int", "min": 0}},
            },
        },
        "required": ["schedule", "oracle", "ts", "n_points"],
    },
    "bench": {
        "type": "object",
        "keys": {
            "d": {"type": "int", "min": 1},
            "reps": {"type": "int", "min": 1},
            "seed": {"type": "int", "min": 0},
            "assert": {
                "type": "object",
                "keys": {"ratio_max": {"type": "number", "exclusive_min": 0.0}},
            },
        },
        "required": ["d"],
    },
}


# ---------------------------------------------------------------------------
# builders (run only after validation)


_SCHEDULE_KEYS = {
    VP_LINEAR: {"beta_min", "beta_max"},
    VE: {"sigma_min", "sigma_max"},
    COSINE: {"offset", "t_max"},
}


def build_schedule(block: dict) -> NoiseSchedule:
    kind = block["kind"]
    extra = set(block) - {"kind"}
    stray = extra - _SCHEDULE_KEYS[kind]
    if stray:
        raise ConfigError(f"config.schedule: keys {sorted(stray)} do not apply to kind {kind!r}")
    params = {k: block[k] for k in extra}
    try:
        if kind == VP_LINEAR:
            return NoiseSchedule.vp_linear(**params)
        if kind == VE:
            return NoiseSchedule.ve(**params)
        return NoiseSchedule.cosine(**params)
    except ValueError as exc:
        raise ConfigError(f"config.schedule: {exc}") from exc


def build_oracle(block: dict, schedule: NoiseSchedule) -> GaussianMixtureOracle:
    if ("centers" in block) == ("centers_csv" in block):
        raise ConfigError("config.oracle: exactly one of 'centers' or 'centers_csv' is required")
    weights = block.get("weights")
    try:
        if "centers_csv" in block:
            return GaussianMixtureOracle.from_csv(block["centers_csv"], schedule, weights=weights)
        centers = np.asarray(block["centers"], dtype=np.float64)
        if centers.ndim != 2:
            raise ValueError("centers rows must all have the same length")
        return GaussianMixtureOracle(centers, weights, schedule)
    except OSError as exc:
        raise ConfigError(f"config.oracle: cannot read centers_csv: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"config.oracle: {exc}") from exc


def build_geometry(block: Optional[dict]) -> Optional[DampedGeometryConfig]:
    if block is None:
        return None
    return DampedGeometryConfig(lam=float(block["lam"]), kappa=float(block.get("kappa", 1e-8)))

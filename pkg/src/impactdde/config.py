"""Run configuration: JSON schema, defaults, validation.

Defaults reproduce the forced-beam impact scenario (Timoshenko beam,
stop at -0.05, 30 cos(13 t) through the second mode, first-mode initial
shape of tip amplitude 1.056, step 3.5e-5).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigurationError

__all__ = ["RunConfig", "parse_config", "load_config", "apply_overrides"]

_DEFAULTS = {
    "model": {
        "type": None,            # required: euler-bernoulli | timoshenko | string
        "size": 20,              # modes (modal families) or collocation degree
        "beta": 4800.0,
        "gamma": 0.25,
        "wave_speed": 1.0,
        "damping": 0.1,
    },
    "contact": {
        "stop": -0.05,           # null disables contact
        "restitution": 1.0,
    },
    "forcing": {
        "mode": 2,
        "amplitude": 30.0,
        "frequency": 13.0,
    },
    "ic": {
        "mode": 1,
        "displacement": 1.056,
        "velocity": 1.056,
    },
    "run": {
        "eps": 3.5e-5,
        "t_end": 9.666,
        "kernel_horizon": None,
        "truncation_tol": 1e-10,
        "plateau_window": None,  # [tau_a, tau_b]
        "deterministic": True,
        "sweep_sizes": None,     # regularity subcommand; per-family default
    },
}

_MODEL_TYPES = ("euler-bernoulli", "timoshenko", "string")


@dataclass(frozen=True)
class RunConfig:
    model: dict = field(default_factory=dict)
    contact: dict = field(default_factory=dict)
    forcing: dict = field(default_factory=dict)
    ic: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)

    @property
    def model_type(self) -> str:
        return self.model["type"]

    def n_modes(self) -> int:
        """Modal dimension implied by the model section."""
        size = self.model["size"]
        if self.model_type == "timoshenko":
            return 2 * (size - 1)
        return size


def _require_number(section, key, value, *, positive=False, nonnegative=False,
                    integer=False, allow_none=False):
    name = f"{section}.{key}"
    if value is None:
        if allow_none:
            return None
        raise ConfigurationError(f"{name} required")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{name} must be a number")
    if integer and int(value) != value:
        raise ConfigurationError(f"{name} must be an integer")
    if positive and value <= 0:
        raise ConfigurationError(f"{name} must be positive")
    if nonnegative and value < 0:
        raise ConfigurationError(f"{name} must be nonnegative")
    return int(value) if integer else float(value)


def _merge(section: str, defaults: dict, given: dict) -> dict:
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigurationError(
            f"unknown key {section}.{sorted(unknown)[0]}")
    out = dict(defaults)
    out.update(given)
    return out


def parse_config(raw: dict) -> RunConfig:
    """Validate a configuration mapping and apply defaults.

    Unknown keys are rejected; error messages name the offending field and
    constraint.
    """
    if not isinstance(raw, dict):
        raise ConfigurationError("configuration must be a JSON object")
    unknown = set(raw) - set(_DEFAULTS)
    if unknown:
        raise ConfigurationError(f"unknown section {sorted(unknown)[0]!r}")
    sections = {name: _merge(name, _DEFAULTS[name], raw.get(name, {}))
                for name in _DEFAULTS}

    model = sections["model"]
    if model["type"] is None:
        raise ConfigurationError("model.type required")
    if model["type"] not in _MODEL_TYPES:
        raise ConfigurationError(
            f"model.type must be one of {', '.join(_MODEL_TYPES)}")
    model["size"] = _require_number("model", "size", model["size"],
                                    positive=True, integer=True)
    if model["type"] == "timoshenko" and model["size"] < 8:
        raise ConfigurationError("model.size must be >= 8 collocation points")
    model["beta"] = _require_number("model", "beta", model["beta"], positive=True)
    model["gamma"] = _require_number("model", "gamma", model["gamma"], positive=True)
    model["wave_speed"] = _require_number("model", "wave_speed",
                                          model["wave_speed"], positive=True)
    model["damping"] = _require_number("model", "damping", model["damping"],
                                       nonnegative=True)
    if model["damping"] >= 1:
        raise ConfigurationError("model.damping must be < 1")

    contact = sections["contact"]
    contact["stop"] = _require_number("contact", "stop", contact["stop"],
                                      allow_none=True)
    contact["restitution"] = _require_number("contact", "restitution",
                                             contact["restitution"],
                                             nonnegative=True)
    if contact["restitution"] > 1:
        raise ConfigurationError("contact.restitution must be <= 1")

    forcing = sections["forcing"]
    forcing["mode"] = _require_number("forcing", "mode", forcing["mode"],
                                      positive=True, integer=True)
    forcing["amplitude"] = _require_number("forcing", "amplitude",
                                           forcing["amplitude"])
    forcing["frequency"] = _require_number("forcing", "frequency",
                                           forcing["frequency"], nonnegative=True)

    ic = sections["ic"]
    ic["mode"] = _require_number("ic", "mode", ic["mode"], positive=True,
                                 integer=True)
    ic["displacement"] = _require_number("ic", "displacement", ic["displacement"])
    ic["velocity"] = _require_number("ic", "velocity", ic["velocity"])

    run = sections["run"]
    run["eps"] = _require_number("run", "eps", run["eps"], positive=True)
    run["t_end"] = _require_number("run", "t_end", run["t_end"], positive=True)
    run["kernel_horizon"] = _require_number("run", "kernel_horizon",
                                            run["kernel_horizon"],
                                            positive=True, allow_none=True)
    run["truncation_tol"] = _require_number("run", "truncation_tol",
                                            run["truncation_tol"], positive=True)
    pw = run["plateau_window"]
    if pw is not None:
        if (not isinstance(pw, (list, tuple)) or len(pw) != 2
                or not all(isinstance(v, (int, float)) for v in pw)
                or not 0 < pw[0] < pw[1]):
            raise ConfigurationError(
                "run.plateau_window must be [tau_a, tau_b] with 0 < tau_a < tau_b")
        run["plateau_window"] = (float(pw[0]), float(pw[1]))
    if not isinstance(run["deterministic"], bool):
        raise ConfigurationError("run.deterministic must be a boolean")
    ss = run["sweep_sizes"]
    if ss is not None:
        if (not isinstance(ss, list) or len(ss) < 2
                or not all(isinstance(v, int) and v > 0 for v in ss)
                or any(b <= a for a, b in zip(ss, ss[1:]))):
            raise ConfigurationError(
                "run.sweep_sizes must be a strictly increasing list of >= 2 sizes")

    cfg = RunConfig(model=model, contact=contact, forcing=forcing, ic=ic, run=run)
    n_modes = cfg.n_modes()
    if forcing["amplitude"] != 0.0 and forcing["mode"] > n_modes:
        raise ConfigurationError(
            f"forcing.mode {forcing['mode']} exceeds the {n_modes} modes of the model")
    if ic["mode"] > n_modes:
        raise ConfigurationError(
            f"ic.mode {ic['mode']} exceeds the {n_modes} modes of the model")
    return cfg


def load_config(path) -> RunConfig:
    """Read and validate a JSON configuration file (empty file = all defaults)."""
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        raw = {}
    else:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"invalid JSON in {path}: {exc}") from exc
    return parse_config(raw)


def apply_overrides(raw: dict, overrides) -> dict:
    """Apply `section.key=value` overrides onto a raw configuration dict."""
    out = json.loads(json.dumps(raw))  # deep copy
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} must look like section.key=value")
        dotted, value = item.split("=", 1)
        parts = dotted.split(".")
        if len(parts) != 2:
            raise ConfigurationError(f"override key {dotted!r} must be section.key")
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        sec, key = parts
        out.setdefault(sec, {})[key] = parsed
    return out

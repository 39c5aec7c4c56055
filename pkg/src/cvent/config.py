"""JSON scenario documents and the built-in figure presets.

A config document looks like::

    {
      "input1": {"v0_db": -7.0, "eta": 1.0},
      "input2": "vacuum",
      "t": 0.5,
      "eta_x": 1.0,
      "eta_y": 1.0,
      "sampler": {"n": 1000000, "seed": 7, "sample_rate_hz": 1e7,
                  "filter": {"center_hz": 4.45e6, "width_hz": 9e5, "order": 6}}
    }

``input2``, ``eta_x``, ``eta_y`` and ``sampler`` are optional. Unknown keys are
rejected and every value is checked before anything is computed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError
from .sampler import BandPassSpec
from .state import ScenarioConfig, SqueezerSpec, db_to_variance

TOP_KEYS = {"input1", "input2", "t", "eta_x", "eta_y", "sampler"}
INPUT_KEYS = {"v0_db", "eta"}
SAMPLER_KEYS = {"n", "seed", "sample_rate_hz", "filter"}
FILTER_KEYS = {"center_hz", "width_hz", "order"}

# measured squeezer output behind the fig14 preset: 2.9 dB below and 5.3 dB above the QNL
MEASURED_SQUEEZING_DB = -2.9
MEASURED_ANTISQUEEZING_DB = 5.3


@dataclass(frozen=True)
class SamplerConfig:
    n: int
    seed: int
    sample_rate_hz: float | None = None
    band: BandPassSpec | None = None


@dataclass(frozen=True)
class ConfigDocument:
    scenario: ScenarioConfig
    sampler: SamplerConfig | None = None


def _reject_unknown(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ValidationError(f"{where} must be a JSON object", key=where)
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ValidationError(f"unknown key(s) in {where}: {', '.join(extra)}", key=f"{where}.{extra[0]}")


def _number(obj, key, where, default=None, lo=None, hi=None):
    path = key if where == "config" else f"{where}.{key}"
    if key not in obj:
        if default is None:
            raise ValidationError(f"missing required key {path}", key=path)
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{path} must be a number, got {value!r}", key=path)
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{path} must be finite", key=path)
    if (lo is not None and value < lo) or (hi is not None and value > hi):
        raise ValidationError(f"{path} must lie in [{lo}, {hi}], got {value!r}", key=path)
    return value


def _integer(obj, key, where, lo):
    path = f"{where}.{key}"
    if key not in obj:
        raise ValidationError(f"missing required key {path}", key=path)
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < lo:
        raise ValidationError(f"{path} must be an integer >= {lo}, got {value!r}", key=path)
    return value


def _parse_input(raw, name):
    if raw is None or raw == "vacuum":
        return None
    _reject_unknown(raw, INPUT_KEYS, name)
    v0_db = _number(raw, "v0_db", name)
    eta = _number(raw, "eta", name, default=1.0, lo=0.0, hi=1.0)
    return SqueezerSpec(db_to_variance(v0_db), eta)


def _parse_sampler(raw):
    _reject_unknown(raw, SAMPLER_KEYS, "sampler")
    n = _integer(raw, "n", "sampler", 2)
    seed = _integer(raw, "seed", "sampler", 0)
    rate = None
    if "sample_rate_hz" in raw:
        rate = _number(raw, "sample_rate_hz", "sampler", lo=0.0)
        if rate <= 0.0:
            raise ValidationError("sampler.sample_rate_hz must be positive", key="sampler.sample_rate_hz")
    band = None
    if "filter" in raw:
        f = raw["filter"]
        _reject_unknown(f, FILTER_KEYS, "sampler.filter")
        if rate is None:
            raise ValidationError("sampler.filter needs sampler.sample_rate_hz", key="sampler.sample_rate_hz")
        order = _integer(f, "order", "sampler.filter", 2) if "order" in f else 6
        try:
            band = BandPassSpec(
                _number(f, "center_hz", "sampler.filter"),
                _number(f, "width_hz", "sampler.filter"),
                rate,
                order,
            )
        except ValidationError as exc:
            raise ValidationError(str(exc), key=f"sampler.filter.{exc.key}") from None
    return SamplerConfig(n, seed, rate, band)


def parse_config(doc):
    """Validate a decoded JSON document and build a :class:`ConfigDocument`."""
    _reject_unknown(doc, TOP_KEYS, "config")
    if "input1" not in doc:
        raise ValidationError("missing required key input1", key="input1")
    input1 = _parse_input(doc["input1"], "input1")
    input2 = _parse_input(doc.get("input2", "vacuum"), "input2")
    t = _number(doc, "t", "config", lo=0.0, hi=1.0)
    eta_x = _number(doc, "eta_x", "config", default=1.0, lo=0.0, hi=1.0)
    eta_y = _number(doc, "eta_y", "config", default=1.0, lo=0.0, hi=1.0)
    sampler = _parse_sampler(doc["sampler"]) if "sampler" in doc else None
    return ConfigDocument(ScenarioConfig(input1, input2, t, eta_x, eta_y), sampler)


def load_config(path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}", key="config") from None
    return parse_config(doc)


def config_to_dict(cfg):
    def inp(spec):
        if spec is None:
            return "vacuum"
        return {"v0_db": spec.v0_db, "eta": spec.eta}

    return {
        "input1": inp(cfg.input1),
        "input2": inp(cfg.input2),
        "t": cfg.t,
        "eta_x": cfg.eta_x,
        "eta_y": cfg.eta_y,
    }


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    scenario: ScenarioConfig
    param: str
    start: float
    stop: float
    steps: int
    optimal_t: bool = False


def measured_squeezer():
    """Lossy squeezer reproducing the measured 2.9 dB / 5.3 dB output pair."""
    from .optimize import squeezer_from_measured

    return squeezer_from_measured(
        db_to_variance(MEASURED_SQUEEZING_DB), db_to_variance(MEASURED_ANTISQUEEZING_DB)
    )


def presets():
    minus7 = SqueezerSpec.from_db(-7.0)
    measured = measured_squeezer()
    items = [
        Preset("fig7", "two -7 dB squeezers, 50:50, loss swept on beam y",
               ScenarioConfig(minus7, minus7, 0.5), "eta_y", 0.0, 1.0, 201),
        Preset("fig10", "one -7 dB squeezer at the measured loss, splitter swept",
               ScenarioConfig(SqueezerSpec(minus7.v0_plus, measured.eta), None, 0.5), "t", 0.0, 1.0, 201),
        Preset("fig11", "one -7 dB squeezer on a 50:50 splitter, squeezer loss swept",
               ScenarioConfig(minus7, None, 0.5), "eta_1", 0.0, 1.0, 201),
        Preset("fig12", "one lossless -7 dB squeezer, splitter swept (inseparability)",
               ScenarioConfig(minus7, None, 0.5), "t", 0.0, 1.0, 201),
        Preset("fig14", "measured 2.9/5.3 dB squeezer, splitter swept",
               ScenarioConfig(measured, None, 0.78), "t", 0.0, 1.0, 201),
    ]
    return {p.name: p for p in items}


PRESET_NAMES = ("fig7", "fig10", "fig11", "fig12", "fig14")

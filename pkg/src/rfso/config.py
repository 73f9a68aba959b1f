"""Experiment configuration: JSON loading, defaults, validation, overrides.

Key names carry their units (``_km``, ``_nm``, ``_cm``, ``_mm``, ``_db``)
and are converted to SI when the model is built.  Omitted keys take the
reference-scenario defaults; unknown keys are rejected.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from .analysis import MODULATIONS, LinkModel
from .errors import ConfigError
from .fsohop import WEATHER_DB_PER_KM, FsoGeometryInput, derive_geometry
from .impairment import sel_params, sel_params_db
from .mcsim import METHODS, METRICS, McPlan, ModelTemplate
from .rfhop import RfHopConfig, jakes_rho


@dataclass(frozen=True)
class RfSection:
    N: int = 5
    m: int = 5
    rho: float | None = 0.9
    fd_td: float | None = None


@dataclass(frozen=True)
class FsoSection:
    L_km: float = 1.0
    lambda_nm: float = 1550.0
    a_cm: float = 5.0
    w0_mm: float = 5.0
    F0_m: float = -10.0
    cn2: float = 5e-14
    sigma_s_cm: float = 3.75
    sigma_db_per_km: float | None = None
    weather: str | None = "clear"
    eta: float = 1.0
    sigma2_sq: float = 1.0
    Pt: float = 1.0
    xi: float | None = None


@dataclass(frozen=True)
class HpaSection:
    ibo_db: float | None = 30.0
    ideal: bool = False


@dataclass(frozen=True)
class McSection:
    trials: int = 1_000_000
    seed: int = 0
    batch: int | None = None


def _default_grid() -> list[float]:
    return [float(x) for x in range(0, 65, 5)]


@dataclass(frozen=True)
class ExperimentConfig:
    rf: RfSection = field(default_factory=RfSection)
    fso: FsoSection = field(default_factory=FsoSection)
    hpa: HpaSection = field(default_factory=HpaSection)
    metric: str = "outage"
    modulation: str = "CBFSK"
    gamma_th_db: float = -20.0
    snr_grid_db: list = field(default_factory=_default_grid)
    snr_coupling: str = "equal"
    gbar1_db: float | None = None
    gbar2_db: float | None = None
    kappa2: str = "corrected"
    methods: list = field(default_factory=lambda: list(METHODS))
    mc: McSection = field(default_factory=McSection)
    output: str = "rfso_out.csv"

    def to_dict(self) -> dict:
        return asdict(self)


_SECTIONS = {"rf": RfSection, "fso": FsoSection, "hpa": HpaSection, "mc": McSection}


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


# fields whose default is None, with the type they take when given
_OPTIONAL_TYPES = {"rf.rho": 0.0, "rf.fd_td": 0.0, "fso.sigma_db_per_km": 0.0,
                   "fso.weather": "", "fso.xi": 0.0, "hpa.ibo_db": 0.0, "mc.batch": 0,
                   "gbar1_db": 0.0, "gbar2_db": 0.0}


def _coerce(path: str, value, default):
    """Type-check ``value`` against the type of the field default."""
    if value is None:
        if path in _OPTIONAL_TYPES:
            return None
        raise ConfigError(f"{path}: may not be null")
    default = _OPTIONAL_TYPES.get(path, default)
    expect_float = isinstance(default, float)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if not (_is_number(value) and float(value).is_integer()):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return int(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{path}: expected a list, got {value!r}")
        return list(value)
    if expect_float:
        if not _is_number(value) or not math.isfinite(float(value)):
            raise ConfigError(f"{path}: expected a finite number, got {value!r}")
        return float(value)
    raise ConfigError(f"{path}: unsupported value {value!r}")


def _build(cls, raw: dict, prefix: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"{prefix or 'config'}: expected an object")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        where = f"{prefix}." if prefix else ""
        raise ConfigError(f"unknown key '{where}{unknown[0]}'")
    defaults = cls()
    kwargs = {}
    for name, value in raw.items():
        path = f"{prefix}.{name}" if prefix else name
        if name in _SECTIONS and cls is ExperimentConfig:
            kwargs[name] = _build(_SECTIONS[name], value, name)
        else:
            kwargs[name] = _coerce(path, value, getattr(defaults, name))
    return cls(**kwargs)


def _fix_exclusive(raw: dict) -> dict:
    """Setting one of a mutually exclusive pair clears the other's default."""
    raw = copy.deepcopy(raw)
    rf = raw.get("rf", {})
    if isinstance(rf, dict) and "fd_td" in rf and "rho" not in rf:
        rf["rho"] = None
    fso = raw.get("fso", {})
    if isinstance(fso, dict) and "sigma_db_per_km" in fso and "weather" not in fso:
        fso["weather"] = None
    hpa = raw.get("hpa", {})
    if isinstance(hpa, dict) and hpa.get("ideal") and "ibo_db" not in hpa:
        hpa["ibo_db"] = None
    return raw


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    rf, fso, hpa, mc = cfg.rf, cfg.fso, cfg.hpa, cfg.mc
    if rf.N < 1:
        raise ConfigError("rf.N: must be a positive integer")
    if not 1 <= rf.m <= rf.N:
        raise ConfigError("rf.m: must satisfy 1 <= m <= N")
    if (rf.rho is None) == (rf.fd_td is None):
        raise ConfigError("rf: give exactly one of rho, fd_td")
    if rf.rho is not None and not 0.0 <= rf.rho <= 1.0:
        raise ConfigError("rf.rho: rho ∈ [0,1] required")
    if rf.fd_td is not None and rf.fd_td < 0.0:
        raise ConfigError("rf.fd_td: must be >= 0")
    for name, unit in (("L_km", "km"), ("lambda_nm", "nm"), ("a_cm", "cm"), ("w0_mm", "mm"),
                       ("cn2", "m^-2/3"), ("eta", "1"), ("sigma2_sq", "1"), ("Pt", "1")):
        if not getattr(fso, name) > 0.0:
            raise ConfigError(f"fso.{name}: must be > 0 ({unit})")
    if fso.F0_m == 0.0:
        raise ConfigError("fso.F0_m: must be non-zero (m)")
    if fso.sigma_s_cm < 0.0:
        raise ConfigError("fso.sigma_s_cm: must be >= 0 (cm)")
    if (fso.weather is None) == (fso.sigma_db_per_km is None):
        raise ConfigError("fso: give exactly one of weather, sigma_db_per_km")
    if fso.weather is not None and fso.weather not in WEATHER_DB_PER_KM:
        raise ConfigError(
            f"fso.weather: unknown preset {fso.weather!r}; known: {sorted(WEATHER_DB_PER_KM)}; "
            "use sigma_db_per_km for other conditions"
        )
    if fso.sigma_db_per_km is not None and fso.sigma_db_per_km < 0.0:
        raise ConfigError("fso.sigma_db_per_km: must be >= 0 (dB/km)")
    if fso.xi is not None and not fso.xi > 0.0:
        raise ConfigError("fso.xi: must be > 0")
    if hpa.ideal == (hpa.ibo_db is not None):
        raise ConfigError("hpa: give exactly one of ibo_db, ideal=true")
    if cfg.metric not in METRICS:
        raise ConfigError(f"metric: must be one of {list(METRICS)}")
    if cfg.modulation not in MODULATIONS:
        raise ConfigError(f"modulation: must be one of {sorted(MODULATIONS)}")
    if not cfg.snr_grid_db:
        raise ConfigError("snr_grid_db: must be a non-empty list (dB)")
    for v in cfg.snr_grid_db:
        if not _is_number(v) or not math.isfinite(v):
            raise ConfigError(f"snr_grid_db: expected finite numbers (dB), got {v!r}")
    if cfg.snr_coupling not in ("equal", "transmit"):
        raise ConfigError("snr_coupling: must be 'equal' or 'transmit'")
    if cfg.kappa2 not in ("corrected", "printed"):
        raise ConfigError("kappa2: must be 'corrected' or 'printed'")
    bad = [m for m in cfg.methods if m not in METHODS]
    if bad or not cfg.methods:
        raise ConfigError(f"methods: non-empty subset of {list(METHODS)} required")
    if mc.trials < 10_000:
        raise ConfigError("mc.trials: must be >= 10000")
    if mc.batch is not None and (mc.batch <= 0 or mc.trials % mc.batch):
        raise ConfigError("mc.batch: must be positive and divide mc.trials")
    if not 0 <= mc.seed < 2**64:
        raise ConfigError("mc.seed: must be an unsigned 64-bit integer")
    if not cfg.output:
        raise ConfigError("output: must be a non-empty path")
    return cfg


def config_from_dict(raw: dict) -> ExperimentConfig:
    return validate(_build(ExperimentConfig, _fix_exclusive(raw), ""))


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc.msg} at line {exc.lineno}") from exc
    return config_from_dict(raw)


def parse_override(item: str) -> tuple[list[str], Any]:
    """Split ``a.b=VALUE``; VALUE is parsed as JSON, falling back to a plain string."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not KEY=VALUE")
    key, text = item.split("=", 1)
    parts = key.strip().split(".")
    if not all(parts):
        raise ConfigError(f"override key {key!r} is malformed")
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    return parts, value


def apply_overrides(cfg: ExperimentConfig, items) -> ExperimentConfig:
    raw = cfg.to_dict()
    given = {}
    for item in items:
        parts, value = parse_override(item)
        node = raw
        for p in parts[:-1]:
            if not isinstance(node.get(p), dict):
                raise ConfigError(f"unknown key '{'.'.join(parts)}'")
            node = node[p]
        node[parts[-1]] = value
        given[".".join(parts)] = value
    # an override of one member of an exclusive pair wins over the other
    for key, other in (("rf.rho", "rf.fd_td"), ("rf.fd_td", "rf.rho"),
                       ("fso.weather", "fso.sigma_db_per_km"),
                       ("fso.sigma_db_per_km", "fso.weather"),
                       ("hpa.ibo_db", "hpa.ideal")):
        if key in given and given[key] is not None and other not in given:
            sec, name = other.split(".")
            raw[sec][name] = False if name == "ideal" else None
    if given.get("hpa.ideal") is True and "hpa.ibo_db" not in given:
        raw["hpa"]["ibo_db"] = None
    return config_from_dict(raw)


# -- model construction -------------------------------------------------------

def geometry_input(cfg: ExperimentConfig) -> FsoGeometryInput:
    f = cfg.fso
    atten = f.sigma_db_per_km if f.sigma_db_per_km is not None else WEATHER_DB_PER_KM[f.weather]
    return FsoGeometryInput(
        L=f.L_km * 1e3, wavelength=f.lambda_nm * 1e-9, a=f.a_cm * 1e-2, w0=f.w0_mm * 1e-3,
        F0=f.F0_m, Cn2=f.cn2, sigma_s=f.sigma_s_cm * 1e-2, sigma_db_per_km=atten,
        eta=f.eta, sigma2_sq=f.sigma2_sq, Pt=f.Pt,
    )


def build_template(cfg: ExperimentConfig) -> ModelTemplate:
    rho = cfg.rf.rho if cfg.rf.rho is not None else jakes_rho(cfg.rf.fd_td)
    rf = RfHopConfig(N=cfg.rf.N, m=cfg.rf.m, rho=rho, gbar1=1.0)
    fso = derive_geometry(geometry_input(cfg))
    if cfg.fso.xi is not None:
        fso = fso.with_xi(cfg.fso.xi)
    hpa = sel_params(math.inf) if cfg.hpa.ideal else sel_params_db(cfg.hpa.ibo_db)
    base = LinkModel(rf=rf, fso=fso, hpa=hpa, printed_kappa2=cfg.kappa2 == "printed")
    return ModelTemplate(base=base, coupling=cfg.snr_coupling,
                         gbar1_db=cfg.gbar1_db, gbar2_db=cfg.gbar2_db)


def build_plan(cfg: ExperimentConfig) -> McPlan:
    return McPlan(
        trials=cfg.mc.trials, seed=cfg.mc.seed, batch=cfg.mc.batch, metric=cfg.metric,
        gamma_th=10.0 ** (cfg.gamma_th_db / 10.0), modulation=MODULATIONS[cfg.modulation],
    )


def flatten(d: dict, prefix: str = "") -> list[tuple[str, Any]]:
    out = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.extend(flatten(v, key + "."))
        else:
            out.append((key, v))
    return out


__all__ = [
    "ExperimentConfig", "load_config", "config_from_dict", "apply_overrides",
    "parse_override", "build_template", "build_plan", "geometry_input", "flatten",
]

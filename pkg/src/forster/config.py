"""Run configuration: a line-oriented ``key = value`` file with optional ``[section]`` headers.

Keys are unique across sections, so a key may also appear before any
header. A key placed under the wrong section is rejected.
"""
import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ForsterError
from .experiments import ScanSpec, grid
from .pair import R_MAX_UM, R_MIN_UM, PhysicalParams
from .stochastic import NoiseModel

SECTIONS = {
    "physics": ("c3_mhz_um3", "delta0_mhz", "f_res_mv_cm", "stark_exponent"),
    "geometry": ("r_um",),
    "drive": ("omega_mhz", "f_prep_mv_cm", "risetime_us"),
    "blockade": ("blockade_r_um", "f_off_mv_cm"),
    "noise": ("noise", "sigma_r_um", "sigma_f_mv_cm", "shots", "finite_statistics"),
    "scan": ("delta_min_mhz", "delta_max_mhz", "delta_step_mhz",
             "f_min_mv_cm", "f_max_mv_cm", "f_step_mv_cm",
             "t_min_us", "t_max_us", "t_step_us", "r_list_um"),
    "run": ("seed", "out_dir", "workers"),
}
_SECTION_OF = {key: sec for sec, keys in SECTIONS.items() for key in keys}


@dataclass
class Config:
    c3_mhz_um3: float = 2540.0
    delta0_mhz: float = 8.5
    f_res_mv_cm: float = 32.0
    stark_exponent: int = 4
    r_um: float = 8.1
    omega_mhz: float = 1.0
    f_prep_mv_cm: float = 64.0
    risetime_us: float = 0.0
    blockade_r_um: float = 10.0
    f_off_mv_cm: float = 64.0
    noise: bool = True
    sigma_r_um: float = 0.2
    sigma_f_mv_cm: float = 1.0
    shots: int = 100
    finite_statistics: bool = True
    delta_min_mhz: float = -20.0
    delta_max_mhz: float = 20.0
    delta_step_mhz: float = 0.5
    f_min_mv_cm: float = 0.0
    f_max_mv_cm: float = 60.0
    f_step_mv_cm: float = 2.0
    t_min_us: float = 0.0
    t_max_us: float = 0.6
    t_step_us: float = 0.005
    r_list_um: tuple = (8.1, 9.0, 10.0, 12.0, 15.0)
    seed: int = 0
    out_dir: str = "out"
    workers: int = 1
    defaults_applied: tuple = field(default=(), compare=False)

    def __post_init__(self):
        validate(self)

    # -- views consumed by the simulation modules --------------------------
    def params(self):
        return PhysicalParams(self.c3_mhz_um3, self.delta0_mhz, self.f_res_mv_cm,
                              self.stark_exponent)

    def noise_model(self):
        return NoiseModel(self.sigma_r_um, self.sigma_f_mv_cm, self.shots)

    def scan_spec(self, noisy=None):
        return ScanSpec(
            deltas=grid(self.delta_min_mhz, self.delta_max_mhz, self.delta_step_mhz),
            fields=grid(self.f_min_mv_cm, self.f_max_mv_cm, self.f_step_mv_cm),
            times=grid(self.t_min_us, self.t_max_us, self.t_step_us),
            r_list=np.array(self.r_list_um, dtype=float),
            noisy=self.noise if noisy is None else noisy,
            noise=self.noise_model(),
            finite_statistics=self.finite_statistics,
            seed=self.seed,
            omega=self.omega_mhz,
            f_prep=self.f_prep_mv_cm,
            workers=self.workers,
        )

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


_FIELDS = {f.name: f for f in dataclasses.fields(Config) if f.name != "defaults_applied"}
_DEFAULTS = Config.__dataclass_fields__


def _kind(name):
    default = _FIELDS[name].default
    if isinstance(default, bool):
        return bool
    if isinstance(default, tuple):
        return tuple
    return type(default)


def validate(cfg):
    """Raise ConfigError naming the first field that breaks a module invariant."""
    def bad(key, why):
        raise ConfigError(f"{key} = {getattr(cfg, key)!r}: {why}", key=key)

    for key in _FIELDS:
        value = getattr(cfg, key)
        if isinstance(value, float) and not math.isfinite(value):
            bad(key, "must be finite")
    for key in ("c3_mhz_um3", "f_res_mv_cm", "omega_mhz", "delta_step_mhz",
                "f_step_mv_cm", "t_step_us", "r_um", "blockade_r_um"):
        if not getattr(cfg, key) > 0:
            bad(key, "must be positive")
    for key in ("f_prep_mv_cm", "f_off_mv_cm", "f_min_mv_cm", "t_min_us",
                "risetime_us", "sigma_r_um", "sigma_f_mv_cm"):
        if getattr(cfg, key) < 0:
            bad(key, "must be non-negative")
    if cfg.stark_exponent < 2:
        bad("stark_exponent", "must be an integer >= 2")
    if cfg.shots < 1:
        bad("shots", "must be >= 1")
    if cfg.workers < 1:
        bad("workers", "must be >= 1")
    if not 0 <= cfg.seed < 2**64:
        bad("seed", "must be a 64-bit unsigned integer")
    if cfg.delta_max_mhz < cfg.delta_min_mhz:
        bad("delta_max_mhz", "must be >= delta_min_mhz")
    if cfg.f_max_mv_cm < cfg.f_min_mv_cm:
        bad("f_max_mv_cm", "must be >= f_min_mv_cm")
    if cfg.t_max_us < cfg.t_min_us:
        bad("t_max_us", "must be >= t_min_us")
    if not cfg.r_list_um:
        bad("r_list_um", "must list at least one distance")
    if any(not R_MIN_UM <= r <= R_MAX_UM for r in cfg.r_list_um):
        bad("r_list_um", f"distances must lie in [{R_MIN_UM}, {R_MAX_UM}] um")
    try:
        cfg.params()
        cfg.noise_model()
    except ForsterError as exc:  # pragma: no cover - covered by the checks above
        raise ConfigError(str(exc)) from exc


def _convert(kind, raw):
    if kind is bool:
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if kind is int:
        return int(raw, 10)
    if kind is float:
        return float(raw)
    if kind is tuple:
        items = [s.strip() for s in raw.split(",") if s.strip()]
        return tuple(float(s) for s in items)
    return raw


def parse_config(text):
    """Parse config text into a validated :class:`Config`; omitted keys take defaults."""
    values, lines = {}, {}
    section = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw_line.strip()!r}", lineno)
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw_line.strip()!r}", lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}", lineno, key)
        if section is not None and _SECTION_OF[key] != section:
            raise ConfigError(f"key {key!r} belongs to [{_SECTION_OF[key]}], "
                              f"not [{section}]", lineno, key)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, key)
        try:
            values[key] = _convert(_kind(key), raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", lineno, key) from None
        lines[key] = lineno
    defaults = tuple(k for k in _FIELDS if k not in values)
    try:
        return Config(**values, defaults_applied=defaults)
    except ConfigError as exc:
        if exc.key in lines:
            raise ConfigError(str(exc), lines[exc.key], exc.key) from None
        raise


def load_config(path):
    """``None`` or the literal ``default`` give the built-in defaults."""
    if path is None or path == "default":
        return parse_config("")
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _format(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


def config_items(cfg):
    """(section, key, formatted value) triples in canonical order."""
    return [(sec, key, _format(getattr(cfg, key)))
            for sec, keys in SECTIONS.items() for key in keys]


def serialize_config(cfg):
    out, current = [], None
    for sec, key, value in config_items(cfg):
        if sec != current:
            if current is not None:
                out.append("")
            out.append(f"[{sec}]")
            current = sec
        out.append(f"{key} = {value}")
    return "\n".join(out) + "\n"

"""INI-style configuration files mapped onto SystemConfig.

Sections mirror the config object: ``[nak]``, ``[am]``, ``[energy]`` and
``[system]``.  Keys ending in ``_db`` are converted to linear units here and
nowhere else; ``energy.ps_n1_db`` / ``energy.ps_n2_db`` set the noise powers
from a transmit-power-to-noise ratio.  Extra sections (``[eval]``,
``[sweep]``, ``[simulate]``) hold run parameters and are returned verbatim.
"""

import configparser
from dataclasses import fields

from .channels import AlphaMuParams, EnergyConfig, NakagamiParams
from .endtoend import SystemConfig
from .errors import ConfigError, SwiptafError

DEFAULT_TEXT = """\
[nak]
m1 = 3
omega1 = 5

[am]
alpha2 = 2
mu2 = 4.2
omega2 = 5

[energy]
scheme = TS
kappa = 0.7
theta_eff = 0.7
T0 = 1
T1 = 1
battery = 500
source_power = 1
d1 = 25
d2 = 25
delta = 2.7
ps_n1_db = 40
ps_n2_db = 100

[system]
C = 1
"""

_SECTIONS = {"nak": NakagamiParams, "am": AlphaMuParams, "energy": EnergyConfig}
_RUN_SECTIONS = ("eval", "sweep", "simulate")


def db_to_linear(value_db):
    return 10.0 ** (float(value_db) / 10.0)


def _parser():
    p = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    p.optionxform = str          # keep key case (T0, C, ...)
    return p


def read_text(text, source="<config>"):
    p = _parser()
    try:
        p.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return {s: dict(p[s]) for s in p.sections()}


def load_raw(path=None):
    """Defaults overlaid with the file at ``path`` (if any), as nested dicts."""
    raw = read_text(DEFAULT_TEXT, "<defaults>")
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for section, values in read_text(text, str(path)).items():
            for key, value in values.items():
                set_value(raw, section, key, value)
    return raw


def apply_override(raw, assignment):
    """Apply one ``section.key=value`` override in place."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form path=value")
    path, value = assignment.split("=", 1)
    if "." not in path:
        raise ConfigError(f"override path {path!r} needs a section, e.g. energy.d1")
    section, key = path.strip().split(".", 1)
    set_value(raw, section, key.strip(), value.strip())
    return raw


def set_value(raw, section, key, value):
    raw.setdefault(section, {})[key] = str(value)
    if section == "energy" and key in ("N1", "N2"):
        raw[section].pop(f"ps_n{key[1]}_db", None)
    if section == "energy" and key in ("ps_n1_db", "ps_n2_db"):
        raw[section].pop(f"N{key[4]}", None)


def _number(section, key, text):
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {text!r} is not a number") from exc


def build_config(raw) -> SystemConfig:
    """Validate nested dicts and construct the SystemConfig."""
    parts = {}
    try:
        for section, cls in _SECTIONS.items():
            values = dict(raw.get(section, {}))
            names = {f.name for f in fields(cls)}
            kwargs = {}
            if section == "energy":
                power = _number(section, "source_power", values.get("source_power", "1"))
                for i in ("1", "2"):
                    db_key = f"ps_n{i}_db"
                    if db_key in values:
                        values[f"N{i}"] = repr(power / db_to_linear(
                            _number(section, db_key, values.pop(db_key))))
            for key, text in values.items():
                if key.endswith("_db"):
                    base = key[:-3]
                    if base not in names:
                        raise ConfigError(f"[{section}] unknown key {key}")
                    kwargs[base] = db_to_linear(_number(section, key, text))
                elif key not in names:
                    raise ConfigError(f"[{section}] unknown key {key}")
                elif key == "scheme":
                    kwargs[key] = text.strip().upper()
                else:
                    kwargs[key] = _number(section, key, text)
            parts[section] = cls(**kwargs)
        system = dict(raw.get("system", {}))
        unknown = set(system) - {"C"}
        if unknown:
            raise ConfigError(f"[system] unknown keys {sorted(unknown)}")
        C = _number("system", "C", system.get("C", "1"))
        extra = set(raw) - set(_SECTIONS) - {"system"} - set(_RUN_SECTIONS)
        if extra:
            raise ConfigError(f"unknown sections {sorted(extra)}")
        return SystemConfig(parts["nak"], parts["am"], parts["energy"], C)
    except ConfigError:
        raise
    except (SwiptafError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def echo(cfg: SystemConfig) -> str:
    """Canonical text form; re-parsing it reproduces ``cfg`` exactly."""
    out = []
    for section, obj in (("nak", cfg.nak), ("am", cfg.am), ("energy", cfg.energy)):
        out.append(f"[{section}]")
        for f in fields(obj):
            v = getattr(obj, f.name)
            out.append(f"{f.name} = {v.value if f.name == 'scheme' else repr(float(v))}")
        out.append("")
    out += ["[system]", f"C = {cfg.C!r}", ""]
    return "\n".join(out)


def parse_config(path=None, overrides=()):
    raw = load_raw(path)
    for item in overrides:
        apply_override(raw, item)
    return build_config(raw), raw

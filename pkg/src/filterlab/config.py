"""Run configuration in TOML: parsing, validation with line positions, and emission.

Layout (every key optional)::

    horizon = 1e6          # evaluation horizon
    dim = 100              # truncation dimension
    tolerance = 1e-3       # density tolerance
    seed = 0
    jobs = 1

    [modulus]              # name = "log1p"  or  expr = "log(1 + t)" (+ unbounded = true)
    [sets]                 # name = "<set DSL>"
    [filters]              # name = "<filter DSL>"
    [sequences]            # name = "<sequence DSL>"
    [spaces]               # name = "<space DSL>"
    [gallery.<experiment>] # experiment parameter overrides
    [output]               # report = "out.json", format = "json" | "csv" | "text"

Validation collects every problem before failing; :class:`ConfigError`
carries ``(line, message)`` pairs.
"""

import re
from dataclasses import dataclass, field

import tomli
import tomli_w

from .converge import parse_sequence
from .errors import ConfigError, FilterLabError
from .filters import parse_filter
from .gallery import EXPERIMENTS
from .modulus import builtin_modulus, modulus_from_expr, validate_modulus
from .natset import parse_set
from .report import FORMATS
from .spaces import parse_space

TOP_KEYS = ("horizon", "dim", "tolerance", "seed", "jobs")
SECTIONS = ("modulus", "sets", "filters", "sequences", "spaces", "gallery", "output")
MODULUS_KEYS = ("name", "expr", "unbounded")
OUTPUT_KEYS = ("report", "format")
_PARSERS = {"sets": parse_set, "filters": parse_filter, "sequences": parse_sequence, "spaces": parse_space}


@dataclass
class RunConfig:
    """Validated configuration.  Values are kept as plain data; objects are built on demand."""

    horizon: int = None
    dim: int = None
    tolerance: float = None
    seed: int = None
    jobs: int = None
    modulus: dict = field(default_factory=dict)
    sets: dict = field(default_factory=dict)
    filters: dict = field(default_factory=dict)
    sequences: dict = field(default_factory=dict)
    spaces: dict = field(default_factory=dict)
    gallery: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def modulus_function(self):
        """The configured modulus, or ``None``."""
        if "name" in self.modulus:
            return builtin_modulus(self.modulus["name"])
        if "expr" in self.modulus:
            return modulus_from_expr(self.modulus["expr"], is_unbounded=self.modulus.get("unbounded", True))
        return None

    def to_dict(self):
        out = {k: getattr(self, k) for k in TOP_KEYS if getattr(self, k) is not None}
        for s in SECTIONS:
            if getattr(self, s):
                out[s] = getattr(self, s)
        return out


def _line_of(text, table, key=None):
    """1-based line of ``key`` inside ``[table]`` (or of the table header), ``None`` if not found."""
    current = ()
    header = re.compile(r"^\s*\[\s*([^\]]+?)\s*\]\s*(#.*)?$")
    for i, line in enumerate(text.splitlines(), start=1):
        m = header.match(line)
        if m:
            current = tuple(p.strip().strip('"') for p in m.group(1).split("."))
            if key is None and current == tuple(table):
                return i
            continue
        if key is not None and current == tuple(table):
            if re.match(rf"^\s*\"?{re.escape(key)}\"?\s*=", line):
                return i
            if re.match(rf"^\s*{re.escape(key)}\.", line):
                return i
    if key is not None and table:
        # dotted keys at the top level: modulus.expr = "..."
        dotted = re.escape(".".join(list(table) + [key]))
        for i, line in enumerate(text.splitlines(), start=1):
            if re.match(rf"^\s*{dotted}\s*=", line):
                return i
    return None


def _as_int(value, what, minimum, errors, line):
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        errors.append((line, f"{what} must be an integer >= {minimum}, got {value!r}"))
        return None
    return value


def parse_config(text):
    """Parse and validate configuration text.

    Raises
    ------
    ConfigError
        On a TOML syntax error, unknown keys, bad values, DSL parse failures
        or a modulus expression that fails an axiom (with its witness).
    """
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError([(int(m.group(1)) if m else None, f"syntax error: {exc}")]) from None
    errors = []
    cfg = RunConfig()

    for key, value in data.items():
        if key in TOP_KEYS:
            continue
        if key not in SECTIONS:
            errors.append((_line_of(text, (), key), f"unknown key {key!r}; allowed: {', '.join(TOP_KEYS + SECTIONS)}"))
        elif not isinstance(value, dict):
            errors.append((_line_of(text, (), key), f"{key} must be a table"))

    if "horizon" in data:
        cfg.horizon = _as_int(data["horizon"], "horizon", 1, errors, _line_of(text, (), "horizon"))
    if "dim" in data:
        cfg.dim = _as_int(data["dim"], "dim", 1, errors, _line_of(text, (), "dim"))
    if "seed" in data:
        cfg.seed = _as_int(data["seed"], "seed", 0, errors, _line_of(text, (), "seed"))
    if "jobs" in data:
        cfg.jobs = _as_int(data["jobs"], "jobs", 1, errors, _line_of(text, (), "jobs"))
    if "tolerance" in data:
        tol = data["tolerance"]
        if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not 0 < tol < 1:
            errors.append((_line_of(text, (), "tolerance"), f"tolerance must lie in (0, 1), got {tol!r}"))
        else:
            cfg.tolerance = float(tol)

    mod = data.get("modulus")
    if isinstance(mod, dict):
        _check_modulus(text, mod, cfg, errors)

    for section, parser in _PARSERS.items():
        table = data.get(section)
        if not isinstance(table, dict):
            continue
        for name, value in table.items():
            line = _line_of(text, (section,), name)
            if not isinstance(value, str):
                errors.append((line, f"{section}.{name} must be a DSL string"))
                continue
            try:
                parser(value)
            except (FilterLabError, ValueError, KeyError, TypeError) as exc:
                errors.append((line, f"{section}.{name}: {exc}"))
                continue
            getattr(cfg, section)[name] = value

    gal = data.get("gallery")
    if isinstance(gal, dict):
        for name, params in gal.items():
            line = _line_of(text, ("gallery", name)) or _line_of(text, ("gallery",), name)
            if name not in EXPERIMENTS:
                errors.append((line, f"unknown experiment {name!r}; known: {', '.join(EXPERIMENTS)}"))
                continue
            if not isinstance(params, dict):
                errors.append((line, f"gallery.{name} must be a table"))
                continue
            allowed = set(EXPERIMENTS[name].defaults) | {"seed"}
            for key in params:
                if key not in allowed:
                    errors.append((_line_of(text, ("gallery", name), key) or line, f"unknown parameter {key!r} for experiment {name}"))
            defaults = EXPERIMENTS[name].defaults
            cfg.gallery[name] = {k: _like_default(v, defaults.get(k)) for k, v in params.items() if k in allowed}

    out = data.get("output")
    if isinstance(out, dict):
        for key, value in out.items():
            line = _line_of(text, ("output",), key)
            if key not in OUTPUT_KEYS:
                errors.append((line, f"unknown key output.{key}; allowed: {', '.join(OUTPUT_KEYS)}"))
            elif key == "format" and value not in FORMATS:
                errors.append((line, f"output.format must be one of {FORMATS}, got {value!r}"))
            elif not isinstance(value, str):
                errors.append((line, f"output.{key} must be a string"))
            else:
                cfg.output[key] = value

    if errors:
        raise ConfigError(errors)
    return cfg


def _like_default(value, default):
    # 1e5 in TOML is a float; integer-valued parameters keep integer type
    if isinstance(default, int) and not isinstance(default, bool) and isinstance(value, float) and value.is_integer():
        return int(value)
    return value


def _check_modulus(text, mod, cfg, errors):
    for key in mod:
        if key not in MODULUS_KEYS:
            errors.append((_line_of(text, ("modulus",), key), f"unknown key modulus.{key}; allowed: {', '.join(MODULUS_KEYS)}"))
    if "name" in mod and "expr" in mod:
        errors.append((_line_of(text, ("modulus",), "expr"), "give modulus.name or modulus.expr, not both"))
        return
    if "name" in mod:
        line = _line_of(text, ("modulus",), "name")
        try:
            builtin_modulus(str(mod["name"]))
        except (FilterLabError, ValueError, KeyError) as exc:
            errors.append((line, str(exc.args[0]) if exc.args else str(exc)))
            return
        cfg.modulus["name"] = mod["name"]
    if "expr" in mod:
        line = _line_of(text, ("modulus",), "expr")
        unbounded = mod.get("unbounded", True)
        if not isinstance(unbounded, bool):
            errors.append((_line_of(text, ("modulus",), "unbounded"), "modulus.unbounded must be true or false"))
            return
        try:
            f = modulus_from_expr(str(mod["expr"]), is_unbounded=unbounded)
            report = validate_modulus(f)
        except (FilterLabError, ValueError) as exc:
            errors.append((line, f"modulus.expr: {exc}"))
            return
        bad = {k: a for k, a in report.axioms.items() if a.status not in ("holds", "not-claimed")}
        if bad:
            parts = [f"{k} {a.status}" + (f" (witness {list(a.witness)})" if a.witness else "") for k, a in bad.items()]
            errors.append((line, f"modulus.expr {mod['expr']!r} is not a modulus: " + "; ".join(parts)))
            return
        cfg.modulus["expr"] = mod["expr"]
        if "unbounded" in mod:
            cfg.modulus["unbounded"] = unbounded


def emit_config(cfg):
    """TOML text for ``cfg``; :func:`parse_config` of the result equals ``cfg``."""
    return tomli_w.dumps(cfg.to_dict())


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())

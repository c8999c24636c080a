"""Run configuration: an INI file with [law], [grid], [tolerances] and [run] sections."""

import configparser
from dataclasses import dataclass
from pathlib import Path

from .equations import SolverConfig
from .exceptions import ConfigError, ParseError, UnknownLaw
from .field import BodyGrid
from .laws import catalog, parse_law

COMMANDS = ("analyze", "foliate", "second-grade", "homogeneity", "check-iso")
KEYS = {
    "law": {"name", "text", "n", "d"},
    "grid": {"lo", "hi", "counts"},
    "tolerances": {"rel_tol", "tol_angle", "tol_hom", "tol_iso"},
    "run": {"seed", "degree", "commands", "output", "jet", "jets_per_point"},
}


@dataclass(frozen=True, eq=False)
class RunConfig:
    law: object
    law_label: str
    n: int
    d: int
    grid: BodyGrid
    seed: int = 0
    rel_tol: float = 1e-8
    tol_angle: float = 1e-3
    tol_hom: float = 1e-8
    tol_iso: float = 1e-8
    degree: int = 2
    jets_per_point: int = 4
    commands: tuple = ("analyze", "foliate", "second-grade", "homogeneity")
    output: Path = Path(".")
    jet: Path | None = None

    @property
    def solver(self):
        return SolverConfig(seed=self.seed, rel_tol=self.rel_tol)


def _number(section, key, raw, kind, lo=None, hi=None, open_lo=False):
    name = f"{section}.{key}"
    try:
        value = kind(raw)
    except ValueError:
        raise ConfigError(name, f"expected {kind.__name__}, got {raw!r}") from None
    if lo is not None and (value < lo or (open_lo and value == lo)):
        raise ConfigError(name, f"value {value} below allowed range")
    if hi is not None and value >= hi:
        raise ConfigError(name, f"value {value} above allowed range")
    return value


def _vector(section, key, raw, kind, n):
    parts = raw.replace(",", " ").split()
    if len(parts) != n:
        raise ConfigError(f"{section}.{key}", f"expected {n} values, got {len(parts)}")
    return [_number(section, key, p, kind) for p in parts]


def load_config(path):
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except configparser.Error as err:
        raise ConfigError("config", f"unreadable: {err}") from None
    return parse_config(parser, base=path.parent)


def parse_config(parser, base=Path(".")):
    for section in parser.sections():
        if section not in KEYS:
            raise ConfigError(section, "unknown section")
        for key in parser[section]:
            if key not in KEYS[section]:
                raise ConfigError(f"{section}.{key}", "unknown key")
    for section in ("law", "grid"):
        if not parser.has_section(section):
            raise ConfigError(section, "missing section")
    law_sec = parser["law"]
    tol = parser["tolerances"] if parser.has_section("tolerances") else {}
    run = parser["run"] if parser.has_section("run") else {}

    if "n" not in law_sec:
        raise ConfigError("law.n", "missing")
    n = _number("law", "n", law_sec["n"], int, lo=2)
    if ("name" in law_sec) == ("text" in law_sec):
        raise ConfigError("law", "give exactly one of name or text")
    if "name" in law_sec:
        try:
            law = catalog(law_sec["name"].strip(), n)
        except UnknownLaw:
            raise ConfigError("law", f"unknown catalog entry {law_sec['name'].strip()!r}") from None
        label = law_sec["name"].strip()
    else:
        try:
            law = parse_law(law_sec["text"], n)
        except ParseError as err:
            raise ConfigError("law.text", str(err)) from None
        label = law.text
    if "d" in law_sec:
        d = _number("law", "d", law_sec["d"], int, lo=1)
        if d != law.d:
            raise ConfigError("law.d", f"law has {law.d} components, config says {d}")

    g = parser["grid"]
    for key in ("lo", "hi", "counts"):
        if key not in g:
            raise ConfigError(f"grid.{key}", "missing")
    lo = _vector("grid", "lo", g["lo"], float, n)
    hi = _vector("grid", "hi", g["hi"], float, n)
    counts = _vector("grid", "counts", g["counts"], int, n)
    if any(a >= b for a, b in zip(lo, hi)):
        raise ConfigError("grid.hi", "every entry must exceed grid.lo")
    if min(counts) < 1:
        raise ConfigError("grid.counts", "counts must be positive")

    kw = {}
    for key in ("rel_tol", "tol_angle", "tol_hom", "tol_iso"):
        if key in tol:
            kw[key] = _number("tolerances", key, tol[key], float, lo=0.0, hi=1.0, open_lo=True)
    if "seed" in run:
        kw["seed"] = _number("run", "seed", run["seed"], int, lo=0)
    if "degree" in run:
        kw["degree"] = _number("run", "degree", run["degree"], int, lo=1, hi=5)
    if "jets_per_point" in run:
        kw["jets_per_point"] = _number("run", "jets_per_point", run["jets_per_point"], int, lo=1)
    if "commands" in run:
        cmds = run["commands"].replace(",", " ").split()
        bad = [c for c in cmds if c not in COMMANDS]
        if bad or not cmds:
            raise ConfigError("run.commands", f"unknown command(s) {bad}; allowed: {', '.join(COMMANDS)}")
        kw["commands"] = tuple(c for c in COMMANDS if c in cmds)
    if "output" in run:
        kw["output"] = base / run["output"].strip()
    else:
        kw["output"] = base
    if "jet" in run:
        kw["jet"] = base / run["jet"].strip()
    if "check-iso" in kw.get("commands", ()) and "jet" not in kw:
        raise ConfigError("run.jet", "required by the check-iso command")
    return RunConfig(law=law, law_label=label, n=n, d=law.d,
                     grid=BodyGrid(lo, hi, counts), **kw)

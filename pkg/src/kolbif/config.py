"""Run configuration read from an INI file and overridden by flags.

A config holds at most one coefficient block, either ``[coefficients]``
(canonical theta, gamma, delta, M, N, S, P) or ``[raw]`` (p11 ... s2).
Every command except ``verify`` needs one. Optional sections are
``[analysis]`` (radius, seed, mu), ``[tolerances]`` and ``[output]``
(dir, formats).
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .classify import TOL_CLASS
from .curves import TOL_A
from .equilibria import TOL_EQ, TOL_GEOM
from .integrate import ATOL, RTOL
from .model import DEFAULT_RADIUS, Coefficients, Orientation, ParamPoint, RawCoefficients, canonicalize
from .presets import preset

CANONICAL_KEYS = ("theta", "gamma", "delta", "M", "N", "S", "P")
RAW_KEYS = ("p11", "p12", "p13", "p21", "p22", "p23", "s1", "s2")
FORMATS = ("svg", "csv", "json")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    tol_eq: float = TOL_EQ
    tol_class: float = TOL_CLASS
    tol_geom: float = TOL_GEOM
    tol_a: float = TOL_A
    rtol: float = RTOL
    atol: float = ATOL

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ConfigError(f"tolerance {f.name} must be positive")


@dataclass(frozen=True)
class RunConfig:
    canonical: dict[str, float] | None = None
    raw: dict[str, float] | None = None
    radius: float = DEFAULT_RADIUS
    tolerances: Tolerances = field(default_factory=Tolerances)
    out: Path = Path("kolbif-out")
    seed: int = 0
    formats: tuple[str, ...] = FORMATS
    mu: tuple[float, float] | None = None

    def __post_init__(self):
        if self.canonical is not None and self.raw is not None:
            raise ConfigError("the [coefficients] and [raw] blocks are mutually exclusive")
        if not self.radius > 0:
            raise ConfigError("radius must be positive")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise ConfigError(f"unknown output format(s) {bad}; choose from {', '.join(FORMATS)}")

    def coefficients(self) -> tuple[Coefficients, Orientation]:
        """Canonical coefficients and the time orientation of the input frame."""
        if self.canonical is None and self.raw is None:
            raise ConfigError("no coefficients: give a [coefficients] or [raw] block, or --case-params")
        if self.canonical is not None:
            return Coefficients(**self.canonical), Orientation.FORWARD
        raw = RawCoefficients(ParamPoint(0.0, 0.0), **self.raw)
        return canonicalize(raw)

    def param_point(self) -> ParamPoint | None:
        """--mu in the canonical frame (a raw-frame mu is mapped by the orientation)."""
        if self.mu is None:
            return None
        mu = ParamPoint(*self.mu)
        if self.raw is not None:
            _, orientation = self.coefficients()
            mu = orientation.map_mu(mu)
        return mu

    def as_dict(self) -> dict:
        return {
            "canonical": self.canonical,
            "raw": self.raw,
            "radius": self.radius,
            "tolerances": {f.name: getattr(self.tolerances, f.name) for f in fields(self.tolerances)},
            "seed": self.seed,
            "formats": list(self.formats),
            "mu": list(self.mu) if self.mu else None,
        }


def _floats(section: configparser.SectionProxy, keys: tuple[str, ...], required: tuple[str, ...]) -> dict[str, float]:
    unknown = [k for k in section if k not in keys]
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in [{section.name}]")
    missing = [k for k in required if k not in section]
    if missing:
        raise ConfigError(f"missing key(s) {missing} in [{section.name}]")
    try:
        return {k: float(section[k]) for k in keys if k in section}
    except ValueError as err:
        raise ConfigError(f"[{section.name}]: {err}") from None


def parse_mu(text: str) -> tuple[float, float]:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 2:
        raise ConfigError(f"mu must be 'MU1,MU2', got {text!r}")
    return float(parts[0]), float(parts[1])


def parse_formats(text: str) -> tuple[str, ...]:
    return tuple(f.strip().lower() for f in text.split(",") if f.strip())


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keep M, N, S, P case-sensitive
    return cp


def load_config(
    path: str | Path | None = None,
    overrides: list[str] | None = None,
    case_params: str | None = None,
) -> configparser.ConfigParser:
    """Read the INI file, then a built-in set, then ``section.key=value`` overrides."""
    cp = _parser()
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    if case_params is not None:
        c = preset(case_params).coefficients
        for sec in ("coefficients", "raw"):
            cp.remove_section(sec)
        cp["coefficients"] = {k: repr(v) for k, v in c.as_dict().items()}
    for item in overrides or []:
        key, sep, value = item.partition("=")
        sec, dot, name = key.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(f"override must be section.key=value, got {item!r}")
        if not cp.has_section(sec):
            cp.add_section(sec)
        cp[sec][name] = value.strip()
    return cp


def build_config(cp: configparser.ConfigParser, **flags) -> RunConfig:
    """Assemble a RunConfig; keyword flags that are not None win over the file."""
    known = {"coefficients", "raw", "analysis", "tolerances", "output"}
    extra = [s for s in cp.sections() if s not in known]
    if extra:
        raise ConfigError(f"unknown section(s) {extra}")
    canonical = raw = None
    if cp.has_section("coefficients"):
        canonical = _floats(cp["coefficients"], CANONICAL_KEYS, ("theta", "gamma", "delta"))
    if cp.has_section("raw"):
        raw = _floats(cp["raw"], RAW_KEYS, RAW_KEYS)
    kw: dict = {"canonical": canonical, "raw": raw}
    an = cp["analysis"] if cp.has_section("analysis") else {}
    outp = cp["output"] if cp.has_section("output") else {}
    for name, sec, keys in (("analysis", an, ("radius", "seed", "mu")), ("output", outp, ("dir", "formats"))):
        unknown = [k for k in sec if k not in keys]
        if unknown:
            raise ConfigError(f"unknown key(s) {unknown} in [{name}]")
    if "radius" in an:
        kw["radius"] = float(an["radius"])
    if "seed" in an:
        kw["seed"] = int(an["seed"])
    if "mu" in an:
        kw["mu"] = parse_mu(an["mu"])
    if cp.has_section("tolerances"):
        kw["tolerances"] = Tolerances(**_floats(cp["tolerances"], tuple(f.name for f in fields(Tolerances)), ()))
    if "dir" in outp:
        kw["out"] = Path(outp["dir"])
    if "formats" in outp:
        kw["formats"] = parse_formats(outp["formats"])
    cfg = RunConfig(**kw)
    given = {k: v for k, v in flags.items() if v is not None}
    return replace(cfg, **given) if given else cfg

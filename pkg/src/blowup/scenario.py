"""Scenario files: a flat, sectioned key=value format describing one run.

Sections: [domain], [f], [u0], [params], [solver], optional [output].
Unknown sections or keys are hard errors, so typos cannot silently fall
back to defaults.  Any key can be overridden from the command line with
``--set section.key=value``.

Example::

    [domain]
    shape = interval
    length = 3.141592653589793
    n = 400

    [f]
    family = power
    p = 2

    [u0]
    profile = sine-mode
    amplitude = 10

    [params]
    mode = explicit
    alpha = 3
    beta = 0.5
    gamma = 1

    [solver]
    dt0 = 1e-3
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError
from .evolution import SolverConfig
from .grid import Domain, Field, Grid, Interval, Rectangle, sample_function
from .nonlinearity import (
    ConditionParams,
    ExpMinusOne,
    Nonlinearity,
    Polynomial,
    Power,
    PowerPlusLinear,
)
from .spectral import Eigenpair

_SCHEMA: dict[str, tuple[str, ...]] = {
    "domain": ("shape", "length", "lx", "ly", "n"),
    "f": ("family", "p", "a", "coeffs"),
    "u0": ("profile", "amplitude", "mode"),
    "params": (
        "mode",
        "alpha",
        "beta",
        "gamma",
        "u_max",
        "n_samples",
        "base",
        "alpha_cap",
        "pp_eps_grid",
        "ibb_c_grid",
    ),
    "solver": (
        "dt0",
        "t_max",
        "blowup_threshold",
        "dt_min",
        "safety",
        "record_every",
        "diffusion",
        "eig_tol",
        "eig_max_iter",
    ),
    "output": ("dir", "trajectory_csv", "sweep_csv"),
}

_DEFAULT_PP_EPS = "0.01,0.02,0.05,0.1,0.2,0.5,1,1.5,2"
_DEFAULT_IBB_C = "0.1,1,10"

RawScenario = dict[str, dict[str, str]]


@dataclass(frozen=True)
class Scenario:
    domain: Domain
    n: int
    nonlinearity: Nonlinearity
    u0_profile: str
    u0_amplitude: float
    u0_mode: int
    params_mode: str
    params: ConditionParams | None
    u_max: float
    n_samples: int
    base: float
    alpha_cap: float
    pp_eps_grid: tuple[float, ...]
    ibb_c_grid: tuple[float, ...]
    solver: SolverConfig
    eig_tol: float
    eig_max_iter: int
    out_dir: str
    trajectory_csv: str
    sweep_csv: str


def load_raw(path) -> RawScenario:
    """Read a scenario file into {section: {key: string}} with schema checks."""
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#",), delimiters=("=",)
    )
    try:
        with open(path, "r") as fh:
            parser.read_file(fh, source=str(path))
    except OSError as exc:
        raise ParseError(f"cannot read scenario file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ParseError(f"malformed scenario file: {exc}") from exc
    raw: RawScenario = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ParseError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ParseError(f"unknown key {key!r} in section [{section}]")
        raw[section] = dict(parser[section])
    return raw


def apply_overrides(raw: RawScenario, assignments: list[str]) -> RawScenario:
    """Apply --set section.key=value overrides, validating each key."""
    out = {sec: dict(kv) for sec, kv in raw.items()}
    for item in assignments:
        if "=" not in item:
            raise ParseError(f"--set expects section.key=value, got {item!r}")
        target, value = item.split("=", 1)
        if "." not in target:
            raise ParseError(f"--set key must be section.key, got {target!r}")
        section, key = target.split(".", 1)
        section = section.strip().lower()
        key = key.strip().lower()
        if section not in _SCHEMA:
            raise ParseError(f"unknown section [{section}]")
        if key not in _SCHEMA[section]:
            raise ParseError(f"unknown key {key!r} in section [{section}]")
        out.setdefault(section, {})[key] = value.strip()
    return out


class _Reader:
    def __init__(self, raw: RawScenario):
        self.raw = raw

    def get(self, section: str, key: str, default: str | None = None) -> str:
        value = self.raw.get(section, {}).get(key)
        if value is None:
            if default is None:
                raise ParseError(f"missing required key {key!r} in section [{section}]")
            return default
        return value

    def has(self, section: str, key: str) -> bool:
        return key in self.raw.get(section, {})

    def float(self, section: str, key: str, default: str | None = None) -> float:
        text = self.get(section, key, default)
        try:
            return float(text)
        except ValueError as exc:
            raise ParseError(f"[{section}] {key} = {text!r} is not a number") from exc

    def int(self, section: str, key: str, default: str | None = None) -> int:
        text = self.get(section, key, default)
        try:
            return int(text)
        except ValueError as exc:
            raise ParseError(f"[{section}] {key} = {text!r} is not an integer") from exc

    def bool(self, section: str, key: str, default: str) -> bool:
        text = self.get(section, key, default).lower()
        if text in ("on", "true", "yes", "1"):
            return True
        if text in ("off", "false", "no", "0"):
            return False
        raise ParseError(f"[{section}] {key} = {text!r} is not on/off")

    def floats(self, section: str, key: str, default: str) -> tuple[float, ...]:
        text = self.get(section, key, default)
        items = [s for s in text.replace(";", ",").split(",") if s.strip()]
        try:
            return tuple(float(s) for s in items)
        except ValueError as exc:
            raise ParseError(f"[{section}] {key} = {text!r} is not a number list") from exc


def scenario_from_raw(raw: RawScenario) -> Scenario:
    """Validate and convert raw strings into a Scenario."""
    r = _Reader(raw)

    shape = r.get("domain", "shape").lower()
    if shape == "interval":
        domain: Domain = Interval(r.float("domain", "length"))
    elif shape == "rectangle":
        domain = Rectangle(r.float("domain", "lx"), r.float("domain", "ly"))
    else:
        raise ValidationError(f"unknown domain shape {shape!r}")
    n = r.int("domain", "n")

    family = r.get("f", "family").lower()
    if family == "power":
        nl: Nonlinearity = Power(r.float("f", "p"))
    elif family == "power+linear":
        nl = PowerPlusLinear(r.float("f", "p"), r.float("f", "a"))
    elif family == "exp-1":
        nl = ExpMinusOne()
    elif family == "polynomial":
        nl = Polynomial(r.floats("f", "coeffs", ""))
    else:
        raise ValidationError(f"unknown nonlinearity family {family!r}")

    profile = r.get("u0", "profile").lower()
    if profile not in ("eigenfunction", "sine-mode", "plateau"):
        raise ValidationError(f"unknown initial-data profile {profile!r}")
    amplitude = r.float("u0", "amplitude")
    if amplitude < 0:
        raise ValidationError(f"amplitude must be nonnegative, got {amplitude}")
    mode = r.int("u0", "mode", "1")
    if mode < 1:
        raise ValidationError(f"sine mode must be at least 1, got {mode}")

    params_mode = r.get("params", "mode").lower()
    params: ConditionParams | None = None
    if params_mode == "explicit":
        params = ConditionParams(
            r.float("params", "alpha"), r.float("params", "beta"), r.float("params", "gamma")
        )
    elif params_mode != "search":
        raise ValidationError(f"params mode must be search or explicit, got {params_mode!r}")

    solver = SolverConfig(
        dt0=r.float("solver", "dt0", "1e-3"),
        t_max=r.float("solver", "t_max", "5"),
        blowup_threshold=r.float("solver", "blowup_threshold", "1e8"),
        dt_min=r.float("solver", "dt_min", "1e-14"),
        safety=r.float("solver", "safety", "0.5"),
        record_every=r.int("solver", "record_every", "50"),
        diffusion=r.bool("solver", "diffusion", "on"),
    )

    return Scenario(
        domain=domain,
        n=n,
        nonlinearity=nl,
        u0_profile=profile,
        u0_amplitude=amplitude,
        u0_mode=mode,
        params_mode=params_mode,
        params=params,
        u_max=r.float("params", "u_max", "1e6"),
        n_samples=r.int("params", "n_samples", "4096"),
        base=r.float("params", "base", "1.01"),
        alpha_cap=r.float("params", "alpha_cap", "8"),
        pp_eps_grid=r.floats("params", "pp_eps_grid", _DEFAULT_PP_EPS),
        ibb_c_grid=r.floats("params", "ibb_c_grid", _DEFAULT_IBB_C),
        solver=solver,
        eig_tol=r.float("solver", "eig_tol", "1e-10"),
        eig_max_iter=r.int("solver", "eig_max_iter", "400"),
        out_dir=r.get("output", "dir", "out"),
        trajectory_csv=r.get("output", "trajectory_csv", "trajectory.csv"),
        sweep_csv=r.get("output", "sweep_csv", "sweep.csv"),
    )


def parse_scenario(path) -> Scenario:
    return scenario_from_raw(load_raw(path))


def build_initial_data(scn: Scenario, grid: Grid, eigenpair: Eigenpair | None = None) -> Field:
    """Realize the named initial-data profile at the scenario amplitude.

    Profiles are normalized to sup-norm 1 before scaling, so the amplitude
    is the initial sup-norm (up to sampling of the continuum profile).
    """
    amp = scn.u0_amplitude
    if scn.u0_profile == "eigenfunction":
        if eigenpair is None:
            raise ValidationError("eigenfunction profile needs a computed eigenpair")
        phi = eigenpair.phi0.values
        peak = float(np.max(np.abs(phi)))
        return Field(grid, amp * phi / peak)
    if scn.u0_profile == "sine-mode":
        k = scn.u0_mode
        if isinstance(scn.domain, Interval):
            length = scn.domain.length
            return sample_function(grid, lambda x: amp * np.sin(k * np.pi * x / length))
        lx, ly = scn.domain.lx, scn.domain.ly
        return sample_function(
            grid,
            lambda x, y: amp * np.sin(k * np.pi * x / lx) * np.sin(k * np.pi * y / ly),
        )
    # plateau: flat top over the middle half, linear ramps over the outer quarters
    def ramp(x: float, length: float) -> float:
        return min(1.0, min(x, length - x) / (length / 4.0))

    if isinstance(scn.domain, Interval):
        length = scn.domain.length
        return sample_function(grid, lambda x: amp * ramp(x, length))
    lx, ly = scn.domain.lx, scn.domain.ly
    return sample_function(grid, lambda x, y: amp * ramp(x, lx) * ramp(y, ly))

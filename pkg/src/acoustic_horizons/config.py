"""Scenario configuration: strict INI schema, validation, and builders.

A scenario file has sections ``[scenario] [metric] [grid] [source]
[evolution] [horizon_search] [experiment] [outputs] [tolerances]``.
Unknown sections or keys are fatal; every value is validated on load and
error messages cite the offending ``section.key`` path.  Built-in
scenarios ship as package data and are addressable by bare name.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ParseError, UnknownKey, ValidationError
from .metrics import (
    SpacetimeMetric,
    acoustic_metric,
    gordon_metric,
    radial_linear_flow,
    radial_profile_flow,
    slow_medium_metric,
    uniform_flow,
    vortex_flow,
)
from .tolerances import DEFAULT_TOL, Tolerances
from .wave.grid import AnnularGrid
from .wave.solver import BoundaryMultipole, GaussianPulse, WaveOptions

__all__ = ["ScenarioConfig", "parse_config", "builtin_scenarios",
           "builtin_scenario_path"]


# ---------------------------------------------------------------------------
# Schema
# ---------------------------------------------------------------------------

def _positive(v):
    return v > 0


def _nonnegative(v):
    return v >= 0


_METRIC_FAMILIES = ("acoustic", "gordon", "slow_medium", "vortex",
                    "radial_profile")
_FLOWS = ("vortex", "radial_linear", "profile_cubic", "uniform", "none")
_SOURCES = ("boundary_multipole", "interior_pulse", "none")
_KINDS = ("horizon", "wave", "nonuniqueness", "gradient_pair")
_INNER_BC = ("extrapolate", "dirichlet_zero", "inflow_zero")

# key -> (parser, default, validator or None)
_SCHEMA: dict[str, dict] = {
    "scenario": {
        "name": (str, None, None),
        "kind": (str, "horizon", lambda v: v in _KINDS),
        "description": (str, "", None),
    },
    "metric": {
        "family": (str, None, lambda v: v in _METRIC_FAMILIES),
        "flow": (str, "none", lambda v: v in _FLOWS),
        "a": (float, 1.0, None),
        "b": (float, 1.0, None),
        "rho": (float, 1.0, _positive),
        "c": (float, 1.0, _positive),
        "n_index": (float, 1.0, lambda v: v >= 1.0),
        "w1": (float, 0.0, None),
        "w2": (float, 0.0, None),
        "r0": (float, 1.0, _positive),
        "flow_r_min": (float, 1e-8, _positive),
        "profile_nodes_r": ("floats", (), None),
        "profile_nodes_a": ("floats", (), None),
        "profile_kappa": (float, 24.0, _positive),
        "profile_r1": (float, 0.5, _positive),
        "profile_r0": (float, 1.8, _positive),
    },
    "grid": {
        "nr": (int, 129, lambda v: v >= 8),
        "ntheta": (int, 256, lambda v: v >= 8),
        "r_min": (float, 0.5, _positive),
        "r_max": (float, 2.2, _positive),
    },
    "source": {
        "kind": (str, "none", lambda v: v in _SOURCES),
        "amplitude": (float, 1.0, None),
        "m": (int, 2, _nonnegative),
        "duration": (float, 1.0, _positive),
        "center_r": (float, 0.7, _positive),
        "center_theta": (float, 0.0, None),
        "width": (float, 0.1, _positive),
    },
    "evolution": {
        "t_end": (float, 3.0, _positive),
        "safety": (float, 0.4, lambda v: 0 < v <= 1),
        "ko_eps": (float, 0.02, _nonnegative),
        "record_interval": (float, 0.05, _positive),
        "inner_bc": (str, "extrapolate", lambda v: v in _INNER_BC),
        "interior_radius": (float, None, _positive),
        "exterior_radius": (float, None, _positive),
        "probes": (str, "", None),
        "snapshot": (bool, True, None),
    },
    "horizon_search": {
        "r_lo": (float, None, _positive),
        "r_hi": (float, None, _positive),
        "cycle_lo": (float, None, _positive),
        "cycle_hi": (float, None, _positive),
        "scan_n": (int, 64, lambda v: v >= 4),
        "n_probes": (int, 64, lambda v: v >= 8),
        "theta0": (float, 0.0, None),
        "families": (str, "+,-", None),
        "s1_radius": (float, None, _positive),
    },
    "experiment": {
        "kind": (str, "none", lambda v: v in ("nonuniqueness",
                                              "gradient_pair", "none")),
        "grids": (str, "", None),
        "t_end": (float, 2.5, _positive),
        "bump_amplitude": (float, 0.12, None),
        "bump_r_outer": (float, 0.8, _positive),
        "bump_r_inner": (float, 0.0, _nonnegative),
        "bump_coefficient": (str, "g00", None),
        "horizon_radius": (float, 1.0, _positive),
        "exterior_margin": (float, 1.3, lambda v: v >= 1.0),
        "control_bump_r_inner": (float, None, _positive),
        "control_bump_r_outer": (float, None, _positive),
        "beta": (float, 0.05, None),
        "n_index": (float, 1.5, lambda v: v > 1.0),
        "control_kappa": (float, None, None),
    },
    "outputs": {
        "directory": (str, "artifacts", None),
        "formats": (str, "csv,json", None),
    },
    "tolerances": {
        "scale": (float, 1.0, _positive),
    },
}

_REQUIRED = {("scenario", "name"), ("metric", "family")}


def _parse_value(section: str, key: str, raw: str):
    kind, default, check = _SCHEMA[section][key]
    path = f"{section}.{key}"
    try:
        if kind is float:
            val = float(raw)
        elif kind is int:
            val = int(raw)
        elif kind is bool:
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            val = low in ("true", "1", "yes")
        elif kind == "floats":
            val = tuple(float(p) for p in raw.replace(" ", "").split(",") if p)
        else:
            val = raw.strip()
    except ValueError as exc:
        raise ValidationError(f"{path}: cannot parse {raw!r}") from exc
    if check is not None and not check(val):
        raise ValidationError(f"{path}: invalid value {val!r}")
    return val


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario: nested ``{section: {key: value}}`` with builders."""

    data: dict
    origin: str = ""

    def __getitem__(self, section: str) -> dict:
        return self.data[section]

    @property
    def name(self) -> str:
        return self.data["scenario"]["name"]

    @property
    def kind(self) -> str:
        return self.data["scenario"]["kind"]

    # -- builders -------------------------------------------------------------

    def build_flow(self):
        m = self.data["metric"]
        flow_kind = m["flow"]
        if flow_kind == "vortex":
            return vortex_flow(m["a"], m["b"], rho=m["rho"], c=m["c"],
                               r_min=m["flow_r_min"])
        if flow_kind == "radial_linear":
            return radial_linear_flow(m["r0"], m["n_index"], m["c"])
        if flow_kind == "uniform":
            return uniform_flow((m["w1"], m["w2"]), m["n_index"], m["c"],
                                m["rho"])
        if flow_kind == "profile_cubic":
            nodes_r = np.asarray(m["profile_nodes_r"], dtype=float)
            nodes_a = np.asarray(m["profile_nodes_a"], dtype=float)
            if len(nodes_r) != 4 or len(nodes_a) != 4:
                raise ValidationError(
                    "metric.profile_nodes_r/profile_nodes_a: need 4 nodes"
                )
            coef = np.linalg.solve(np.vander(nodes_r, 4), nodes_a)
            kappa, r0 = m["profile_kappa"], m["profile_r0"]

            def a_of(r):
                return np.polyval(coef, r)

            def b_of(r):
                return np.sqrt(np.maximum(
                    1.0 + kappa * (r0 - r) - a_of(r) ** 2, 0.0))

            return radial_profile_flow(a_of, b_of, m["profile_r1"], r0)
        return None

    def build_metric(self) -> SpacetimeMetric:
        family = self.data["metric"]["family"]
        flow = self.build_flow()
        if family in ("acoustic", "vortex", "radial_profile"):
            if flow is None:
                raise ValidationError(
                    f"metric.flow: family {family!r} needs a flow"
                )
            return acoustic_metric(flow)
        if family == "gordon":
            if flow is None:
                raise ValidationError("metric.flow: the optical family needs a flow")
            return gordon_metric(flow)
        if family == "slow_medium":
            if flow is None:
                flow = uniform_flow((self.data["metric"]["w1"],
                                     self.data["metric"]["w2"]),
                                    self.data["metric"]["n_index"],
                                    self.data["metric"]["c"])
            return slow_medium_metric(flow)
        raise ValidationError(f"metric.family: unknown family {family!r}")

    def build_grid(self) -> AnnularGrid:
        g = self.data["grid"]
        if g["r_min"] >= g["r_max"]:
            raise ValidationError("grid.r_min: must be below grid.r_max")
        return AnnularGrid(g["nr"], g["ntheta"], g["r_min"], g["r_max"])

    def build_source(self):
        s = self.data["source"]
        if s["kind"] == "boundary_multipole":
            return BoundaryMultipole(s["amplitude"], s["m"], s["duration"])
        if s["kind"] == "interior_pulse":
            return GaussianPulse(s["center_r"], s["center_theta"],
                                 s["width"], s["amplitude"])
        return None

    def build_wave_options(self) -> WaveOptions:
        e = self.data["evolution"]
        probes = []
        for part in e["probes"].split(","):
            part = part.strip()
            if not part:
                continue
            try:
                r_s, t_s = part.split(":")
                probes.append((float(r_s), float(t_s)))
            except ValueError as exc:
                raise ValidationError(
                    f"evolution.probes: cannot parse {part!r} (want r:theta)"
                ) from exc
        return WaveOptions(
            safety=e["safety"],
            ko_eps=e["ko_eps"],
            record_interval=e["record_interval"],
            inner_bc=e["inner_bc"],
            interior_radius=e["interior_radius"],
            exterior_radius=e["exterior_radius"],
            probes=tuple(probes),
        )

    def experiment_grids(self) -> list[AnnularGrid]:
        g = self.data["grid"]
        out = []
        for part in self.data["experiment"]["grids"].split(","):
            part = part.strip()
            if not part:
                continue
            try:
                nr_s, nt_s = part.lower().split("x")
                out.append(AnnularGrid(int(nr_s), int(nt_s),
                                       g["r_min"], g["r_max"]))
            except ValueError as exc:
                raise ValidationError(
                    f"experiment.grids: cannot parse {part!r} (want NRxNT)"
                ) from exc
        if not out:
            raise ValidationError("experiment.grids: empty schedule")
        return out

    def families(self) -> tuple[str, ...]:
        raw = self.data["horizon_search"]["families"].replace(" ", "")
        if raw in ("", "none"):
            return ()
        fams = tuple(p for p in raw.split(",") if p)
        for f in fams:
            if f not in ("+", "-"):
                raise ValidationError(
                    f"horizon_search.families: {f!r} is not '+' or '-'"
                )
        return fams

    def tolerances(self) -> Tolerances:
        return DEFAULT_TOL.scaled(self.data["tolerances"]["scale"])


def _validated(raw: configparser.ConfigParser, origin: str) -> ScenarioConfig:
    data: dict[str, dict] = {}
    for section in raw.sections():
        if section not in _SCHEMA:
            allowed = ", ".join(sorted(_SCHEMA))
            raise UnknownKey(f"unknown section [{section}] (allowed: {allowed})")
        data[section] = {}
        for key, value in raw.items(section):
            if key not in _SCHEMA[section]:
                allowed = ", ".join(sorted(_SCHEMA[section]))
                raise UnknownKey(
                    f"unknown key {section}.{key} (allowed: {allowed})"
                )
            data[section][key] = _parse_value(section, key, value)
    # fill defaults
    for section, keys in _SCHEMA.items():
        data.setdefault(section, {})
        for key, (_, default, _check) in keys.items():
            data[section].setdefault(key, default)
    for section, key in _REQUIRED:
        if data[section][key] is None:
            raise ValidationError(f"{section}.{key}: required key missing")
    # cross-field checks
    if data["metric"]["family"] == "vortex" and data["metric"]["flow"] == "none":
        data["metric"]["flow"] = "vortex"
    if data["metric"]["family"] == "radial_profile" \
            and data["metric"]["flow"] == "none":
        data["metric"]["flow"] = "profile_cubic"
    if data["grid"]["r_min"] >= data["grid"]["r_max"]:
        raise ValidationError("grid.r_min: must be below grid.r_max")
    return ScenarioConfig(data=data, origin=origin)


def parse_config(path_or_name: str | Path) -> ScenarioConfig:
    """Load and validate a scenario file, or a built-in scenario by name."""
    path = Path(path_or_name)
    if not path.exists():
        builtin = builtin_scenario_path(str(path_or_name))
        if builtin is None:
            raise ParseError(
                f"no such config file or built-in scenario: {path_or_name}"
            )
        path = builtin
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ParseError(f"cannot parse {path}: {exc}") from exc
    return _validated(parser, origin=str(path))


def builtin_scenario_path(name: str) -> Path | None:
    base = resources.files("acoustic_horizons.scenarios")
    candidate = base / f"{name}.ini"
    try:
        if candidate.is_file():
            return Path(str(candidate))
    except (OSError, AttributeError):
        return None
    return None


def builtin_scenarios() -> list[str]:
    """Names of the scenario files shipped with the package."""
    base = resources.files("acoustic_horizons.scenarios")
    names = sorted(p.name[:-4] for p in base.iterdir()
                   if p.name.endswith(".ini"))
    return names

"""Scenario files: parsing, schema and invariant validation, object construction.

A scenario is a JSON document whose sections (``grid``, ``prior``,
``profiles``, ``evolution``, ``kernel``, ``optomech``, ``rotating_frame``,
``hubble``, ``mirror``) configure the individual modules. Every problem is
reported as a :class:`Diagnostic` carrying the JSON pointer of the offending
field and, when it can be located, its line in the source file.
"""
from __future__ import annotations

import copy
import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import InvalidArgumentError, TfrwError
from .evolution import kernel_from_dict
from .grid import ScaleGrid, UniverseWavefunction, gaussian_packet, make_log_grid, \
    make_uniform_grid, normalize
from .kernel import LorentzianKernel, QuadratureKernel, kernel_for_event
from .optomech import (CavityMode, Free, Harmonic, OptomechParams, OptomechState,
                       RotatingFrameConfig, a_om_of_x)
from .pipeline import MeasurementEvent
from .profiles import profile_from_dict

REQUIRED = {
    "kernel": ("profiles",),
    "measure": ("grid", "prior", "profiles"),
    "optomech": ("optomech",),
    "hubble": ("rotating_frame", "hubble"),
    "mirror-measure": ("rotating_frame", "mirror", "profiles"),
}

DEFAULTS = {
    "kernel": {"r_min": 0.2, "r_max": 5.0, "n": 200, "backend": "auto"},
    "optomech": {
        "params": {"mass": 1.0, "x0": 1.0, "mode": 1, "photons": 1.0, "hbar": 1.0,
                   "c_light": 1.0, "potential": {"kind": "free"}},
        "initial": {"a_om": 1.0, "a_dot": 0.0, "t": 0.0},
        "method": "velocity-verlet",
        "output_stride": 1,
    },
    "hubble": {"a0": 1.0, "n": 201},
    "mirror": {"n": 801, "use_evolution": False},
}

_WS = re.compile(r"\s*")


@dataclass(frozen=True)
class Diagnostic:
    field: str
    message: str
    line: int | None = None

    def __str__(self):
        where = f"line {self.line}, " if self.line is not None else ""
        return f"{where}field {self.field or '/'}: {self.message}"


class ScenarioError(TfrwError):
    """Scenario could not be parsed or failed validation."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


def load_schema():
    text = resources.files("tfrw").joinpath("data/scenario.schema.json").read_text()
    return json.loads(text)


def _pointer(path):
    return "".join(f"/{p}" for p in path)


def locate(text, path):
    """Line number of the value at ``path`` in JSON ``text`` (``None`` if not found)."""
    dec = json.JSONDecoder()
    try:
        idx = _WS.match(text, 0).end()
        for comp in path:
            if text[idx] == "{" and isinstance(comp, str):
                idx = _WS.match(text, idx + 1).end()
                while True:
                    if text[idx] == "}":
                        return None
                    key, idx = json.decoder.scanstring(text, idx + 1)
                    idx = _WS.match(text, idx).end() + 1
                    idx = _WS.match(text, idx).end()
                    if key == comp:
                        break
                    _, idx = dec.raw_decode(text, idx)
                    idx = _WS.match(text, idx).end()
                    if text[idx] == ",":
                        idx = _WS.match(text, idx + 1).end()
            elif text[idx] == "[" and isinstance(comp, int):
                idx = _WS.match(text, idx + 1).end()
                for _ in range(comp):
                    _, idx = dec.raw_decode(text, idx)
                    idx = _WS.match(text, idx).end() + 1
                    idx = _WS.match(text, idx).end()
            else:
                return None
    except (IndexError, ValueError):
        return None
    return text.count("\n", 0, idx) + 1


def _merge(defaults, given):
    out = copy.deepcopy(defaults)
    for key, val in given.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def resolve(raw):
    """Fill defaults into the sections that are present."""
    cfg = copy.deepcopy(raw)
    for section, defaults in DEFAULTS.items():
        if section in cfg:
            cfg[section] = _merge(defaults, cfg[section])
    if "profiles" in cfg:
        cfg.setdefault("k", 1)
        cfg.setdefault("evolution", {"kind": "identity"})
    return cfg


@dataclass
class Scenario:
    """Resolved configuration plus builders for the module objects."""

    config: dict
    text: str = ""

    # --- builders (assume validation passed) --------------------------------

    def grid(self) -> ScaleGrid:
        g = self.config["grid"]
        if g["spacing"] == "explicit":
            return ScaleGrid(g["points"], "explicit")
        make = make_log_grid if g["spacing"] == "log" else make_uniform_grid
        return make(g["a_min"], g["a_max"], g["n"])

    def prior(self, grid=None) -> UniverseWavefunction:
        grid = grid or self.grid()
        p = self.config["prior"]
        if p["kind"] == "gaussian":
            return gaussian_packet(grid, p["a0"], p["sigma"])
        im = p.get("im", [0.0] * len(p["re"]))
        if len(p["re"]) != len(grid) or len(im) != len(grid):
            raise InvalidArgumentError(f"tabulated prior needs {len(grid)} values to match the grid")
        psi, _ = normalize(UniverseWavefunction(grid, [complex(a, b) for a, b in zip(p["re"], im)]))
        return psi

    def event(self) -> MeasurementEvent:
        pr = self.config["profiles"]
        return MeasurementEvent(profile_from_dict(pr["emit"]), profile_from_dict(pr["detect"]))

    def measurement_kernel(self):
        ev = self.event()
        backend = self.config.get("kernel", DEFAULTS["kernel"])["backend"]
        if backend == "quadrature":
            return QuadratureKernel(ev.emit, ev.detect)
        if backend == "closed_form":
            f, g = ev.emit.as_lorentzian(), ev.detect.as_lorentzian()
            if f is None or g is None:
                raise InvalidArgumentError("closed_form backend needs Lorentzian-shaped profiles")
            return LorentzianKernel(f, g)
        return kernel_for_event(ev.emit, ev.detect)

    def evolution(self, grid=None):
        spec = self.config.get("evolution", {"kind": "identity"})
        if spec["kind"] == "dense_matrix":
            grid = grid or self.grid()
        return kernel_from_dict(spec, grid)

    def optomech_params(self) -> OptomechParams:
        p = dict(self.config["optomech"]["params"])
        pot = p.pop("potential")
        potential = Free() if pot["kind"] == "free" else Harmonic(pot["omega"], pot.get("x_eq", 0.0))
        return OptomechParams(potential=potential, **p)

    def optomech_initial(self) -> OptomechState:
        s = self.config["optomech"]["initial"]
        return OptomechState(s["a_om"], s["a_dot"], s["t"])

    def rotating_frame(self) -> RotatingFrameConfig:
        rf = self.config["rotating_frame"]
        cav = tuple(CavityMode(c["resonance"], c["pull"], c["detuning"]) for c in rf["cavities"])
        xr = rf.get("x_range")
        return RotatingFrameConfig(cav, None if xr is None else tuple(xr))

    # --- validation ---------------------------------------------------------

    def problems(self, subcommand=None):
        """Every violated requirement, without running any simulation."""
        out = []
        cfg = self.config
        if subcommand is not None:
            for section in REQUIRED[subcommand]:
                if section not in cfg:
                    out.append(Diagnostic(f"/{section}",
                                          f"section '{section}' is required by '{subcommand}'"))
        checks = [("grid", self._check_grid), ("prior", self._check_prior),
                  ("profiles", self._check_profiles), ("evolution", self._check_evolution),
                  ("kernel", self._check_kernel), ("optomech", self._check_optomech),
                  ("rotating_frame", self._check_frame), ("hubble", self._check_hubble),
                  ("mirror", self._check_mirror)]
        for section, check in checks:
            if section in cfg:
                out.extend(check())
        return [self._with_line(d) for d in out]

    def _with_line(self, d):
        if d.line is not None or not self.text:
            return d
        path = [int(p) if p.isdigit() else p for p in d.field.strip("/").split("/") if p]
        return Diagnostic(d.field, d.message, locate(self.text, path))

    def _check_grid(self):
        g = self.config["grid"]
        if g["spacing"] == "explicit":
            if "points" not in g:
                return [Diagnostic("/grid", "explicit grid needs 'points'")]
            if any(not p > 0 for p in g["points"]):
                return [Diagnostic("/grid/points",
                                   "scale factors must be strictly positive")]
        else:
            missing = [k for k in ("a_min", "a_max", "n") if k not in g]
            if missing:
                return [Diagnostic("/grid", f"{g['spacing']} grid needs {', '.join(missing)}")]
            if not g["a_min"] > 0:
                return [Diagnostic("/grid/a_min",
                                   f"scale factors must be strictly positive, got a_min = {g['a_min']!r}")]
        return _attempt("/grid", self.grid)

    def _grid_or_none(self):
        if "grid" not in self.config or self._check_grid():
            return None
        return self.grid()

    def _check_prior(self):
        grid = self._grid_or_none()
        if grid is None:
            return [Diagnostic("/prior", "prior needs a valid 'grid' section")]
        return _attempt("/prior", lambda: self.prior(grid))

    def _check_profiles(self):
        out = []
        for role in ("emit", "detect"):
            out += _attempt(f"/profiles/{role}",
                            lambda: profile_from_dict(self.config["profiles"][role]))
        if not out and "kernel" in self.config:
            out += _attempt("/kernel/backend", self.measurement_kernel)
        return out

    def _check_evolution(self):
        spec = self.config["evolution"]
        if spec["kind"] == "dense_matrix":
            grid = self._grid_or_none()
            if grid is None:
                return [Diagnostic("/evolution", "dense_matrix evolution needs a valid 'grid'")]
            return _attempt("/evolution", lambda: self.evolution(grid))
        return _attempt("/evolution", self.evolution)

    def _check_kernel(self):
        k = self.config["kernel"]
        if not 0 < k["r_min"] < k["r_max"]:
            return [Diagnostic("/kernel", f"need 0 < r_min < r_max, got {k['r_min']!r}, {k['r_max']!r}")]
        return []

    def _check_optomech(self):
        om = self.config["optomech"]
        out = _attempt("/optomech/params", self.optomech_params)
        if not om["initial"]["a_om"] > 0:
            out.append(Diagnostic("/optomech/initial/a_om",
                                  "initial a_om must be positive (zero-length cavity)"))
        if not om["dt"] > 0:
            out.append(Diagnostic("/optomech/dt", "time step must be positive"))
        pot = om["params"]["potential"]
        if pot["kind"] == "harmonic" and not pot["omega"] >= 0:
            out.append(Diagnostic("/optomech/params/potential/omega",
                                  "oscillator frequency must be non-negative"))
        return out

    def _check_frame(self):
        rf = self.config["rotating_frame"]
        xr = rf.get("x_range")
        out = []
        if xr is not None and not xr[0] < xr[1]:
            out.append(Diagnostic("/rotating_frame/x_range", "need x_range[0] < x_range[1]"))
        try:
            cfg = self.rotating_frame()
        except TfrwError as exc:
            return out + [Diagnostic("/rotating_frame/cavities", str(exc))]
        for msg in cfg.problems():
            m = re.match(r"cavity (\d+)", msg)
            field = f"/rotating_frame/cavities/{int(m.group(1)) - 1}" if m else "/rotating_frame"
            out.append(Diagnostic(field, msg))
        return out

    def _check_hubble(self):
        h = self.config["hubble"]
        out = []
        if not h["a0"] > 0:
            out.append(Diagnostic("/hubble/a0", "initial scale factor must be positive"))
        if not h["eta_max"] > 0:
            out.append(Diagnostic("/hubble/eta_max", "eta_max must be positive"))
        elif h["a0"] * h["H"] * h["eta_max"] >= 1:
            out.append(Diagnostic(
                "/hubble/eta_max",
                f"scale factor diverges at eta = {1.0 / (h['a0'] * h['H'])!r} <= eta_max"))
        return out

    def _check_mirror(self):
        m = self.config["mirror"]
        out = []
        if not m["x_min"] < m["x_max"]:
            out.append(Diagnostic("/mirror", "need x_min < x_max"))
        if not m["sigma"] > 0:
            out.append(Diagnostic("/mirror/sigma", "sigma must be positive"))
        if m["use_evolution"] and "evolution" not in self.config:
            out.append(Diagnostic("/mirror/use_evolution", "no 'evolution' section given"))
        if "rotating_frame" in self.config and not out:
            try:
                cfg = self.rotating_frame()
                a_om_of_x([m["x_min"], m["x_max"]], cfg)
            except TfrwError as exc:
                out.append(Diagnostic("/mirror", f"displacement range invalid: {exc}"))
        return out


def _attempt(field, build):
    try:
        build()
    except (TfrwError, KeyError, TypeError, ValueError) as exc:
        text = f"missing key {exc}" if isinstance(exc, KeyError) else str(exc)
        return [Diagnostic(field, text)]
    return []


def parse(text) -> Scenario:
    """Parse and schema-check scenario text; raises :class:`ScenarioError`."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([Diagnostic("", f"JSON syntax error: {exc.msg} (column {exc.colno})",
                                        exc.lineno)]) from None
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        diags = []
        for err in errors:
            err = _branch_error(err)
            path = list(err.absolute_path)
            diags.append(Diagnostic(_pointer(path), _schema_message(err), locate(text, path)))
        raise ScenarioError(diags)
    for bad in _non_finite(raw):
        raise ScenarioError([Diagnostic(_pointer(bad), "value must be finite",
                                        locate(text, bad))])
    return Scenario(resolve(raw), text)


def _kinds(err):
    return [b.get("properties", {}).get("kind", {}).get("const")
            for b in err.schema.get("oneOf", [])]


def _branch_error(err):
    """Descend into the ``oneOf`` branch whose ``kind`` matches, if any."""
    while err.validator == "oneOf" and isinstance(err.instance, dict) and "kind" in err.instance:
        kinds = _kinds(err)
        if err.instance["kind"] not in kinds:
            break
        branch = kinds.index(err.instance["kind"])
        subs = [sub for sub in err.context if sub.relative_schema_path[0] == branch]
        if not subs:
            break
        err = subs[0]
    return err


def _schema_message(err):
    if err.validator == "oneOf" and isinstance(err.instance, dict) and "kind" in err.instance:
        kinds = _kinds(err)
        if err.instance["kind"] not in kinds:
            return f"unknown kind {err.instance['kind']!r}; expected one of {kinds}"
    return err.message


def _non_finite(obj, path=()):
    if isinstance(obj, float) and not math.isfinite(obj):
        yield list(path)
    elif isinstance(obj, dict):
        for k, v in obj.items():
            yield from _non_finite(v, path + (k,))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _non_finite(v, path + (i,))


def load(path) -> Scenario:
    """Read and parse a scenario file; unreadable files raise :class:`ScenarioError`."""
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise ScenarioError([Diagnostic("", f"cannot read scenario file: {exc}")]) from None
    return parse(text)

"""JSON scenario files: parsing and validation.

Grammar (SI units, every key optional unless marked)::

    {
      "name": "ellipse-metal",
      "mesh": {"kind": "shunt"|"series",            # required
               "window": [Wx, Wy],                   # required, metres
               "dl": 0.002,                          # required, must divide the window
               "origin": [0, 0],
               "boundaries": {"xmin": "matched"|"pec", ...}},
      "geometry": {"type": "ellipse", "a": .., "b": .., "center": [x, y]}
                | {"type": "naca4", "digits": "2415", "chord": 1.0,
                   "leading_edge": [x, y], "n_samples": 400}
                | {"type": "polyline", "points": [[x, y], ...], "closed": true},
      "material": "pec" | {"eps_r": 2, "thickness": 0.001, "sigma_e": 1e4,
                           "mu_r": 1, "sigma_m": 0, "name": "cfc"},
      "gaps": [{"x": 0.9, "width": 0.002, "surface": "lower"}],
      "panel": {"n_terms": 48, "n_air": 8, "remainder": true, "embed": true},
      "excitation": {"type": "point", "x": .., "y": .., "amplitude": 1,
                     "envelope": {...}}
                  | {"type": "plane_wave", "y": .., "amplitude": 1, "envelope": {...}},
      "envelope":   {"type": "impulse"}
                  | {"type": "gaussian", "t0": .., "width": ..}
                  | {"type": "gaussian", "f_max": 2.5e9}
                  | {"type": "modulated", "f_center": .., "bandwidth": ..},
      "probes": [{"name": "P1", "x": .., "y": .., "quantity": "field"|"voltage"}],
      "run": {"n_steps": 50000},
      "analysis": {"window": "rectangular"|"hann", "n_peaks": 6,
                   "f_min": 0, "f_max": 3e9, "min_prominence": 6,
                   "se": false, "se_band": [1e9, 2e9]},
      "outputs": {"dir": "out", "snapshots": [1000], "snapshot_db": true,
                  "snapshot_binary": false},
      "sweep": {"dl": [0.004, 0.002]}
    }

A ``geometry`` of null gives an empty (or boundary-only) mesh.  With
``analysis.se`` set the tool also runs the same scenario with the geometry
removed and reports SE at every probe.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass

NODE_KINDS = ("shunt", "series")
ENVELOPES = ("impulse", "gaussian", "modulated")


class ConfigError(ValueError):
    """Invalid scenario; the message starts with the offending field path."""

    def __init__(self, path, msg):
        super().__init__(f"{path}: {msg}")
        self.path = path


def _get(d, key, path, kind=None, default=..., check=None):
    p = f"{path}.{key}" if path else key
    if not isinstance(d, dict):
        raise ConfigError(path or "<root>", "expected an object")
    if key not in d or d[key] is None:
        if default is ...:
            raise ConfigError(p, "missing required field")
        return default
    v = d[key]
    if kind is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(p, f"expected a number, got {v!r}")
        v = float(v)
    elif kind is int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(p, f"expected an integer, got {v!r}")
    elif kind is not None and not isinstance(v, kind):
        raise ConfigError(p, f"expected {getattr(kind, '__name__', kind)}, got {v!r}")
    if check is not None and not check(v):
        raise ConfigError(p, f"invalid value {v!r}")
    return v


def _point(d, key, path, default=...):
    v = _get(d, key, path, list, default)
    if v is default:
        return v
    if len(v) != 2 or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v):
        raise ConfigError(f"{path}.{key}", f"expected [x, y], got {v!r}")
    return float(v[0]), float(v[1])


def node_count(extent, dl, path):
    n = extent / dl
    if abs(n - round(n)) > 1e-6 * max(1.0, n):
        raise ConfigError(path, f"window {extent} is not an integer multiple of dl = {dl}")
    n = int(round(n))
    if n < 2:
        raise ConfigError(path, "window must hold at least 2 cells")
    return n


@dataclass
class ScenarioConfig:
    raw: dict
    source_path: str = None

    # --- validated views -------------------------------------------------
    @property
    def name(self):
        return self.raw.get("name") or "scenario"

    @property
    def mesh(self):
        return self.raw["mesh"]

    @property
    def dl(self):
        return float(self.raw["mesh"]["dl"])

    @property
    def node_counts(self):
        w = self.raw["mesh"]["window"]
        return node_count(w[0], self.dl, "mesh.dl"), node_count(w[1], self.dl, "mesh.dl")

    @property
    def geometry(self):
        return self.raw.get("geometry")

    @property
    def panel(self):
        return {"n_terms": 48, "n_air": 8, "remainder": True, "embed": True,
                **(self.raw.get("panel") or {})}

    @property
    def analysis(self):
        return {"window": "rectangular", "n_peaks": 6, "f_min": 0.0, "f_max": None,
                "min_prominence": 6.0, "se": False, "se_band": None,
                **(self.raw.get("analysis") or {})}

    @property
    def outputs(self):
        return {"dir": "out", "snapshots": [], "snapshot_db": True, "snapshot_binary": False,
                **(self.raw.get("outputs") or {})}

    @property
    def n_steps(self):
        return int(self.raw["run"]["n_steps"])

    def with_dl(self, dl):
        raw = copy.deepcopy(self.raw)
        raw["mesh"]["dl"] = float(dl)
        return validate(raw, self.source_path)

    def without_geometry(self):
        raw = copy.deepcopy(self.raw)
        raw["geometry"] = None
        raw.pop("gaps", None)
        return ScenarioConfig(raw, self.source_path)


def _validate_envelope(env, path):
    if env is None:
        return
    t = _get(env, "type", path, str, check=lambda v: v in ENVELOPES)
    if t == "gaussian":
        if "f_max" in env:
            _get(env, "f_max", path, float, check=lambda v: v > 0)
        else:
            _get(env, "t0", path, float, check=lambda v: v > 0)
            _get(env, "width", path, float, check=lambda v: v > 0)
    elif t == "modulated":
        _get(env, "f_center", path, float, check=lambda v: v > 0)
        _get(env, "bandwidth", path, float, check=lambda v: v > 0)


def _inside(x, y, origin, window, path):
    if not (origin[0] <= x < origin[0] + window[0] and origin[1] <= y < origin[1] + window[1]):
        raise ConfigError(path, f"point ({x}, {y}) lies outside the window")


def validate(raw, source_path=None) -> ScenarioConfig:
    """Check every field before anything is allocated; returns the config."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "scenario must be a JSON object")
    m = _get(raw, "mesh", "", dict)
    _get(m, "kind", "mesh", str, check=lambda v: v in NODE_KINDS)
    window = _point(m, "window", "mesh")
    if not (window[0] > 0 and window[1] > 0):
        raise ConfigError("mesh.window", "extents must be positive")
    dl = _get(m, "dl", "mesh", float, check=lambda v: v > 0)
    origin = _point(m, "origin", "mesh", (0.0, 0.0))
    node_count(window[0], dl, "mesh.dl")
    node_count(window[1], dl, "mesh.dl")
    for edge, b in (_get(m, "boundaries", "mesh", dict, {})).items():
        if edge not in ("xmin", "xmax", "ymin", "ymax"):
            raise ConfigError(f"mesh.boundaries.{edge}", "unknown edge")
        if b not in ("matched", "pec"):
            raise ConfigError(f"mesh.boundaries.{edge}", f"unknown boundary {b!r}")

    g = raw.get("geometry")
    if g is not None:
        t = _get(g, "type", "geometry", str, check=lambda v: v in ("ellipse", "naca4", "polyline"))
        if t == "ellipse":
            _get(g, "a", "geometry", float, check=lambda v: v > 0)
            _get(g, "b", "geometry", float, check=lambda v: v > 0)
            _point(g, "center", "geometry")
        elif t == "naca4":
            _get(g, "digits", "geometry", str,
                 check=lambda v: len(v) == 4 and v.isdigit() and int(v[2:]) > 0)
            _get(g, "chord", "geometry", float, 1.0, check=lambda v: v > 0)
            _point(g, "leading_edge", "geometry", (0.0, 0.0))
            _get(g, "n_samples", "geometry", int, 400, check=lambda v: v >= 16)
        else:
            pts = _get(g, "points", "geometry", list)
            if len(pts) < 2:
                raise ConfigError("geometry.points", "need at least two points")
        mat = _get(raw, "material", "", (str, dict))
        if isinstance(mat, str):
            if mat.lower() != "pec":
                raise ConfigError("material", f"unknown material {mat!r}")
        else:
            _get(mat, "eps_r", "material", float, check=lambda v: v > 0)
            _get(mat, "thickness", "material", float, check=lambda v: v > 0)
            for k in ("sigma_e", "sigma_m"):
                _get(mat, k, "material", float, 0.0, check=lambda v: v >= 0)
            _get(mat, "mu_r", "material", float, 1.0, check=lambda v: v > 0)
        for n, gap in enumerate(_get(raw, "gaps", "", list, [])):
            p = f"gaps[{n}]"
            _get(gap, "x", p, float)
            _get(gap, "width", p, float, check=lambda v: v > 0)
            _get(gap, "surface", p, str, "lower", check=lambda v: v in ("upper", "lower"))

    panel = raw.get("panel") or {}
    _get(panel, "n_terms", "panel", int, 48, check=lambda v: v >= 1)
    _get(panel, "n_air", "panel", int, 8, check=lambda v: v >= 1)

    ex = _get(raw, "excitation", "", dict)
    t = _get(ex, "type", "excitation", str, check=lambda v: v in ("point", "plane_wave"))
    _get(ex, "amplitude", "excitation", float, 1.0)
    if t == "point":
        x = _get(ex, "x", "excitation", float)
        y = _get(ex, "y", "excitation", float)
        _inside(x, y, origin, window, "excitation")
    else:
        y = _get(ex, "y", "excitation", float)
        _inside(origin[0], y, origin, window, "excitation.y")
    _validate_envelope(ex.get("envelope"), "excitation.envelope")

    probes = _get(raw, "probes", "", list)
    if not probes:
        raise ConfigError("probes", "need at least one probe")
    names = set()
    for n, p in enumerate(probes):
        path = f"probes[{n}]"
        name = _get(p, "name", path, str)
        if name in names:
            raise ConfigError(f"{path}.name", f"duplicate probe name {name!r}")
        names.add(name)
        _inside(_get(p, "x", path, float), _get(p, "y", path, float), origin, window, path)
        _get(p, "quantity", path, str, "field", check=lambda v: v in ("field", "voltage"))

    r = _get(raw, "run", "", dict)
    _get(r, "n_steps", "run", int, check=lambda v: v >= 16)

    an = raw.get("analysis") or {}
    _get(an, "window", "analysis", str, "rectangular", check=lambda v: v in ("rectangular", "hann"))
    _get(an, "n_peaks", "analysis", int, 6, check=lambda v: v >= 1)
    band = an.get("se_band")
    if band is not None and (len(band) != 2 or not 0 <= band[0] < band[1]):
        raise ConfigError("analysis.se_band", f"expected [f_lo, f_hi], got {band!r}")

    out = raw.get("outputs") or {}
    for n, s in enumerate(_get(out, "snapshots", "outputs", list, [])):
        if isinstance(s, bool) or not isinstance(s, int) or not 0 <= s < r["n_steps"]:
            raise ConfigError(f"outputs.snapshots[{n}]", f"step {s!r} outside the run")

    sw = raw.get("sweep")
    if sw is not None:
        dls = _get(sw, "dl", "sweep", list)
        for n, v in enumerate(dls):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"sweep.dl[{n}]", f"invalid dl {v!r}")
            node_count(window[0], v, f"sweep.dl[{n}]")
            node_count(window[1], v, f"sweep.dl[{n}]")
    return ScenarioConfig(raw, source_path)


def load(path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"not valid JSON ({exc})") from None
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from None
    return validate(raw, str(path))

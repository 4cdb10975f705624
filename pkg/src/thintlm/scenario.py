"""Build and run a validated scenario: mesh, curve, crossings, sources, probes."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import platform
import struct
import time

import numpy as np

from . import analysis, geometry, panel, sources
from .mesh import Mesh, NodeKind, run

log = logging.getLogger(__name__)

SNAPSHOT_MAGIC = b"TLMSNAP1"
SNAPSHOT_FLOOR_DB = -120.0


def build_mesh(cfg) -> Mesh:
    m = cfg.mesh
    nx, ny = cfg.node_counts
    return Mesh(nx, ny, cfg.dl, NodeKind(m["kind"]), dict(m.get("boundaries") or {}),
                tuple(m.get("origin") or (0.0, 0.0)))


def build_curve(g):
    t = g["type"]
    if t == "ellipse":
        return geometry.Ellipse(float(g["a"]), float(g["b"]), tuple(g["center"]))
    if t == "naca4":
        return geometry.Naca4.from_digits(g["digits"], c=float(g.get("chord", 1.0)),
                                          origin=tuple(g.get("leading_edge") or (0.0, 0.0)),
                                          n_samples=int(g.get("n_samples", 400)))
    pts = np.asarray(g["points"], dtype=float)
    return geometry.Polyline(pts[:, 0], pts[:, 1], bool(g.get("closed", True)))


def build_material(raw):
    if isinstance(raw, str):
        return panel.PEC
    return panel.FilmMaterial(eps_r=float(raw["eps_r"]), thickness=float(raw["thickness"]),
                              sigma_e=float(raw.get("sigma_e", 0.0)), mu_r=float(raw.get("mu_r", 1.0)),
                              sigma_m=float(raw.get("sigma_m", 0.0)), name=raw.get("name", "film"))


def build_crossings(cfg, mesh):
    """CrossingSet of the scenario geometry with gaps applied (None if no geometry)."""
    g = cfg.geometry
    if g is None or not cfg.panel["embed"]:
        return None, None
    curve = build_curve(g)
    mat = build_material(cfg.raw["material"])
    cs = geometry.compute_crossings(curve, geometry.MeshSpec.of(mesh), mat)
    for gap in cfg.raw.get("gaps") or []:
        cs = geometry.apply_gap(cs, curve, float(gap["x"]), float(gap["width"]),
                                gap.get("surface", "lower"))
    return curve, cs


def build_envelope(raw, dt):
    if raw is None or raw["type"] == "impulse":
        return sources.Impulse()
    if raw["type"] == "gaussian":
        if "f_max" in raw:
            return sources.Gaussian.covering(float(raw["f_max"]), dt)
        return sources.Gaussian(float(raw["t0"]), float(raw["width"]))
    return sources.GaussianModulated(float(raw["f_center"]), float(raw["bandwidth"]))


def build_sources(cfg, mesh):
    ex = cfg.raw["excitation"]
    env = build_envelope(ex.get("envelope"), mesh.dt)
    amp = float(ex.get("amplitude", 1.0))
    n_hint = cfg.n_steps
    if ex["type"] == "point":
        return [sources.DeltaPoint(float(ex["x"]), float(ex["y"]), amp, env, n_hint)]
    return [sources.PlaneWaveLine(float(ex["y"]), amp, env, n_hint)]


def build_probes(cfg):
    return [sources.Probe(p["name"], float(p["x"]), float(p["y"]), p.get("quantity", "field"))
            for p in cfg.raw["probes"]]


def source_key(cfg):
    """Metadata shared by a with/without pair: everything but the shield."""
    return {k: cfg.raw.get(k) for k in ("mesh", "excitation", "probes", "run")}


def field_db(field):
    a = np.abs(field)
    peak = a.max()
    if peak == 0:
        return np.full_like(a, SNAPSHOT_FLOOR_DB)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(a / peak)
    return np.maximum(db, SNAPSHOT_FLOOR_DB)


def write_snapshot_csv(path, grid):
    """Grid of shape (Nx, Ny): one CSV row per x index."""
    np.savetxt(path, grid, delimiter=",", fmt="%.17g")


def write_snapshot_bin(path, grid):
    """16-byte header (8-byte magic, uint32 Nx, uint32 Ny) then float64 (Nx, Ny) row-major."""
    grid = np.ascontiguousarray(grid, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC + struct.pack("<II", *grid.shape))
        fh.write(grid.tobytes())


def read_snapshot_bin(path):
    with open(path, "rb") as fh:
        head = fh.read(16)
        if head[:8] != SNAPSHOT_MAGIC:
            raise ValueError(f"{path} is not a snapshot file")
        nx, ny = struct.unpack("<II", head[8:])
        return np.frombuffer(fh.read(), dtype="<f8").reshape(nx, ny)


class Result:
    def __init__(self, cfg, mesh, records, crossings, timings):
        self.cfg = cfg
        self.mesh = mesh
        self.records = records
        self.crossings = crossings
        self.timings = timings
        self.snapshots = {}

    def spectrum(self, name):
        a = self.cfg.analysis
        return analysis.spectrum(self.records[name], self.records.dt, a["window"],
                                 meta={"source": source_key(self.cfg), "probe": name})

    def resonances(self, name):
        a = self.cfg.analysis
        return analysis.find_resonances(self.spectrum(name), a["n_peaks"], a["min_prominence"],
                                        a["f_min"], a["f_max"])


def simulate(cfg, snapshots=()) -> Result:
    """Run one scenario; ``snapshots`` are step indices whose field is kept."""
    t0 = time.perf_counter()
    mesh = build_mesh(cfg)
    curve, cs = build_crossings(cfg, mesh)
    bank = None
    if cs is not None and len(cs):
        p = cfg.panel
        bank = panel.build_bank(cs, mesh, p["n_terms"], p["n_air"], p["remainder"])
    t1 = time.perf_counter()
    srcs = build_sources(cfg, mesh)
    probes = build_probes(cfg)
    for p in probes:
        mesh.node_index(p.x, p.y)
    snaps = {}
    wanted = set(snapshots)

    def grab(m, n):
        if n in wanted:
            snaps[n] = m.field().copy()

    records = run(mesh, bank, srcs, probes, cfg.n_steps, on_step=grab if wanted else None)
    t2 = time.perf_counter()
    res = Result(cfg, mesh, records, cs, {"build_s": t1 - t0, "run_s": t2 - t1})
    res.snapshots = snaps
    log.info("%s: %d crossings, %d steps in %.1f s", cfg.name, 0 if cs is None else len(cs),
             cfg.n_steps, t2 - t1)
    return res


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _versions():
    import scipy

    from . import __version__
    return {"python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "thintlm": __version__}


def run_scenario(cfg, out_dir=None):
    """Full pipeline for one config; returns the manifest dict."""
    out = cfg.outputs
    out_dir = out_dir or out["dir"]
    os.makedirs(out_dir, exist_ok=True)
    files = []

    def emit(name):
        path = os.path.join(out_dir, name)
        files.append(path)
        return path

    res = simulate(cfg, out["snapshots"])
    timings = dict(res.timings)
    a = cfg.analysis
    if res.crossings is not None:
        res.crossings.to_csv(emit("crossings.csv"))
    table = {}
    for name, series in res.records.records.items():
        sources.write_probe_csv(emit(f"probe_{name}.csv"), series, res.records.dt)
        spec = res.spectrum(name)
        analysis.write_spectrum_csv(emit(f"spectrum_{name}.csv"), spec, a["f_max"])
        rt = res.resonances(name)
        rt.to_csv(emit(f"resonances_{name}.csv"))
        table[name] = [r.f for r in rt]
    for step, grid in sorted(res.snapshots.items()):
        data = field_db(grid) if out["snapshot_db"] else grid
        write_snapshot_csv(emit(f"snapshot_{step:07d}.csv"), data)
        if out["snapshot_binary"]:
            write_snapshot_bin(emit(f"snapshot_{step:07d}.bin"), data)

    se_summary = {}
    if a["se"]:
        free = simulate(cfg.without_geometry())
        timings["run_without_s"] = free.timings["run_s"]
        for name in res.records.records:
            sw = free.spectrum(name)
            sources.write_probe_csv(emit(f"probe_{name}_without.csv"), free.records[name],
                                    free.records.dt)
            se = analysis.shielding_effectiveness(sw, res.spectrum(name))
            if a["se_band"] is not None:
                f, s = se.band(*a["se_band"])
                se = analysis.SECurve(f, s, np.zeros(len(f), dtype=bool))
            se.to_csv(emit(f"se_{name}.csv"))
            se_summary[name] = float(np.mean(se.se_db)) if len(se.se_db) else None

    manifest = {
        "scenario": cfg.name,
        "config_sha256": hashlib.sha256(json.dumps(cfg.raw, sort_keys=True).encode()).hexdigest(),
        "versions": _versions(),
        "dl": cfg.dl,
        "dt": res.records.dt,
        "n_steps": cfg.n_steps,
        "nodes": list(cfg.node_counts),
        "crossings": 0 if res.crossings is None else len(res.crossings),
        "warnings": [] if res.crossings is None else list(res.crossings.warnings),
        "resonances_Hz": table,
        "se_mean_dB": se_summary,
        "timings_s": timings,
        "outputs": {os.path.basename(p): _sha256(p) for p in files},
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest


def scale_length(cfg):
    """Feature length used to label sweep rows: b for an ellipse, thickness for an airfoil."""
    g = cfg.geometry
    if g is None:
        return None, None
    if g["type"] == "ellipse":
        return "b/dl", float(g["b"])
    if g["type"] == "naca4":
        return "t/dl", int(g["digits"][2:]) / 100 * float(g.get("chord", 1.0))
    return None, None


def sweep(cfg, dls, out_path, probe=None):
    """Rerun the scenario per dl; writes (dl, ratio, f1..fk) rows to ``out_path``."""
    rows = []
    label, length = scale_length(cfg)
    for dl in dls:
        c = cfg.with_dl(dl)
        res = simulate(c)
        name = probe or c.raw["probes"][0]["name"]
        freqs = [r.f for r in res.resonances(name)]
        rows.append((float(dl), None if length is None else length / dl, freqs))
    k = max((len(r[2]) for r in rows), default=0)
    with open(out_path, "w") as fh:
        fh.write(",".join(["dl", label or "ratio"] + [f"f{n + 1}_Hz" for n in range(k)]) + "\n")
        for dl, ratio, freqs in rows:
            cells = [repr(dl), "" if ratio is None else repr(ratio)]
            cells += [repr(f) for f in freqs] + [""] * (k - len(freqs))
            fh.write(",".join(cells) + "\n")
    return rows

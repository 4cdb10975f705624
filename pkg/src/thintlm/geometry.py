"""Curves, curve/link crossings and gaps.

Curves are parametric on ``t`` in ``[0, t_end]``.  Crossings with the link
lines (the horizontal and vertical lines through node centres) are bracketed
on a dense parameter sampling and refined by Brent's method.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

log = logging.getLogger(__name__)

X_LINK, Y_LINK = 0, 1
SNAP = 1e-9


class CurveOutOfBounds(ValueError):
    pass


class GapRemovesNothing(UserWarning):
    pass


class Curve:
    t_end = 1.0
    closed = True

    def point(self, t):
        raise NotImplementedError

    def surface(self, t):
        """'upper' or 'lower' label for parameter values ``t``."""
        x, y = self.point(np.asarray(t, dtype=float))
        cy = 0.5 * (self.bbox()[1] + self.bbox()[3])
        return np.where(y >= cy, "upper", "lower")

    def samples(self, n):
        t = np.linspace(0.0, self.t_end, n + 1)
        if self.closed:
            t = t[:-1]
        return t, *self.point(t)

    def bbox(self, n=4096):
        _, x, y = self.samples(n)
        return x.min(), y.min(), x.max(), y.max()

    def arc_length(self, t, n=20000):
        """Arc length from t=0 to each entry of ``t``."""
        tt = np.linspace(0.0, self.t_end, n + 1)
        x, y = self.point(tt)
        s = np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(x), np.diff(y)))])
        return np.interp(t, tt, s)

    def perimeter(self):
        return float(self.arc_length(self.t_end))


@dataclass
class Ellipse(Curve):
    a: float
    b: float
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not (self.a >= self.b > 0):
            raise ValueError("ellipse needs a >= b > 0")

    def point(self, t):
        th = 2 * np.pi * np.asarray(t, dtype=float)
        return self.center[0] + self.a * np.cos(th), self.center[1] + self.b * np.sin(th)

    def implicit(self, x, y):
        return ((x - self.center[0]) / self.a) ** 2 + ((y - self.center[1]) / self.b) ** 2 - 1

    def contains(self, x, y):
        return self.implicit(x, y) < 0

    def row_intersections(self, y):
        """Analytic x of the crossings with the horizontal line at ``y``."""
        q = 1 - ((y - self.center[1]) / self.b) ** 2
        if q < 0:
            return []
        if q == 0:
            return [self.center[0]]
        r = self.a * math.sqrt(q)
        return [self.center[0] - r, self.center[0] + r]

    def column_intersections(self, x):
        q = 1 - ((x - self.center[0]) / self.a) ** 2
        if q < 0:
            return []
        if q == 0:
            return [self.center[1]]
        r = self.b * math.sqrt(q)
        return [self.center[1] - r, self.center[1] + r]


def ellipse_curve(a, b, center=(0.0, 0.0)):
    return Ellipse(a, b, tuple(center))


def naca4_camber(xc, m, p):
    xc = np.asarray(xc, dtype=float)
    if m == 0:
        return np.zeros_like(xc), np.zeros_like(xc)
    fwd = xc <= p
    yc = np.where(fwd, m / p**2 * (2 * p * xc - xc**2),
                  m / (1 - p) ** 2 * ((1 - 2 * p) + 2 * p * xc - xc**2))
    dyc = np.where(fwd, 2 * m / p**2 * (p - xc), 2 * m / (1 - p) ** 2 * (p - xc))
    return yc, dyc


def naca4_thickness(xc, t):
    xc = np.asarray(xc, dtype=float)
    return 5 * t * (0.2969 * np.sqrt(xc) - 0.1260 * xc - 0.3516 * xc**2
                    + 0.2843 * xc**3 - 0.1015 * xc**4)


@dataclass
class Naca4(Curve):
    """NACA 4-digit profile, parameter t in [0, 3).

    t in [0, 1]: upper surface, trailing edge to leading edge;
    t in [1, 2]: lower surface, leading edge to trailing edge;
    t in [2, 3]: straight segment closing the blunt trailing edge.
    """

    m: float
    p: float
    t: float
    c: float = 1.0
    origin: tuple = (0.0, 0.0)
    n_samples: int = 400
    t_end = 3.0

    def __post_init__(self):
        if not (0 <= self.m < 1 and 0 < self.p < 1 and 0 < self.t < 1 and self.c > 0):
            raise ValueError("NACA parameters out of range")
        if self.n_samples < 50:
            raise ValueError("need at least 50 samples per surface")

    @classmethod
    def from_digits(cls, digits: str, c=1.0, origin=(0.0, 0.0), **kw):
        if len(digits) != 4 or not digits.isdigit():
            raise ValueError(f"not a NACA 4-digit code: {digits!r}")
        return cls(int(digits[0]) / 100, int(digits[1]) / 10, int(digits[2:]) / 100, c, tuple(origin), **kw)

    def _surface_point(self, xc, sign):
        yc, dyc = naca4_camber(xc, self.m, self.p)
        yt = naca4_thickness(xc, self.t)
        th = np.arctan(dyc)
        return xc - sign * yt * np.sin(th), yc + sign * yt * np.cos(th)

    def point(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        x = np.empty_like(t)
        y = np.empty_like(t)
        up = t <= 1
        lo = (t > 1) & (t <= 2)
        te = t > 2
        xu, yu = self._surface_point((1 + np.cos(np.pi * t[up])) / 2, 1.0)
        x[up], y[up] = xu, yu
        xl, yl = self._surface_point((1 - np.cos(np.pi * (t[lo] - 1))) / 2, -1.0)
        x[lo], y[lo] = xl, yl
        (x1, y1), (x0, y0) = self._surface_point(np.array(1.0), -1.0), self._surface_point(np.array(1.0), 1.0)
        w = t[te] - 2
        x[te] = (1 - w) * x1 + w * x0
        y[te] = (1 - w) * y1 + w * y0
        x = self.origin[0] + self.c * x
        y = self.origin[1] + self.c * y
        if scalar:
            return x[0], y[0]
        return x, y

    def surface(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= 1, "upper", np.where(t <= 2, "lower", "trailing"))

    def polyline(self):
        """Closed polyline with ``n_samples`` cosine-spaced points per surface."""
        tu = np.linspace(0, 1, self.n_samples)
        tl = np.linspace(1, 2, self.n_samples)[1:]
        x, y = self.point(np.concatenate([tu, tl]))
        return np.append(x, x[0]), np.append(y, y[0])

    def surface_point_at_x(self, x, surface="lower"):
        """Curve parameter of the point on ``surface`` with abscissa ``x``."""
        lo, hi = (1.0, 2.0) if surface == "lower" else (0.0, 1.0)
        f = lambda t: self.point(t)[0] - x
        if f(lo) * f(hi) > 0:
            raise ValueError(f"x={x} is not on the {surface} surface")
        return brentq(f, lo, hi, xtol=1e-15)


def naca4_profile(m, p, t, c=1.0, n_samples=400, origin=(0.0, 0.0)):
    return Naca4(m, p, t, c, tuple(origin), n_samples)


@dataclass
class Explicit(Curve):
    """Open curve y = f(x) for x in [x0, x1]."""

    f: object
    x0: float
    x1: float
    closed = False

    def point(self, t):
        x = self.x0 + (self.x1 - self.x0) * np.asarray(t, dtype=float)
        return x, np.asarray(self.f(x), dtype=float) + 0 * x


@dataclass
class Polyline(Curve):
    xs: np.ndarray
    ys: np.ndarray
    closed: bool = True

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.ys = np.asarray(self.ys, dtype=float)
        if self.closed and (self.xs[0] != self.xs[-1] or self.ys[0] != self.ys[-1]):
            self.xs = np.append(self.xs, self.xs[0])
            self.ys = np.append(self.ys, self.ys[0])
        self.t_end = float(len(self.xs) - 1)

    def point(self, t):
        u = np.arange(len(self.xs))
        return np.interp(t, u, self.xs), np.interp(t, u, self.ys)


@dataclass
class MeshSpec:
    """The geometric part of a mesh: node (i, j) sits at origin + (i + 1/2, j + 1/2) dl."""

    nx: int
    ny: int
    dl: float
    origin: tuple = (0.0, 0.0)

    @classmethod
    def of(cls, mesh):
        return cls(mesh.nx, mesh.ny, mesh.dl, tuple(mesh.origin))

    def line_coord(self, k, axis):
        return self.origin[axis] + (k + 0.5) * self.dl


@dataclass
class CrossingSet:
    orientation: np.ndarray
    i: np.ndarray
    j: np.ndarray
    alpha: np.ndarray
    t: np.ndarray
    material: object = None
    material_id: str = ""
    warnings: list = field(default_factory=list)

    def __len__(self):
        return len(self.alpha)

    def points(self, spec: MeshSpec):
        x = spec.origin[0] + (self.i + 0.5) * spec.dl
        y = spec.origin[1] + (self.j + 0.5) * spec.dl
        x = x + np.where(self.orientation == X_LINK, self.alpha * spec.dl, 0.0)
        y = y + np.where(self.orientation == Y_LINK, self.alpha * spec.dl, 0.0)
        return x, y

    def subset(self, keep):
        keep = np.asarray(keep)
        return CrossingSet(self.orientation[keep], self.i[keep], self.j[keep], self.alpha[keep],
                           self.t[keep], self.material, self.material_id, list(self.warnings))

    def link_ids(self):
        return list(zip(self.orientation.tolist(), self.i.tolist(), self.j.tolist()))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "orientation", "alpha", "t", "material"])
            for o, i, j, a, t in zip(self.orientation, self.i, self.j, self.alpha, self.t):
                w.writerow([int(i), int(j), "xy"[int(o)], repr(float(a)), repr(float(t)), self.material_id])

    @classmethod
    def from_csv(cls, path, material=None):
        rows = list(csv.DictReader(open(path, newline="")))
        return cls(
            np.array([0 if r["orientation"] == "x" else 1 for r in rows], dtype=np.int64),
            np.array([int(r["i"]) for r in rows], dtype=np.int64),
            np.array([int(r["j"]) for r in rows], dtype=np.int64),
            np.array([float(r["alpha"]) for r in rows]),
            np.array([float(r["t"]) for r in rows]),
            material,
            rows[0]["material"] if rows else "",
        )


def _line_crossings(curve, tt, coord, other, axis, spec):
    """Crossings of the curve with all link lines normal to ``axis``.

    ``coord`` holds the sampled coordinate along ``axis`` (y for rows), ``other``
    the transverse one.  Returns a list of (line index, position, t).
    """
    dl = spec.dl
    u = (coord - spec.origin[axis]) / dl - 0.5
    nxt = np.roll(u, -1) if curve.closed else u[1:]
    cur = u if curve.closed else u[:-1]
    t0 = tt
    t1 = np.roll(tt, -1) if curve.closed else tt[1:]
    if curve.closed:
        t1 = t1.copy()
        t1[-1] = curve.t_end
    else:
        t0 = tt[:-1]
    lo = np.minimum(cur, nxt)
    hi = np.maximum(cur, nxt)
    k_lo = np.floor(lo) + 1
    k_hi = np.floor(hi)
    out = []
    for seg in np.flatnonzero(k_hi >= k_lo):
        for k in range(int(k_lo[seg]), int(k_hi[seg]) + 1):
            line = spec.line_coord(k, axis)
            g = lambda t: curve.point(t)[axis] - line
            ga, gb = g(t0[seg]), g(t1[seg])
            if ga == 0.0 and gb == 0.0:
                continue
            if ga * gb > 0:
                continue
            if ga == 0.0:
                # the sample itself sits on the line; the previous segment's
                # upper end handles it, so only count it once
                continue
            tr = brentq(g, t0[seg], t1[seg], xtol=1e-14 * max(1.0, curve.t_end), rtol=1e-15)
            pos = curve.point(tr)[1 - axis]
            out.append((k, float(pos), float(tr)))
    return out


def compute_crossings(curve: Curve, spec: MeshSpec, material=None, material_id="",
                      samples_per_cell=20):
    """Every crossing of ``curve`` with an interior link of the mesh."""
    x0, y0, x1, y1 = curve.bbox()
    lo_x, lo_y = spec.origin[0] + 1.5 * spec.dl, spec.origin[1] + 1.5 * spec.dl
    hi_x = spec.origin[0] + (spec.nx - 1.5) * spec.dl
    hi_y = spec.origin[1] + (spec.ny - 1.5) * spec.dl
    if x0 < lo_x or y0 < lo_y or x1 > hi_x or y1 > hi_y:
        raise CurveOutOfBounds(
            f"curve bbox ({x0:.4g}, {y0:.4g})-({x1:.4g}, {y1:.4g}) needs one cell of margin inside the mesh")
    n = max(4096, int(samples_per_cell * curve.perimeter() / spec.dl))
    tt = np.linspace(0.0, curve.t_end, n + 1)
    if curve.closed:
        tt = tt[:-1]
    x, y = curve.point(tt)

    records = {}
    for axis, orient in ((1, X_LINK), (0, Y_LINK)):
        coord, other = (y, x) if axis == 1 else (x, y)
        for k, pos, tr in _line_crossings(curve, tt, coord, other, axis, spec):
            u = (pos - spec.origin[1 - axis]) / spec.dl - 0.5
            m = math.floor(u)
            alpha = u - m
            if alpha < SNAP:
                alpha = 0.0
            elif alpha > 1 - SNAP:
                m, alpha = m + 1, 0.0
            i, j = (m, k) if orient == X_LINK else (k, m)
            records.setdefault((orient, i, j), []).append((alpha, tr))

    orient_l, i_l, j_l, a_l, t_l = [], [], [], [], []
    warnings = []
    for (o, i, j), hits in sorted(records.items(), key=lambda kv: kv[1][0][1]):
        if len(hits) % 2 == 0:
            # the link enters and leaves the region: both ends lie on the same side
            warnings.append(f"MeshTooCoarse: link {'xy'[o]}({i},{j}) crossed {len(hits)} times, dropped")
            continue
        if len(hits) > 1:
            warnings.append(f"MeshTooCoarse: link {'xy'[o]}({i},{j}) crossed {len(hits)} times, kept median")
        hits.sort()
        alpha, tr = hits[len(hits) // 2]
        orient_l.append(o)
        i_l.append(i)
        j_l.append(j)
        a_l.append(alpha)
        t_l.append(tr)
    order = np.argsort(t_l, kind="stable")
    cs = CrossingSet(
        np.array(orient_l, dtype=np.int64)[order], np.array(i_l, dtype=np.int64)[order],
        np.array(j_l, dtype=np.int64)[order], np.array(a_l, dtype=float)[order],
        np.array(t_l, dtype=float)[order], material, material_id or getattr(material, "name", ""),
    )
    cs.warnings = warnings + chain_gaps(cs, spec)
    for w in cs.warnings:
        log.warning(w)
    return cs


def chain_gaps(cs: CrossingSet, spec: MeshSpec):
    """Diagnostics for consecutive crossings further apart than one cell."""
    if len(cs) < 2:
        return []
    x, y = cs.points(spec)
    dx = np.abs(np.diff(np.append(x, x[0])))
    dy = np.abs(np.diff(np.append(y, y[0])))
    bad = np.flatnonzero(np.maximum(dx, dy) > spec.dl * (1 + 1e-9))
    return [f"MeshTooCoarse: crossings {k} and {(k + 1) % len(cs)} are more than one cell apart" for k in bad]


def apply_gap(crossings: CrossingSet, curve: Curve, gap_center_x: float, gap_width: float,
              surface="lower"):
    """Open a gap of ``gap_width`` (arc length) centred on a surface point.

    Each crossing stands for the stretch of curve reaching half way to its
    neighbours along the arc.  Every crossing on the chosen surface whose
    stretch overlaps the open interval ``s_c +- gap_width/2`` is removed; this
    includes every crossing lying inside the interval and keeps a gap
    narrower than a cell from slipping between two crossings.
    """
    if gap_width < 0:
        raise ValueError("gap width must be non-negative")
    if gap_width == 0 or len(crossings) == 0:
        return crossings
    if hasattr(curve, "surface_point_at_x"):
        tc = curve.surface_point_at_x(gap_center_x, surface)
    else:
        tc = _surface_point_generic(curve, gap_center_x, surface)
    s_c = curve.arc_length(tc)
    s = curve.arc_length(crossings.t)
    order = np.argsort(s, kind="stable")
    ss = s[order]
    if curve.closed:
        P = curve.perimeter()
        prev = np.roll(ss, 1)
        prev[0] -= P
        nxt = np.roll(ss, -1)
        nxt[-1] += P
    else:
        prev = np.concatenate([[ss[0]], ss[:-1]])
        nxt = np.concatenate([ss[1:], [ss[-1]]])
    lo = np.empty_like(s)
    hi = np.empty_like(s)
    lo[order] = 0.5 * (prev + ss)
    hi[order] = 0.5 * (ss + nxt)
    g_lo, g_hi = s_c - gap_width / 2, s_c + gap_width / 2
    hit = (hi > g_lo) & (lo < g_hi)
    if curve.closed:
        P = curve.perimeter()
        for shift in (-P, P):
            hit |= (hi + shift > g_lo) & (lo + shift < g_hi)
    remove = hit & (curve.surface(crossings.t) == surface)
    out = crossings.subset(~remove)
    if not remove.any():
        msg = f"GapRemovesNothing: {gap_width} m gap at x={gap_center_x} removed no crossing"
        log.warning(msg)
        out.warnings.append(msg)
    return out


def _surface_point_generic(curve, x, surface):
    t, xs, _ = curve.samples(20000)
    lab = curve.surface(t)
    cand = np.flatnonzero((lab == surface))
    k = cand[np.argmin(np.abs(xs[cand] - x))]
    return t[k]


def brute_force_crossings(curve: Curve, spec: MeshSpec, n_per_line=10**6):
    """Dense-sampling oracle: count sign changes of the implicit function along
    every link line.  Only for curves with an ``implicit`` method."""
    found = []
    for axis, orient in ((1, X_LINK), (0, Y_LINK)):
        n_lines = spec.ny if axis == 1 else spec.nx
        n_other = spec.nx if axis == 1 else spec.ny
        s = spec.origin[1 - axis] + (0.5 + np.linspace(0, n_other - 1, n_per_line)) * spec.dl
        for k in range(n_lines):
            c = spec.line_coord(k, axis)
            x, y = (s, np.full_like(s, c)) if axis == 1 else (np.full_like(s, c), s)
            f = curve.implicit(x, y)
            idx = np.flatnonzero(np.sign(f[:-1]) != np.sign(f[1:]))
            for q in idx:
                pos = s[q] - f[q] * (s[q + 1] - s[q]) / (f[q + 1] - f[q])
                found.append((orient, k, pos))
    return found


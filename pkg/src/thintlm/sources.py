"""Soft sources and node probes."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Impulse:
    def __call__(self, n):
        return 1.0 if n == 0 else 0.0

    def samples(self, n_steps, dt):
        out = np.zeros(n_steps)
        out[0] = 1.0
        return out


@dataclass(frozen=True)
class Gaussian:
    """exp(-((t - t0) / width)^2 / 2) with t0 and width in seconds."""

    t0: float
    width: float

    def __post_init__(self):
        if not (self.t0 > 0 and self.width > 0):
            raise ValueError("Gaussian t0 and width must be positive")

    def samples(self, n_steps, dt):
        t = np.arange(n_steps) * dt
        return np.exp(-0.5 * ((t - self.t0) / self.width) ** 2)

    @classmethod
    def covering(cls, f_max, dt, floor=1e-3):
        """Shortest pulse whose spectrum is still >= ``floor`` of peak at ``f_max``."""
        # |G(f)| ~ exp(-(2 pi f width)^2 / 2)
        width = math.sqrt(-2.0 * math.log(floor)) / (2 * math.pi * f_max)
        return cls(t0=6 * width, width=width)


@dataclass(frozen=True)
class GaussianModulated:
    f_center: float
    bandwidth: float
    t0: float = None

    def __post_init__(self):
        if not (self.f_center > 0 and self.bandwidth > 0):
            raise ValueError("f_center and bandwidth must be positive")

    def samples(self, n_steps, dt):
        width = 1.0 / (math.pi * self.bandwidth)
        t0 = self.t0 if self.t0 is not None else 6 * width
        t = np.arange(n_steps) * dt
        return np.exp(-0.5 * ((t - t0) / width) ** 2) * np.cos(2 * np.pi * self.f_center * (t - t0))


def band_coverage(envelope, n_steps, dt, f_lo, f_hi):
    """Spectral magnitude at the band edges relative to the peak."""
    x = envelope.samples(n_steps, dt)
    X = np.abs(np.fft.rfft(x))
    f = np.fft.rfftfreq(n_steps, dt)
    peak = X.max()
    return float(np.interp(f_lo, f, X) / peak), float(np.interp(f_hi, f, X) / peak)


class _Source:
    def _wave(self, mesh, n):
        if self._cache is None or self._cache[0] is not mesh or len(self._cache[1]) <= n:
            self._cache = (mesh, self.envelope.samples(max(n + 1, self.n_hint), mesh.dt))
        return self._cache[1][n]


@dataclass
class DeltaPoint(_Source):
    """Adds ``amplitude * envelope`` to the node quantity U of one node.

    Each port gets ``e_p * value / 2`` so that U = 1/2 e^T V^i rises by
    exactly ``value``.
    """

    x: float
    y: float
    amplitude: float = 1.0
    envelope: object = field(default_factory=Impulse)
    n_hint: int = 1 << 16

    def __post_init__(self):
        self._cache = None

    def inject(self, mesh, n):
        v = self.amplitude * self._wave(mesh, n)
        if v == 0.0:
            return
        i, j = mesh.node_index(self.x, self.y)
        mesh.vi[:, i, j] += 0.5 * v * mesh.kind.excitation


@dataclass
class PlaneWaveLine(_Source):
    """Soft line source along the mesh row nearest ``y``.

    Launches fronts travelling in both +y and -y; the -y half is meant to be
    absorbed by a matched boundary.
    """

    y: float
    amplitude: float = 1.0
    envelope: object = field(default_factory=Impulse)
    n_hint: int = 1 << 16

    def __post_init__(self):
        self._cache = None

    def inject(self, mesh, n):
        v = self.amplitude * self._wave(mesh, n)
        if v == 0.0:
            return
        _, j = mesh.node_index(mesh.origin[0], self.y)
        mesh.vi[:, :, j] += 0.5 * v * mesh.kind.excitation[:, None]


@dataclass
class Probe:
    """Records the node quantity ('voltage') or mapped field ('field') at a point."""

    name: str
    x: float
    y: float
    quantity: str = "field"
    samples: np.ndarray = None

    def __post_init__(self):
        if self.quantity not in ("voltage", "field"):
            raise ValueError(f"unknown probe quantity {self.quantity!r}")

    def start(self, mesh, n_steps):
        self._ij = mesh.node_index(self.x, self.y)
        self.samples = np.zeros(n_steps)
        e = mesh.kind.excitation
        scale = 0.5
        if self.quantity == "field":
            scale = -0.5 / mesh.dl if mesh.kind.name == "SHUNT" else 0.5 / (mesh.z_link * mesh.dl)
        self._w = scale * e

    def record(self, mesh, n):
        i, j = self._ij
        self.samples[n] = self._w @ mesh.vi[:, i, j]


def write_probe_csv(path, samples, dt):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "time_s", "value"])
        for n, v in enumerate(samples):
            w.writerow([n, repr(n * dt), repr(float(v))])


def read_probe_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    steps = data[:, 0]
    t = data[:, 1]
    dt = float(t[1] - t[0]) if len(t) > 1 else 0.0
    return data[:, 2], dt, len(steps)

"""Spectra, resonance extraction, shielding effectiveness and CSV output."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import median_filter
from scipy.signal import find_peaks

WINDOWS = ("rectangular", "hann")
SE_FLOOR = 1e-30


class DivisionGuard(UserWarning):
    pass


def metadata_hash(meta) -> str:
    """Stable hash of a JSON-serializable metadata mapping."""
    blob = json.dumps(meta, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class Spectrum:
    f: np.ndarray
    X: np.ndarray
    dt: float
    n_steps: int
    window: str = "rectangular"
    meta: dict = field(default_factory=dict)

    @property
    def df(self):
        return 1.0 / (self.n_steps * self.dt)

    @property
    def magnitude(self):
        return np.abs(self.X)

    def mag_db(self, floor=1e-300):
        return 20.0 * np.log10(np.maximum(np.abs(self.X), floor))

    def key(self):
        return metadata_hash({"dt": self.dt, "n": self.n_steps, "window": self.window, **self.meta})


def spectrum(series, dt, window="rectangular", meta=None) -> Spectrum:
    """One-sided DFT of a real probe record (length n/2 + 1, df = 1/(n dt))."""
    x = np.asarray(series, dtype=float)
    n = len(x)
    if n < 16:
        raise ValueError(f"need at least 16 samples, got {n}")
    window = window.lower()
    if window not in WINDOWS:
        raise ValueError(f"unknown window {window!r}; use one of {WINDOWS}")
    if window == "hann":
        x = x * np.hanning(n)
    X = np.fft.rfft(x)
    return Spectrum(np.fft.rfftfreq(n, dt), X, float(dt), n, window, dict(meta or {}))


@dataclass
class Resonance:
    f: float
    amplitude: float
    prominence_db: float


class ResonanceTable(list):
    @property
    def frequencies(self):
        return np.array([r.f for r in self])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["f_Hz", "mag"])
            for r in self:
                w.writerow([repr(r.f), repr(r.amplitude)])


def _parabolic(ym, y0, yp):
    """Vertex offset (in bins) and value of the parabola through three samples."""
    den = ym - 2.0 * y0 + yp
    if den >= 0:
        return 0.0, y0
    d = 0.5 * (ym - yp) / den
    return d, y0 - 0.25 * (ym - yp) * d


def find_resonances(spec: Spectrum, n_peaks=None, min_prominence=6.0, f_min=0.0,
                    f_max=None, median_bins=None, floor_db=-80.0) -> ResonanceTable:
    """Peaks of |X| sorted ascending, lowest ``n_peaks`` kept.

    A bin is kept when it is a strict local maximum whose level exceeds the
    running median of the log-magnitude around it by ``min_prominence`` dB
    and lies within ``floor_db`` of the strongest bin in range.  The peak
    frequency comes from a 3-point parabola on the log-magnitude.
    """
    if n_peaks is not None and n_peaks < 1:
        raise ValueError("n_peaks must be >= 1")
    mag = np.abs(spec.X)
    if not np.any(mag > 0):
        return ResonanceTable()
    L = 20.0 * np.log10(np.maximum(mag, mag.max() * 1e-15))
    f = spec.f
    sel = (f >= f_min) & (f <= (f_max if f_max is not None else f[-1]))
    width = median_bins or max(9, (len(L) // 64) | 1)
    med = median_filter(L, size=width, mode="nearest")
    ref = L[sel].max()
    idx, _ = find_peaks(L)
    out = ResonanceTable()
    for k in idx:
        if not sel[k] or L[k] - med[k] < min_prominence or L[k] < ref + floor_db:
            continue
        d, peak = _parabolic(L[k - 1], L[k], L[k + 1])
        out.append(Resonance(float(f[k] + d * spec.df), float(10 ** (peak / 20.0)),
                             float(L[k] - med[k])))
    out.sort(key=lambda r: r.f)
    if n_peaks is not None:
        out = ResonanceTable(out[:n_peaks])
    return out


@dataclass
class SECurve:
    f: np.ndarray
    se_db: np.ndarray
    clamped: np.ndarray

    def at(self, f0):
        return float(np.interp(f0, self.f, self.se_db))

    def band(self, f_lo, f_hi):
        m = (self.f >= f_lo) & (self.f <= f_hi)
        return self.f[m], self.se_db[m]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["f_Hz", "SE_dB"])
            for fi, s in zip(self.f, self.se_db):
                w.writerow([repr(float(fi)), repr(float(s))])


def shielding_effectiveness(spec_without: Spectrum, spec_with: Spectrum) -> SECurve:
    """SE(f) = 20 log10(|E_without| / |E_with|) in dB.

    Both spectra must come from the same source/probe configuration (their
    metadata keys must agree).  Magnitudes below 1e-30 are clamped and
    flagged instead of producing infinities.
    """
    if spec_without.key() != spec_with.key() or len(spec_without.f) != len(spec_with.f):
        raise ValueError("spectra differ in axis or source configuration")
    a = np.abs(spec_without.X)
    b = np.abs(spec_with.X)
    clamped = (a < SE_FLOOR) | (b < SE_FLOOR)
    se = 20.0 * np.log10(np.maximum(a, SE_FLOOR) / np.maximum(b, SE_FLOOR))
    if clamped.any():
        import warnings
        warnings.warn(f"{int(clamped.sum())} SE bins clamped at |E| < {SE_FLOOR}", DivisionGuard)
    return SECurve(spec_with.f.copy(), se, clamped)


def relative_difference(f_a, f_b):
    """Percent difference of ``f_a`` from the reference ``f_b``."""
    f_a = np.asarray(f_a, dtype=float)
    f_b = np.asarray(f_b, dtype=float)
    if np.any(f_b == 0):
        raise ValueError("reference frequency must be nonzero")
    out = 100.0 * np.abs(f_a - f_b) / np.abs(f_b)
    return float(out) if out.ndim == 0 else out


def local_minima(f, y, f_lo=None, f_hi=None):
    """Frequencies of strict local minima of a curve, optionally within a band."""
    idx, _ = find_peaks(-np.asarray(y))
    fm = np.asarray(f)[idx]
    if f_lo is not None:
        fm = fm[fm >= f_lo]
    if f_hi is not None:
        fm = fm[fm <= f_hi]
    return fm


def write_spectrum_csv(path, spec: Spectrum, f_max=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f_Hz", "re", "im", "mag_dB"])
        db = spec.mag_db()
        for fi, x, d in zip(spec.f, spec.X, db):
            if f_max is not None and fi > f_max:
                break
            w.writerow([repr(float(fi)), repr(float(x.real)), repr(float(x.imag)), repr(float(d))])

"""Sub-cell thin-panel model for a single TLM link.

A crossed link is replaced by a three-layer stack, air (l1) / film (d) /
air (l2), terminated on both sides by the Norton equivalent of the adjacent
node ports (source ``2 y_TL V^r`` in parallel with ``y_TL``).  Each layer is a
uniform line with total series impedance ``Zt(s) = Ls s + Rs`` and total
shunt admittance ``Yt(s) = Cs s + Gs``.  Its two-port admittance is::

    y11 = -j Yc cot(theta)      y12 = j Yc csc(theta)
    theta = -j sqrt(Zt Yt),     Yc = sqrt(Yt / Zt)

and the partial-fraction (Foster) forms of cot and csc turn it into a sum of
real rational sections::

    y11 =  sum_k H_k(s)            y12 = -sum_k (-1)^k H_k(s)
    H_0 = 1 / Zt                   H_k = 2 Yt / (Zt Yt + k^2 pi^2)

Section ``k`` therefore carries the current ``H_k (V_left - (-1)^k V_right)``
into the left node and minus ``(-1)^k`` times that into the right node.
Each section is mapped to a discrete filter by the bilinear transform.

Air layers use the link line itself (admittance ``y_TL``, speed ``dl / dt``)
so that an absent film reduces to the plain link; the film uses its physical
constitutive parameters.
"""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import polygamma

from ._kernels import advance_and_history
from .constants import EPS0, MU0

DEFAULT_TERMS = 48
DEFAULT_AIR_TERMS = 8


class SingularAtResonance(ValueError):
    pass


class UnstableSection(RuntimeError):
    pass


@dataclass(frozen=True)
class FilmMaterial:
    eps_r: float
    thickness: float
    sigma_e: float = 0.0
    mu_r: float = 1.0
    sigma_m: float = 0.0
    name: str = "film"

    def __post_init__(self):
        if not self.eps_r > 0 or not self.mu_r > 0:
            raise ValueError("eps_r and mu_r must be positive")
        if self.sigma_e < 0 or self.sigma_m < 0:
            raise ValueError("conductivities must be non-negative")
        if not self.thickness > 0:
            raise ValueError("film thickness must be positive")

    @property
    def eps(self):
        return self.eps_r * EPS0

    @property
    def mu(self):
        return self.mu_r * MU0


class _Pec:
    name = "pec"

    def __repr__(self):
        return "PEC"


PEC = _Pec()


def cfc_film(thickness=1e-3, eps_r=2.0, sigma_e=1e4):
    return FilmMaterial(eps_r=eps_r, thickness=thickness, sigma_e=sigma_e, name="cfc")


@dataclass(frozen=True)
class StackGeometry:
    l1: float
    l2: float

    def __post_init__(self):
        if self.l1 < 0 or self.l2 < 0:
            raise ValueError("layer lengths must be non-negative")
        if self.l1 + self.l2 <= 0:
            raise ValueError("link length must be positive")

    @classmethod
    def from_fraction(cls, alpha: float, dl: float) -> "StackGeometry":
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"split fraction {alpha} outside [0, 1]")
        return cls(alpha * dl, (1.0 - alpha) * dl)

    @property
    def dl(self):
        return self.l1 + self.l2

    def mirrored(self) -> "StackGeometry":
        return StackGeometry(self.l2, self.l1)


@dataclass(frozen=True)
class Layer:
    """Uniform line segment described by its total (not per-length) constants."""

    Ls: float
    Rs: float
    Cs: float
    Gs: float

    @classmethod
    def air(cls, length, y_link, v_link):
        tau = length / v_link
        return cls(Ls=tau / y_link, Rs=0.0, Cs=tau * y_link, Gs=0.0)

    @classmethod
    def film(cls, m: FilmMaterial):
        d = m.thickness
        return cls(Ls=d * m.mu, Rs=d * m.sigma_m, Cs=d * m.eps, Gs=d * m.sigma_e)

    def theta(self, s):
        """Electrical length, principal branch with Im(theta) <= 0 for Re(s) >= 0."""
        gamma = np.sqrt((self.Ls * s + self.Rs) * (self.Cs * s + self.Gs))
        return -1j * gamma

    def char_admittance(self, s):
        return np.sqrt((self.Cs * s + self.Gs) / (self.Ls * s + self.Rs))

    def exact(self, s):
        """Closed-form (y11, y12) at complex frequency ``s``."""
        th = self.theta(s)
        yc = self.char_admittance(s)
        sin = np.sin(th)
        if np.any(np.abs(sin) < 1e-13 * np.maximum(1.0, np.abs(th))):
            raise SingularAtResonance("frequency sits on a pole of cot/csc")
        return -1j * yc * np.cos(th) / sin, 1j * yc / sin

    def series_sum(self, s, n_terms, remainder=True):
        """(y11, y12) from the truncated cot/csc expansions, evaluated in theta.

        With ``remainder`` the tail beyond ``n_terms`` is replaced by its
        leading term ``-2 theta sum 1/(k pi)^2`` (signed by parity for csc).
        """
        th = self.theta(s)
        yc = self.char_admittance(s)
        k = np.arange(1, n_terms + 1)
        th_ = np.asarray(th)[..., None]
        terms = 2.0 * th_ / (th_**2 - (k * math.pi) ** 2)
        cot = 1.0 / th + terms.sum(axis=-1)
        csc = 1.0 / th + (terms * (-1.0) ** k).sum(axis=-1)
        if remainder:
            even, odd = tail_sums(n_terms)
            cot = cot - 2.0 * th * (even + odd)
            csc = csc - 2.0 * th * (even - odd)
        return -1j * yc * cot, 1j * yc * csc

    def sections(self, n_terms, remainder=True):
        """Foster sections H_0 .. H_N as (numerator, denominator) in descending s.

        The optional remainder adds two improper sections ``2 R Yt`` (even and
        odd parity) standing in for every term beyond ``n_terms``.
        """
        out = [RationalSection((1.0,), (self.Ls, self.Rs), 0)]
        for k in range(1, n_terms + 1):
            out.append(RationalSection(
                (2 * self.Cs, 2 * self.Gs),
                (self.Ls * self.Cs, self.Ls * self.Gs + self.Rs * self.Cs,
                 self.Rs * self.Gs + (k * math.pi) ** 2),
                k,
            ))
        if remainder:
            even, odd = tail_sums(n_terms)
            # k only fixes the parity of the tail sections
            out.append(RationalSection((2 * even * self.Cs, 2 * even * self.Gs), (1.0,), n_terms + 2 - n_terms % 2))
            out.append(RationalSection((2 * odd * self.Cs, 2 * odd * self.Gs), (1.0,), n_terms + 1 + n_terms % 2))
        return out


def tail_sums(n_terms):
    """Sums of 1/(k pi)^2 over even and odd k > n_terms."""
    total = float(polygamma(1, n_terms + 1))
    even = float(polygamma(1, n_terms // 2 + 1)) / 4.0
    return even / math.pi**2, (total - even) / math.pi**2


@dataclass(frozen=True)
class RationalSection:
    """Real rational section num(s)/den(s); ``k`` is its Foster index."""

    num: tuple
    den: tuple
    k: int

    @property
    def order(self):
        return max(len(self.den), len(self.num)) - 1

    @property
    def kind(self):
        if len(self.num) > len(self.den):
            return "capacitive"
        if self.order == 1:
            return "integrator" if self.den[1] == 0 else "first-order"
        return "biquad"

    @property
    def parity(self):
        return -1.0 if self.k % 2 else 1.0

    def __call__(self, s):
        return np.polyval(self.num, s) / np.polyval(self.den, s)

    def scaled(self, c):
        return RationalSection(tuple(c * n for n in self.num), self.den, self.k)

    def to_discrete(self, dt):
        return bilinear_section(self.num, self.den, dt)


def expand_cot(layer: Layer, n_terms: int, remainder=True) -> list:
    """Sections whose sum is -j Yc cot(theta) truncated at ``n_terms``."""
    if n_terms < 1:
        raise ValueError("need at least one expansion term")
    return layer.sections(n_terms, remainder)


def expand_csc(layer: Layer, n_terms: int, remainder=True) -> list:
    """Sections whose sum is j Yc csc(theta) truncated at ``n_terms``."""
    if n_terms < 1:
        raise ValueError("need at least one expansion term")
    return [sec.scaled(-sec.parity) for sec in layer.sections(n_terms, remainder)]


def bilinear_section(num, den, dt):
    """Bilinear image of a first- or second-order section.

    Returns ``(b, a)`` of length 3 in powers of z^-1 with ``a[0] == 1``.
    """
    order = max(len(den), len(num)) - 1
    if order not in (1, 2) or len(num) > 2 and len(num) > len(den):
        raise ValueError("only sections of order 1 or 2 are supported")
    K = 2.0 / dt
    # (1 - z^-1), (1 + z^-1) as coefficient arrays in z^-1
    minus = np.array([1.0, -1.0])
    plus = np.array([1.0, 1.0])

    def image(coeffs):
        acc = np.zeros(order + 1)
        n = len(coeffs) - 1
        for p, c in enumerate(coeffs):
            power = n - p  # coefficient of s**power
            term = np.array([c * K**power])
            for _ in range(power):
                term = np.convolve(term, minus)
            for _ in range(order - power):
                term = np.convolve(term, plus)
            acc[: len(term)] += term
        return acc

    b = image(num)
    a = image(den)
    b, a = b / a[0], a / a[0]
    b = np.pad(b, (0, 3 - len(b)))
    a = np.pad(a, (0, 3 - len(a)))
    return b, a


def discrete_poles(a):
    a = np.trim_zeros(np.asarray(a, dtype=float), "b")
    if len(a) <= 1:
        return np.array([])
    return np.roots(a)


def _terms(layer_kind, n_terms, n_air):
    if layer_kind == "air" and n_air is not None:
        return n_air
    return n_terms


def link_layers(geom: StackGeometry, material, y_link, v_link):
    """Layer list ``[(layer, left_node, right_node, kind), ...]`` on the node set.

    Nodes: 0 = left port, 1 = a, 2 = b, 3 = right port, -1 = ground.  Zero
    length air layers are dropped and their end nodes merged.  The second
    return value lists the active nodes.
    """
    tiny = 1e-9 * geom.dl
    if geom.l1 <= tiny or geom.l2 <= tiny:
        geom = StackGeometry(0.0 if geom.l1 <= tiny else geom.dl, 0.0 if geom.l2 <= tiny else geom.dl)
    if material is PEC:
        layers = []
        active = []
        if geom.l1 > 0:
            layers.append((Layer.air(geom.l1, y_link, v_link), 0, -1, "air"))
        if geom.l2 > 0:
            layers.append((Layer.air(geom.l2, y_link, v_link), -1, 3, "air"))
        active = [0, 3]
        grounded = [n for n, length in ((0, geom.l1), (3, geom.l2)) if length == 0]
        return layers, active, grounded
    a = 1 if geom.l1 > 0 else 0
    b = 2 if geom.l2 > 0 else 3
    layers = []
    if geom.l1 > 0:
        layers.append((Layer.air(geom.l1, y_link, v_link), 0, a, "air"))
    layers.append((Layer.film(material), a, b, "film"))
    if geom.l2 > 0:
        layers.append((Layer.air(geom.l2, y_link, v_link), b, 3, "air"))
    active = sorted({0, a, b, 3})
    return layers, active, []


def _assemble(geom, material, y_link, v_link, two_port):
    layers, active, grounded = link_layers(geom, material, y_link, v_link)
    Y = np.zeros((4, 4), dtype=complex)
    for layer, nl, nr, kind in layers:
        y11, y12 = two_port(layer, kind)
        if nl >= 0:
            Y[nl, nl] += y11
        if nr >= 0:
            Y[nr, nr] += y11
        if nl >= 0 and nr >= 0:
            Y[nl, nr] += y12
            Y[nr, nl] += y12
    Y[0, 0] += y_link
    Y[3, 3] += y_link
    active = [n for n in active if n not in grounded]
    return Y[np.ix_(active, active)]


def stack_admittance(geom: StackGeometry, material, omega, y_link, v_link, n_terms=None,
                     remainder=True, n_air=None):
    """Nodal admittance matrix of the terminated stack at angular frequency ``omega``.

    Rows/columns follow (V4, Va, Vb, V2) with merged or grounded nodes
    removed; a PEC crossing gives the 2x2 diagonal of the two stubs.  With
    ``n_terms`` set, the truncated cot/csc expansions are used instead of the
    closed form; ``n_air`` overrides the term count of the air layers.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    s = 1j * omega
    if n_terms is None:
        return _assemble(geom, material, y_link, v_link, lambda L, kind: L.exact(s))
    return _assemble(geom, material, y_link, v_link,
                     lambda L, kind: L.series_sum(s, _terms(kind, n_terms, n_air), remainder))


def stub_admittance(l1, omega, y_link, v_link):
    """Input admittance -j y cot(omega l1 / v) of a shorted link remnant."""
    if not l1 > 0:
        raise ValueError("stub length must be positive")
    return Layer.air(l1, y_link, v_link).exact(1j * omega)[0]


def transfer_from_admittance(Y, y_link):
    """Reflection at port 0 and transmission 0 -> last for matched drives.

    With only the left source active (``V^r = 1``) the port voltages solve
    ``Y V = (2 y_link, 0, ..., 0)``; reflection is ``V_0 - 1`` and the wave
    launched into the right node is ``V_last``.
    """
    Y = np.asarray(Y)
    rhs = np.zeros(Y.shape[-1], dtype=complex)
    rhs[0] = 2.0 * y_link
    V = np.linalg.solve(Y, rhs)
    return V[0] - 1.0, V[-1]


class FilterBank:
    """Discrete-time filter banks of one or more crossings, stepped together.

    All crossings share the same layout: four unknowns (V4, Va, Vb, V2);
    unused unknowns carry an identity row.  ``G`` is the instantaneous
    conductance matrix per crossing, ``Ginv`` its precomputed inverse.
    """

    def __init__(self, G, rhs_mask, sec_b, sec_a, sec_left, sec_right, sec_sign,
                 sec_owner, sec_layer, sec_k, y_link, dt):
        self.G = G
        self.rhs_mask = rhs_mask
        self.b = np.ascontiguousarray(sec_b, dtype=float)
        self.a = np.ascontiguousarray(sec_a, dtype=float)
        self.left = np.ascontiguousarray(sec_left, dtype=np.int64)
        self.right = np.ascontiguousarray(sec_right, dtype=np.int64)
        self.sign = np.ascontiguousarray(sec_sign, dtype=float)
        self.owner = sec_owner
        self.layer = sec_layer
        self.k = sec_k
        self.y_link = y_link
        self.dt = dt
        det = np.linalg.det(G)
        if np.any(~np.isfinite(det)) or np.any(np.abs(det) == 0):
            raise ValueError("singular instantaneous coupling matrix")
        self.Ginv = np.linalg.inv(G)
        self.solver = "direct"
        self.compiled = advance_and_history is not None
        self.reset()

    def __len__(self):
        return self.G.shape[0]

    @property
    def n_states(self):
        return int(np.sum(np.where(self.a[:, 2] != 0, 2, 1)))

    def reset(self):
        n = len(self.b)
        self.s1 = np.zeros(n)
        self.s2 = np.zeros(n)
        self._V = np.zeros(4 * len(self) + 1)
        self._h = np.zeros(4 * len(self) + 1) if self.compiled else None

    @classmethod
    def concatenate(cls, banks):
        banks = list(banks)
        if not banks:
            raise ValueError("nothing to concatenate")
        offsets = np.cumsum([0] + [4 * len(b) for b in banks])
        ground = offsets[-1]
        c_offsets = np.cumsum([0] + [len(b) for b in banks])

        def remap(bank, idx, off):
            idx = idx.copy()
            g = idx == 4 * len(bank)
            idx += off
            idx[g] = ground
            return idx

        return cls(
            np.concatenate([b.G for b in banks]),
            np.concatenate([b.rhs_mask for b in banks]),
            np.concatenate([b.b for b in banks]),
            np.concatenate([b.a for b in banks]),
            np.concatenate([remap(b, b.left, o) for b, o in zip(banks, offsets)]),
            np.concatenate([remap(b, b.right, o) for b, o in zip(banks, offsets)]),
            np.concatenate([b.sign for b in banks]),
            np.concatenate([b.owner + o for b, o in zip(banks, c_offsets)]),
            np.concatenate([b.layer for b in banks]),
            np.concatenate([b.k for b in banks]),
            banks[0].y_link,
            banks[0].dt,
        )

    def _history(self):
        n = len(self)
        h = np.bincount(self.left, weights=self.s1, minlength=4 * n + 1)
        h -= np.bincount(self.right, weights=self.sign * self.s1, minlength=4 * n + 1)
        return h[:-1].reshape(n, 4)

    def _solve(self, rhs):
        if self.solver == "direct":
            return np.einsum("cij,cj->ci", self.Ginv, rhs)
        return gauss_seidel(self.G, rhs)

    def use_compiled(self, flag=True):
        """Switch between the numba kernel and the numpy path (states are kept)."""
        flag = bool(flag) and advance_and_history is not None
        if flag and not self.compiled:
            self._h = np.zeros(4 * len(self) + 1)
            self._h[:-1] = self._history().reshape(-1)
        elif not flag:
            self._h = None
        self.compiled = flag

    def history(self):
        """History currents (n, 4) injected by the filter states."""
        if self._h is not None:
            return self._h[:-1].reshape(-1, 4) * self.rhs_mask
        return self._history() * self.rhs_mask

    def advance(self, V):
        """Update every section state with the solved node voltages V (n, 4)."""
        Vf = self._V
        Vf[:-1] = np.asarray(V).reshape(-1)
        if self._h is not None:
            advance_and_history(Vf, self.left, self.right, self.sign, self.b, self.a,
                                self.s1, self.s2, self._h)
            return
        u = Vf[self.left] - self.sign * Vf[self.right]
        b, a = self.b, self.a
        y = b[:, 0] * u + self.s1
        self.s1 = b[:, 1] * u - a[:, 1] * y + self.s2
        self.s2 = b[:, 2] * u - a[:, 2] * y

    def step(self, v_left, v_right):
        """Advance every crossing by one step with the launched waves given.

        Returns the waves (V4^i, V2^i) leaving the stack toward each node at
        the same instant.
        """
        v_left = np.asarray(v_left, dtype=float)
        v_right = np.asarray(v_right, dtype=float)
        n = len(self)
        rhs = np.zeros((n, 4))
        rhs[:, 0] = 2.0 * self.y_link * v_left
        rhs[:, 3] = 2.0 * self.y_link * v_right
        rhs = rhs * self.rhs_mask - self.history()
        V = self._solve(rhs)
        self.advance(V)
        return V[:, 0] - v_left, V[:, 3] - v_right

    def response(self, omega):
        """Discrete nodal matrix Y(e^{j omega dt}) per crossing, shape (n, 4, 4)."""
        z1 = np.exp(-1j * omega * self.dt)
        b, a = self.b, self.a
        H = (b[:, 0] + b[:, 1] * z1 + b[:, 2] * z1**2) / (a[:, 0] + a[:, 1] * z1 + a[:, 2] * z1**2)
        n = len(self)
        Y = np.zeros((4 * n + 1, 4 * n + 1), dtype=complex)
        np.add.at(Y, (self.left, self.left), H)
        np.add.at(Y, (self.right, self.right), H)
        np.add.at(Y, (self.left, self.right), -self.sign * H)
        np.add.at(Y, (self.right, self.left), -self.sign * H)
        out = np.empty((n, 4, 4), dtype=complex)
        for c in range(n):
            blk = Y[4 * c:4 * c + 4, 4 * c:4 * c + 4].copy()
            blk[0, 0] += self.y_link * self.rhs_mask[c, 0]
            blk[3, 3] += self.y_link * self.rhs_mask[c, 3]
            off = self.rhs_mask[c] == 0
            blk[off, off] = 1.0  # merged or grounded unknowns
            out[c] = blk
        return out

    def poles(self):
        return [discrete_poles(a) for a in self.a]

    def dump_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["crossing", "layer", "k", "b0", "b1", "b2", "a1", "a2",
                        "pole1_re", "pole1_im", "pole2_re", "pole2_im", "max_abs_pole"])
            for idx in range(len(self.b)):
                p = discrete_poles(self.a[idx])
                p = np.pad(p.astype(complex), (0, 2 - len(p)), constant_values=np.nan)
                w.writerow([int(self.owner[idx]), int(self.layer[idx]), int(self.k[idx]),
                            *self.b[idx], *self.a[idx, 1:],
                            p[0].real, p[0].imag, p[1].real, p[1].imag,
                            np.nanmax(np.abs(p))])


def gauss_seidel(G, rhs, tol=1e-12, max_sweeps=200):
    """Batched Gauss-Seidel solve of G x = rhs, G of shape (n, 4, 4)."""
    x = np.zeros_like(rhs)
    diag = np.einsum("cii->ci", G)
    scale = np.maximum(np.abs(rhs).max(axis=1), 1e-300)
    for _ in range(max_sweeps):
        delta = 0.0
        for i in range(G.shape[1]):
            new = (rhs[:, i] - np.einsum("cj,cj->c", G[:, i, :], x) + diag[:, i] * x[:, i]) / diag[:, i]
            delta = max(delta, float(np.max(np.abs(new - x[:, i]) / scale)))
            x[:, i] = new
        if delta < tol:
            break
    return x


@functools.lru_cache(maxsize=4096)
def _discrete_sections(layer, n_terms, remainder, dt):
    out = []
    for sec in expand_cot(layer, n_terms, remainder):
        b, a = sec.to_discrete(dt)
        poles = discrete_poles(a)
        if poles.size and np.max(np.abs(poles)) > 1.0 + 1e-12:
            raise UnstableSection(f"section {sec.k} has discrete poles {poles}")
        out.append((b, a, sec.parity, sec.k))
    return tuple(out)


def synthesize_filters(geom: StackGeometry, material, n_terms: int, dt: float,
                       y_link: float, v_link: float, remainder=True, n_air=None) -> FilterBank:
    """Discrete filter bank for one crossing (film stack or PEC stubs)."""
    if n_terms < 1:
        raise ValueError("need at least one expansion term")
    layers, active, grounded = link_layers(geom, material, y_link, v_link)
    G = np.zeros((4, 4))
    mask = np.zeros(4)
    bs, as_, lefts, rights, signs, layer_ids, ks = [], [], [], [], [], [], []
    ground = 4
    for li, (layer, nl, nr, kind) in enumerate(layers):
        for b, a, sg, k in _discrete_sections(layer, _terms(kind, n_terms, n_air), remainder, dt):
            g = b[0]
            if nl >= 0:
                G[nl, nl] += g
            if nr >= 0:
                G[nr, nr] += g
            if nl >= 0 and nr >= 0:
                G[nl, nr] -= sg * g
                G[nr, nl] -= sg * g
            bs.append(b)
            as_.append(a)
            lefts.append(nl if nl >= 0 else ground)
            rights.append(nr if nr >= 0 else ground)
            signs.append(sg)
            layer_ids.append(li)
            ks.append(k)
    G[0, 0] += y_link
    G[3, 3] += y_link
    for n in range(4):
        if n in active and n not in grounded:
            mask[n] = 1.0
        else:
            G[n, :] = 0.0
            G[:, n] = 0.0
            G[n, n] = 1.0
    return FilterBank(
        G[None], mask[None],
        np.array(bs).reshape(-1, 3), np.array(as_).reshape(-1, 3),
        np.array(lefts, dtype=np.int64), np.array(rights, dtype=np.int64),
        np.array(signs), np.zeros(len(bs), dtype=np.int64),
        np.array(layer_ids, dtype=np.int64), np.array(ks, dtype=np.int64),
        y_link, dt,
    )


def step_crossing(bank: FilterBank, v4r, v2r):
    """One time step of a crossing: reflected waves in, next incident waves out."""
    v4, v2 = bank.step(np.atleast_1d(v4r), np.atleast_1d(v2r))
    if np.ndim(v4r) == 0:
        return float(v4[0]), float(v2[0])
    return v4, v2


def build_bank(crossings, mesh, n_terms=DEFAULT_TERMS, n_air=DEFAULT_AIR_TERMS, remainder=True):
    """Filter bank for every crossing of a CrossingSet on ``mesh``.

    The returned bank carries the link identities, so ``mesh.attach(bank)``
    hands it those links.
    """
    material = crossings.material
    if material is None:
        raise ValueError("crossing set has no material")
    banks = [
        synthesize_filters(StackGeometry.from_fraction(float(a), mesh.dl), material, n_terms,
                           mesh.dt, mesh.y_link, mesh.v_link, remainder, n_air)
        for a in crossings.alpha
    ]
    bank = FilterBank.concatenate(banks)
    bank.orientation = np.asarray(crossings.orientation)
    bank.i = np.asarray(crossings.i)
    bank.j = np.asarray(crossings.j)
    return bank

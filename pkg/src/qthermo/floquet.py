"""Thermal generators for periodically driven systems (Floquet-Davies).

Conventions follow :mod:`qthermo.davies`. With ``U(t)`` the propagator of
``H(t)`` and Floquet modes ``|k>`` (eigenvectors of the monodromy
``U(tau) = exp(-i H_eff tau)``), the coupling operator decomposes as::

    U(t)^+ S U(t) = sum_{q, w} exp(-i (w + q Omega) t) S_{wq},   w = e_l - e_k

``S_{wq}`` with ``nu = w + q Omega > 0`` hands a quantum ``nu`` to the bath
and enters the generator with rates ``gamma(nu)`` and ``gamma(-nu)``.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import operators as ops
from .davies import JumpTerm, ThermalGenerator, _rate
from .dynamics import midpoint_propagator
from .errors import NotConverged, TruncationError


class FloquetCollisionWarning(UserWarning):
    """Distinct (w, q) components share one transition frequency and were merged."""


@dataclass(frozen=True)
class PeriodicHamiltonian:
    """``H(t)`` with period ``period``; ``derivative`` is optional (dH/dt)."""

    H: object
    period: float
    derivative: object = None

    def __call__(self, t):
        return self.H(t)

    @property
    def omega(self):
        return 2 * math.pi / self.period

    def dH_dt(self, t, h=None):
        """Analytic derivative if supplied, else a central difference (error O(h^2))."""
        if self.derivative is not None:
            return self.derivative(t)
        h = 1e-5 * self.period if h is None else h
        return (self.H(t + h) - self.H(t - h)) / (2 * h)

    def is_periodic(self, samples=16, tol=1e-10):
        ts = np.linspace(0, self.period, samples, endpoint=False)
        return all(np.max(np.abs(self.H(t + self.period) - self.H(t))) < tol for t in ts)


def fold(eps, Omega):
    """Map quasi-energies into the zone (-Omega/2, Omega/2]."""
    eps = np.asarray(eps, dtype=float)
    return eps - Omega * np.ceil((eps - Omega / 2) / Omega - 1e-13)


@dataclass
class FloquetBasis:
    monodromy: np.ndarray
    quasi_energies: np.ndarray
    vectors: np.ndarray
    period: float
    substeps: int
    grid: list = field(repr=False, default_factory=list)
    hamiltonian: object = field(repr=False, default=None)

    @property
    def omega(self):
        return 2 * math.pi / self.period

    @property
    def dim(self):
        return self.monodromy.shape[0]

    def effective_hamiltonian(self):
        V = self.vectors
        return (V * self.quasi_energies) @ V.conj().T

    def projectors(self):
        V = self.vectors
        return [np.outer(V[:, k], V[:, k].conj()) for k in range(V.shape[1])]

    def propagator(self, t):
        """U(t, 0) for any t >= 0 from the stored one-period grid."""
        n, s = divmod(t, self.period)
        n = int(n)
        h = self.period / self.substeps
        j = min(int(s // h), self.substeps - 1)
        dt = s - j * h
        U = self.grid[j]
        if dt > 0:
            U = ops.hermitian_propagator(self.hamiltonian(j * h + 0.5 * dt), dt) @ U
        if n:
            U = U @ np.linalg.matrix_power(self.monodromy, n)
        return U

    def floquet_modes(self, t):
        """Columns are the periodic Floquet modes exp(i e_k t) U(t)|k>."""
        return self.propagator(t) @ self.vectors * np.exp(1j * self.quasi_energies * t)


def compute_monodromy(ph, substeps=64, tol=1e-8, max_substeps=2 ** 16):
    """One-period propagator, refined by substep doubling until stable to ``tol``.

    Quasi-energies are folded into (-Omega/2, Omega/2] and returned ascending
    together with an orthonormal set of Floquet modes at t = 0.
    """
    if substeps < 64:
        raise ValueError("substeps must be >= 64")
    U, trail = midpoint_propagator(ph, 0.0, ph.period, substeps, record=True)
    while True:
        if 2 * substeps > max_substeps:
            raise NotConverged(f"monodromy not converged at {substeps} substeps")
        U2, trail2 = midpoint_propagator(ph, 0.0, ph.period, 2 * substeps, record=True)
        substeps *= 2
        delta = np.max(np.abs(U2 - U))
        U, trail = U2, trail2
        if delta < tol:
            break
    T, Z = scipy.linalg.schur(U, output="complex")
    lam = np.diag(T)
    eps = fold(-np.angle(lam) / ph.period, ph.omega)
    order = np.argsort(eps)
    return FloquetBasis(U, eps[order], Z[:, order], ph.period, substeps, trail[:-1], ph)


@dataclass
class FloquetComponent:
    bohr: float
    harmonic: int
    op: np.ndarray

    def frequency(self, Omega):
        return self.bohr + self.harmonic * Omega


@dataclass
class FloquetJumpSet:
    components: list
    omega_drive: float
    q_max: int
    residual: float

    def reconstruct(self, t):
        out = 0
        for c in self.components:
            out = out + np.exp(-1j * c.frequency(self.omega_drive) * t) * c.op
        return out


def _interaction_samples(S, basis, ts):
    out = []
    for t in ts:
        U = basis.propagator(t)
        out.append(U.conj().T @ S @ U)
    return np.array(out)


def floquet_jump_operators(S, ph, basis, q_max=None, grid_points=None, tol=1e-7, merge_tol=None):
    """Double Fourier decomposition of ``U(t)^+ S U(t)`` over one period.

    With ``q_max=None`` the harmonic cutoff grows until the reconstruction
    residual (checked on off-grid points) drops below ``tol``; an explicit
    ``q_max`` that fails the check raises :class:`TruncationError`.
    """
    S = ops.check_hermitian(S)
    Omega = basis.omega
    if grid_points is None:
        grid_points = 64 if q_max is None else max(64, 8 * q_max)
    if q_max is not None and (q_max < 1 or grid_points < 8 * q_max):
        raise ValueError("need q_max >= 1 and grid_points >= 8 q_max")
    N = int(grid_points)
    tau = basis.period
    ts = np.arange(N) * tau / N
    V = basis.vectors
    eps = basis.quasi_energies
    F = _interaction_samples(S, basis, ts)
    F = np.einsum("ik,tij,jl->tkl", V.conj(), F, V)
    phase = np.exp(-1j * (eps[:, None] - eps[None, :])[None, :, :] * ts[:, None, None])
    G = F * phase
    g = np.fft.fft(G, axis=0) / N
    m_of = np.fft.fftfreq(N, d=1.0 / N).astype(int)

    check_ts = ts + 0.5 * tau / N
    F_check = _interaction_samples(S, basis, check_ts)
    scale = max(np.max(np.abs(S)), 1e-300)

    if merge_tol is None:
        merge_tol = max(1e-9 * max(float(np.ptp(eps)), Omega), 1e-12)
    # group quasi-Bohr frequencies w = e_l - e_k
    wmat = eps[None, :] - eps[:, None]

    def assemble(qm):
        comps = []
        bins = []
        for k in range(len(eps)):
            for l in range(len(eps)):
                w = wmat[k, l]
                for b in bins:
                    if abs(b[0] - w) <= merge_tol:
                        b[1].append((k, l))
                        break
                else:
                    bins.append([w, [(k, l)]])
        for w, pairs in bins:
            for q in range(-qm, qm + 1):
                m = -q
                idx = int(np.nonzero(m_of == m)[0][0])
                M = np.zeros((len(eps), len(eps)), complex)
                for k, l in pairs:
                    M[k, l] = g[idx, k, l]
                if np.max(np.abs(M)) > 1e-3 * tol * scale:
                    comps.append(FloquetComponent(float(w), q, V @ M @ V.conj().T))
        return comps

    def residual(comps):
        js = FloquetJumpSet(comps, Omega, 0, 0.0)
        return max(np.max(np.abs(js.reconstruct(t) - Fc)) for t, Fc in zip(check_ts, F_check)) / scale

    q_hi = N // 2 - 1
    if q_max is None:
        qm = 1
        while True:
            comps = assemble(qm)
            res = residual(comps)
            if res < tol:
                break
            if qm >= q_hi:
                raise TruncationError(f"no harmonic cutoff up to {qm} meets tol (residual {res:.3e})", res)
            qm += 1
    else:
        qm = q_max
        comps = assemble(qm)
        res = residual(comps)
        if res >= tol:
            raise TruncationError(f"q_max = {qm} insufficient (residual {res:.3e})", res)
    return FloquetJumpSet(comps, Omega, qm, res)


@dataclass(frozen=True)
class FloquetGenerator(ThermalGenerator):
    """Stroboscopic (t = 0 frame) generator: H_eff plus Floquet jump terms."""

    basis: object = None
    periodic: object = None
    jumpsets: dict = field(default_factory=dict)

    @property
    def omega_drive(self):
        return self.basis.omega


def build_floquet_generator(ph, channels, q_max=None, basis=None, grid_points=None, tol=1e-7):
    """Floquet-Davies generator for a periodic Hamiltonian and coupling channels.

    Components with the same transition frequency ``nu`` (within tolerance) are
    merged into one jump operator, with a :class:`FloquetCollisionWarning`.
    ``nu = 0`` components carry no rate and are dropped.
    """
    if basis is None:
        basis = compute_monodromy(ph)
    Omega = basis.omega
    nu_tol = 1e-9 * Omega
    terms = []
    temperatures, baths, jumpsets = {}, {}, {}
    for ch in channels:
        js = floquet_jump_operators(ch.S, ph, basis, q_max, grid_points, tol)
        jumpsets[ch.bath_id] = js
        temperatures[ch.bath_id] = ch.bath.temperature
        baths[ch.bath_id] = ch.bath
        merged = []
        for c in js.components:
            nu = c.frequency(Omega)
            if nu <= nu_tol:
                continue
            for entry in merged:
                if abs(entry[0] - nu) <= nu_tol:
                    warnings.warn(f"components ({entry[1]}, {entry[2]}) and ({c.bohr}, {c.harmonic}) "
                                  f"share nu = {nu:.6g}; merged", FloquetCollisionWarning, stacklevel=2)
                    entry[3] = entry[3] + c.op
                    break
            else:
                merged.append([nu, c.bohr, c.harmonic, c.op])
        for nu, w, q, A in merged:
            terms.append(JumpTerm(ch.bath_id, nu, A, _rate(ch.bath, nu), _rate(ch.bath, -nu), w, q))
    return FloquetGenerator(basis.effective_hamiltonian(), tuple(terms), "floquet", temperatures,
                            baths, basis, ph, jumpsets)


def rotate_to_schrodinger(gen, ph, t):
    """Instantaneous Schrodinger-picture generator at time ``t``.

    Jump operators are conjugated by ``U(t)`` and the Hamiltonian part becomes
    ``H(t)``; the result is periodic in ``t`` with the drive period.
    """
    U = gen.basis.propagator(t)
    Ud = U.conj().T
    terms = tuple(JumpTerm(x.bath_id, x.omega, U @ x.op @ Ud, x.gamma_down, x.gamma_up, x.bohr, x.harmonic)
                  for x in gen.terms)
    ph = gen.periodic if ph is None else ph
    return ThermalGenerator(ph(t), terms, "floquet", gen.temperatures, gen.baths)


class DrivenGenerator:
    """Time-dependent Schrodinger-picture master equation of a Floquet generator."""

    def __init__(self, gen):
        self.gen = gen
        self.periodic = gen.periodic
        self.basis = gen.basis
        self.temperatures = gen.temperatures
        self._cache = (None, None)

    @property
    def bath_ids(self):
        return self.gen.bath_ids

    @property
    def dim(self):
        return self.gen.dim

    def _U(self, t):
        if self._cache[0] != t:
            self._cache = (t, self.basis.propagator(t))
        return self._cache[1]

    def dissipator_at(self, t, rho, bath_id=None):
        U = self._U(t)
        Ud = U.conj().T
        return U @ self.gen.apply_dissipator(Ud @ rho @ U, bath_id) @ Ud

    def rhs(self, t, rho):
        H = self.periodic(t)
        return -1j * (H @ rho - rho @ H) + self.dissipator_at(t, rho)

    def hamiltonian_at(self, t):
        return self.periodic(t)

    def dH_dt(self, t):
        return self.periodic.dH_dt(t)

    def generator_at(self, t):
        return rotate_to_schrodinger(self.gen, self.periodic, t)

    def steady_orbit(self, rho_tilde, t):
        """Periodic steady state U(t) rho~ U(t)^+."""
        U = self._U(t)
        return U @ rho_tilde @ U.conj().T

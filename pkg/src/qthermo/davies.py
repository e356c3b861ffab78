"""Weak-coupling (Davies) thermal generators for static Hamiltonians.

A generator is stored as a Hamiltonian plus a list of :class:`JumpTerm`
objects. Each term pairs a lowering eigenoperator ``A`` (it removes the
quantum ``omega > 0`` from the system) with its emission rate ``gamma_down``
and the absorption rate ``gamma_up`` of the adjoint process::

    L rho = -i[H, rho] + sum gamma_down D[A] rho + gamma_up D[A^+] rho
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import operators as ops
from .errors import DimensionMismatch, DomainError, FrequencyOutOfRange, MissingSpectralValue

#: Provenance tags for which heat currents are well defined.
THERMAL_PROVENANCE = ("davies", "floquet")


@dataclass(frozen=True)
class CouplingChannel:
    """System operator ``S`` of an interaction ``S (x) B`` with bath ``bath``."""

    S: np.ndarray
    bath: object
    bath_id: str

    def __post_init__(self):
        object.__setattr__(self, "S", ops.check_hermitian(self.S))


@dataclass(frozen=True)
class JumpTerm:
    bath_id: str
    omega: float
    op: np.ndarray
    gamma_down: float
    gamma_up: float
    # Floquet bookkeeping: quasi-Bohr frequency and harmonic index.
    bohr: float = None
    harmonic: int = 0

    def dissipate(self, rho):
        A = self.op
        out = self.gamma_down * ops.dissipator(A, rho)
        if self.gamma_up:
            out = out + self.gamma_up * ops.dissipator(A.conj().T, rho)
        return out

    def dissipate_adjoint(self, O):
        A = self.op
        out = self.gamma_down * ops.adjoint_dissipator(A, O)
        if self.gamma_up:
            out = out + self.gamma_up * ops.adjoint_dissipator(A.conj().T, O)
        return out

    def superoperator(self):
        A = self.op
        return (self.gamma_down * ops.dissipator_superop(A)
                + self.gamma_up * ops.dissipator_superop(A.conj().T))

    def net_flux(self, rho):
        """Net rate of upward (absorptive) jumps minus downward ones."""
        A = self.op
        up = ops.expectation(rho, A @ A.conj().T)
        down = ops.expectation(rho, A.conj().T @ A)
        return self.gamma_up * up - self.gamma_down * down


@dataclass(frozen=True)
class ThermalGenerator:
    """Markovian generator with an explicit list of thermal jump terms."""

    hamiltonian: np.ndarray
    terms: tuple
    provenance: str = "davies"
    temperatures: dict = field(default_factory=dict)
    baths: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    @property
    def bath_ids(self):
        seen = dict.fromkeys(self.temperatures)
        for term in self.terms:
            seen.setdefault(term.bath_id, None)
        return list(seen)

    def bath_terms(self, bath_id):
        return [t for t in self.terms if t.bath_id == bath_id]

    def _check(self, rho):
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"expected a {self.dim}x{self.dim} matrix, got {rho.shape}")
        return rho

    def apply(self, rho):
        """Schrodinger picture d rho/dt, Hamiltonian part included."""
        rho = self._check(rho)
        H = self.hamiltonian
        out = -1j * (H @ rho - rho @ H)
        for term in self.terms:
            out = out + term.dissipate(rho)
        return out

    def apply_dissipator(self, rho, bath_id=None):
        rho = self._check(rho)
        out = np.zeros_like(rho)
        for term in self.terms:
            if bath_id is None or term.bath_id == bath_id:
                out = out + term.dissipate(rho)
        return out

    def apply_heisenberg(self, O):
        O = self._check(O)
        H = self.hamiltonian
        out = 1j * (H @ O - O @ H)
        for term in self.terms:
            out = out + term.dissipate_adjoint(O)
        return out

    def superoperator(self, include_hamiltonian=True, bath_id=None):
        n = self.dim
        L = ops.commutator_superop(self.hamiltonian) if include_hamiltonian else np.zeros((n * n, n * n), complex)
        for term in self.terms:
            if bath_id is None or term.bath_id == bath_id:
                L = L + term.superoperator()
        return L

    def in_basis(self, V):
        """The same generator written in the orthonormal basis given by columns of ``V``."""
        Vd = V.conj().T
        terms = tuple(replace(t, op=Vd @ t.op @ V) for t in self.terms)
        return replace(self, hamiltonian=Vd @ self.hamiltonian @ V, terms=terms)

    # Uniform time-dependent interface used by the integrator and the ledger.
    def rhs(self, t, rho):
        return self.apply(rho)

    def hamiltonian_at(self, t):
        return self.hamiltonian

    def dH_dt(self, t):
        return np.zeros_like(self.hamiltonian)

    def dissipator_at(self, t, rho, bath_id=None):
        return self.apply_dissipator(rho, bath_id)

    def generator_at(self, t):
        return self


def bohr_jump_operators(S, dec, tol=None):
    """Fourier components of ``S`` in the eigenbasis of a Hamiltonian.

    Returns ``[(omega, S_omega)]`` for ``omega >= 0`` where
    ``S_omega = sum_{e_l - e_k = omega} P_k S P_l`` lowers the energy by
    ``omega``. Components with vanishing norm are omitted. Together with the
    adjoints of the ``omega > 0`` entries they sum back to ``S``.
    """
    S = ops.check_hermitian(S)
    if S.shape != (dec.dim, dec.dim):
        raise DimensionMismatch("coupling operator and Hamiltonian dimensions differ")
    e = dec.eigenvalues
    if tol is None:
        tol = max(ops.default_degeneracy_tol(e), 1e-12)
    bins = []  # [omega, matrix]
    for k, Pk in enumerate(dec.projectors):
        for l, Pl in enumerate(dec.projectors):
            w = e[l] - e[k]
            if w < -tol:
                continue
            w = max(w, 0.0)
            block = Pk @ S @ Pl
            for entry in bins:
                if abs(entry[0] - w) <= tol:
                    entry[1] = entry[1] + block
                    break
            else:
                bins.append([w, block])
    scale = max(np.max(np.abs(S)), 1e-300)
    out = [(float(w), M) for w, M in sorted(bins, key=lambda b: b[0])
           if np.max(np.abs(M)) > 1e-13 * scale]
    return out


def _rate(bath, omega):
    try:
        return bath.gamma(omega)
    except FrequencyOutOfRange as exc:
        raise MissingSpectralValue(str(exc)) from exc


def build_generator(H_S, channels, tol=None):
    """Davies generator for a static Hamiltonian and a list of coupling channels.

    Pure-dephasing (``omega = 0``) components carry the rate ``gamma(0) = 0``
    and are therefore dropped from the term list.
    """
    H_S = ops.check_hermitian(H_S)
    dec = ops.eigendecompose(H_S, tol)
    terms = []
    temperatures = {}
    baths = {}
    for ch in channels:
        if ch.S.shape != H_S.shape:
            raise DimensionMismatch(f"channel {ch.bath_id!r} has the wrong dimension")
        temperatures[ch.bath_id] = ch.bath.temperature
        baths[ch.bath_id] = ch.bath
        for w, A in bohr_jump_operators(ch.S, dec, tol):
            if w == 0:
                continue
            terms.append(JumpTerm(ch.bath_id, w, A, _rate(ch.bath, w), _rate(ch.bath, -w)))
    return ThermalGenerator(H_S, tuple(terms), "davies", temperatures, baths)


def lindblad_generator(H, jump_ops, label="lgks"):
    """Generic LGKS generator from unit-rate jump operators (no thermal provenance)."""
    H = ops.check_hermitian(H)
    terms = tuple(JumpTerm(label, math.nan, np.asarray(A, complex), 1.0, 0.0) for A in jump_ops)
    return ThermalGenerator(H, terms, "lgks")


def apply_schrodinger(gen, rho):
    return gen.apply(rho)


def apply_heisenberg(gen, O):
    return gen.apply_heisenberg(O)


def gibbs_state(H_S, T):
    """exp(-H/T)/Z computed through the spectrum (shifted for stability)."""
    if not T > 0:
        raise DomainError(f"Gibbs state needs T > 0, got {T!r}")
    H_S = ops.check_hermitian(H_S)
    w, V = np.linalg.eigh(ops.hermitize(H_S))
    p = np.exp(-(w - w[0]) / T)
    p /= p.sum()
    return (V * p) @ V.conj().T

"""Thermodynamic bookkeeping: heat currents, power, entropy production and law audits.

Sign convention: every current is energy flowing *into the system*. A bath
therefore receives heat when its current is negative.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import operators as ops
from .davies import THERMAL_PROVENANCE
from .entropy import ZERO_EIG, entropy_energy, entropy_vn, log_density
from .errors import GaugeError, VanishingGap
from .tables import write_table

PASS, FAIL, NOT_APPLICABLE = "PASS", "FAIL", "NOT-APPLICABLE"


def _require_thermal(gen):
    prov = getattr(gen, "provenance", None)
    if prov not in THERMAL_PROVENANCE:
        raise GaugeError(
            f"heat is only defined for generators of thermal origin, got provenance {prov!r}")


def heat_current(gen, rho, bath_id, H=None):
    """``J_j = Tr[(L_j rho) H]`` for the dissipator of bath ``bath_id``."""
    _require_thermal(gen)
    H = gen.hamiltonian if H is None else H
    return ops.expectation(gen.apply_dissipator(rho, bath_id), H)


def heat_currents(gen, rho, H=None):
    return {b: heat_current(gen, rho, b, H) for b in gen.bath_ids}


def external_power(rho, dH_dt):
    """``P = Tr[rho dH/dt]``."""
    return ops.expectation(rho, dH_dt)


def central_difference(H_of_t, t, h=1e-5):
    """dH/dt by a symmetric difference; truncation error O(h^2)."""
    return (H_of_t(t + h) - H_of_t(t - h)) / (2 * h)


def floquet_currents(gen, rho):
    """Per-bath currents as quantum-weighted transition fluxes.

    Each jump term exchanges the quantum ``nu = w + q Omega`` carried in its
    ``omega`` field; the bath current is ``sum nu * (up flux - down flux)``.
    For a static Davies generator this equals :func:`heat_current`.
    """
    _require_thermal(gen)
    out = dict.fromkeys(gen.bath_ids, 0.0)
    for term in gen.terms:
        out[term.bath_id] += term.omega * term.net_flux(rho)
    return out


def local_invariant_state(term, H_eff, T):
    """Gibbs state of ``H_eff`` at the rescaled temperature ``T w / nu``.

    It is annihilated by the single (w, q) term whenever ``w != 0``.
    """
    from .davies import gibbs_state

    w = term.bohr if term.bohr is not None else term.omega
    if w == 0:
        raise VanishingGap("no local invariant state for a zero quasi-Bohr frequency")
    return gibbs_state(H_eff, T * w / term.omega)


def entropy_rate(gen, rho, t=None):
    """``dS_vn/dt = -Tr[(L rho) ln rho]``; the unitary part drops out.

    If ``rho`` is singular and the dynamics feeds population into its kernel,
    the entropy grows like ``-p ln p`` and the rate is ``+inf``.
    """
    drho = gen.apply_dissipator(rho) if t is None else gen.dissipator_at(t, rho)
    w, V = np.linalg.eigh(ops.hermitize(np.asarray(rho, complex)))
    kernel = V[:, w <= ZERO_EIG]
    if kernel.shape[1]:
        inflow = np.trace(kernel.conj().T @ drho @ kernel).real
        if inflow > 1e-12 * max(1.0, float(np.max(np.abs(drho)))):
            return math.inf
    return -ops.expectation(drho, log_density(rho))


def _weighted(currents, temps):
    total = 0.0
    for b, J in currents.items():
        T = temps[b]
        if math.isinf(T):
            continue  # a work reservoir carries no entropy
        total += J / T
    return total


def entropy_production(rho, gen, t=None):
    """``sigma = dS_vn/dt - sum_j J_j / T_j`` (non-negative for thermal generators).

    Currents use the flux form, so for Floquet generators (and the driven
    Schrodinger-picture wrapper, where ``rho`` is first rotated back) the
    quanta ``w + q Omega`` enter.
    """
    if t is not None and hasattr(gen, "basis"):
        U = gen.basis.propagator(t)
        rho = U.conj().T @ rho @ U
        gen = gen.gen
    return entropy_rate(gen, rho) - _weighted(floquet_currents(gen, rho), gen.temperatures)


@dataclass
class Verdict:
    law: str
    status: str
    inequality: str = ""
    measured: float = float("nan")
    tolerance: float = float("nan")
    detail: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.status != FAIL

    def as_dict(self):
        return {"law": self.law, "status": self.status, "inequality": self.inequality,
                "measured": self.measured, "tolerance": self.tolerance, "detail": self.detail}


def second_law_check(currents, temps, tol=1e-9):
    """Steady-state audit of ``sum_j J_j/T_j <= 0`` plus a Carnot audit.

    If the thermal baths deliver net energy (power output ``sum J_thermal > 0``
    with heat drawn from the hottest bath) the efficiency must stay below
    ``1 - T_min/T_max``.
    """
    s = _weighted(currents, temps)
    detail = {"sum_J_over_T": s}
    status = PASS if s <= tol else FAIL
    inequality = "sum_j J_j/T_j <= 0"
    measured = s
    finite = {b: T for b, T in temps.items() if not math.isinf(T)}
    if len(finite) >= 2:
        hot = max(finite, key=finite.get)
        cold = min(finite, key=finite.get)
        P_out = sum(currents[b] for b in finite)
        J_h = currents[hot]
        carnot = 1.0 - finite[cold] / finite[hot]
        detail["carnot"] = carnot
        if P_out > tol and J_h > 0:
            eta = P_out / J_h
            detail["efficiency"] = eta
            if status == PASS and eta > carnot + tol:
                status = FAIL
                inequality = "P/J_h <= 1 - T_c/T_h"
                measured = eta - carnot
    return Verdict("II", status, inequality, measured, tol, detail)


def first_law_residual(E, P, J_total, times):
    """``dE/dt - P - sum J`` with a five-point difference on a uniform grid.

    The two points at each end use one-sided fourth-order stencils.
    """
    t = np.asarray(times, dtype=float)
    h = t[1] - t[0]
    if not np.allclose(np.diff(t), h, rtol=1e-9, atol=0):
        raise ValueError("first_law_residual needs a uniform time grid")
    E = np.asarray(E, dtype=float)
    dE = np.empty_like(E)
    dE[2:-2] = (E[:-4] - 8 * E[1:-3] + 8 * E[3:-1] - E[4:]) / (12 * h)
    a = np.array([[-25, 48, -36, 16, -3], [-3, -10, 18, -6, 1]]) / (12 * h)
    dE[:2] = a @ E[:5]
    dE[-2:] = (-a @ E[::-1][:5])[::-1]
    return dE - np.asarray(P) - np.asarray(J_total)


@dataclass
class FrictionReport:
    times: np.ndarray
    excess_entropy: np.ndarray
    mu: np.ndarray

    @property
    def final_excess(self):
        return float(self.excess_entropy[-1])


def adiabatic_parameter(H, dH):
    """``mu = sum_{i<j} |d w_ij/dt| / w_ij^2`` from Hellmann-Feynman level velocities."""
    e, V = np.linalg.eigh(ops.hermitize(H))
    de = np.real(np.einsum("ij,ik,kj->j", V.conj(), dH, V))
    mu = 0.0
    n = len(e)
    for i in range(n):
        for j in range(i + 1, n):
            w = e[j] - e[i]
            if w < 1e-9:
                raise VanishingGap(f"levels {i} and {j} are closer than 1e-9")
            mu += abs(de[j] - de[i]) / w ** 2
    return mu


def friction_and_adiabaticity(times, states, H_of_t, dH_of_t=None):
    """Energy-entropy excess ``S_E - S_vn`` and adiabatic parameter along a unitary segment."""
    excess, mu = [], []
    for t, rho in zip(times, states):
        H = H_of_t(t)
        dH = dH_of_t(t) if dH_of_t is not None else central_difference(H_of_t, t)
        excess.append(entropy_energy(rho, H) - entropy_vn(rho))
        mu.append(adiabatic_parameter(H, dH))
    return FrictionReport(np.asarray(times, float), np.array(excess), np.array(mu))


@dataclass
class ThermoLedger:
    """Per-time thermodynamic record of one trajectory."""

    times: np.ndarray
    E: np.ndarray
    S_vn: np.ndarray
    S_E: np.ndarray
    J: dict
    P: np.ndarray
    sigma: np.ndarray

    @property
    def Q(self):
        """Cumulative heat from each bath (trapezoid rule)."""
        return {b: cumulative_trapezoid(J, self.times, initial=0.0) for b, J in self.J.items()}

    @property
    def W(self):
        return cumulative_trapezoid(self.P, self.times, initial=0.0)

    @property
    def J_total(self):
        return sum(self.J.values()) if self.J else np.zeros_like(self.times)

    def subsample(self, step):
        """Every ``step``-th row."""
        sl = slice(None, None, step)
        return ThermoLedger(self.times[sl], self.E[sl], self.S_vn[sl], self.S_E[sl],
                            {b: J[sl] for b, J in self.J.items()}, self.P[sl], self.sigma[sl])

    def first_law_residual(self):
        return first_law_residual(self.E, self.P, self.J_total, self.times)

    def columns(self):
        cols = {"t": self.times, "E": self.E, "S_vn": self.S_vn, "S_E": self.S_E}
        cols.update({f"J_{b}": J for b, J in self.J.items()})
        cols.update({"P": self.P, "sigma": self.sigma})
        return cols

    def to_csv(self, path):
        units = {"t": "time", "E": "energy", "S_vn": "k_B", "S_E": "k_B", "P": "energy/time",
                 "sigma": "k_B/time"}
        cols = self.columns()
        header = [f"{k} [{units.get(k, 'energy/time')}]" for k in cols]
        write_table(path, header, np.column_stack(list(cols.values())))


def build_ledger(gen, times, states):
    """Evaluate the ledger along a trajectory of ``gen`` (static or driven).

    Columns ``J_<bath>`` are ``Tr[(L_j(t) rho) H(t)]`` so that
    ``dE/dt = P + sum J`` holds pointwise; ``sigma`` uses the flux currents
    (see :func:`entropy_production`).
    """
    _require_thermal(getattr(gen, "gen", gen))
    driven = hasattr(gen, "basis")
    E, Svn, SE, P, sig = [], [], [], [], []
    J = {b: [] for b in gen.bath_ids}
    for t, rho in zip(times, states):
        H = gen.hamiltonian_at(t)
        E.append(ops.expectation(rho, H))
        Svn.append(entropy_vn(rho))
        SE.append(entropy_energy(rho, H))
        P.append(external_power(rho, gen.dH_dt(t)))
        for b in J:
            J[b].append(ops.expectation(gen.dissipator_at(t, rho, b), H))
        sig.append(entropy_production(rho, gen, t if driven else None))
    arr = np.asarray
    return ThermoLedger(arr(times, float), arr(E), arr(Svn), arr(SE),
                        {b: arr(v) for b, v in J.items()}, arr(P), arr(sig))

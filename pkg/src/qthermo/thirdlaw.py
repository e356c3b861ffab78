"""Cooling toward absolute zero: optimal receiving frequency, cooling exponents, verdicts.

The cold bath at temperature ``T_c`` is drained by a refrigerator that
absorbs quanta ``omega_c`` from it. The single-quantum cooling current is
``J_c(omega_c) = omega_c * gamma(-omega_c)``; the bath heat capacity turns it
into ``dT_c/dt = -J_c / c_V(T_c)``. A power law ``dT/dt ~ -T^zeta`` reaches
zero in finite time iff ``zeta < 1``.
"""
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats
from scipy.integrate import solve_ivp

from .baths import HarmonicField, heat_capacity
from .errors import DomainError, InsufficientSpan, OptimizationFailed, StepSizeUnderflow
from .ledger import FAIL, NOT_APPLICABLE, PASS, Verdict
from .tables import write_table


@dataclass(frozen=True)
class CoolingPoint:
    T_c: float
    omega_opt: float
    J_c: float
    dT_dt: float


def _cooling_current(bath, omega):
    return omega * bath.gamma(-omega)


def optimal_receiving_frequency(bath, T_c, x_bounds=(1e-3, 60.0), grid=241):
    """Receiving frequency that maximizes ``omega * gamma(-omega)`` at ``T_c``.

    The maximum is bracketed on a logarithmic grid in ``x = omega/T_c`` and
    refined by golden-section search.
    """
    if not T_c > 0:
        raise DomainError("T_c must be positive")
    b = bath.with_temperature(T_c)
    lo, hi = x_bounds
    cutoff = getattr(b, "cutoff", math.inf)
    hi = min(hi, cutoff / T_c)
    if not hi > lo:
        raise OptimizationFailed("empty search interval for the receiving frequency")
    xs = np.geomspace(lo, hi, grid)
    vals = np.array([_cooling_current(b, x * T_c) for x in xs])
    k = int(np.argmax(vals))
    if k == 0 or k == grid - 1 or not vals[k] > 0:
        raise OptimizationFailed(f"no interior maximum of the cooling current at T_c = {T_c:g}")
    res = optimize.minimize_scalar(lambda x: -_cooling_current(b, x * T_c),
                                   bracket=(xs[k - 1], xs[k], xs[k + 1]), method="golden",
                                   options={"xtol": 1e-12})
    return float(res.x * T_c)


def cooling_rate(bath, T_c):
    """Optimal cooling current and the resulting ``dT_c/dt``."""
    w = optimal_receiving_frequency(bath, T_c)
    J = _cooling_current(bath.with_temperature(T_c), w)
    return CoolingPoint(T_c, w, J, -J / heat_capacity(bath, T_c))


@dataclass(frozen=True)
class PowerLawCooling:
    """Synthetic cooling law ``dT/dt = -rate * T**zeta`` (unit heat capacity)."""

    zeta: float
    rate: float = 1.0

    def cooling_rate(self, T_c):
        J = self.rate * T_c ** self.zeta
        return CoolingPoint(T_c, float("nan"), J, -J)

    def time_to_zero(self, T0):
        if self.zeta >= 1:
            return math.inf
        return T0 ** (1 - self.zeta) / (self.rate * (1 - self.zeta))


def _rate_fn(model):
    if hasattr(model, "cooling_rate"):
        return model.cooling_rate
    return lambda T: cooling_rate(model, T)


def _workers():
    try:
        return max(1, int(os.environ.get("QTHERMO_THREADS", "1")))
    except ValueError:
        return 1


def cooling_sweep(model, temperatures):
    """Cooling points at each temperature, in input order.

    Points are evaluated on ``QTHERMO_THREADS`` worker threads (default 1).
    """
    f = _rate_fn(model)
    temps = [float(T) for T in temperatures]
    n = _workers()
    if n == 1:
        return [f(T) for T in temps]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(f, temps))


@dataclass
class CoolingTrajectory:
    times: np.ndarray
    T_c: np.ndarray
    omega_opt: np.ndarray
    J_c: np.ndarray
    dT_dt: np.ndarray
    reached_floor: bool
    T_floor: float

    def to_csv(self, path):
        header = ["T_c [energy]", "omega_opt [energy]", "J_c [energy/time]", "dT_dt [energy/time]"]
        rows = np.column_stack([self.T_c, self.omega_opt, self.J_c, self.dT_dt])
        return write_table(path, header, rows)


def integrate_cooling(model, T0, t_end, T_floor=None, samples=200, rtol=1e-10):
    """Cool from ``T0`` until ``T_floor`` (default ``1e-6 T0``) or ``t_end``.

    The elapsed time is integrated as a function of ``u = ln T``
    (``dt/du = T / (dT/dt)``), which gives samples evenly spaced in ``ln T``
    and stays well conditioned both for exponential approach and for
    finite-time collapse.
    """
    T_floor = 1e-6 * T0 if T_floor is None else T_floor
    if not T0 > T_floor > 0:
        raise DomainError("need T0 > T_floor > 0")
    f = _rate_fn(model)

    def dt_du(u, t):
        T = math.exp(u)
        dTdt = f(T).dT_dt
        if not dTdt < 0:
            raise DomainError(f"no cooling at T = {T:g} (dT/dt = {dTdt:g})")
        return [T / dTdt]

    def hit_end(u, t):
        return t[0] - t_end

    hit_end.terminal = True
    u0, u1 = math.log(T0), math.log(T_floor)
    grid = np.linspace(u0, u1, samples)
    sol = solve_ivp(dt_du, (u0, u1), [0.0], t_eval=grid,
                    events=hit_end, rtol=rtol, atol=1e-12 * max(1.0, t_end if math.isfinite(t_end) else 1.0))
    if sol.status == -1:
        raise StepSizeUnderflow(f"cooling integration failed: {sol.message}")
    # u runs downward and dt/du < 0, so t(u) is the elapsed time.
    times = sol.y[0]
    u = sol.t
    reached = sol.status == 0
    if not reached and len(sol.t_events[0]):
        times = np.append(times, sol.y_events[0][0, 0])
        u = np.append(u, sol.t_events[0][0])
    T = np.exp(u)
    points = cooling_sweep(model, T)
    return CoolingTrajectory(times, T, np.array([p.omega_opt for p in points]),
                             np.array([p.J_c for p in points]),
                             np.array([p.dT_dt for p in points]), bool(reached), T_floor)


@dataclass
class ExponentReport:
    zeta: float
    half_width: float
    r_squared: float
    alpha: float
    eta: float
    predicted: float
    n_samples: int
    span_decades: float
    verdict: Verdict

    def as_dict(self):
        d = {k: getattr(self, k) for k in ("zeta", "half_width", "r_squared", "alpha", "eta",
                                            "predicted", "n_samples", "span_decades")}
        d["verdict"] = self.verdict.as_dict()
        return d


def _slope(x, y):
    fit = stats.linregress(x, y)
    return fit.slope, fit.stderr, fit.rvalue ** 2


def fit_zeta(traj, exclude_top_decade=True, min_samples=20, min_span=1.5, level=0.95):
    """Fit ``ln|dT/dt|`` against ``ln T_c`` and compare with ``1 + alpha - eta``.

    ``alpha`` is the fitted current exponent minus one and ``eta`` the heat
    capacity exponent (from ``c_V = J_c / |dT/dt|``). A verdict is issued only
    when the log-log fit has ``R^2 >= 0.999``.
    """
    T = np.asarray(traj.T_c, float)
    dT = np.abs(np.asarray(traj.dT_dt, float))
    J = np.asarray(traj.J_c, float)
    mask = np.isfinite(T) & (T > 0) & (dT > 0)
    if exclude_top_decade:
        mask &= T <= T[mask].max() / 10 * (1 + 1e-12)
    n = int(mask.sum())
    span = float(np.log10(T[mask].max() / T[mask].min())) if n > 1 else 0.0
    if n < min_samples or span < min_span:
        raise InsufficientSpan(f"{n} samples spanning {span:.2f} decades "
                               f"(need {min_samples} and {min_span})")
    x = np.log(T[mask])
    zeta, se, r2 = _slope(x, np.log(dT[mask]))
    half = float(stats.t.ppf(0.5 + level / 2, n - 2) * se)
    if np.all(J[mask] > 0):
        alpha = _slope(x, np.log(J[mask]))[0] - 1
        eta = _slope(x, np.log(J[mask] / dT[mask]))[0]
    else:
        alpha = eta = float("nan")
    predicted = 1 + alpha - eta
    if r2 >= 0.999:
        verdict = unattainability_verdict(zeta, tol=max(half, 1e-6))
    else:
        verdict = Verdict("III", NOT_APPLICABLE, "R^2 >= 0.999", r2, 0.999,
                          {"reason": "log-log fit not a clean power law"})
    return ExponentReport(float(zeta), half, float(r2), float(alpha), float(eta), float(predicted),
                          n, span, verdict)


def unattainability_verdict(zeta, rate=None, T0=None, tol=0.0):
    """``zeta >= 1`` complies; otherwise report the finite time to reach zero."""
    detail = {"zeta": zeta}
    if zeta >= 1 - tol:
        return Verdict("III", PASS, "zeta >= 1", zeta, tol, detail)
    if rate is not None and T0 is not None:
        detail["time_to_zero"] = PowerLawCooling(zeta, rate).time_to_zero(T0)
    return Verdict("III", FAIL, "zeta >= 1", zeta, tol, detail)


def thermoelectric_bound(N_c, T_c):
    """Maximal cooling current of ``N_c`` fermionic channels: ``(pi^2/6) N_c T_c^2``."""
    if int(N_c) != N_c or N_c < 1:
        raise DomainError("N_c must be a positive integer")
    if not T_c > 0:
        raise DomainError("T_c must be positive")
    return math.pi ** 2 / 6 * N_c * T_c ** 2


def implied_zeta(current_exponent, cv_exponent):
    """``zeta`` from ``J ~ T^a`` and ``c_V ~ T^b``: ``zeta = a - b``."""
    return current_exponent - cv_exponent


# Device cross-checks of the single-quantum shortcut.

def tricycle_cooling_current(bath, T_c, omega_w=1.0, T_h=0.1, work_rate=1.0, hot_coupling=1.0):
    """Steady cold current of a tricycle refrigerator tuned to ``omega_c = omega*``."""
    from .baths import WorkBath
    from .davies import build_generator
    from .devices import TricycleSpec, build_tricycle
    from .dynamics import steady_state
    from .ledger import heat_current

    w = optimal_receiving_frequency(bath, T_c)
    hot = HarmonicField(T_h, coupling=hot_coupling, cutoff=max(10.0, 2 * (w + omega_w)))
    spec = TricycleSpec(w + omega_w, w, hot, bath.with_temperature(T_c), WorkBath(rate=work_rate))
    H, channels = build_tricycle(spec)
    gen = build_generator(H, channels)
    return heat_current(gen, steady_state(gen, kernel_tol=1e-13), "cold")


def driven_tls_cooling_current(bath, T_c, Omega=1.0, T_h=0.1, hot_coupling=1.0):
    """Steady cold current of a resonantly driven TLS refrigerator.

    The dressed splitting ``2 g`` is tuned to the optimal receiving frequency.
    The cold bath (coupled through sigma_z) only sees the low-frequency
    dressed transition; the hot bath (through sigma_x) only the upper
    sideband ``Omega + 2 g``, which it receives by emission.
    """
    from dataclasses import replace

    from .davies import CouplingChannel
    from .devices import build_driven_tls
    from .dynamics import steady_state
    from .floquet import build_floquet_generator
    from .ledger import floquet_currents
    from . import operators as ops

    w = optimal_receiving_frequency(bath, T_c)
    sx, _, sz = ops.pauli()
    ph = build_driven_tls(Omega, w / 2, Omega)
    cold = replace(bath.with_temperature(T_c), cutoff=Omega / 2, out_of_band="zero")
    hot = HarmonicField(T_h, coupling=hot_coupling, cutoff=10 * Omega, omega_ir=Omega + w / 2,
                        out_of_band="zero")
    gen = build_floquet_generator(ph, [CouplingChannel(sz, cold, "cold"),
                                       CouplingChannel(sx, hot, "hot")])
    return floquet_currents(gen, steady_state(gen, kernel_tol=1e-13))["cold"]


def device_zeta(bath, temperatures, device="tricycle", **kw):
    """Cooling exponent from device steady states at a handful of temperatures."""
    f = {"tricycle": tricycle_cooling_current, "driven_tls": driven_tls_cooling_current}[device]
    T = np.asarray(temperatures, float)
    J = np.array([f(bath, t, **kw) for t in T])
    if not np.all(J > 0):
        raise OptimizationFailed(f"device {device!r} does not refrigerate at every temperature")
    cv = np.array([heat_capacity(bath, t) for t in T])
    return _slope(np.log(T), np.log(J / cv))[0], J

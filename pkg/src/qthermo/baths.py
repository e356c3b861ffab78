"""Bath spectral functions, heat capacities and low-temperature criteria.

Sign convention: ``gamma(w)`` with ``w > 0`` is the rate at which the system
hands a quantum ``w`` to the bath (emission); ``gamma(-w)`` is the absorption
rate. Thermal baths obey detailed balance ``gamma(-w) = exp(-w/T) gamma(w)``.
"""
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, FrequencyOutOfRange, Unsupported
from .special import bessel_k1e


class ZeroFrequencyWarning(UserWarning):
    """gamma(0) was requested; the convention gamma(0) = 0 was applied."""


def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class Bath:
    temperature: float

    kind = "bath"

    def __post_init__(self):
        if not self.temperature >= 0:
            raise DomainError(f"temperature must be >= 0, got {self.temperature!r}")

    def gamma(self, omega):
        raise NotImplementedError

    def with_temperature(self, T):
        return replace(self, temperature=T)

    @property
    def beta(self):
        return math.inf if self.temperature == 0 else 1.0 / self.temperature


@dataclass(frozen=True)
class HarmonicField(Bath):
    """Bosonic field in ``dim`` dimensions with linear dispersion.

    ``gamma(w) = coupling * w**(kappa + dim - 1) / (1 - exp(-w/T))`` for
    ``w > 0``. ``coupling`` plays the role of lambda^2 and absorbs all
    model-dependent constants. Frequencies outside ``[omega_ir, cutoff]`` are
    an error unless ``out_of_band == "zero"`` (band-filtered bath).
    """

    dim: int = 3
    kappa: float = 1.0
    coupling: float = 1.0
    cutoff: float = 100.0
    heat_capacity_prefactor: float = 1.0
    omega_ir: float = 0.0
    out_of_band: str = "error"
    absorption_scale: float = 1.0

    kind = "harmonic"

    def __post_init__(self):
        super().__post_init__()
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dim must be 1, 2 or 3, got {self.dim!r}")
        if self.kappa + self.dim - 1 < 0:
            raise DomainError("spectral exponent kappa + dim - 1 must be >= 0")
        _positive("coupling", self.coupling)
        _positive("cutoff", self.cutoff)
        _positive("heat_capacity_prefactor", self.heat_capacity_prefactor)
        if not 0 <= self.omega_ir < self.cutoff:
            raise DomainError("omega_ir must lie in [0, cutoff)")
        if self.out_of_band not in ("error", "zero"):
            raise DomainError("out_of_band must be 'error' or 'zero'")
        if not self.absorption_scale >= 0:
            raise DomainError("absorption_scale must be >= 0")

    @property
    def exponent(self):
        return self.kappa + self.dim - 1

    def gamma(self, omega):
        return harmonic_gamma(self, omega)


@dataclass(frozen=True)
class BoseGas(Bath):
    """Dilute ideal Bose gas scattering off a heavy two-level impurity."""

    density: float = 1.0
    scattering_length: float = 1.0
    mass: float = 1.0
    critical_temperature: float = 1.0
    heat_capacity_prefactor: float = 1.0
    absorption_scale: float = 1.0

    kind = "bose_gas"

    def __post_init__(self):
        super().__post_init__()
        for name in ("density", "scattering_length", "mass", "critical_temperature",
                     "heat_capacity_prefactor"):
            _positive(name, getattr(self, name))

    def effective_density(self, T=None):
        """Density of scatterers; below condensation only the excited fraction."""
        T = self.temperature if T is None else T
        if T >= self.critical_temperature:
            return self.density
        return self.density * (T / self.critical_temperature) ** 1.5

    def gamma(self, omega):
        return bose_gas_gamma(self, omega)


@dataclass(frozen=True)
class FermiGasScaling(Bath):
    """Degenerate Fermi gas: only a fraction ~T/T_F near the Fermi surface scatters.

    Uses the same low-density scattering kernel as :class:`BoseGas` with the
    participating density ``density * min(1, T / fermi_temperature)``.
    """

    density: float = 1.0
    scattering_length: float = 1.0
    mass: float = 1.0
    fermi_temperature: float = 1.0
    heat_capacity_prefactor: float = 1.0
    absorption_scale: float = 1.0

    kind = "fermi_gas"

    def __post_init__(self):
        super().__post_init__()
        for name in ("density", "scattering_length", "mass", "fermi_temperature",
                     "heat_capacity_prefactor"):
            _positive(name, getattr(self, name))

    def effective_density(self, T=None):
        T = self.temperature if T is None else T
        return self.density * min(1.0, T / self.fermi_temperature)

    def gamma(self, omega):
        return _gas_gamma(self, omega)


@dataclass(frozen=True)
class WorkBath(Bath):
    """Flat-spectrum reservoir at infinite temperature (a pure work source)."""

    temperature: float = math.inf
    rate: float = 1.0

    kind = "work"

    def __post_init__(self):
        if self.temperature != math.inf:
            raise DomainError("a work bath always has infinite temperature")
        _positive("rate", self.rate)

    def gamma(self, omega):
        if omega == 0:
            warnings.warn("gamma(0) requested; returning 0", ZeroFrequencyWarning, stacklevel=2)
            return 0.0
        return self.rate

    def with_temperature(self, T):
        raise Unsupported("the work bath temperature is fixed at +inf")

    @property
    def beta(self):
        return 0.0


def harmonic_gamma(spec, omega):
    """Rate for a harmonic bath; negative frequencies via the KMS completion."""
    if omega == 0:
        warnings.warn("gamma(0) requested; returning 0", ZeroFrequencyWarning, stacklevel=2)
        return 0.0
    w = abs(omega)
    if w > spec.cutoff * (1 + 1e-12) or w < spec.omega_ir * (1 - 1e-12):
        if spec.out_of_band == "zero":
            return 0.0
        raise FrequencyOutOfRange(
            f"|omega| = {w!r} outside the bath band [{spec.omega_ir!r}, {spec.cutoff!r}]")
    T = spec.temperature
    emission = spec.coupling * w ** spec.exponent
    if T > 0:
        emission /= -math.expm1(-w / T)
    if omega > 0:
        return emission
    if T == 0:
        return 0.0
    return spec.absorption_scale * math.exp(-w / T) * emission


def _gas_gamma(spec, omega):
    if omega == 0:
        warnings.warn("gamma(0) requested; returning 0", ZeroFrequencyWarning, stacklevel=2)
        return 0.0
    T = spec.temperature
    if not T > 0:
        raise DomainError("gas baths need T > 0")
    w = abs(omega)
    x = w / (2.0 * T)
    prefactor = (4 * math.pi) ** 4 / math.sqrt(2 * math.pi * spec.mass * T)
    emission = prefactor * spec.scattering_length ** 2 * spec.effective_density(T) * w * bessel_k1e(x)
    if omega > 0:
        return emission
    return spec.absorption_scale * math.exp(-w / T) * emission


def bose_gas_gamma(spec, omega_c):
    """Low-density-limit scattering rate of a Bose gas.

    For ``omega_c > 0`` this is
    ``(4 pi)^4 (2 pi m T)^(-1/2) a_s^2 n_eff omega_c K1(omega_c/2T) exp(omega_c/2T)``
    with ``n_eff`` the (excited-state) density; ``omega_c < 0`` follows from
    detailed balance. ``K1 * exp`` is evaluated in scaled form to avoid
    overflow at low temperature.
    """
    for name in ("density", "scattering_length", "mass"):
        _positive(name, getattr(spec, name))
    return _gas_gamma(spec, omega_c)


def bath_gamma(bath, omega):
    return bath.gamma(omega)


def kms_ratio_check(bath, omega):
    """gamma(-w)/gamma(w); equals exp(-w/T) for a detailed-balanced bath."""
    if not omega > 0:
        raise DomainError("kms_ratio_check needs omega > 0")
    return bath.gamma(-omega) / bath.gamma(omega)


def heat_capacity(bath, T=None):
    """Low-temperature heat capacity of the bath (prefactor from the spec)."""
    T = bath.temperature if T is None else T
    if isinstance(bath, WorkBath):
        raise Unsupported("a work bath has no heat capacity")
    if not T > 0:
        raise DomainError("heat capacity needs T > 0")
    c0 = bath.heat_capacity_prefactor
    if isinstance(bath, HarmonicField):
        return c0 * T ** bath.dim
    if isinstance(bath, BoseGas):
        return c0 * min(T, bath.critical_temperature) ** 1.5
    if isinstance(bath, FermiGasScaling):
        return c0 * T
    raise Unsupported(f"no heat capacity model for {type(bath).__name__}")


def ground_state_criterion(kappa, d):
    """Bosonic field with |g(w)|^2 ~ w^kappa in d dimensions has a ground state iff kappa > 2 - d."""
    if d < 1:
        raise DomainError("d must be >= 1")
    return bool(kappa > 2 - d)


def third_law_coupling_criterion(kappa):
    """Unattainability with a bosonic cold bath requires kappa >= 1."""
    return bool(kappa >= 1)


def log_slope(f, x, rel_step=1e-4):
    """Central finite-difference d ln f / d ln x."""
    h = rel_step
    return (np.log(f(x * math.exp(h))) - np.log(f(x * math.exp(-h)))) / (2 * h)

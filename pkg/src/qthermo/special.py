r"""Modified Bessel function of the second kind, order one.

Two regimes meet at ``x = 2``:

* ``x < 2``: the ascending series

  .. math::
      K_1(x) = \frac{1}{x} + \ln\frac{x}{2} I_1(x)
               - \frac{x}{4}\sum_{k\ge 0}\frac{\psi(k+1)+\psi(k+2)}{k!\,(k+1)!}
                 \left(\frac{x^2}{4}\right)^k

* ``x >= 2``: Steed's continued fraction (Temme's CF2), which returns the
  exponentially scaled pair ``K_0(x) e^x, K_1(x) e^x`` without overflow.

The plain asymptotic series is not used at the seam: its smallest term at
``x = 2`` is of order ``1e-2``, far from double precision.
"""
import math

import numpy as np

from .errors import DomainError

_EULER_GAMMA = 0.57721566490153286061
_EPS = 1e-17
_MAXIT = 10000


def _k1_series(x):
    y = 0.25 * x * x
    term = 1.0  # (x^2/4)^k / (k! (k+1)!)
    psi_k1 = -_EULER_GAMMA  # psi(k+1)
    psi_k2 = 1.0 - _EULER_GAMMA  # psi(k+2)
    i1_sum = 0.0
    psi_sum = 0.0
    k = 0
    while True:
        i1_sum += term
        psi_sum += (psi_k1 + psi_k2) * term
        k += 1
        term *= y / (k * (k + 1))
        psi_k1 += 1.0 / k
        psi_k2 += 1.0 / (k + 1)
        if term < _EPS * i1_sum:
            break
    i1 = 0.5 * x * i1_sum
    return 1.0 / x + math.log(0.5 * x) * i1 - 0.25 * x * psi_sum


def _k1e_cf2(x):
    # Temme's method with nu = 0: yields K_0 e^x and K_1 e^x.
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    h = a1 * h
    k0e = math.sqrt(math.pi / (2.0 * x)) / s
    return k0e * (x + 0.5 - h) / x


def _scalar_k1e(x):
    if not x > 0:
        raise DomainError(f"K1 requires x > 0, got {x!r}")
    if x < 2.0:
        return _k1_series(x) * math.exp(x)
    return _k1e_cf2(x)


def _scalar_k1(x):
    if not x > 0:
        raise DomainError(f"K1 requires x > 0, got {x!r}")
    if x < 2.0:
        return _k1_series(x)
    return _k1e_cf2(x) * math.exp(-x)


def bessel_k1(x):
    """Modified Bessel function of the second kind, order 1, for ``x > 0``."""
    if np.ndim(x) == 0:
        return _scalar_k1(float(x))
    return np.array([_scalar_k1(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))


def bessel_k1e(x):
    """Exponentially scaled ``K_1(x) * exp(x)``."""
    if np.ndim(x) == 0:
        return _scalar_k1e(float(x))
    return np.array([_scalar_k1e(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))

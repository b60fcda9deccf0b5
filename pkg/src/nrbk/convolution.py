"""Recursive convolution with exponential-sum kernels.

Each kernel term satisfies f'(t) = lambda f(t) + g(t) with f(0) = 0, so

    f(t + dt) = e^(lambda dt) f(t) + int_t^(t+dt) e^(lambda (t+dt-tau)) g(tau) dtau.

With g taken linear on the panel the integral has exact weights, and the
whole convolution marches with O(1) work and memory per step, however
many steps have elapsed.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

# factorial-based series coefficients for the panel weights
_SERIES_K = 7
_INV_FACT = [1.0 / math.factorial(k + 2) for k in range(_SERIES_K)]

PANEL_RULES = ("exponential", "trapezoidal")


def _phi_weights(x):
    """Exact linear-interpolant panel weights (wL, wR) for rate*dt = x.

    wL = ((x-1)e^x + 1)/x^2 and wR = (e^x - 1 - x)/x^2, evaluated by
    their power series below |x| = 1e-2 to dodge the cancellation.
    Both tend to 1/2 (the trapezoid) as x -> 0.
    """
    x = np.asarray(x, dtype=complex)
    wL = np.empty_like(x)
    wR = np.empty_like(x)
    small = np.abs(x) < 1e-2
    xs = x[small]
    acc_l = np.zeros_like(xs)
    acc_r = np.zeros_like(xs)
    for k in range(_SERIES_K - 1, -1, -1):
        acc_r = acc_r * xs + _INV_FACT[k]
        acc_l = acc_l * xs + (k + 1) * _INV_FACT[k]
    wR[small] = acc_r
    wL[small] = acc_l
    xl = x[~small]
    ex = np.exp(xl)
    wR[~small] = (ex - 1.0 - xl) / (xl * xl)
    wL[~small] = ((xl - 1.0) * ex + 1.0) / (xl * xl)
    return wL, wR


@dataclass(frozen=True)
class ExpState:
    """One scalar convolution state f(t) = int_0^t e^(rate (t-tau)) g(tau) dtau."""

    rate: complex
    value: complex = 0.0 + 0.0j
    time: float = 0.0

    def __post_init__(self):
        if complex(self.rate).real > 0.0:
            raise ValueError("state rate must not grow")
        if self.time < 0.0:
            raise ValueError("state time must be nonnegative")


def advance(state, g_left, g_right, dt):
    """March one state across a panel where g is linear between the ends."""
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    x = complex(state.rate) * dt
    wL, wR = _phi_weights(np.array([x]))
    value = cmath.exp(x) * state.value + dt * (wL[0] * g_left + wR[0] * g_right)
    return ExpState(rate=state.rate, value=value, time=state.time + dt)


class KernelConvolver:
    """Marches [sigma * g](t) for one kernel with O(1) work per step.

    All exponential terms (poles and branch-cut nodes alike) advance as a
    single vector; the per-dt decay and panel weights are cached so a
    fixed-step march does no recomputation.  The signal may be complex,
    in which case outputs stay complex.
    """

    def __init__(self, kernel, panel_rule="exponential"):
        if panel_rule not in PANEL_RULES:
            raise ConfigurationError(
                "panel_rule must be one of %r" % (PANEL_RULES,))
        self.kernel = kernel
        self.panel_rule = panel_rule
        self._rates = kernel.rates
        self._weights = kernel.sigma_weights
        self._values = np.zeros(self._rates.size, dtype=complex)
        self._time = 0.0
        self._complex_signal = False
        self._cached_dt = None
        self._cached = None

    @property
    def time(self):
        return self._time

    @property
    def pole_states(self):
        m = self.kernel.pole_rates.size
        return [ExpState(rate=r, value=v, time=self._time)
                for r, v in zip(self._rates[:m], self._values[:m])]

    @property
    def node_states(self):
        m = self.kernel.pole_rates.size
        return [ExpState(rate=r, value=v, time=self._time)
                for r, v in zip(self._rates[m:], self._values[m:])]

    def _coeffs(self, dt):
        # single-slot cache: memory must not grow with varying step counts
        if dt != self._cached_dt:
            x = self._rates * dt
            decay = np.exp(x)
            if self.panel_rule == "exponential":
                wL, wR = _phi_weights(x)
                aL, aR = dt * wL, dt * wR
            else:
                aL = 0.5 * dt * decay
                aR = np.full(self._rates.size, 0.5 * dt, dtype=complex)
            self._cached_dt = dt
            self._cached = (decay, aL, aR)
        return self._cached

    def _out(self, total):
        return total if self._complex_signal else float(total.real)

    def convolve_step(self, g_left, g_right, dt):
        """Advance every state by dt and return [sigma * g] at the new time."""
        if not dt > 0.0:
            raise ValueError("dt must be positive")
        if isinstance(g_left, complex) or isinstance(g_right, complex):
            self._complex_signal = True
        decay, aL, aR = self._coeffs(dt)
        self._values *= decay
        self._values += aL * g_left
        self._values += aR * g_right
        self._time += dt
        return self._out(self._weights @ self._values)

    def deferred_history(self, dt):
        """The history part of the next step's convolution, states untouched.

        Equals int_0^t sigma(t + dt - tau) g(tau) dtau, i.e. each stored
        state decayed across the coming panel; the caller adds its own
        current-panel term.
        """
        decay = self._coeffs(dt)[0]
        return self._out(self._weights @ (decay * self._values))

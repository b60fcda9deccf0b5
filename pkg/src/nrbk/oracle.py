"""Exact outgoing solutions driven by circle data, plus boundary residuals.

A Gaussian spot on the circle r = radius, pulsed in time, drives an
outgoing field.  Each angular mode of that field is a sharp front
carrying the data outward plus a tail written as a convolution of the
data with a kernel built from the same K zeros and branch-cut integral
as the boundary kernels.  Both the data pulse and the tail kernel are
finite exponential sums, so values, derivatives, and the convolution
against the boundary kernel all come out in closed form.  That makes
this module an independent yardstick for the time-stepping solver.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, ResolutionError
from .kernel import BranchCutRule, KernelParams, build_kernel
from .specfun import (
    BesselOrder,
    bessel_k_complex,
    find_zeros,
    log_bessel_i,
    log_bessel_k,
)

_LOG_PI = math.log(math.pi)
_LOG_2 = math.log(2.0)
# below this |gap|*t the divided differences of e^{xt} switch to series
_DD_SWITCH = 0.05
_DD_TERMS = 12


@dataclass(frozen=True)
class DirichletData:
    """Gaussian spot on the circle r = radius, pulsed as sin^power(frequency t)."""

    amplitude: float
    decay: float
    source_x: float
    source_y: float
    radius: float
    frequency: float
    power: int

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ConfigurationError("data circle radius must be positive")
        if self.power < 1 or self.power != int(self.power):
            raise ConfigurationError("pulse power must be an integer >= 1")

    def trace(self, phi):
        """Spatial data values at angles phi on the circle."""
        phi = np.asarray(phi, dtype=float)
        dx = self.radius * np.cos(phi) - self.source_x
        dy = self.radius * np.sin(phi) - self.source_y
        return self.amplitude * np.exp(-self.decay * (dx * dx + dy * dy))


def _pulse_expansion(power, frequency):
    # sin^p(w t) = (2i)^(-p) sum_k C(p,k) (-1)^k e^{i(p-2k)w t}
    scale = (2.0j) ** (-power)
    return tuple(
        (scale * math.comb(power, k) * (-1.0) ** k,
         complex((power - 2 * k) * frequency))
        for k in range(power + 1))


@dataclass(frozen=True)
class ModalBoundaryCoefficient:
    """One mode of the boundary data: spatial coefficient times the pulse.

    temporal holds (amplitude, frequency) pairs whose exponential sum
    reproduces the sin-power pulse exactly, which is what lets every
    convolution downstream close in exponentials.
    """

    mode: int
    spatial: complex
    temporal: tuple

    def pulse(self, t):
        return sum(a * np.exp(1j * f * t) for a, f in self.temporal)

    def value(self, t):
        return self.spatial * self.pulse(t)

    def slope(self, t):
        return self.spatial * sum(
            a * 1j * f * np.exp(1j * f * t) for a, f in self.temporal)

    def accel(self, t):
        return self.spatial * sum(
            -a * f * f * np.exp(1j * f * t) for a, f in self.temporal)


def modal_coefficients(data, count, grid_size):
    """Fourier coefficients of the data trace for modes |n| <= count.

    The transform is taken on grid_size equispaced angles and repeated on
    the doubled grid; if any kept coefficient moves by 1e-14 or more the
    grid was too coarse for the data.
    """
    count = int(count)
    grid_size = int(grid_size)
    if count < 0:
        raise ConfigurationError("mode count must be nonnegative")
    if grid_size < 4 * count or grid_size & (grid_size - 1):
        raise ResolutionError(
            "transform grid must be a power of two with at least 4x the modes")

    def transform(size):
        phi = 2.0 * math.pi * np.arange(size) / size
        return np.fft.fft(data.trace(phi)) / size

    coarse = transform(grid_size)
    fine = transform(2 * grid_size)
    modes = np.arange(-count, count + 1)
    kept = coarse[modes % grid_size]
    drift = np.abs(kept - fine[modes % (2 * grid_size)]).max()
    if drift >= 1e-14:
        raise ResolutionError(
            "modal coefficients drift %.3e under grid doubling" % drift)
    temporal = _pulse_expansion(data.power, data.frequency)
    return [ModalBoundaryCoefficient(int(n), complex(g), temporal)
            for n, g in zip(modes, kept)]


class ExactModalSolution:
    """Exterior solution machinery for one angular mode of circle data.

    The tail kernel H(r, u) = sum_m coeff_m(r) e^{rate_m u} shares its
    pole rates (K zeros scaled by speed/radius) and its branch-cut rule
    with the boundary kernels.  Radial coefficients are evaluated on
    demand and cached per radius: pole terms as ratios of scaled K
    values (the radial scale factors cancel against the front delay
    exactly), branch terms in log space with the front delay folded in
    so every coefficient stays bounded and the tail decays like e^{-2
    rho} regardless of the evaluation radius.
    """

    def __init__(self, mode, radius, speed, panels_per_section=4,
                 nodes_per_panel=24, extent=25.0):
        if not (radius > 0.0 and speed > 0.0):
            raise ConfigurationError("radius and speed must be positive")
        self.mode = int(mode)
        self.radius = float(radius)
        self.speed = float(speed)
        n = abs(self.mode)
        self._zeros = find_zeros(BesselOrder.integer(n)).zeros
        rule = BranchCutRule.for_mode(
            n, panels_per_section=panels_per_section,
            nodes_per_panel=nodes_per_panel, extent=extent)
        self._rho = rule.nodes
        self._rho_weights = rule.weights
        self._sign = -1.0 if n % 2 else 1.0
        self.rates = np.concatenate([
            speed * self._zeros / radius,
            -speed * self._rho / radius]).astype(complex)
        self._coef_cache = {}

    def beta0(self, r):
        """Front arrival time at radius r."""
        return (r - self.radius) / self.speed

    def _radial(self, r):
        """(tail coefficients, their d/dr) at radius r, cached."""
        r = float(r)
        got = self._coef_cache.get(r)
        if got is not None:
            return got
        n = abs(self.mode)
        b0 = self.radius
        c = self.speed
        vals_p = np.empty(self._zeros.size, dtype=complex)
        slopes_p = np.empty(self._zeros.size, dtype=complex)
        for j, z in enumerate(self._zeros):
            kh, kh_d = bessel_k_complex(n, r * z / b0)
            _, k0_d = bessel_k_complex(n, z)
            vals_p[j] = (c / b0) * kh / k0_d
            slopes_p[j] = (c * z / (b0 * b0)) * (kh + kh_d) / k0_d
        rho = self._rho
        x = r * rho / b0
        li_r, lk_r = log_bessel_i(n, x), log_bessel_k(n, x)
        li_1, lk_1 = log_bessel_i(n, rho), log_bessel_k(n, rho)
        big = np.maximum(2.0 * lk_1, 2.0 * li_1 + 2.0 * _LOG_PI)
        log_den = big + np.log(np.exp(2.0 * lk_1 - big)
                               + np.exp(2.0 * li_1 + 2.0 * _LOG_PI - big))
        fold = (r / b0 - 1.0) * rho
        grow = np.exp(li_r + lk_1 - fold - log_den)
        shrink = np.exp(lk_r + li_1 - fold - log_den)
        base = self._sign * (c / b0) * self._rho_weights
        vals_b = base * (grow - shrink)
        # radial slope of the bracket: I'K and (-K')I are both positive
        # sums of neighbor orders, so no cancellation enters in log space
        li_rd = np.logaddexp(log_bessel_i(abs(n - 1), x),
                             log_bessel_i(n + 1, x)) - _LOG_2
        lk_rd = np.logaddexp(log_bessel_k(abs(n - 1), x),
                             log_bessel_k(n + 1, x)) - _LOG_2
        slopes_b = base * (rho / b0) * (
            np.exp(li_rd + lk_1 - fold - log_den)
            + np.exp(lk_rd + li_1 - fold - log_den)
            - (grow - shrink))
        out = (np.concatenate([vals_p, vals_b]),
               np.concatenate([slopes_p, slopes_b]))
        self._coef_cache[r] = out
        return out


def _exp_dd(x, y, ex, ey, t):
    """First divided difference of e^{s t} between node arrays x and y.

    ex, ey are the precomputed exponentials e^{xt}, e^{yt}.  Where the
    gap is small the quotient goes over to a short series, which is also
    where the quotient would cancel.
    """
    x, y, ex, ey = np.broadcast_arrays(x, y, ex, ey)
    gap = x - y
    small = np.abs(gap) * t < _DD_SWITCH
    out = np.empty(gap.shape, dtype=complex)
    np.divide(ex - ey, gap, out=out, where=~small)
    if small.any():
        z = gap[small] * t
        acc = np.ones_like(z)
        for j in range(_DD_TERMS, 0, -1):
            acc = 1.0 + acc * z / (j + 1.0)
        out[small] = t * ey[small] * acc
    return out


def _cluster_series(u, v, w, t):
    # all three nodes close: second divided difference via the complete
    # homogeneous symmetric sums around the centroid
    center = (u + v + w) / 3.0
    du = (u - center) * t
    dv = (v - center) * t
    dw = (w - center) * t
    fact = 2.0
    total = np.full(du.shape, 1.0 / fact, dtype=complex)
    pair = np.ones_like(du)
    full = np.ones_like(du)
    dw_pow = np.ones_like(du)
    for d in range(1, _DD_TERMS):
        dw_pow = dw_pow * dw
        pair = dv * pair + dw_pow
        full = du * full + pair
        fact *= d + 2.0
        total += full / fact
    return t * t * np.exp(center * t) * total


def _exp_dd2(u, v, w, eu, ev, ew, t):
    """Symmetric second divided difference of e^{s t} over three node arrays.

    The quotient is taken across the widest of the three gaps so the
    division never amplifies; if all gaps are small the whole thing goes
    over to a centroid series.  All nodes must satisfy Re <= 0, which
    keeps every exponential bounded.
    """
    u, v, w, eu, ev, ew = np.broadcast_arrays(u, v, w, eu, ev, ew)
    g_uv = np.abs(u - v)
    g_uw = np.abs(u - w)
    g_vw = np.abs(v - w)
    widest = np.maximum(np.maximum(g_uv, g_uw), g_vw)
    out = np.empty(u.shape, dtype=complex)
    tight = widest * t < _DD_SWITCH
    m1 = ~tight & (g_uv == widest)
    m2 = ~tight & ~m1 & (g_uw == widest)
    m3 = ~(tight | m1 | m2)
    for mask, a, b, cc, ea, eb, ec in (
            (m1, u, v, w, eu, ev, ew),
            (m2, u, w, v, eu, ew, ev),
            (m3, v, w, u, ev, ew, eu)):
        if mask.any():
            num = (_exp_dd(a[mask], cc[mask], ea[mask], ec[mask], t)
                   - _exp_dd(b[mask], cc[mask], eb[mask], ec[mask], t))
            out[mask] = num / (a[mask] - b[mask])
    if tight.any():
        out[tight] = _cluster_series(u[tight], v[tight], w[tight], t)
    return out


@lru_cache(maxsize=64)
def _boundary_kernel(n, radius, speed):
    return build_kernel(KernelParams(dim=2, n=n, radius=radius, speed=speed))


def _mode_state(sol, temporal, r, t):
    """Shared evaluation pieces for one mode at (r, t), unit spatial data."""
    lag = t - sol.beta0(r)
    vals, slopes = sol._radial(r)
    amps = np.array([a for a, _ in temporal], dtype=complex)
    mus = np.array([1j * f for _, f in temporal], dtype=complex)
    e_mu = np.exp(mus * lag)
    e_kr = np.exp(sol.rates * lag)
    conv = _exp_dd(sol.rates[:, None], mus[None, :],
                   e_kr[:, None], e_mu[None, :], lag)
    return lag, vals, slopes, amps, mus, e_mu, e_kr, conv


def _unit_mode(sol, temporal, r, t):
    """(value, d/dr, d/dt) of the mode with unit spatial coefficient."""
    lag, vals, slopes, amps, mus, e_mu, e_kr, conv = _mode_state(
        sol, temporal, r, t)
    root = math.sqrt(sol.radius / r)
    tail = vals @ conv
    front = (vals * e_kr).sum()
    value = (amps * (tail + root * e_mu)).sum()
    d_time = (amps * (front + mus * tail + root * mus * e_mu)).sum()
    d_radius = ((amps * (slopes @ conv)).sum()
                - d_time / sol.speed
                - root / (2.0 * r) * (amps * e_mu).sum())
    return value, d_radius, d_time


def eval_Hn(sol, r, t):
    """Tail kernel of the mode at radius r and time t.

    Defined so the mode value is the kernel convolved with the delayed
    data plus the scaled direct front; meaningful from the front arrival
    time onward (earlier arguments amplify the truncated branch tail).
    """
    if r < sol.radius:
        raise ValueError("evaluation radius is inside the data circle")
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    vals, _ = sol._radial(r)
    return float((vals * np.exp(sol.rates * (t - sol.beta0(r)))).sum().real)


def eval_exact_mode(sol, coeff, r, t):
    """(value, d/dr, d/dt) of the mode driven by coeff, zero before the front."""
    if r < sol.radius:
        raise ValueError("evaluation radius is inside the data circle")
    if t - sol.beta0(r) <= 0.0:
        return 0.0 + 0.0j, 0.0 + 0.0j, 0.0 + 0.0j
    value, d_radius, d_time = _unit_mode(sol, coeff.temporal, float(r), float(t))
    g = complex(coeff.spatial)
    return g * value, g * d_radius, g * d_time


@lru_cache(maxsize=1024)
def _unit_residual(sol, temporal, b, t):
    """Boundary-rule defect of the unit-data mode at radius b, time t."""
    lag = t - sol.beta0(b)
    if lag <= 0.0:
        return 0.0
    _, vals, slopes, amps, mus, e_mu, e_kr, conv = _mode_state(
        sol, temporal, b, t)
    root = math.sqrt(sol.radius / b)
    tail = vals @ conv
    front = (vals * e_kr).sum()
    value = (amps * (tail + root * e_mu)).sum()
    d_time = (amps * (front + mus * tail + root * mus * e_mu)).sum()
    d_radius = ((amps * (slopes @ conv)).sum()
                - d_time / sol.speed
                - root / (2.0 * b) * (amps * e_mu).sum())
    kernel = _boundary_kernel(abs(sol.mode), b, sol.speed)
    lam = kernel.rates
    e_lam = np.exp(lam * lag)
    hist = 0.0 + 0.0j
    for k in range(amps.size):
        dd2 = _exp_dd2(sol.rates[:, None], lam[None, :], mus[k],
                       e_kr[:, None], e_lam[None, :], e_mu[k], lag)
        hist += amps[k] * (vals @ dd2 @ kernel.sigma_weights)
        hist += amps[k] * root * (kernel.sigma_weights @ _exp_dd(
            mus[k], lam, e_mu[k], e_lam, lag))
    operator = d_time / sol.speed + d_radius + value / (2.0 * b)
    return float(abs(operator - hist))


def boundary_residual(sol, coeff, b, t):
    """|boundary operator minus kernel convolution| for one mode at r = b.

    The exact mode satisfies the absorbing rule identically, so this
    measures only evaluation error.  Scales linearly in the spatial
    coefficient, which the unit-mode cache exploits.
    """
    if not b > sol.radius:
        raise ValueError("boundary radius must sit outside the data circle")
    if t < 0.0:
        raise ValueError("time must be nonnegative")
    return abs(coeff.spatial) * _unit_residual(sol, coeff.temporal,
                                               float(b), float(t))


def residual_metrics(sols, coeffs, b, t):
    """(max, sum) of the per-mode boundary residuals."""
    values = [boundary_residual(sol, coeff, b, t)
              for sol, coeff in zip(sols, coeffs)]
    return max(values), sum(values)


def exact_field(sols, coeffs, r, phi, t):
    """Physical field at (r, phi, t): modal values summed against e^{i n phi}."""
    phi = np.asarray(phi, dtype=float)
    total = np.zeros(phi.shape, dtype=complex)
    for sol, coeff in zip(sols, coeffs):
        value = eval_exact_mode(sol, coeff, r, t)[0]
        if value != 0.0:
            total += value * np.exp(1j * coeff.mode * phi)
    return total.real if total.ndim else float(total.real)


def dump_residual_csv(stream, rows):
    """Rows of (t, b, omega, E1, E2) at full precision."""
    stream.write("t,b,omega,E1,E2\n")
    for row in rows:
        stream.write(",".join("%.17g" % float(v) for v in row) + "\n")


def dump_field_csv(stream, rows):
    """Rows of (r, phi, t, U) at full precision."""
    stream.write("r,phi,t,U\n")
    for row in rows:
        stream.write(",".join("%.17g" % float(v) for v in row) + "\n")

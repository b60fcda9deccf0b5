"""Time-domain kernels for nonreflecting boundaries on circles and spheres.

Both kernels reduce to finite sums of decaying exponentials:

    sigma(t) = sum_k s_k exp(lambda_k t)
    omega(t) = omega(0) + sum_k o_k (exp(lambda_k t) - 1)

The rates lambda_k = c z_k / b come from the zeros of the modified Bessel
function of the second kind of matching order.  On a circle the kernel
additionally carries a branch-cut integral along the negative real axis;
a fixed Gauss-Legendre rule turns it into more exponentials with rates
-c r_i / b, so the downstream convolution code never distinguishes the
two contributions.
"""

import csv
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError
from .specfun import BesselOrder, decay_exponent, find_zeros, log_bessel_i, log_bessel_k

# where the zero-carrying curve meets the real axis: the root of theta
CURVE_AXIS_ROOT = 0.66274341934918158

_LOG_PI = math.log(math.pi)


def theta(kappa):
    """Decay exponent sqrt(1+k^2) + log(k/(1+sqrt(1+k^2))) for real k > 0."""
    k = float(kappa)
    if not k > 0.0:
        raise ValueError("kappa must be positive")
    return decay_exponent(k)


def eval_W(n, r):
    """Branch-cut density 1/(K_n(r)^2 + pi^2 I_n(r)^2), safe for large n.

    Computed from the log-scale Bessel routines so that neither the growth
    of K_n at small r nor the growth of I_n at large r overflows.  Scalar
    in, scalar out; arrays are mapped elementwise.
    """
    if n != int(n) or n < 0:
        raise ValueError("n must be a nonnegative integer")
    rr = np.asarray(r, dtype=float)
    if rr.size and not np.all(rr > 0.0):
        raise ValueError("r must be positive")
    two_log_k = 2.0 * log_bessel_k(int(n), rr)
    two_log_i = 2.0 * log_bessel_i(int(n), rr) + 2.0 * _LOG_PI
    m = np.maximum(two_log_k, two_log_i)
    out = np.exp(-m) / (np.exp(two_log_k - m) + np.exp(two_log_i - m))
    if np.isscalar(r) or getattr(r, "ndim", 1) == 0:
        return float(out)
    return out


def eval_W_asymptotic(n, kappa):
    """Large-order estimate of eval_W at r = n*kappa.

    W_n(n k) ~ (n sqrt(1+k^2) / pi) * sech(2 n theta(k)); useful as an
    independent check and for locating the peak near k = 0.66274.
    """
    if n != int(n) or n < 1:
        raise ValueError("n must be a positive integer")
    k = float(kappa)
    if not k > 0.0:
        raise ValueError("kappa must be positive")
    x = abs(2.0 * n * theta(k))
    sech = 2.0 * math.exp(-x) / (1.0 + math.exp(-2.0 * x))
    return n * math.sqrt(1.0 + k * k) / math.pi * sech


def _graded_edges(lo, hi, count, ratio, fine_end):
    # panel widths in geometric progression, smallest at the chosen end
    widths = ratio ** np.arange(count)
    if fine_end == "hi":
        widths = widths[::-1]
    widths *= (hi - lo) / widths.sum()
    return lo + np.concatenate([[0.0], np.cumsum(widths)])


@dataclass(frozen=True)
class BranchCutRule:
    """Fixed quadrature for integrals of smooth densities against eval_W.

    nodes/weights discretize the half line truncated to `truncation`;
    kernel_values holds eval_W at the nodes so builders do not recompute it.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kernel_values: np.ndarray
    truncation: tuple

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.size == 0:
            raise ConfigurationError("branch-cut rule needs at least one node")
        if not np.all(np.diff(nodes) > 0.0):
            raise ConfigurationError("branch-cut nodes must be strictly increasing")
        lo, hi = self.truncation
        if not (nodes[0] > lo >= 0.0 and nodes[-1] <= hi):
            raise ConfigurationError("branch-cut nodes outside the truncation interval")
        kv = np.asarray(self.kernel_values, dtype=float)
        # underflow to exact zero is fine far from the peak, negatives are not
        if np.any(kv < 0.0) or not kv.max() > 0.0:
            raise ConfigurationError("branch-cut density values must be nonnegative with a positive peak")

    def __len__(self):
        return self.nodes.size

    @classmethod
    def for_mode(cls, n, panels_per_section=4, nodes_per_panel=24, extent=25.0):
        """Composite Gauss-Legendre rule adapted to the density of mode n.

        The density peaks near r = 0.66274 n and decays like exp(-2r)
        beyond.  Below half the peak the panels live on a logarithmic
        radial grid, which resolves both the r^(2n) rise of the density
        for n >= 1 and its 1/log(r)^2 shape for n = 0; above, the panels
        are graded toward the peak from both sides and widen out to the
        truncation radius n*0.66274 + extent (a flat 30 for small n).
        """
        peak = max(n * CURVE_AXIS_ROOT, 0.5)
        hi = n * CURVE_AXIS_ROOT + extent if n >= 5 else max(30.0, extent)
        cut = 0.5 * peak
        # drop [0, r_lo]: the density vanishes at least like r^(2n+1) there
        r_lo = cut * 10.0 ** (-12.0 / (2 * n + 1))
        gx, gw = np.polynomial.legendre.leggauss(nodes_per_panel)

        def panels(edges):
            half = 0.5 * np.diff(edges)
            mid = 0.5 * (edges[:-1] + edges[1:])
            x = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
            w = (half[:, None] * gw[None, :]).ravel()
            return x, w

        u, wu = panels(np.linspace(math.log(r_lo), math.log(cut), panels_per_section + 1))
        low_nodes, low_weights = np.exp(u), np.exp(u) * wu
        mid_nodes, mid_weights = panels(_graded_edges(cut, peak, panels_per_section, 2.0, "hi"))
        top_nodes, top_weights = panels(_graded_edges(peak, hi, panels_per_section, 3.0, "lo"))
        nodes = np.concatenate([low_nodes, mid_nodes, top_nodes])
        weights = np.concatenate([low_weights, mid_weights, top_weights])
        return cls(nodes=nodes, weights=weights,
                   kernel_values=eval_W(n, nodes), truncation=(0.0, float(hi)))


@dataclass(frozen=True)
class KernelParams:
    """Physical configuration of one boundary kernel.

    dim 2 selects the circular boundary (integer Bessel order n, with a
    branch-cut part); dim 3 the spherical one (order n + 1/2, pole sum only).
    """

    dim: int
    n: int
    radius: float
    speed: float

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ConfigurationError("dim must be 2 or 3")
        if self.n != int(self.n) or self.n < 0:
            raise ConfigurationError("mode index must be a nonnegative integer")
        if not self.radius > 0.0:
            raise ConfigurationError("radius must be positive")
        if not self.speed > 0.0:
            raise ConfigurationError("speed must be positive")

    @property
    def order(self):
        if self.dim == 2:
            return BesselOrder.integer(self.n)
        return BesselOrder.half(self.n)


@dataclass(frozen=True)
class KernelDecomposition:
    """Exponential-sum form of one (sigma, omega) kernel pair."""

    params: KernelParams
    pole_rates: np.ndarray       # c z_j / b, conjugate-closed, Re < 0
    pole_coeffs: np.ndarray      # (c/b^2) z_j
    branchcut: "BranchCutRule | None"
    branch_sign: float           # (-1)^n, meaningful only with a branchcut
    omega_offset: float          # omega(0) = -(dim-1) c / (2b)

    @cached_property
    def rates(self):
        """All exponential rates, poles first, then branch-cut nodes."""
        if self.branchcut is None:
            return self.pole_rates
        scale = self.params.speed / self.params.radius
        return np.concatenate([self.pole_rates, -scale * self.branchcut.nodes])

    @cached_property
    def sigma_weights(self):
        if self.branchcut is None:
            return self.pole_coeffs
        bc = self.branchcut
        scale = self.params.speed / self.params.radius ** 2
        branch = self.branch_sign * scale * bc.weights * bc.kernel_values
        return np.concatenate([self.pole_coeffs, branch.astype(complex)])

    @cached_property
    def omega_weights(self):
        # chosen so that omega'(t) = c * sigma(t) holds term by term
        scale = self.params.speed / self.params.radius
        pole = np.full(self.pole_rates.shape, scale, dtype=complex)
        if self.branchcut is None:
            return pole
        bc = self.branchcut
        branch = -self.branch_sign * scale * bc.weights * bc.kernel_values / bc.nodes
        return np.concatenate([pole, branch.astype(complex)])

    def __len__(self):
        return self.rates.size

    def dump_csv(self, path):
        """Write the decomposition as CSV (schema described in the README)."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["term_kind", "rate_re", "rate_im",
                        "sigma_coeff_re", "sigma_coeff_im",
                        "node", "weight", "kernel_value"])
            npoles = self.pole_rates.size
            for k, (lam, s) in enumerate(zip(self.rates, self.sigma_weights)):
                if k < npoles:
                    extra = ["", "", ""]
                    kind = "pole"
                else:
                    bc = self.branchcut
                    i = k - npoles
                    extra = ["%.17g" % bc.nodes[i], "%.17g" % bc.weights[i],
                             "%.17g" % bc.kernel_values[i]]
                    kind = "branch"
                w.writerow([kind, "%.17g" % lam.real, "%.17g" % lam.imag,
                            "%.17g" % s.real, "%.17g" % s.imag] + extra)


def build_kernel(params, rule=None):
    """Assemble the exponential decomposition for one mode.

    For dim=2 a branch-cut rule is required; the default one is built via
    BranchCutRule.for_mode(n).  For dim=3 any supplied rule is rejected,
    since the spherical kernel has no continuous part.
    """
    zs = find_zeros(params.order)
    scale = params.speed / params.radius
    rates = scale * zs.zeros
    coeffs = (scale / params.radius) * zs.zeros
    if rates.size and not np.all(rates.real < 0.0):
        raise ConfigurationError("pole rates must decay")
    if params.dim == 2:
        if rule is None:
            rule = BranchCutRule.for_mode(params.n)
        sign = -1.0 if params.n % 2 else 1.0
    else:
        if rule is not None:
            raise ConfigurationError("spherical kernels take no branch-cut rule")
        sign = 1.0
    offset = -(params.dim - 1) * params.speed / (2.0 * params.radius)
    return KernelDecomposition(params=params, pole_rates=rates, pole_coeffs=coeffs,
                               branchcut=rule if params.dim == 2 else None,
                               branch_sign=sign, omega_offset=offset)


def _exp_sum(t, rates, weights, block=4096):
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if tt.size and tt.min() < 0.0:
        raise ValueError("kernels are defined for t >= 0")
    out = np.empty(tt.shape, dtype=float)
    for i in range(0, tt.size, block):
        blk = tt[i:i + block]
        out[i:i + block] = (np.exp(np.outer(blk, rates)) @ weights).real
    return out


def _expm1_sum(t, rates, weights, block=4096):
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if tt.size and tt.min() < 0.0:
        raise ValueError("kernels are defined for t >= 0")
    out = np.empty(tt.shape, dtype=float)
    for i in range(0, tt.size, block):
        z = np.outer(tt[i:i + block], rates)
        x, y = z.real, z.imag
        # complex expm1, cancellation-free for |z| small
        em1 = np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2 \
            + 1j * (np.exp(x) * np.sin(y))
        out[i:i + block] = (em1 @ weights).real
    return out


def eval_sigma(kernel, t):
    """Kernel sigma at time(s) t >= 0; scalar in, scalar out."""
    out = _exp_sum(t, kernel.rates, kernel.sigma_weights)
    if np.isscalar(t) or getattr(t, "ndim", 1) == 0:
        return float(out[0])
    return out


def eval_omega(kernel, t):
    """Kernel omega at time(s) t >= 0; the t=0 value is the exact offset."""
    out = kernel.omega_offset + _expm1_sum(t, kernel.rates, kernel.omega_weights)
    if np.isscalar(t) or getattr(t, "ndim", 1) == 0:
        return float(out[0])
    return out

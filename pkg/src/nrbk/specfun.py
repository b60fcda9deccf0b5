"""Modified Bessel functions on the real axis and in the cut plane, and
complex zeros of the second-kind function K.

Real-axis values are returned on a logarithmic scale so that large orders
and extreme arguments stay representable.  Complex-plane values of K and
its derivative are returned scaled by exp(z); the scaling keeps magnitudes
moderate across the left half plane, and every ratio that downstream code
forms (Newton steps, pole coefficients) is scale free.  Internals of the
complex evaluator run in double-double arithmetic because the reflection
to the left half plane and the power series both cancel exponentially.

Zeros of K of integer order lie on a fixed curve in the left half plane
and are located by seeding Newton's method from an explicit phase rule
along that curve.  Zeros of half integer order are algebraic: K is then
an exponential times a polynomial, whose roots come from a companion
matrix and one round of polishing.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as _sp

from . import _ddouble as _d
from .errors import AccuracyError, ZeroFindingError

__all__ = [
    "BesselOrder",
    "ZeroSet",
    "log_bessel_i",
    "log_bessel_k",
    "bessel_k_complex",
    "bessel_k_half",
    "decay_exponent",
    "zero_count",
    "find_zeros",
]


# ----------------------------------------------------------------------
# order bookkeeping

@dataclass(frozen=True)
class BesselOrder:
    """Order of a modified Bessel function: integer n or half integer n+1/2.

    kind is "integer" or "half"; n is the nonnegative integer part.
    """

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in ("integer", "half"):
            raise ValueError(f"unknown order kind {self.kind!r}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 0:
            raise ValueError("order index must be a nonnegative integer")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def integer(cls, n: int) -> "BesselOrder":
        return cls("integer", n)

    @classmethod
    def half(cls, n: int) -> "BesselOrder":
        return cls("half", n)

    @property
    def nu(self) -> float:
        return self.n + 0.5 if self.kind == "half" else float(self.n)

    def __str__(self):
        return f"{self.n}+1/2" if self.kind == "half" else str(self.n)


# ----------------------------------------------------------------------
# real axis, log scale

def _log_i_series(nu: float, r: np.ndarray) -> np.ndarray:
    # ascending series leading term plus a short correction sum; only used
    # where (r/2)^nu / nu! underflows the scaled routine, so r*r/4 << nu+1
    # and a handful of terms reaches full precision
    t = r * r / 4.0
    s = np.ones_like(r)
    term = np.ones_like(r)
    for k in range(25):
        term = term * t / ((k + 1.0) * (nu + k + 1.0))
        s += term
    return nu * np.log(r / 2.0) - _sp.gammaln(nu + 1.0) + np.log(s)


def _log_k_small(nu: float, r: np.ndarray) -> np.ndarray:
    # dominant part of K for r -> 0 at positive order; the neglected
    # logarithmic piece is smaller by (r/2)^(2 nu) which is far below
    # resolution anywhere this branch is reachable
    if nu == int(nu):
        m = int(nu)
        if m == 0:
            # K_0 ~ -log(r/2) - gamma; kve never overflows here, so this
            # branch exists only for completeness
            g = float(_d.EULER_GAMMA[0])
            return np.log(-np.log(r / 2.0) - g)
        s = np.ones_like(r)
        term = np.ones_like(r)
        for k in range(min(m - 1, 30)):
            term = term * (-r * r / 4.0) / ((k + 1.0) * (m - k - 1.0))
            s += term
        return -math.log(2.0) + _sp.gammaln(m) + m * np.log(2.0 / r) + np.log(s)
    if nu * 2 == int(nu * 2):
        # closed form: sqrt(pi/2r) e^-r times a positive polynomial in 1/(2r)
        m = int(nu - 0.5)
        k = np.arange(m + 1, dtype=float)
        loga = _sp.gammaln(m + k + 1) - _sp.gammaln(k + 1) - _sp.gammaln(m - k + 1)
        lr = np.log(2.0 * r)
        body = _sp.logsumexp(loga[None, :] - k[None, :] * lr[..., None], axis=-1)
        return 0.5 * (math.log(math.pi / 2.0) - np.log(r)) - r + body
    raise ValueError("small-argument fallback needs an integer or half integer order")


def _as_positive_array(r) -> tuple[np.ndarray, bool]:
    arr = np.asarray(r, dtype=float)
    scalar = arr.ndim == 0
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError("argument must be positive and finite")
    return np.atleast_1d(arr), scalar


def log_bessel_i(nu: float, r) -> np.ndarray | float:
    """log I_nu(r) for nu >= 0 and r > 0, elementwise over r."""
    if nu < 0:
        raise ValueError("order must be nonnegative")
    arr, scalar = _as_positive_array(r)
    with np.errstate(divide="ignore"):
        v = _sp.ive(nu, arr)
        out = np.log(v) + arr
    bad = ~np.isfinite(out)
    if np.any(bad):
        out[bad] = _log_i_series(nu, arr[bad])
    return float(out[0]) if scalar else out.reshape(np.shape(r))


def log_bessel_k(nu: float, r) -> np.ndarray | float:
    """log K_nu(r) for nu >= 0 and r > 0, elementwise over r."""
    if nu < 0:
        raise ValueError("order must be nonnegative")
    arr, scalar = _as_positive_array(r)
    with np.errstate(divide="ignore", over="ignore"):
        v = _sp.kve(nu, arr)
        out = np.log(v) - arr
    bad = ~np.isfinite(out)
    if np.any(bad):
        out[bad] = _log_k_small(nu, arr[bad])
    return float(out[0]) if scalar else out.reshape(np.shape(r))


# ----------------------------------------------------------------------
# complex plane, double-double internals

_SERIES_RADIUS = 17.0
_C_ZERO = (_d.dd(0.0), _d.dd(0.0))
_C_ONE = (_d.dd(1.0), _d.dd(0.0))
_CPI_2 = (_d.PI_2, _d.dd(0.0))
_TWO_GAMMA = _d.mul_d(_d.EULER_GAMMA, 2.0)


def _k01_series(w):
    """Scaled K_0, K_1 at w (Re w >= 0, |w| <= _SERIES_RADIUS) by ascending
    series in double-double; returns (e^w K_0(w), e^w K_1(w))."""
    q = _d.cmul_d(w, 0.5)
    q2 = _d.cmul(q, q)
    lnq = _d.clog(q)
    t = _C_ONE                    # q2^k / (k!)^2
    u = _C_ONE                    # q2^k / (k! (k+1)!)
    i0 = t
    i1s = u
    k0s = _C_ZERO                 # sum H_k t_k, k >= 1
    # k = 0 term of the K_1 sum: (H_0 + H_1 - 2 gamma) u_0
    k1s = (_d.add_d(_d.neg(_TWO_GAMMA), 1.0), _d.dd(0.0))
    h = _d.dd(0.0)                # H_k
    hp = _d.dd(1.0)               # H_{k+1}
    floor2 = 1e-72                # squared relative cutoff, ~1e-36 in value
    for k in range(1, 400):
        t = _d.cdiv_d(_d.cmul(t, q2), float(k * k))
        u = _d.cdiv_d(_d.cmul(u, q2), float(k * (k + 1)))
        h = _d.add(h, _d.div_d(_d.dd(1.0), float(k)))
        hp = _d.add(hp, _d.div_d(_d.dd(1.0), float(k + 1)))
        i0 = _d.cadd(i0, t)
        i1s = _d.cadd(i1s, u)
        k0s = _d.cadd(k0s, _d.cmul_r(t, h))
        k1s = _d.cadd(k1s, _d.cmul_r(u, _d.sub(_d.add(h, hp), _TWO_GAMMA)))
        tm = _d.to_float(_d.cabs2(t))
        if tm < floor2 * _d.to_float(_d.cabs2(i0)):
            break
    else:  # pragma: no cover
        raise AccuracyError("power series for K did not converge")
    i1 = _d.cmul(q, i1s)
    lg = _d.cadd(lnq, (_d.EULER_GAMMA, _d.dd(0.0)))
    k0 = _d.csub(k0s, _d.cmul(lg, i0))
    k1 = _d.cadd(_d.cdiv(_C_ONE, w),
                 _d.csub(_d.cmul(lnq, i1), _d.cmul_d(_d.cmul(q, k1s), 0.5)))
    e = _d.cexp(w)
    return _d.cmul(k0, e), _d.cmul(k1, e)


def _k01_asymptotic(w):
    """Scaled K_0, K_1 at w (Re w >= 0, |w| > _SERIES_RADIUS) by the
    large-argument expansion, truncated at its smallest term."""
    pref = _d.csqrt(_d.cdiv(_CPI_2, w))
    invw = _d.cdiv(_C_ONE, w)
    out = []
    for nu in (0, 1):
        four_nu2 = 4 * nu * nu
        a = _C_ONE
        s = _C_ONE
        prev = math.inf
        for k in range(1, 200):
            num = float(four_nu2 - (2 * k - 1) ** 2)
            a = _d.cdiv_d(_d.cmul_r(_d.cmul(a, invw), _d.dd(num)), float(8 * k))
            mag = _d.to_float(_d.cabs2(a))
            if mag >= prev:
                break  # divergent tail reached; sum is already at its floor
            s = _d.cadd(s, a)
            prev = mag
            if mag < 1e-68 * _d.to_float(_d.cabs2(s)):
                break
        out.append(_d.cmul(pref, s))
    return out[0], out[1]


def _k_ladder(k0, k1, w, nmax):
    """Scaled K_j(w) for j = 0..nmax by the three-term order recurrence,
    which is stable upward for K."""
    ks = [k0, k1]
    if nmax >= 2:
        invw = _d.cdiv(_C_ONE, w)
        for j in range(1, nmax):
            ks.append(_d.cadd(ks[j - 1], _d.cmul_d(_d.cmul(invw, ks[j]), 2.0 * j)))
    return ks[: nmax + 1]


def _i_ladder(w, nmax, aw):
    """Scaled I_j(w) = e^-w I_j(w) for j = 0..nmax (Re w >= 0) by downward
    recurrence with normalization against e^w = I_0 + 2 sum I_j."""
    start = nmax + int(1.3 * aw) + 50
    invw = _d.cdiv(_C_ONE, w)
    yp = _C_ZERO
    y = _C_ONE
    s = _C_ZERO
    outs = [None] * (nmax + 1)
    big = 2.0 ** 600
    shrink = 2.0 ** -600        # power of two, rescaling is exact
    for k in range(start, 0, -1):
        ym = _d.cadd(yp, _d.cmul_d(_d.cmul(invw, y), 2.0 * k))
        yp, y = y, ym
        if k - 1 <= nmax:
            outs[k - 1] = y
        s = _d.cadd(s, _d.cmul_d(yp, 2.0))
        if abs(y[0][0]) > big or abs(y[1][0]) > big:
            y = _d.cmul_d(y, shrink)
            yp = _d.cmul_d(yp, shrink)
            s = _d.cmul_d(s, shrink)
            outs = [None if o is None else _d.cmul_d(o, shrink) for o in outs]
    s = _d.cadd(s, y)           # adds y_0; the loop summed 2*y_j for j >= 1
    return [_d.cdiv(o, s) for o in outs]


def _check_wronskian(ks, is_, w, n, aw):
    # I_n K_{n+1} + I_{n+1} K_n = 1/w, exact for the scaled pairs as well;
    # catches an insufficient recurrence start or a corrupted ladder.  The
    # gate follows the intrinsic floor of the K route: the large-argument
    # expansion truncates at a smallest term of size exp(-2|w|)
    lhs = _d.cadd(_d.cmul(is_[n], ks[n + 1]), _d.cmul(is_[n + 1], ks[n]))
    rhs = _d.cdiv(_C_ONE, w)
    diff = _d.csub(lhs, rhs)
    gate = 1e3 * max(1e-28, math.exp(-2.0 * aw))
    if _d.to_float(_d.cabs2(diff)) > gate * gate * _d.to_float(_d.cabs2(rhs)):
        raise AccuracyError("cross check of the Bessel ladders failed")


def bessel_k_complex(n: int, z: complex) -> tuple[complex, complex]:
    """(e^z K_n(z), e^z K_n'(z)) for integer n >= 0 and complex z != 0.

    The principal branch is used, with the cut along the negative real
    axis; the side of the cut is taken from the sign bit of Im z.  Both
    returned numbers carry the same scale factor e^z, so their ratio is
    K_n/K_n' exactly.  Validated for n <= 80 and 1e-2 <= |z| <= 200.
    """
    if n < 0 or n != int(n):
        raise ValueError("order must be a nonnegative integer")
    n = int(n)
    z = complex(z)
    if z == 0 or not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError("argument must be nonzero and finite")

    reflect = z.real < 0.0
    w = complex(-z.real, -z.imag) if reflect else z
    wc = _d.cdd(w)
    aw = abs(w)
    nmax = n + 1

    if aw <= _SERIES_RADIUS:
        k0, k1 = _k01_series(wc)
    else:
        k0, k1 = _k01_asymptotic(wc)
    ks = _k_ladder(k0, k1, wc, nmax)

    if reflect:
        is_ = _i_ladder(wc, nmax, aw)
        _check_wronskian(ks, is_, wc, n, aw)
        sigma = -1.0 if math.copysign(1.0, z.imag) < 0.0 else 1.0
        e2 = _d.cexp(_d.cmul_d(wc, -2.0))
        vals = []
        for j in range(nmax + 1):
            a = _d.cmul(ks[j], e2)
            if j % 2 == 1:
                a = _d.cneg(a)
            # subtract sigma * pi * i * I_j: i*(x+iy) = (-y, x)
            b = _d.cmul_r(is_[j], _d.PI)
            t = (_d.mul_d(b[1], -sigma), _d.mul_d(b[0], sigma))
            vals.append(_d.csub(a, t))
        ks = vals

    value = ks[n]
    if n == 0:
        deriv = _d.cneg(ks[1])
    else:
        deriv = _d.cneg(_d.cmul_d(_d.cadd(ks[n - 1], ks[n + 1]), 0.5))
    v = _d.cto_complex(value)
    dv = _d.cto_complex(deriv)
    if not (cmath.isfinite(v) and cmath.isfinite(dv)):
        raise AccuracyError(f"K evaluation overflowed at order {n}, z = {z}")
    return v, dv


# ----------------------------------------------------------------------
# half integer orders: finite sums

def _k_ladder_half(w, nmax):
    """Scaled K_{j+1/2}(w) for j = 0..nmax; the two lowest half orders are
    algebraic, the rest follow from the upward order recurrence."""
    pref = _d.csqrt(_d.cdiv(_CPI_2, w))
    invw = _d.cdiv(_C_ONE, w)
    ks = [pref, _d.cmul(pref, _d.cadd(_C_ONE, invw))]
    for j in range(1, nmax):
        ks.append(_d.cadd(ks[j - 1], _d.cmul_d(_d.cmul(invw, ks[j]), 2.0 * j + 1.0)))
    return ks[: nmax + 1]


def _i_ladder_half(w, nmax, aw, e2):
    """Scaled I_{j+1/2}(w) = e^-w I_{j+1/2}(w) for j = 0..nmax (Re w >= 0),
    downward recurrence normalized against a closed form at the foot.

    Both foot values have zeros in the plane (sinh and tanh type), so the
    larger of the two is used as the anchor.
    """
    base = _d.csqrt(_d.cdiv(_C_ONE, _d.cmul_d(_d.cmul_r(w, _d.PI), 2.0)))
    invw = _d.cdiv(_C_ONE, w)
    # e^-w I_{1/2} = base (1 - e^-2w);  e^-w I_{3/2} = base ((1 - 1/w) + e^-2w (1 + 1/w))
    i_a = _d.cmul(base, _d.csub(_C_ONE, e2))
    i_b = _d.cmul(base, _d.cadd(_d.csub(_C_ONE, invw), _d.cmul(e2, _d.cadd(_C_ONE, invw))))
    start = nmax + int(1.3 * aw) + 50
    yp = _C_ZERO
    y = _C_ONE
    outs = [None] * (nmax + 1)
    big = 2.0 ** 600
    shrink = 2.0 ** -600
    for j in range(start, 0, -1):
        ym = _d.cadd(yp, _d.cmul_d(_d.cmul(invw, y), 2.0 * j + 1.0))
        yp, y = y, ym
        if j - 1 <= nmax:
            outs[j - 1] = y
        if abs(y[0][0]) > big or abs(y[1][0]) > big:
            y = _d.cmul_d(y, shrink)
            yp = _d.cmul_d(yp, shrink)
            outs = [None if o is None else _d.cmul_d(o, shrink) for o in outs]
    if _d.to_float(_d.cabs2(i_a)) >= _d.to_float(_d.cabs2(i_b)):
        scale = _d.cdiv(i_a, outs[0])
    else:
        scale = _d.cdiv(i_b, outs[1] if nmax >= 1 else _d.cadd(yp, _d.cmul_d(_d.cmul(invw, y), 3.0)))
    return [_d.cmul(o, scale) for o in outs]


def bessel_k_half(n: int, z: complex) -> tuple[complex, complex]:
    """(e^z K_{n+1/2}(z), e^z K_{n+1/2}'(z)) for integer n >= 0, z != 0.

    Same principal branch, scaling, and validated domain conventions as
    bessel_k_complex.  The half order ladder starts from closed forms, so
    no series is involved.
    """
    if n < 0 or n != int(n):
        raise ValueError("order index must be a nonnegative integer")
    n = int(n)
    z = complex(z)
    if z == 0 or not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError("argument must be nonzero and finite")

    reflect = z.real < 0.0
    w = complex(-z.real, -z.imag) if reflect else z
    wc = _d.cdd(w)
    aw = abs(w)
    nmax = n + 1

    ks = _k_ladder_half(wc, nmax)
    if reflect:
        e2 = _d.cexp(_d.cmul_d(wc, -2.0))
        is_ = _i_ladder_half(wc, nmax, aw, e2)
        lhs = _d.cadd(_d.cmul(is_[n], ks[n + 1]), _d.cmul(is_[n + 1], ks[n]))
        rhs = _d.cdiv(_C_ONE, wc)
        diff = _d.csub(lhs, rhs)
        if _d.to_float(_d.cabs2(diff)) > 1e-50 * _d.to_float(_d.cabs2(rhs)):
            raise AccuracyError("cross check of the half order ladders failed")
        sigma = -1.0 if math.copysign(1.0, z.imag) < 0.0 else 1.0
        vals = []
        for j in range(nmax + 1):
            # phase of the continuation across the cut: exp(-i sigma pi nu)
            # with nu = j + 1/2 equals -i sigma (-1)^j, so the K(w) term is
            # rotated a quarter turn; the I term enters as -i sigma pi I
            t = _d.cmul(ks[j], e2)
            s_j = sigma if j % 2 == 0 else -sigma
            a = (_d.mul_d(t[1], s_j), _d.mul_d(t[0], -s_j))       # -i s_j t
            b = _d.cmul_r(is_[j], _d.PI)
            c = (_d.mul_d(b[1], -sigma), _d.mul_d(b[0], sigma))   # i sigma pi I
            vals.append(_d.csub(a, c))
        ks = vals

    value = ks[n]
    if n == 0:
        # K_{-1/2} = K_{1/2}
        deriv = _d.cneg(_d.cmul_d(_d.cadd(ks[0], ks[1]), 0.5))
    else:
        deriv = _d.cneg(_d.cmul_d(_d.cadd(ks[n - 1], ks[n + 1]), 0.5))
    v = _d.cto_complex(value)
    dv = _d.cto_complex(deriv)
    if not (cmath.isfinite(v) and cmath.isfinite(dv)):
        raise AccuracyError(f"K evaluation overflowed at order {n}+1/2, z = {z}")
    return v, dv


# ----------------------------------------------------------------------
# zero counting and location

def decay_exponent(kappa):
    """Exponent governing the large-order behavior of K along rays:
    K_n(n kappa) ~ sqrt(pi/2n) (1+kappa^2)^(-1/4) exp(-n * decay_exponent).

    Accepts real or complex kappa; the zeros of K_n cluster where the
    real part of this exponent vanishes.
    """
    if isinstance(kappa, complex):
        s = cmath.sqrt(1.0 + kappa * kappa)
        return s + cmath.log(kappa / (1.0 + s))
    s = math.sqrt(1.0 + kappa * kappa)
    return s + math.log(kappa / (1.0 + s))


def zero_count(order: BesselOrder) -> int:
    """Number of zeros of K in the cut plane for the given order."""
    if order.kind == "half":
        return order.n
    n = order.n
    if n < 2:
        return 0
    return n if n % 2 == 0 else n - 1


@dataclass(frozen=True)
class ZeroSet:
    """Zeros of K for one order, closed under conjugation.

    zeros are sorted by increasing imaginary part (ties by real part);
    the lower half is the elementwise conjugate of the upper half by
    construction.  residuals[j] = |K(z_j) / K'(z_j)|.
    """

    order: BesselOrder
    zeros: np.ndarray
    residuals: np.ndarray

    def __len__(self):
        return len(self.zeros)

    def upper_half(self) -> np.ndarray:
        return self.zeros[self.zeros.imag > 0.0]


def _curve_point(tau: float, seed: complex) -> complex:
    """Point kappa in the fourth quadrant with decay_exponent(kappa) = -i tau,
    by Newton's method; d(exponent)/d(kappa) = sqrt(1+kappa^2)/kappa."""
    k = seed
    target = complex(0.0, -tau)
    for _ in range(60):
        f = decay_exponent(k) - target
        step = f * k / cmath.sqrt(1.0 + k * k)
        k = k - step
        if abs(step) <= 1e-14 * (1.0 + abs(k)):
            break
    if abs(decay_exponent(k) - target) > 1e-10 or not (k.real > 0.0 and k.imag <= 0.0):
        raise ZeroFindingError("curve tracking for zero seeds failed", order=None)
    return k


def _newton_zero(n: int, z0: complex, tol: float) -> tuple[complex, float]:
    z = z0
    for _ in range(50):
        v, dv = bessel_k_complex(n, z)
        step = v / dv
        z = z - step
        if abs(step) <= tol * (1.0 + abs(z)):
            v, dv = bessel_k_complex(n, z)
            return z, abs(v / dv)
    raise ZeroFindingError(
        f"Newton iteration for a zero of K_{n} did not converge from {z0}",
        order=BesselOrder.integer(n),
    )


def _find_zeros_integer(n: int, tol: float) -> tuple[np.ndarray, np.ndarray]:
    m = zero_count(BesselOrder.integer(n))
    m_up = m // 2
    # phase rule along the curve Re(decay_exponent) = 0: upper-half zeros sit
    # near decay_exponent = -i pi (m + delta) / n with delta 1/4 for even n
    # and 3/4 for odd n, the offset shrinking like 1/n
    delta = 0.25 if n % 2 == 0 else 0.75
    uppers = []
    residuals = []
    kappa = 0.66274 + 0.0j          # real-axis end of the curve
    for j in range(m_up):
        tau = (j + delta) * math.pi / n
        kappa = _curve_point(tau, kappa)
        z, res = _newton_zero(n, -n * kappa, tol)
        if z.imag < 0:
            z = z.conjugate()       # keep the representative in the upper half
        uppers.append(z)
        residuals.append(res)
    return np.asarray(uppers, complex), np.asarray(residuals, float)


def _newton_zero_half(n: int, z0: complex, tol: float) -> tuple[complex, float]:
    z = z0
    for _ in range(50):
        v, dv = bessel_k_half(n, z)
        step = v / dv
        z = z - step
        if abs(step) <= tol * (1.0 + abs(z)):
            v, dv = bessel_k_half(n, z)
            return z, abs(v / dv)
    raise ZeroFindingError(
        f"Newton iteration for a half order zero stalled near {z0}",
        order=BesselOrder.half(n),
    )


def _find_zeros_half(n: int, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Upper-half and real zeros of K_{n+1/2}, by the same curve seeding as
    integer orders; the phase rule has offset 0 for odd n (whose ladder
    starts with the single real zero) and 1/2 for even n."""
    if n == 0:
        return np.empty(0, complex), np.empty(0, float)
    nu = n + 0.5
    out = []
    residuals = []
    if n % 2 == 1:
        z, res = _newton_zero_half(n, complex(-0.66274 * nu, 0.0), tol)
        out.append(complex(z.real, 0.0))
        residuals.append(res)
        ms = [float(m) for m in range(1, (n - 1) // 2 + 1)]
    else:
        ms = [m + 0.5 for m in range(n // 2)]
    kappa = 0.66274 + 0.0j
    for m in ms:
        kappa = _curve_point(m * math.pi / nu, kappa)
        z, res = _newton_zero_half(n, -nu * kappa, tol)
        if z.imag < 0:
            z = z.conjugate()
        out.append(z)
        residuals.append(res)
    return np.asarray(out, complex), np.asarray(residuals, float)


@lru_cache(maxsize=None)
def _find_zeros_cached(kind: str, n: int, tol: float) -> ZeroSet:
    order = BesselOrder(kind, n)
    if kind == "integer":
        uppers, upres = _find_zeros_integer(n, tol)
        reals = np.empty(0, complex)
        realres = np.empty(0, float)
    else:
        zs, rs = _find_zeros_half(n, tol)
        on_axis = zs.imag == 0.0
        reals, realres = zs[on_axis], rs[on_axis]
        uppers, upres = zs[~on_axis], rs[~on_axis]

    idx = np.lexsort((uppers.real, uppers.imag))
    uppers, upres = uppers[idx], upres[idx]
    zeros = np.concatenate([np.conj(uppers[::-1]), reals, uppers])
    residuals = np.concatenate([upres[::-1], realres, upres])

    m = zero_count(order)
    if len(zeros) != m:
        raise ZeroFindingError(
            f"found {len(zeros)} zeros for order {order}, expected {m}",
            order=order,
        )
    sep = 1e-6 * max(1, n)
    if m > 1:
        pair = np.abs(zeros[:, None] - zeros[None, :]) + np.eye(m)
        if pair.min() < sep:
            raise ZeroFindingError(f"zeros of order {order} collide", order=order)
    gate = tol * 10.0 * (1.0 + np.abs(zeros))
    if np.any(residuals > gate):
        raise ZeroFindingError(
            f"zero residuals of order {order} exceed tolerance", order=order
        )
    return ZeroSet(order=order, zeros=zeros, residuals=residuals)


def find_zeros(order: BesselOrder, tol: float = 1e-13) -> ZeroSet:
    """All zeros of K for the given order, as a conjugation-closed ZeroSet.

    Integer orders: Newton on bessel_k_complex from seeds on the curve
    where the large-order decay exponent is purely imaginary.  Half
    integer orders: companion-matrix roots of the closed-form polynomial,
    polished on bessel_k_half.  Raises ZeroFindingError if the expected
    count, separation, or residual gate fails.
    """
    if not isinstance(order, BesselOrder):
        raise ValueError("order must be a BesselOrder")
    return _find_zeros_cached(order.kind, order.n, float(tol))

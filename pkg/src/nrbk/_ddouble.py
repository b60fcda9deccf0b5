"""Portable double-double arithmetic.

A double-double ("dd") is an unevaluated sum of two floats (hi, lo) with
|lo| <= ulp(hi)/2, giving roughly 32 significant decimal digits. Complex
double-doubles ("cdd") are pairs of dd for the real and imaginary parts.
Only the operations needed by the Bessel evaluations are provided; inputs
are assumed finite and denormal-free, which holds in the zero-bearing
annulus these routines serve.
"""

import math

# (hi, lo) representations of the needed constants
PI = (3.141592653589793, 1.2246467991473532e-16)
PI_2 = (1.5707963267948966, 6.123233995736766e-17)
LN2 = (0.6931471805599453, 2.3190468138462996e-17)
EULER_GAMMA = (0.5772156649015329, -4.942915152430645e-18)

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a, b):
    # requires |a| >= |b|
    s = a + b
    return s, b - (s - a)


def two_prod(a, b):
    p = a * b
    at = _SPLITTER * a
    ahi = at - (at - a)
    alo = a - ahi
    bt = _SPLITTER * b
    bhi = bt - (bt - b)
    blo = b - bhi
    return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


def dd(a, b=0.0):
    s, e = two_sum(a, b)
    return s, e


def add(x, y):
    s1, s2 = two_sum(x[0], y[0])
    t1, t2 = two_sum(x[1], y[1])
    s2 += t1
    s1, s2 = quick_two_sum(s1, s2)
    s2 += t2
    return quick_two_sum(s1, s2)


def sub(x, y):
    return add(x, (-y[0], -y[1]))


def neg(x):
    return (-x[0], -x[1])


def add_d(x, a):
    s1, s2 = two_sum(x[0], a)
    s2 += x[1]
    return quick_two_sum(s1, s2)


def mul(x, y):
    p1, p2 = two_prod(x[0], y[0])
    p2 += x[0] * y[1] + x[1] * y[0]
    return quick_two_sum(p1, p2)


def mul_d(x, a):
    p1, p2 = two_prod(x[0], a)
    p2 += x[1] * a
    return quick_two_sum(p1, p2)


def div(x, y):
    q1 = x[0] / y[0]
    r = sub(x, mul_d(y, q1))
    q2 = r[0] / y[0]
    r = sub(r, mul_d(y, q2))
    q3 = r[0] / y[0]
    q1, q2 = quick_two_sum(q1, q2)
    return add_d((q1, q2), q3)


def div_d(x, a):
    q1 = x[0] / a
    p1, p2 = two_prod(q1, a)
    s, e = two_sum(x[0], -p1)
    e += x[1] - p2
    q2 = (s + e) / a
    return quick_two_sum(q1, q2)


def recip_d(a):
    # dd-accurate 1/a for a plain float a
    return div_d((1.0, 0.0), a)


def sqr(x):
    p1, p2 = two_prod(x[0], x[0])
    p2 += 2.0 * x[0] * x[1]
    return quick_two_sum(p1, p2)


def sqrt(x):
    if x[0] == 0.0:
        return (0.0, 0.0)
    s = math.sqrt(x[0])
    p1, p2 = two_prod(s, s)
    e, e2 = two_sum(x[0], -p1)
    e2 += x[1] - p2
    return quick_two_sum(s, (e + e2) / (2.0 * s))


def exp(x):
    # range-reduce by ln 2, then a Taylor series on |r| <= ln(2)/2
    k = round(x[0] / LN2[0])
    r = add(x, mul_d(LN2, float(-k)))
    s = add_d(r, 1.0)
    term = r
    f = 1.0
    i = 1
    while abs(term[0]) > 1e-35:
        i += 1
        f *= i
        term = mul(term, r)
        s = add(s, div_d(term, f))
        if i > 30:
            break
    return (math.ldexp(s[0], k), math.ldexp(s[1], k))


def log(x):
    # one Newton correction of the double-precision seed doubles its accuracy
    l0 = math.log(x[0])
    t = mul(exp((-l0, 0.0)), x)
    return add_d(add_d(t, l0 - 1.0), 0.0)


def _sin_cos_taylor(r):
    # |r| <= pi/4
    x2 = sqr(r)
    s = r
    term = r
    k = 1
    while abs(term[0]) > 1e-35 and k < 40:
        term = mul(term, x2)
        term = div_d(term, -float((k + 1) * (k + 2)))
        s = add(s, term)
        k += 2
    c = (1.0, 0.0)
    term = (1.0, 0.0)
    k = 0
    while abs(term[0]) > 1e-35 and k < 40:
        term = mul(term, x2)
        term = div_d(term, -float((k + 1) * (k + 2)))
        c = add(c, term)
        k += 2
    return s, c


def sin_cos(x):
    j = round(x[0] / PI_2[0])
    r = add(x, mul_d(PI_2, float(-j)))
    s, c = _sin_cos_taylor(r)
    q = j % 4
    if q == 0:
        return s, c
    if q in (1, -3):
        return c, neg(s)
    if q in (2, -2):
        return neg(s), neg(c)
    return neg(c), s


def atan2(y, x):
    # Newton refinement of the double-precision seed on f(t) = x sin t - y cos t
    t0 = math.atan2(y[0], x[0])
    s, c = sin_cos((t0, 0.0))
    num = sub(mul(y, c), mul(x, s))
    den = add(mul(x, c), mul(y, s))
    return add_d(div(num, den), t0)


def to_float(x):
    return x[0] + x[1]


# ---------------------------------------------------------------------------
# complex double-double: ((re_hi, re_lo), (im_hi, im_lo))

def cdd(z):
    return ((z.real, 0.0), (z.imag, 0.0))


def cadd(u, v):
    return (add(u[0], v[0]), add(u[1], v[1]))


def csub(u, v):
    return (sub(u[0], v[0]), sub(u[1], v[1]))


def cneg(u):
    return (neg(u[0]), neg(u[1]))


def cmul(u, v):
    re = sub(mul(u[0], v[0]), mul(u[1], v[1]))
    im = add(mul(u[0], v[1]), mul(u[1], v[0]))
    return (re, im)


def cmul_d(u, a):
    return (mul_d(u[0], a), mul_d(u[1], a))


def cdiv(u, v):
    den = add(sqr(v[0]), sqr(v[1]))
    re = add(mul(u[0], v[0]), mul(u[1], v[1]))
    im = sub(mul(u[1], v[0]), mul(u[0], v[1]))
    return (div(re, den), div(im, den))


def cdiv_d(u, a):
    return (div_d(u[0], a), div_d(u[1], a))


def conj(u):
    return (u[0], neg(u[1]))


def cabs2(u):
    return add(sqr(u[0]), sqr(u[1]))


def csqrt(u):
    if u[0][0] == 0.0 and u[1][0] == 0.0:
        return ((0.0, 0.0), (0.0, 0.0))
    m = sqrt(cabs2(u))
    x, y = u
    if x[0] >= 0.0:
        t = sqrt(div_d(add(m, x), 2.0))
        return (t, div(div_d(y, 2.0), t))
    t = sqrt(div_d(sub(m, x), 2.0))
    if y[0] < 0.0 or (y[0] == 0.0 and math.copysign(1.0, y[0]) < 0.0):
        t_im = neg(t)
    else:
        t_im = t
    return (div(div_d(y, 2.0), t_im), t_im)


def clog(u):
    # principal branch
    return (div_d(log(cabs2(u)), 2.0), atan2(u[1], u[0]))


def cto_complex(u):
    return complex(u[0][0] + u[0][1], u[1][0] + u[1][1])


def cmul_r(u, a):
    # complex times a real double-double scalar
    return (mul(u[0], a), mul(u[1], a))


def cexp(u):
    # exp(x + iy) = exp(x) * (cos y + i sin y)
    m = exp(u[0])
    s, c = sin_cos(u[1])
    return (mul(m, c), mul(m, s))

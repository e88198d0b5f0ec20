"""Outward-rounded interval arithmetic on IEEE doubles.

Real intervals are ``(lo, hi)`` float pairs; complex enclosures are
axis-aligned rectangles ``(re_lo, re_hi, im_lo, im_hi)``.  Every arithmetic
step is widened by one ulp with ``math.nextafter``, so a computed enclosure
contains the exact real/complex result independently of the host's rounding
mode.  This one-ulp epsilon inflation is the portable substitute for
directed rounding.

The plain-tuple functions (``iadd``, ``imul``, ``badd``, ``bmul``, ...) are
the hot path used by the subdivision loops; the ``Interval``/``IntervalBox``
dataclasses are the public faces of the same data.

Overflow is not an error: bounds saturate at +-inf and any NaN produced by
``inf * 0`` style products is widened to the whole line, which keeps every
result a valid (possibly infinite) enclosure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

_INF = math.inf
_nextafter = math.nextafter


# ---------------------------------------------------------------------------
# real intervals as (lo, hi) tuples
# ---------------------------------------------------------------------------

def iadd(a, b):
    lo = a[0] + b[0]
    hi = a[1] + b[1]
    if lo != lo or hi != hi:  # inf - inf
        return (-_INF, _INF)
    return (_nextafter(lo, -_INF), _nextafter(hi, _INF))


def isub(a, b):
    lo = a[0] - b[1]
    hi = a[1] - b[0]
    if lo != lo or hi != hi:
        return (-_INF, _INF)
    return (_nextafter(lo, -_INF), _nextafter(hi, _INF))


def imul(a, b):
    al, ah = a
    bl, bh = b
    p1 = al * bl
    p2 = al * bh
    p3 = ah * bl
    p4 = ah * bh
    lo = min(p1, p2, p3, p4)
    hi = max(p1, p2, p3, p4)
    if lo != lo or hi != hi:
        return (-_INF, _INF)
    return (_nextafter(lo, -_INF), _nextafter(hi, _INF))


def isq(a):
    """Interval square; tighter than imul(a, a) when a straddles 0."""
    al, ah = a
    if al >= 0.0:
        lo, hi = al * al, ah * ah
    elif ah <= 0.0:
        lo, hi = ah * ah, al * al
    else:
        lo, hi = 0.0, max(al * al, ah * ah)
    if hi != hi:
        return (0.0, _INF)
    return (lo if lo == 0.0 else _nextafter(lo, -_INF), _nextafter(hi, _INF))


def ineg(a):
    return (-a[1], -a[0])


def iabs(a):
    """Exact: |[a, b]| needs no rounding."""
    al, ah = a
    if al >= 0.0:
        return (al, ah)
    if ah <= 0.0:
        return (-ah, -al)
    return (0.0, max(-al, ah))


def idiv_pos(a, b):
    """a / b for an interval b with b.lo > 0."""
    al, ah = a
    bl, bh = b
    if bl <= 0.0:
        raise ZeroDivisionError("idiv_pos requires a strictly positive denominator")
    p1 = al / bl
    p2 = al / bh
    p3 = ah / bl
    p4 = ah / bh
    lo = min(p1, p2, p3, p4)
    hi = max(p1, p2, p3, p4)
    if lo != lo or hi != hi:
        return (-_INF, _INF)
    return (_nextafter(lo, -_INF), _nextafter(hi, _INF))


def isqrt_hi(x):
    """A float upper bound for sqrt(x), x >= 0."""
    if x < 0.0:
        raise ValueError("isqrt_hi of a negative number")
    return _nextafter(math.sqrt(x), _INF)


def enclose_fraction(q) -> tuple:
    """Smallest float interval containing an exact rational (or int/float)."""
    q = Fraction(q)
    f = float(q)
    if math.isinf(f):
        return (-_INF, _INF) if f != f else ((f, _INF) if f > 0 else (-_INF, f))
    fq = Fraction(f)
    if fq == q:
        return (f, f)
    if fq < q:
        return (f, _nextafter(f, _INF))
    return (_nextafter(f, -_INF), f)


# ---------------------------------------------------------------------------
# complex rectangles as (re_lo, re_hi, im_lo, im_hi) tuples
# ---------------------------------------------------------------------------

def badd(u, v):
    re = iadd((u[0], u[1]), (v[0], v[1]))
    im = iadd((u[2], u[3]), (v[2], v[3]))
    return (re[0], re[1], im[0], im[1])


def bmul(u, v):
    ux = (u[0], u[1])
    uy = (u[2], u[3])
    vx = (v[0], v[1])
    vy = (v[2], v[3])
    re = isub(imul(ux, vx), imul(uy, vy))
    im = iadd(imul(ux, vy), imul(uy, vx))
    return (re[0], re[1], im[0], im[1])


def bsquare(u):
    """Enclosure of z^2 over a rectangle; tighter than bmul(u, u) because
    x^2 and y^2 keep their signs."""
    x = (u[0], u[1])
    y = (u[2], u[3])
    re = isub(isq(x), isq(y))
    xy = imul(x, y)
    im = iadd(xy, xy)
    return (re[0], re[1], im[0], im[1])


def bhorner(coeffs_desc, z):
    """Enclosure of a polynomial at a rectangle, Horner form.

    ``coeffs_desc`` are coefficient rectangles from the leading term down.
    Inclusion-monotone: a smaller input rectangle never yields a larger
    enclosure for the same coefficients.
    """
    acc = coeffs_desc[0]
    for c in coeffs_desc[1:]:
        acc = badd(bmul(acc, z), c)
    return acc


def babs2(u, center):
    """Interval of |z - c|^2 over z in rectangle u, c in rectangle center."""
    dx = isub((u[0], u[1]), (center[0], center[1]))
    dy = isub((u[2], u[3]), (center[2], center[3]))
    return iadd(isq(dx), isq(dy))


def boverlap(u, v) -> bool:
    """Closed-rectangle overlap test (False certifies disjointness)."""
    return u[0] <= v[1] and v[0] <= u[1] and u[2] <= v[3] and v[2] <= u[3]


def bsubset(u, v) -> bool:
    """True iff rectangle u is contained in rectangle v (closed)."""
    return v[0] <= u[0] and u[1] <= v[1] and v[2] <= u[2] and u[3] <= v[3]


def bhull(u, v):
    return (min(u[0], v[0]), max(u[1], v[1]), min(u[2], v[2]), max(u[3], v[3]))


# ---------------------------------------------------------------------------
# vectorized kernels: the same outward-rounded operations on ndarray
# endpoints, used by the subdivision hot loop.  Semantically these mirror
# the scalar functions above; np.nextafter provides the identical one-ulp
# inflation elementwise.
# ---------------------------------------------------------------------------

def _vscrub(lo, hi):
    bad = np.isnan(lo) | np.isnan(hi)
    if bad.any():
        lo = np.where(bad, -_INF, lo)
        hi = np.where(bad, _INF, hi)
    return lo, hi


def viadd(alo, ahi, blo, bhi):
    lo, hi = _vscrub(alo + blo, ahi + bhi)
    return np.nextafter(lo, -_INF), np.nextafter(hi, _INF)


def visub(alo, ahi, blo, bhi):
    lo, hi = _vscrub(alo - bhi, ahi - blo)
    return np.nextafter(lo, -_INF), np.nextafter(hi, _INF)


def vimul(alo, ahi, blo, bhi):
    p1 = alo * blo
    p2 = alo * bhi
    p3 = ahi * blo
    p4 = ahi * bhi
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    lo, hi = _vscrub(lo, hi)
    return np.nextafter(lo, -_INF), np.nextafter(hi, _INF)


def visq(alo, ahi):
    neg = ahi <= 0.0
    straddle = (alo < 0.0) & (ahi > 0.0)
    lo = np.where(neg, ahi * ahi, alo * alo)
    hi = np.where(neg, alo * alo, ahi * ahi)
    lo = np.where(straddle, 0.0, lo)
    hi = np.where(straddle, np.maximum(alo * alo, ahi * ahi), hi)
    lo, hi = _vscrub(lo, hi)
    return np.where(lo == 0.0, 0.0, np.nextafter(lo, -_INF)), np.nextafter(hi, _INF)


def vbadd(u, v):
    xlo, xhi = viadd(u[0], u[1], v[0], v[1])
    ylo, yhi = viadd(u[2], u[3], v[2], v[3])
    return (xlo, xhi, ylo, yhi)


def vbmul(u, v):
    rlo1, rhi1 = vimul(u[0], u[1], v[0], v[1])
    rlo2, rhi2 = vimul(u[2], u[3], v[2], v[3])
    xlo, xhi = visub(rlo1, rhi1, rlo2, rhi2)
    ilo1, ihi1 = vimul(u[0], u[1], v[2], v[3])
    ilo2, ihi2 = vimul(u[2], u[3], v[0], v[1])
    ylo, yhi = viadd(ilo1, ihi1, ilo2, ihi2)
    return (xlo, xhi, ylo, yhi)


def vbsquare(u):
    slo1, shi1 = visq(u[0], u[1])
    slo2, shi2 = visq(u[2], u[3])
    xlo, xhi = visub(slo1, shi1, slo2, shi2)
    plo, phi = vimul(u[0], u[1], u[2], u[3])
    ylo, yhi = viadd(plo, phi, plo, phi)
    return (xlo, xhi, ylo, yhi)


def vbabs2(u, center):
    """Lower/upper arrays for |z - c|^2 over rectangles u; c a scalar box."""
    c = np.float64
    dxlo, dxhi = visub(u[0], u[1], c(center[0]), c(center[1]))
    dylo, dyhi = visub(u[2], u[3], c(center[2]), c(center[3]))
    sxlo, sxhi = visq(dxlo, dxhi)
    sylo, syhi = visq(dylo, dyhi)
    return viadd(sxlo, sxhi, sylo, syhi)


# ---------------------------------------------------------------------------
# public dataclasses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """Closed real interval with outward-rounded endpoints."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        if isinstance(x, Fraction):
            return Fraction(self.lo) <= x <= Fraction(self.hi)
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class IntervalBox:
    """Axis-aligned rectangle in the complex plane, outward-rounded."""

    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float

    def __post_init__(self):
        if not (self.re_lo <= self.re_hi and self.im_lo <= self.im_hi):
            raise ValueError(f"empty box {self.as_tuple()}")

    @classmethod
    def from_tuple(cls, t) -> "IntervalBox":
        return cls(t[0], t[1], t[2], t[3])

    @classmethod
    def point(cls, re, im) -> "IntervalBox":
        """Tight enclosure of an exact point given as rationals/floats."""
        r = enclose_fraction(re)
        i = enclose_fraction(im)
        return cls(r[0], r[1], i[0], i[1])

    def as_tuple(self):
        return (self.re_lo, self.re_hi, self.im_lo, self.im_hi)

    @property
    def is_finite(self) -> bool:
        return all(map(math.isfinite, self.as_tuple()))

    def contains_complex(self, z: complex) -> bool:
        return (self.re_lo <= z.real <= self.re_hi
                and self.im_lo <= z.imag <= self.im_hi)

    def contains_exact(self, re, im) -> bool:
        return (Fraction(self.re_lo) <= Fraction(re) <= Fraction(self.re_hi)
                and Fraction(self.im_lo) <= Fraction(im) <= Fraction(self.im_hi))

    def midpoint(self) -> complex:
        return complex(0.5 * (self.re_lo + self.re_hi),
                       0.5 * (self.im_lo + self.im_hi))

    def diameter_bound(self) -> float:
        """Upper bound for the Euclidean diameter."""
        w = self.re_hi - self.re_lo
        h = self.im_hi - self.im_lo
        return isqrt_hi(_nextafter(w * w + h * h, _INF))


def eval_enclosure(poly, box: IntervalBox) -> IntervalBox:
    """Certified image rectangle: contains {f(z) : z in box}.

    ``poly`` is anything exposing ``interval_coefficients()`` returning
    coefficient rectangles from the leading term down (see PolynomialMap).
    Overflow saturates to infinite bounds rather than raising.
    """
    return IntervalBox.from_tuple(bhorner(poly.interval_coefficients(), box.as_tuple()))

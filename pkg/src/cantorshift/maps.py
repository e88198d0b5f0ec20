"""Polynomial map model: exact coefficients, certified critical points,
escape radius, and the restriction-hypothesis validator.

Coefficients are exact Gaussian rationals (decimal-string real/imaginary
parts), converted once to outward-rounded interval rectangles.  Keeping the
exact values around buys two things: bit-reproducible float enclosures on
any platform, and exact orbit arithmetic wherever a question (escape,
periodicity, critical hits) can be decided by rational computation alone.

Critical points are derived rigorously: exact square-free decomposition of
f' over the rationals fixes every multiplicity, exact rational roots are
divided out where they exist, and the remaining simple roots are certified
with a Krawczyk test around Durand-Kerner approximations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction

import numpy as np

from .errors import PrecisionExceeded
from .intervals import (
    IntervalBox,
    babs2,
    badd,
    bhorner,
    bmul,
    boverlap,
    bsquare,
    enclose_fraction,
    isqrt_hi,
    isub,
    vbadd,
    vbmul,
    vbsquare,
    visub,
)

_MAX_ORBIT_BITS = 2_000_000  # exact-orbit size guard


# ---------------------------------------------------------------------------
# exact Gaussian-rational scalars and polynomials
# ---------------------------------------------------------------------------

QC_ZERO = (Fraction(0), Fraction(0))
QC_ONE = (Fraction(1), Fraction(0))


def parse_exact(s) -> Fraction:
    """Decimal string (or int/Fraction) to an exact rational."""
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    try:
        return Fraction(Decimal(str(s).strip()))
    except InvalidOperation as exc:
        raise ValueError(f"not a decimal number: {s!r}") from exc


def qc_add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def qc_sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def qc_mul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def qc_div(a, b):
    n = b[0] * b[0] + b[1] * b[1]
    if n == 0:
        raise ZeroDivisionError("division by zero Gaussian rational")
    return ((a[0] * b[0] + a[1] * b[1]) / n, (a[1] * b[0] - a[0] * b[1]) / n)


def qc_is_zero(a) -> bool:
    return a[0] == 0 and a[1] == 0


def qc_bits(a) -> int:
    return (a[0].numerator.bit_length() + a[0].denominator.bit_length()
            + a[1].numerator.bit_length() + a[1].denominator.bit_length())


# polynomials are tuples of Gaussian rationals, ascending powers

def p_normalize(p):
    q = list(p)
    while q and qc_is_zero(q[-1]):
        q.pop()
    return tuple(q)


def p_degree(p) -> int:
    return len(p) - 1


def p_derivative(p):
    return tuple((k * c[0], k * c[1]) for k, c in enumerate(p) if k > 0)


def p_eval(p, z):
    acc = QC_ZERO
    for c in reversed(p):
        acc = qc_add(qc_mul(acc, z), c)
    return acc


def p_monic(p):
    p = p_normalize(p)
    lead = p[-1]
    if lead == QC_ONE:
        return p
    return tuple(qc_div(c, lead) for c in p)


def p_divmod(a, b):
    """Exact polynomial division over the Gaussian rationals."""
    a = list(p_normalize(a))
    b = p_normalize(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    db = p_degree(b)
    lead = b[-1]
    q = [QC_ZERO] * max(0, len(a) - db)
    while len(a) - 1 >= db and a:
        k = len(a) - 1 - db
        coef = qc_div(a[-1], lead)
        q[k] = coef
        for i, bc in enumerate(b):
            a[k + i] = qc_sub(a[k + i], qc_mul(coef, bc))
        while a and qc_is_zero(a[-1]):
            a.pop()
    return tuple(q), tuple(a)


def p_gcd(a, b):
    """Monic gcd via Euclid; exact, so termination and result are certain."""
    a, b = p_normalize(a), p_normalize(b)
    while b:
        _, r = p_divmod(a, b)
        a, b = b, p_normalize(r)
    if not a:
        return ()
    return p_monic(a)


def p_sub(a, b):
    n = max(len(a), len(b))
    out = []
    for k in range(n):
        ca = a[k] if k < len(a) else QC_ZERO
        cb = b[k] if k < len(b) else QC_ZERO
        out.append(qc_sub(ca, cb))
    return p_normalize(tuple(out))


def squarefree_decomposition(p):
    """Yun's algorithm: [(g_1, 1), (g_2, 2), ...] with the g_i monic,
    square-free, pairwise coprime, and p = lead * prod g_i^i."""
    p = p_monic(p)
    if p_degree(p) < 1:
        return []
    dp = p_derivative(p)
    a = p_gcd(p, dp)
    b, _ = p_divmod(p, a)
    c, _ = p_divmod(dp, a)
    d = p_sub(c, p_derivative(b))
    out = []
    i = 1
    while p_degree(b) > 0:
        a = p_gcd(b, d)
        if p_degree(a) > 0:
            out.append((p_monic(a), i))
        b, _ = p_divmod(b, a)
        c, _ = p_divmod(d, a)
        d = p_sub(c, p_derivative(b))
        i += 1
    return out


def _synthetic_divide(p, root):
    """Divide p by (z - root); remainder must be exactly zero."""
    out = [QC_ZERO] * (len(p) - 1)
    carry = QC_ZERO
    for k in range(len(p) - 1, 0, -1):
        carry = qc_add(p[k], qc_mul(carry, root))
        out[k - 1] = carry
    rem = qc_add(p[0], qc_mul(carry, root))
    if not qc_is_zero(rem):
        raise ArithmeticError("synthetic division left a nonzero remainder")
    return tuple(out)


def _small_divisors(n, cap=4000):
    n = abs(n)
    if n == 0:
        return [1]
    out = []
    d = 1
    while d * d <= n and len(out) < cap:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    if d * d <= n:
        return None  # too many divisors to enumerate; caller falls back
    return sorted(out)


def _rational_roots(p):
    """Exact rational roots of a real-rational square-free polynomial.

    Returns (roots, quotient).  Gives up (empty extraction) whenever the
    integerized coefficients are too large to enumerate divisors for; the
    numeric path then handles every root.
    """
    if any(c[1] != 0 for c in p):
        return [], p
    roots = []
    # peel off zero roots first
    while len(p) > 1 and qc_is_zero(p[0]):
        roots.append(Fraction(0))
        p = p[1:]
    if p_degree(p) < 1:
        return roots, p
    denoms = 1
    for c in p:
        denoms = denoms * c[0].denominator // math.gcd(denoms, c[0].denominator)
    ints = [int(c[0] * denoms) for c in p]
    if abs(ints[0]) > 10**12 or abs(ints[-1]) > 10**12:
        return roots, p
    num_divs = _small_divisors(ints[0])
    den_divs = _small_divisors(ints[-1])
    if num_divs is None or den_divs is None:
        return roots, p
    candidates = set()
    for a in num_divs:
        for b in den_divs:
            candidates.add(Fraction(a, b))
            candidates.add(Fraction(-a, b))
    for cand in sorted(candidates):
        while qc_is_zero(p_eval(p, (cand, Fraction(0)))):
            roots.append(cand)
            p = _synthetic_divide(p, (cand, Fraction(0)))
            if p_degree(p) < 1:
                return roots, p
    return roots, p


def _durand_kerner(p, rounds=300):
    """Float approximations to all roots of a monic polynomial (complex)."""
    n = p_degree(p)
    coeffs = [complex(float(c[0]), float(c[1])) for c in p]
    zs = [(0.4 + 0.9j) ** k for k in range(n)]
    for _ in range(rounds):
        moved = 0.0
        for i in range(n):
            num = coeffs[-1]
            for c in reversed(coeffs[:-1]):
                num = num * zs[i] + c
            den = 1.0 + 0.0j
            for j in range(n):
                if j != i:
                    den *= zs[i] - zs[j]
            if den == 0:
                den = 1e-300
            step = num / den
            zs[i] -= step
            moved = max(moved, abs(step))
        if moved < 1e-14:
            break
    return zs


def _coeff_boxes_desc(p):
    out = []
    for c in reversed(p):
        r = enclose_fraction(c[0])
        i = enclose_fraction(c[1])
        out.append((r[0], r[1], i[0], i[1]))
    return tuple(out)


def _box_mag_hi(b):
    """Upper bound of |z| over a rectangle."""
    mr = max(abs(b[0]), abs(b[1]))
    mi = max(abs(b[2]), abs(b[3]))
    return isqrt_hi(math.nextafter(mr * mr + mi * mi, math.inf))


def _exact_point_box(z):
    r = enclose_fraction(z[0])
    i = enclose_fraction(z[1])
    return (r[0], r[1], i[0], i[1])


def _krawczyk_certify(g, gp_boxes, approx, widths=(1e-8, 1e-10, 1e-6, 1e-4, 1e-2)):
    """Certify a unique simple root of g near ``approx``.

    Krawczyk test on a rectangle X around the approximation:
        K(X) = m - Y*g(m) + (1 - Y*g'(X)) * (X - m)
    with m the midpoint (an exact rational point, so g(m) is evaluated
    exactly before enclosing) and Y a float inverse of g'(m).  K(X)
    contained in the interior of X together with |1 - Y*g'(X)| < 1
    certifies existence and uniqueness; the box is then contracted by
    iterating X <- K(X) /\\ X.
    """
    gp = p_derivative(g)
    for w in widths:
        X = (approx.real - w, approx.real + w, approx.imag - w, approx.imag + w)
        certified = False
        for _ in range(80):
            m_re = Fraction(0.5 * (X[0] + X[1]))
            m_im = Fraction(0.5 * (X[2] + X[3]))
            gm = p_eval(g, (m_re, m_im))
            gm_box = _exact_point_box(gm)
            gpm = p_eval(gp, (m_re, m_im))
            gpm_c = complex(float(gpm[0]), float(gpm[1]))
            if gpm_c == 0:
                break
            Yc = 1.0 / gpm_c
            Y = (Yc.real, Yc.real, Yc.imag, Yc.imag)
            GpX = bhorner(gp_boxes, X)
            YG = bmul(Y, GpX)
            e_re = isub((1.0, 1.0), (YG[0], YG[1]))
            e_im = isub((0.0, 0.0), (YG[2], YG[3]))
            E_box = (e_re[0], e_re[1], e_im[0], e_im[1])
            mid_box = (float(m_re), float(m_re), float(m_im), float(m_im))
            Xm = (isub((X[0], X[1]), (mid_box[0], mid_box[1])),
                  isub((X[2], X[3]), (mid_box[2], mid_box[3])))
            Xm_box = (Xm[0][0], Xm[0][1], Xm[1][0], Xm[1][1])
            Ygm = bmul(Y, gm_box)
            K = badd(badd((mid_box[0], mid_box[1], mid_box[2], mid_box[3]),
                          (-Ygm[1], -Ygm[0], -Ygm[3], -Ygm[2])),
                     bmul(E_box, Xm_box))
            inside = (X[0] < K[0] and K[1] < X[1] and X[2] < K[2] and K[3] < X[3])
            contracting = _box_mag_hi(E_box) < 1.0
            if inside and contracting:
                certified = True
            if not certified:
                break
            newX = (max(X[0], K[0]), min(X[1], K[1]), max(X[2], K[2]), min(X[3], K[3]))
            if newX[0] > newX[1] or newX[2] > newX[3]:
                break
            if (newX[1] - newX[0] > 0.96 * (X[1] - X[0])
                    and newX[3] - newX[2] > 0.96 * (X[3] - X[2])):
                X = newX
                break
            X = newX
        if certified:
            return IntervalBox.from_tuple(X)
    raise PrecisionExceeded(f"could not certify a simple root near {approx}")


@dataclass(frozen=True)
class CriticalPoint:
    """A certified critical point: enclosure, multiplicity in f', and the
    exact rational value when one exists (used for exact orbit walks)."""

    enclosure: IntervalBox
    multiplicity: int
    exact: tuple = None  # (Fraction re, Fraction im) or None

    def point_str(self) -> str:
        if self.exact is not None:
            return f"{self.exact[0]}{'+' if self.exact[1] >= 0 else ''}{self.exact[1]}i"
        m = self.enclosure.midpoint()
        return f"~{m.real!r}{'+' if m.imag >= 0 else ''}{m.imag!r}i"


def certified_roots(poly):
    """Certified root enclosures of an exact-coefficient polynomial.

    Returns (enclosure, multiplicity, exact-or-None) triples covering every
    root: multiplicities come from exact square-free decomposition (so they
    sum to the degree by construction), exact rational roots are divided
    out where enumerable, and the remaining simple roots of each
    square-free factor are certified by the Krawczyk test.  Enclosures are
    checked pairwise disjoint; results are in canonical (re, im) order.
    """
    poly = p_monic(poly)
    found = []
    for factor, mult in squarefree_decomposition(poly):
        rational, rest = _rational_roots(factor)
        for r in rational:
            found.append((IntervalBox.point(r, Fraction(0)), mult, (r, Fraction(0))))
        if p_degree(rest) >= 1:
            gp_boxes = _coeff_boxes_desc(p_derivative(rest))
            for approx in _durand_kerner(rest):
                box = _krawczyk_certify(rest, gp_boxes, approx)
                found.append((box, mult, None))
    total = sum(m for _, m, _ in found)
    if total != p_degree(poly):
        raise PrecisionExceeded(
            f"certified {total} roots (with multiplicity), expected {p_degree(poly)}")
    for a in range(len(found)):
        for b in range(a + 1, len(found)):
            if boverlap(found[a][0].as_tuple(), found[b][0].as_tuple()):
                raise PrecisionExceeded("root enclosures overlap")
    found.sort(key=lambda t: (t[0].re_lo, t[0].im_lo))
    return tuple(found)


def derive_critical_points(pmap: "PolynomialMap"):
    """Certified enclosures of all roots of f', with multiplicities
    summing to d - 1."""
    roots = certified_roots(p_derivative(pmap.exact_coefficients))
    found = [CriticalPoint(box, mult, exact) for box, mult, exact in roots]
    if sum(c.multiplicity for c in found) != pmap.degree - 1:
        raise PrecisionExceeded(
            f"critical multiplicities do not sum to {pmap.degree - 1}")
    return tuple(found)


# ---------------------------------------------------------------------------
# the map and domain types
# ---------------------------------------------------------------------------

class PolynomialMap:
    """Monic polynomial with exact Gaussian-rational coefficients."""

    def __init__(self, coefficients):
        coeffs = tuple((parse_exact(re), parse_exact(im)) for re, im in coefficients)
        if len(coeffs) < 3:
            raise ValueError("degree must be at least 2")
        if coeffs[-1] != QC_ONE:
            raise ValueError("leading coefficient must be exactly 1")
        self.exact_coefficients = coeffs
        self.degree = len(coeffs) - 1
        self._interval_coeffs = _coeff_boxes_desc(coeffs)
        asc = list(reversed(self._interval_coeffs))  # ascending powers
        self._nonzero_boxes = [None if qc_is_zero(coeffs[k]) else asc[k]
                               for k in range(self.degree)]
        deriv = p_derivative(coeffs)
        deriv_desc = _coeff_boxes_desc(deriv)
        self._deriv_boxes_desc = tuple(
            None if qc_is_zero(deriv[len(deriv) - 1 - k]) else deriv_desc[k]
            for k in range(len(deriv)))
        self._criticals = None

    @classmethod
    def from_real_strings(cls, strings):
        return cls([(s, "0") for s in strings])

    def interval_coefficients(self):
        """Coefficient rectangles, leading term first (Horner order)."""
        return self._interval_coeffs

    @property
    def critical_points(self):
        if self._criticals is None:
            self._criticals = derive_critical_points(self)
        return self._criticals

    def eval_exact(self, z):
        """Exact image of an exact point; z is a (Fraction, Fraction) pair."""
        return p_eval(self.exact_coefficients, z)

    def eval_box(self, box4):
        """Raw-tuple enclosure of the image of a rectangle (hot path).

        Monic Horner with two cheap sharpenings: zero coefficients skip
        their addition, and the first accumulated product acc*z with acc
        still equal to z uses the dedicated square (which keeps the signs
        of x^2 and y^2, noticeably tightening iterated images).
        """
        acc = box4
        c = self._nonzero_boxes[self.degree - 1]
        if c is not None:
            acc = badd(acc, c)
        for k in range(self.degree - 2, -1, -1):
            acc = bsquare(acc) if acc is box4 else bmul(acc, box4)
            c = self._nonzero_boxes[k]
            if c is not None:
                acc = badd(acc, c)
        return acc

    def eval_boxes(self, boxes):
        """Vectorized eval_box: ``boxes`` is a 4-tuple of ndarrays
        (re_lo, re_hi, im_lo, im_hi); same Horner scheme, same rounding."""
        acc = boxes
        c = self._nonzero_boxes[self.degree - 1]
        if c is not None:
            acc = vbadd(acc, c)
        for k in range(self.degree - 2, -1, -1):
            acc = vbsquare(acc) if acc is boxes else vbmul(acc, boxes)
            c = self._nonzero_boxes[k]
            if c is not None:
                acc = vbadd(acc, c)
        return acc

    def eval_deriv_boxes(self, boxes):
        """Vectorized enclosure of f' over rectangles (generic Horner; the
        derivative is not monic)."""
        acc = self._deriv_boxes_desc[0]
        for c in self._deriv_boxes_desc[1:]:
            acc = vbmul(acc, boxes)
            if c is not None:
                acc = vbadd(acc, c)
        return acc

    def eval_boxes_sharp(self, boxes):
        """Vectorized enclosure intersecting plain Horner with the centered
        mean-value form f(m) + f'(B) * (B - m).

        Plain interval Horner cannot see derivative cancellation, so near a
        critical point its relative overestimation diverges; the centered
        form is quadratically sharp exactly there.  Both forms enclose the
        true image, hence so does their intersection.
        """
        plain = self.eval_boxes(boxes)
        mx = 0.5 * (boxes[0] + boxes[1])
        my = 0.5 * (boxes[2] + boxes[3])
        at_mid = self.eval_boxes((mx, mx, my, my))
        fp = self.eval_deriv_boxes(boxes)
        dlo, dhi = visub(boxes[0], boxes[1], mx, mx)
        elo, ehi = visub(boxes[2], boxes[3], my, my)
        centered = vbadd(at_mid, vbmul(fp, (dlo, dhi, elo, ehi)))
        return (np.maximum(plain[0], centered[0]),
                np.minimum(plain[1], centered[1]),
                np.maximum(plain[2], centered[2]),
                np.minimum(plain[3], centered[3]))

    def derivative_coefficients(self):
        return p_derivative(self.exact_coefficients)

    def describe(self) -> str:
        terms = []
        for k in range(self.degree, -1, -1):
            re, im = self.exact_coefficients[k]
            if re == 0 and im == 0:
                continue
            if im == 0:
                c = str(re)
            elif re == 0:
                c = f"{im}i"
            else:
                c = f"({re}{'+' if im >= 0 else ''}{im}i)"
            terms.append(f"{c}*z^{k}" if k else c)
        return " + ".join(terms) if terms else "0"

    def __repr__(self):
        return f"PolynomialMap(degree={self.degree})"


def escape_radius(pmap: PolynomialMap) -> Fraction:
    """Safe escape radius R = 1 + sum |a_k| over non-leading coefficients.

    Uses |re| + |im| as the (exact, rational) bound for each modulus, so R
    stays an exact rational; |z| > R implies |f(z)| > |z|, hence the closed
    disk of radius R contains the filled-in set of the global polynomial.
    """
    total = Fraction(0)
    for re, im in pmap.exact_coefficients[:-1]:
        total += abs(re) + abs(im)
    return 1 + total


class DomainDisk:
    """The round domain U: exact center and radius."""

    def __init__(self, center, radius):
        self.center = (parse_exact(center[0]), parse_exact(center[1]))
        self.radius = parse_exact(radius)
        if self.radius <= 0:
            raise ValueError("disk radius must be positive")
        cr = enclose_fraction(self.center[0])
        ci = enclose_fraction(self.center[1])
        self.center_box = (cr[0], cr[1], ci[0], ci[1])
        r2 = self.radius * self.radius
        self.r2 = r2
        lo, hi = enclose_fraction(r2)
        self.r2_lo = lo  # float <= exact R^2
        self.r2_hi = hi  # float >= exact R^2

    @classmethod
    def auto(cls, pmap: PolynomialMap) -> "DomainDisk":
        return cls(("0", "0"), escape_radius(pmap))

    def classify_exact(self, z) -> str:
        """'in' / 'out' / 'boundary' for an exact point, decided exactly."""
        dx = z[0] - self.center[0]
        dy = z[1] - self.center[1]
        d2 = dx * dx + dy * dy
        if d2 < self.r2:
            return "in"
        if d2 > self.r2:
            return "out"
        return "boundary"

    def __repr__(self):
        return f"DomainDisk(center=({self.center[0]}, {self.center[1]}), radius={self.radius})"


# ---------------------------------------------------------------------------
# restriction-hypothesis validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RestrictionReport:
    """Outcome of checking the polynomial-like restriction hypotheses."""

    n_components: int
    branch_degrees: tuple
    compactly_contained: bool
    critical_escape_flags: tuple  # one dict per critical point
    periodic_critical_flag: bool
    hypothesis_ok: bool
    warnings: tuple = ()

    def summary_lines(self):
        lines = [
            f"components N = {self.n_components}, branch degrees = {list(self.branch_degrees)}",
            f"U' compactly contained in U: {self.compactly_contained}",
        ]
        for st in self.critical_escape_flags:
            lines.append(
                f"critical {st['point']} (mult {st['multiplicity']}): "
                f"in U' = {st['in_restriction']}, orbit = {st['status']}"
                + (f" (step {st['escape_step']})" if st["escape_step"] is not None else "")
                + (" [periodic]" if st["periodic"] else ""))
        lines.append(f"hypothesis_ok = {self.hypothesis_ok}")
        for w in self.warnings:
            lines.append(f"warning: {w}")
        return lines


def _exact_orbit_status(pmap, disk, start, horizon):
    """Walk an exact orbit; returns (status, escape_step, periodic).

    Rational orbit points grow by a factor of the degree in bit size per
    step; once they pass the size guard the walk hands the current exact
    point to the interval path for the remaining steps (losing only the
    ability to detect an exact period further out).
    """
    z = start
    seen = {z: 0}
    for step in range(horizon + 1):
        side = disk.classify_exact(z)
        if side == "out":
            return "escapes", step, False
        if side == "boundary":
            return "undecided", None, False
        if qc_bits(z) > _MAX_ORBIT_BITS:
            status, esc, _ = _interval_orbit_status(
                pmap, disk, IntervalBox.point(z[0], z[1]), horizon - step)
            if esc is not None:
                esc += step
            return status, esc, False
        z = pmap.eval_exact(z)
        if z in seen:
            return "in_Uprime", None, True
        seen[z] = step + 1
    return "in_Uprime", None, False


def _interval_orbit_status(pmap, disk, box, horizon):
    cur = box.as_tuple()
    for step in range(horizon + 1):
        d2 = babs2(cur, disk.center_box)
        if d2[0] > disk.r2_hi:
            return "escapes", step, False
        if not d2[1] < disk.r2_lo:
            return "undecided", None, False
        if cur[1] - cur[0] > 0.25 or cur[3] - cur[2] > 0.25:
            return "undecided", None, False
        cur = pmap.eval_box(cur)
    return "in_Uprime", None, False


def validate_restriction(pmap: PolynomialMap, disk: DomainDisk, level1, horizon: int = 20) -> RestrictionReport:
    """Check the generalized polynomial-like hypotheses against computed
    level-1 data.

    ``level1`` is the list of level-1 components (each with a ``cover``,
    ``local_degree`` and ``contains_critical``).  Checks: N >= 2; certified
    separation of the level-1 cover from the boundary circle of U; branch
    degrees summing to the map degree; and per-critical-point orbit status.
    An orbit that can be neither certified to escape nor certified
    non-periodic within the horizon yields "undecided" and a warning, not a
    failure.
    """
    n = len(level1)
    degrees = tuple(c.local_degree for c in level1)
    warnings = []

    compact = True
    for comp in level1:
        for r, i, j in comp.cover.iter_cells():
            cell = comp.cover.frame.cell_bounds(i, j, r)
            d2 = babs2(cell, disk.center_box)
            if not d2[1] < disk.r2_lo:
                compact = False
                break
        if not compact:
            break

    in_restriction_by_crit = {}
    for idx, comp in enumerate(level1):
        for cidx in comp.contains_critical:
            in_restriction_by_crit[cidx] = idx

    crit_status = []
    periodic_flag = False
    violation = False
    for cidx, crit in enumerate(pmap.critical_points):
        if cidx in in_restriction_by_crit:
            in_restr = True
        else:
            overlaps = any(comp.cover.overlapping_cells(crit.enclosure.as_tuple())
                           for comp in level1)
            in_restr = False if not overlaps else None
        if crit.exact is not None:
            status, esc_step, periodic = _exact_orbit_status(pmap, disk, crit.exact, horizon)
        else:
            status, esc_step, periodic = _interval_orbit_status(pmap, disk, crit.enclosure, horizon)
        if periodic:
            periodic_flag = True
        if in_restr and (status == "escapes" or periodic):
            violation = True
        if in_restr and status == "undecided":
            warnings.append(
                f"critical point {crit.point_str()} in U': orbit neither escapes nor is "
                f"certified non-periodic within horizon {horizon}; proceeding")
        if in_restr is None:
            warnings.append(
                f"critical point {crit.point_str()}: membership in U' undecided at this resolution")
        crit_status.append({
            "point": crit.point_str(),
            "multiplicity": crit.multiplicity,
            "in_restriction": in_restr,
            "status": status,
            "escape_step": esc_step,
            "periodic": periodic,
        })

    degree_sum_ok = sum(degrees) == pmap.degree
    ok = (n >= 2 and compact and degree_sum_ok and not violation
          and all(s["in_restriction"] is not None for s in crit_status))
    return RestrictionReport(
        n_components=n,
        branch_degrees=degrees,
        compactly_contained=compact,
        critical_escape_flags=tuple(crit_status),
        periodic_critical_flag=periodic_flag,
        hypothesis_ok=ok,
        warnings=tuple(warnings),
    )

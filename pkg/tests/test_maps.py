"""Map model: exact parsing, critical points, escape radius, validation."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cantorshift import (
    DomainDisk,
    PolynomialMap,
    ResolutionPolicy,
    build_tree,
    derive_critical_points,
    escape_radius,
    validate_restriction,
)
from cantorshift.intervals import babs2
from cantorshift.maps import certified_roots, p_derivative, p_eval, squarefree_decomposition

from conftest import CUBIC_B_IM, CUBIC_B_RE


def test_map_requires_monic_and_degree_two():
    with pytest.raises(ValueError):
        PolynomialMap([("1", "0"), ("2", "0"), ("3", "0")])  # lead 3
    with pytest.raises(ValueError):
        PolynomialMap([("1", "0"), ("1", "0")])  # degree 1


def test_exact_decimal_parsing():
    pmap = PolynomialMap([("0.1", "-0.25"), ("0", "0"), ("1", "0")])
    assert pmap.exact_coefficients[0] == (Fraction(1, 10), Fraction(-1, 4))


def test_critical_points_quadratic():
    pmap = PolynomialMap([("-6", "0"), ("0", "0"), ("1", "0")])
    crits = pmap.critical_points
    assert len(crits) == 1
    assert crits[0].multiplicity == 1
    assert crits[0].exact == (Fraction(0), Fraction(0))


def test_critical_points_pure_cube():
    pmap = PolynomialMap([("0", "0"), ("0", "0"), ("0", "0"), ("1", "0")])
    crits = pmap.critical_points
    assert len(crits) == 1
    assert crits[0].multiplicity == 2
    assert crits[0].exact == (Fraction(0), Fraction(0))


def test_critical_points_cubic_family():
    pmap = PolynomialMap([("0.375", "0"), ("-3", "0"), ("0", "0"), ("1", "0")])
    crits = pmap.critical_points
    assert [c.multiplicity for c in crits] == [1, 1]
    assert {c.exact for c in crits} == {(Fraction(-1), Fraction(0)),
                                        (Fraction(1), Fraction(0))}
    # enclosures are disjoint and contain the exact roots
    a, b = crits
    assert a.enclosure.re_hi < b.enclosure.re_lo


def test_certified_roots_irrational():
    # z^2 - 2: roots +-sqrt(2), certified without exact representation
    roots = certified_roots(((Fraction(-2), Fraction(0)),
                             (Fraction(0), Fraction(0)),
                             (Fraction(1), Fraction(0))))
    assert len(roots) == 2
    import math
    vals = sorted((r[0].re_lo + r[0].re_hi) / 2 for r in roots)
    assert abs(vals[0] + math.sqrt(2)) < 1e-9
    assert abs(vals[1] - math.sqrt(2)) < 1e-9
    assert all(m == 1 for _, m, _ in roots)


def test_critical_multiplicities_sum():
    @given(st.lists(st.integers(-3, 3), min_size=2, max_size=5))
    @settings(max_examples=40, deadline=None)
    def run(coeffs):
        pmap = PolynomialMap([(str(c), "0") for c in coeffs] + [("1", "0")])
        crits = derive_critical_points(pmap)
        assert sum(c.multiplicity for c in crits) == pmap.degree - 1
    run()


def test_certified_roots_fuzz_against_numeric():
    # random small-integer polynomials: certified enclosures must cover the
    # numerically computed roots with matching total multiplicity (or the
    # separation must honestly fail)
    import numpy as np
    from cantorshift.errors import PrecisionExceeded

    rng = np.random.default_rng(8)
    for _ in range(60):
        deg = int(rng.integers(2, 6))
        ints = rng.integers(-4, 5, size=deg)
        coeffs = tuple((Fraction(int(c)), Fraction(0)) for c in ints) + ((Fraction(1), Fraction(0)),)
        try:
            roots = certified_roots(coeffs)
        except PrecisionExceeded:
            continue  # clustered roots may defeat separation; an honest outcome
        assert sum(m for _, m, _ in roots) == deg
        numeric = np.roots([1.0] + [float(c) for c in ints[::-1]])
        for z in numeric:
            hit = any(box.re_lo - 1e-7 <= z.real <= box.re_hi + 1e-7
                      and box.im_lo - 1e-7 <= z.imag <= box.im_hi + 1e-7
                      for box, _, _ in roots)
            assert hit, f"numeric root {z} not covered for {ints}"


def test_escape_radius_values():
    assert escape_radius(PolynomialMap([("-6", "0"), ("0", "0"), ("1", "0")])) == 7
    assert escape_radius(PolynomialMap(
        [("0", "0"), ("0", "0"), ("0", "0"), ("1", "0")])) == 1
    assert escape_radius(PolynomialMap(
        [("0.1", "0"), ("-3", "0"), ("0", "0"), ("1", "0")])) == Fraction(41, 10)


def test_escape_radius_expels_circle_samples():
    # interval check of |f(z)| > |z| on samples of |z| = 1.05 R
    for coeffs in ([("-6", "0"), ("0", "0"), ("1", "0")],
                   [("0.1", "0"), ("-3", "0"), ("0", "0"), ("1", "0")],
                   [("0", "0"), ("0", "0"), ("0", "0"), ("1", "0")]):
        pmap = PolynomialMap(coeffs)
        r = float(escape_radius(pmap)) * 1.05
        for t in range(16):
            import cmath
            z = r * cmath.exp(2j * cmath.pi * t / 16)
            e = pmap.eval_box((z.real, z.real, z.imag, z.imag))
            d2 = babs2(e, (0.0, 0.0, 0.0, 0.0))
            assert d2[0] > r * r


def test_squarefree_decomposition_multiplicity():
    # (z - 1)^2 (z + 2) = z^3 - 3z + 2
    poly = ((Fraction(2), Fraction(0)), (Fraction(-3), Fraction(0)),
            (Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)))
    parts = squarefree_decomposition(poly)
    assert sorted(m for _, m in parts) == [1, 2]
    for factor, mult in parts:
        root = Fraction(1) if mult == 2 else Fraction(-2)
        assert p_eval(factor, (root, Fraction(0))) == (0, 0)


def _level1(pmap, disk, depth=1):
    policy = ResolutionPolicy(max_resolution=24, max_boxes=2_000_000)
    tree = build_tree(pmap, disk, depth, policy=policy, validate=False)
    return tree.levels[1]


def test_validate_quadratic_hypothesis_ok():
    pmap = PolynomialMap([("-6", "0"), ("0", "0"), ("1", "0")])
    disk = DomainDisk(("0", "0"), "4")
    report = validate_restriction(pmap, disk, _level1(pmap, disk), horizon=20)
    assert report.n_components == 2
    assert sorted(report.branch_degrees) == [1, 1]
    assert report.compactly_contained
    assert report.hypothesis_ok
    st0 = report.critical_escape_flags[0]
    assert st0["in_restriction"] is False
    assert st0["status"] == "escapes"


def test_validate_fixed_critical_point_fails():
    # z^2 on the disk of radius 2: the critical point 0 is a fixed point
    pmap = PolynomialMap([("0", "0"), ("0", "0"), ("1", "0")])
    disk = DomainDisk(("0", "0"), "2")
    report = validate_restriction(pmap, disk, _level1(pmap, disk), horizon=20)
    assert report.periodic_critical_flag
    assert not report.hypothesis_ok
    assert report.n_components == 1


def test_validate_boundary_contact_fails_containment():
    # z^2 - 6 on the disk of radius 3: the preimage touches |z| = 3 at +-3
    pmap = PolynomialMap([("-6", "0"), ("0", "0"), ("1", "0")])
    disk = DomainDisk(("0", "0"), "3")
    report = validate_restriction(pmap, disk, _level1(pmap, disk), horizon=20)
    assert not report.compactly_contained
    assert not report.hypothesis_ok


def test_validate_cubic_instance():
    pmap = PolynomialMap([(CUBIC_B_RE, CUBIC_B_IM), ("-3", "0"),
                          ("0", "0"), ("1", "0")])
    disk = DomainDisk(("0", "0"), "3")
    report = validate_restriction(pmap, disk, _level1(pmap, disk), horizon=20)
    assert report.n_components == 2
    assert sorted(report.branch_degrees) == [1, 2]
    assert report.compactly_contained
    assert report.hypothesis_ok
    by_point = {st["point"]: st for st in report.critical_escape_flags}
    assert by_point["-1+0i"]["in_restriction"] is False
    assert by_point["-1+0i"]["status"] == "escapes"
    assert by_point["1+0i"]["in_restriction"] is True
    assert by_point["1+0i"]["status"] == "in_Uprime"

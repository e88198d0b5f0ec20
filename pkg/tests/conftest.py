"""Shared fixtures: the two reference instances, built once per session.

The quadratic z^2 - 6 on the disk of radius 4 is the critical-point-free
Cantor case.  The cubic z^3 - 3z + b on the disk of radius 3 is the
one-critical-chain case: b is tuned by Newton search (frozen to 40+
digits) so that the orbit of the critical point +1 lands after two steps
on a repelling fixed point q inside the *degree-one* level-1 component,
while -1 escapes immediately.  The landing component matters: for real b
the bounded critical orbit can never leave the critical component, its
level-1 factor then rides along the whole image chain, and the chain
fibers stabilize at 4 instead of 2; a complex parameter is what makes the
tail factor trivial.
"""

import os
import time

import pytest

from cantorshift import (
    DomainDisk,
    PolynomialMap,
    ResolutionPolicy,
    build_tree,
)
from cantorshift.coding import assign_symbols

# Newton-tuned: 1 -> b-2 -> q with q = -2.30746...-0.08766...i a repelling
# fixed point (multiplier ~ 13) in the univalent level-1 component
CUBIC_B_RE = "3.0027928292887019597148481277688810288243"
CUBIC_B_IM = "1.0489775926434714088283088554051079718497"

QUAD_DEPTH = 10
# depth 6 keeps the suite fast; export CANTORSHIFT_ACCEPTANCE_CUBIC_DEPTH=7
# (or 8, with minutes of runtime and a few million boxes) to push the
# exhaustive word checks deeper on bigger machines
CUBIC_DEPTH = int(os.environ.get("CANTORSHIFT_ACCEPTANCE_CUBIC_DEPTH", "6"))


@pytest.fixture(scope="session")
def quadratic_map():
    return PolynomialMap([("-6", "0"), ("0", "0"), ("1", "0")])


@pytest.fixture(scope="session")
def quadratic_disk():
    return DomainDisk(("0", "0"), "4")


@pytest.fixture(scope="session")
def quadratic_tree(quadratic_map, quadratic_disk):
    policy = ResolutionPolicy(max_resolution=34, max_boxes=2_000_000)
    t0 = time.time()
    tree = build_tree(quadratic_map, quadratic_disk, QUAD_DEPTH, policy=policy)
    tree.build_seconds = time.time() - t0
    return tree


@pytest.fixture(scope="session")
def quadratic_assignment(quadratic_tree):
    return assign_symbols(quadratic_tree)


@pytest.fixture(scope="session")
def cubic_map():
    return PolynomialMap([(CUBIC_B_RE, CUBIC_B_IM), ("-3", "0"),
                          ("0", "0"), ("1", "0")])


@pytest.fixture(scope="session")
def cubic_disk():
    return DomainDisk(("0", "0"), "3")


@pytest.fixture(scope="session")
def cubic_tree(cubic_map, cubic_disk):
    policy = ResolutionPolicy(max_resolution=44, max_boxes=8_000_000)
    t0 = time.time()
    tree = build_tree(cubic_map, cubic_disk, CUBIC_DEPTH, policy=policy)
    tree.build_seconds = time.time() - t0
    return tree


@pytest.fixture(scope="session")
def cubic_assignment(cubic_tree):
    return assign_symbols(cubic_tree)

"""Finite-depth coding of the component tree by shift-space cylinders.

Each component W of level >= 1 receives a symbol set S(W) inside the
alphabet {0, ..., d-1} with three defining properties:

  * |S(W)| equals the mapping degree of W onto its image;
  * S(W) is contained in S(container(W));
  * over the siblings with a common image component V, the sets S(W)
    partition the whole alphabet.

The assignment is built by induction on the level: level-1 components get
consecutive symbol blocks of sizes d_1, ..., d_N in canonical order, and
at level k the symbols of each parent P are split, per image component V,
into consecutive ascending runs matching the children's degrees in
canonical order.  All free choices are resolved by the canonical component
order, so two runs on the same tree agree byte for byte.

The induced cylinder map c sends a word (e_1, ..., e_k) to the unique
level-k component with image c(e_2, ..., e_k) and e_1 in S(W); fibers of c
realize the counting identity  #fiber(W) = cumulative_degree(W)  at finite
depth.  Words are plain tuples of ints; the shift drops the first symbol
and the prefix map drops the last.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetExceeded, HypothesisViolation, InconsistentTree
from .maps import parse_exact, qc_bits

_MAX_ORBIT_BITS = 2_000_000


@dataclass(frozen=True)
class SymbolAssignment:
    """Symbol sets per component id (level, index); level 0 owns the full
    alphabet."""

    degree: int
    symbols: dict

    def of(self, level: int, index: int) -> tuple:
        if level == 0:
            return tuple(range(self.degree))
        return self.symbols[(level, index)]

    def to_json_dict(self):
        return {
            "degree": self.degree,
            "symbols": {f"{lvl}:{idx}": list(syms)
                        for (lvl, idx), syms in sorted(self.symbols.items())},
        }


def assign_symbols(tree) -> SymbolAssignment:
    """Construct the canonical branch-symbol assignment for a tree.

    Works for any tree exposing ``degree``, ``depth`` and ordered component
    lists with ``container``/``image``/``local_degree`` (geometric trees and
    abstract ones alike).  Raises InconsistentTree when the degree
    bookkeeping cannot be met, which signals a corrupted tree.
    """
    d = tree.degree
    symbols = {}
    if tree.depth < 1:
        return SymbolAssignment(d, symbols)

    # level 1: consecutive blocks of sizes d_1, ..., d_N starting at 0
    next_symbol = 0
    for comp in tree.levels[1]:
        block = tuple(range(next_symbol, next_symbol + comp.local_degree))
        symbols[(1, comp.index)] = block
        next_symbol += comp.local_degree
    if next_symbol != d:
        raise InconsistentTree(
            f"level-1 degrees fill {next_symbol} symbols, alphabet has {d}")

    for k in range(2, tree.depth + 1):
        # group the children of each parent by their image component
        groups = {}
        for comp in tree.levels[k]:
            groups.setdefault((comp.container, comp.image), []).append(comp)
        for (p_idx, v_idx), children in sorted(groups.items()):
            pool = symbols[(k - 1, p_idx)]
            take = 0
            for child in children:  # canonical order within the level list
                run = pool[take:take + child.local_degree]
                if len(run) != child.local_degree:
                    raise InconsistentTree(
                        f"parent {(k - 1, p_idx)} has too few symbols for its "
                        f"children over image {(k - 1, v_idx)}")
                symbols[(k, child.index)] = tuple(run)
                take += child.local_degree
            if take != len(pool):
                raise InconsistentTree(
                    f"children of {(k - 1, p_idx)} over image {(k - 1, v_idx)} "
                    f"use {take} of {len(pool)} symbols")
    return SymbolAssignment(d, symbols)


def _first_symbol_lookup(assignment: SymbolAssignment, tree, level: int) -> dict:
    """(image index, first symbol) -> component index, for one level."""
    table = {}
    for comp in tree.levels[level]:
        for s in assignment.of(level, comp.index):
            key = (comp.image, s)
            if key in table:
                raise InconsistentTree(
                    f"symbol {s} over image {comp.image} is claimed twice at level {level}")
            table[key] = comp.index
    return table


def cylinder_component(assignment: SymbolAssignment, tree, word):
    """The component id c(word) coded by a finite word.

    Recursive in the word suffix: c(()) is the root, and c(w) is the unique
    level-|w| component whose image is c(shift(w)) and whose symbol set
    contains the first letter.  Total and single-valued whenever the
    assignment satisfies the partition property.
    """
    word = tuple(word)
    k = len(word)
    if k > tree.depth:
        raise ValueError(f"word length {k} exceeds tree depth {tree.depth}")
    d = tree.degree
    for s in word:
        if not 0 <= s < d:
            raise ValueError(f"symbol {s} outside alphabet of size {d}")
    if k == 0:
        return (0, 0)
    _, image_idx = cylinder_component(assignment, tree, word[1:])
    first = word[0]
    for comp in tree.levels[k]:
        if comp.image == image_idx and first in assignment.of(k, comp.index):
            return (k, comp.index)
    raise InconsistentTree(
        f"no level-{k} component carries symbol {first} over image {image_idx}")


@dataclass(frozen=True)
class FiberTable:
    """All depth-k words grouped by the component they code."""

    level: int
    degree: int
    words_by_component: dict  # (level, index) -> tuple of words

    def count(self, level: int, index: int) -> int:
        return len(self.words_by_component.get((level, index), ()))

    def to_json_dict(self):
        return {
            "level": self.level,
            "degree": self.degree,
            "fibers": {
                f"{lvl}:{idx}": {
                    "fiber_count": len(words),
                    "fiber_words": ["".join(map(str, w)) if self.degree <= 10
                                    else ",".join(map(str, w)) for w in words],
                }
                for (lvl, idx), words in sorted(self.words_by_component.items())
            },
        }


def _resolve_word(word, lookup, memo):
    """Recursive form of the cylinder map: c(w) from c(shift(w))."""
    hit = memo.get(word)
    if hit is not None:
        return hit
    image_idx = _resolve_word(word[1:], lookup, memo)
    idx = lookup[len(word)].get((image_idx, word[0]))
    if idx is None:
        raise InconsistentTree(
            f"no component for symbol {word[0]} over image {image_idx} "
            f"at level {len(word)}")
    memo[word] = idx
    return idx


def fibers(assignment: SymbolAssignment, tree, k: int, max_words: int = 10_000_000) -> FiberTable:
    """Group all d^k words by coded component, resolving each word through
    the suffix recursion of the cylinder map.

    Per-component counts equal the cumulative degree and every level-k
    component receives at least one word; both facts are consequences of
    the partition property and are re-asserted here.
    """
    d = tree.degree
    if d ** k > max_words:
        raise BudgetExceeded(f"{d}^{k} words exceed the enumeration budget")
    lookup = [None] + [_first_symbol_lookup(assignment, tree, lvl)
                       for lvl in range(1, k + 1)]
    memo = {(): 0}
    by_comp = {}
    for word in itertools.product(range(d), repeat=k):
        idx = _resolve_word(word, lookup, memo)
        by_comp.setdefault((k, idx), []).append(word)
    table = FiberTable(k, d, {cid: tuple(ws) for cid, ws in by_comp.items()})
    for comp in tree.levels[k]:
        n = table.count(k, comp.index)
        if n != comp.cumulative_degree:
            raise InconsistentTree(
                f"fiber of {(k, comp.index)} has {n} words, expected "
                f"{comp.cumulative_degree}")
    return table


# ---------------------------------------------------------------------------
# chi: maximal local degree along an orbit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChiResult:
    """Product of local degrees at certified critical hits along an orbit.

    ``certified`` status means the value is the full supremum: either the
    restriction has no critical points, or the degree budget 2^(d-N) is
    exhausted (no further hit can occur), or the orbit left the domain.
    Otherwise the value is a lower bound honest up to the horizon walked.
    """

    value: int
    status: str  # "certified" | "lower_bound"
    horizon: int
    hits: tuple  # ((step, point string, local degree), ...)
    escaped_at: int = None

    def to_json_dict(self):
        return {
            "value": self.value,
            "status": self.status,
            "horizon": self.horizon,
            "hits": [{"step": s, "point": p, "local_degree": g} for s, p, g in self.hits],
            "escaped_at": self.escaped_at,
        }


def _exact_local_degree(pmap, z):
    """Local degree of the map at an exact point: 1 + order of z as a root
    of f', decided by exact evaluation of successive derivatives."""
    from .maps import p_derivative, p_eval, qc_is_zero

    deg = 1
    deriv = p_derivative(pmap.exact_coefficients)
    while deg < pmap.degree:
        if qc_is_zero(p_eval(deriv, z)):
            deg += 1
            deriv = p_derivative(deriv)
        else:
            break
    return deg


def chi(pmap, z, tree, horizon: int = 24) -> ChiResult:
    """Walk the exact orbit of z, multiplying local degrees at critical hits.

    The orbit is computed in exact rational arithmetic, so every in-horizon
    step is decided with certainty (a point either is or is not a root of
    f').  Certification beyond the horizon uses the degree budget: once the
    accumulated product reaches 2^(d - N), any further hit would exceed the
    global bound, so the tail is hit-free under the standing hypotheses.
    """
    if isinstance(z, complex):
        z = (Fraction(z.real), Fraction(z.imag))
    else:
        z = (parse_exact(z[0]), parse_exact(z[1]))
    d_prime = tree.degree - tree.n_level1
    budget = 2 ** d_prime

    restriction_has_criticals = any(
        comp.contains_critical for comp in tree.levels[1]) if tree.depth >= 1 else False
    if not restriction_has_criticals:
        return ChiResult(value=1, status="certified", horizon=horizon, hits=())

    value = 1
    hits = []
    seen_hit_points = {}
    cur = z
    for step in range(horizon + 1):
        if qc_bits(cur) > _MAX_ORBIT_BITS:
            return ChiResult(value, "lower_bound", horizon, tuple(hits))
        side = tree.disk.classify_exact(cur)
        if side == "out":
            # the orbit left the closed domain: no further iterates exist
            return ChiResult(value, "certified", horizon, tuple(hits), escaped_at=step)
        deg = _exact_local_degree(pmap, cur)
        if deg >= 2:
            if cur in seen_hit_points:
                raise HypothesisViolation(
                    "orbit revisits a critical point: a periodic critical orbit "
                    "violates the standing hypotheses")
            seen_hit_points[cur] = step
            value *= deg
            hits.append((step, f"{cur[0]}{'+' if cur[1] >= 0 else ''}{cur[1]}i", deg))
            if value > budget:
                raise HypothesisViolation(
                    f"accumulated local degree {value} exceeds the bound 2^{d_prime}")
        if value == budget:
            return ChiResult(value, "certified", horizon, tuple(hits))
        cur = pmap.eval_exact(cur)
    return ChiResult(value, "lower_bound", horizon, tuple(hits))


# ---------------------------------------------------------------------------
# semi-conjugacy verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerificationReport:
    level: int
    words_checked: int
    checks: tuple  # (name, passed, counterexample-or-None)

    @property
    def all_passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def summary_lines(self):
        lines = []
        for name, ok, ce in self.checks:
            line = f"check {name}: {'pass' if ok else 'FAIL'}"
            if ce:
                line += f"  [{ce}]"
            lines.append(line)
        lines.append(f"{sum(1 for _, ok, _ in self.checks if ok)}/{len(self.checks)} "
                     f"checks pass, {self.words_checked} cylinders")
        return lines

    def to_json_dict(self):
        return {
            "level": self.level,
            "words_checked": self.words_checked,
            "checks": [{"name": n, "passed": ok, "counterexample": ce}
                       for n, ok, ce in self.checks],
            "all_passed": self.all_passed,
        }


def _tolerant_code_map(assignment, tree, k):
    """word -> component index for all word lengths <= k, tolerating broken
    assignments (missing or doubly-claimed symbols yield None)."""
    d = tree.degree
    tables = [None]
    defects = []
    for lvl in range(1, k + 1):
        table = {}
        for comp in tree.levels[lvl]:
            for s in assignment.of(lvl, comp.index):
                key = (comp.image, s)
                if key in table:
                    table[key] = None  # ambiguous
                    defects.append((lvl, key))
                else:
                    table[key] = comp.index
        tables.append(table)
    code = {(): 0}
    for lvl in range(1, k + 1):
        for word in [w for w in code if len(w) == lvl - 1]:
            img = code[word]
            for s in range(d):
                idx = None if img is None else tables[lvl].get((img, s), None)
                if idx is None and img is not None and (img, s) not in tables[lvl]:
                    defects.append((lvl, (img, s)))
                code[(s,) + word] = idx
    return code, defects


def _word_str(w):
    return "(" + ",".join(map(str, w)) + ")"


def verify_semiconjugacy(assignment: SymbolAssignment, tree, k: int) -> VerificationReport:
    """Exhaustively check the coding over all d^k words.

    Five checks: (1) prefix words code the containers, (2) shifted words
    code the images, (3) the coding is onto the level-k components,
    (4) fiber sizes equal cumulative degrees, (5) a component whose fiber
    mixes first symbols has a critical component somewhere on its image
    chain.  Each failing check reports a concrete counterexample.
    """
    d = tree.degree
    code, defects = _tolerant_code_map(assignment, tree, k)
    words_k = [w for w in code if len(w) == k]
    words_k.sort()

    c1_ok, c1_ce = True, None
    c2_ok, c2_ce = True, None
    for w in words_k:
        idx = code[w]
        if idx is None:
            if c2_ok:
                c2_ok, c2_ce = False, f"word {_word_str(w)} has no coded component"
            continue
        comp = tree.levels[k][idx]
        if comp.container != code[w[:-1]] and c1_ok:
            c1_ok = False
            c1_ce = (f"container(c{_word_str(w)}) = {comp.container}, "
                     f"c{_word_str(w[:-1])} = {code[w[:-1]]}")
        if comp.image != code[w[1:]] and c2_ok:
            c2_ok = False
            c2_ce = (f"image(c{_word_str(w)}) = {comp.image}, "
                     f"c{_word_str(w[1:])} = {code[w[1:]]}")

    counts = {}
    firsts = {}
    for w in words_k:
        idx = code[w]
        if idx is None:
            continue
        counts[idx] = counts.get(idx, 0) + 1
        firsts.setdefault(idx, set()).add(w[0])

    c3_ok, c3_ce = True, None
    missing = [c.index for c in tree.levels[k] if c.index not in counts]
    if missing:
        c3_ok, c3_ce = False, f"component ({k},{missing[0]}) receives no word"

    c4_ok, c4_ce = True, None
    for comp in tree.levels[k]:
        got = counts.get(comp.index, 0)
        if got != comp.cumulative_degree:
            c4_ok = False
            c4_ce = (f"fiber of ({k},{comp.index}) has {got} words, "
                     f"cumulative degree is {comp.cumulative_degree}")
            break
    if c4_ok and defects:
        lvl, key = defects[0]
        c4_ok, c4_ce = False, f"symbol table defect at level {lvl}, (image, symbol) = {key}"

    c5_ok, c5_ce = True, None
    for comp in tree.levels[k]:
        fs = firsts.get(comp.index, set())
        if len(fs) > 1:
            # walk the image chain looking for a branched component
            branched = False
            lvl, idx = k, comp.index
            while lvl >= 1:
                node = tree.levels[lvl][idx]
                if node.local_degree >= 2:
                    branched = True
                    break
                idx = node.image
                lvl -= 1
            if not branched:
                c5_ok = False
                c5_ce = (f"fiber of ({k},{comp.index}) mixes first symbols {sorted(fs)} "
                         f"but its image chain is critical-free")
                break

    checks = (
        ("container-of-prefix", c1_ok, c1_ce),
        ("image-of-shift", c2_ok, c2_ce),
        ("surjective-onto-level", c3_ok, c3_ce),
        ("fiber-size-equals-degree", c4_ok, c4_ce),
        ("mixed-fibers-are-critical", c5_ok, c5_ce),
    )
    return VerificationReport(level=k, words_checked=len(words_k), checks=checks)


def coding_to_json_dict(assignment: SymbolAssignment, tree, k: int) -> dict:
    """Coding export: per level, symbols and fibers per component."""
    out = {"degree": tree.degree, "depth": k, "levels": {}}
    for lvl in range(1, k + 1):
        table = fibers(assignment, tree, lvl)
        level_out = {}
        for comp in tree.levels[lvl]:
            words = table.words_by_component.get((lvl, comp.index), ())
            level_out[f"{lvl}:{comp.index}"] = {
                "symbols": list(assignment.of(lvl, comp.index)),
                "fiber_count": len(words),
                "fiber_words": ["".join(map(str, w)) if tree.degree <= 10
                                else ",".join(map(str, w)) for w in words],
            }
        out["levels"][str(lvl)] = level_out
    return out

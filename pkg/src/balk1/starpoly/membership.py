"""Bounded-degree two-sided ideal membership with replayable certificates.

Membership of a target in the two-sided ideal generated by a list of
polynomials is decided by exact linear algebra over Gaussian rationals on
the span of products  left · generator · right  whose word degree stays
within a caller-supplied bound.  Success yields a decomposition that an
independent replay routine can re-multiply and compare against the target;
failure only states that no decomposition exists up to the bound.

Two structural reductions keep the search small without losing completeness:

* when every generator is free of the central symbols, a target splits over
  the central monomial basis (the centrals span a free module), so each
  component is solved as a pure word problem and the central monomial is
  attached to the left multiplier of the certificate;
* when every generator is homogeneous for the letter charge (+1 for a, b,
  -1 for their adjoints), the ideal is charge-graded, so only products
  matching the charge of each target component can contribute.

Relation ideals are *-closed by default: the adjoint of every listed
generator is adjoined to the working set, matching the semantics of
relations that hold in a *-algebra together with their adjoints.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from ..errors import DegreeBoundError
from .algebra import (GaussianRational, Monomial, StarPoly, Word, _CHARGE_OF,
                      mono_key, format_coefficient, format_poly, _format_monomial)
from .parsing import parse

DEFAULT_PRODUCT_CEILING = 400_000


@dataclass(frozen=True)
class RelationIdeal:
    """A named two-sided relation ideal of the free *-algebra."""

    name: str
    generators: Tuple[StarPoly, ...]
    central_relations: Tuple[StarPoly, ...] = ()
    star_closed: bool = True

    def effective_generators(self) -> List[StarPoly]:
        """Working generators: the stored list plus (optionally) adjoints."""
        gens: List[StarPoly] = []
        for g in self.generators:
            if not g.is_zero and g not in gens:
                gens.append(g)
        if self.star_closed:
            for g in list(gens):
                gs = g.star
                if not gs.is_zero and gs not in gens:
                    gens.append(gs)
        return gens


@dataclass(frozen=True)
class CertTerm:
    coefficient: str
    left: str
    generator: int
    right: str


@dataclass(frozen=True)
class MembershipCertificate:
    """Replayable decomposition target = sum coeff · left · generator · right."""

    target: str
    ideal: str
    degree_bound: int
    generators: Tuple[str, ...]
    terms: Tuple[CertTerm, ...]

    def max_term_degree(self) -> int:
        out = 0
        for t in self.terms:
            gdeg = parse(self.generators[t.generator]).degree
            out = max(out, parse(t.left).degree + gdeg + parse(t.right).degree)
        return out


def replay_certificate(cert: MembershipCertificate) -> StarPoly:
    """Re-multiply a certificate from its stored text; independent of the solver."""
    total = StarPoly.zero()
    gens = [parse(g) for g in cert.generators]
    for t in cert.terms:
        piece = parse(t.coefficient) * parse(t.left) * gens[t.generator] * parse(t.right)
        total = total + piece
    return total


def certificate_is_valid(cert: MembershipCertificate) -> bool:
    return replay_certificate(cert) == parse(cert.target)


# -- word enumeration ---------------------------------------------------------


def _words_of_length(length: int) -> List[Word]:
    return [tuple(w) for w in itertools.product(range(4), repeat=length)]


_WORD_CACHE: Dict[int, Dict[int, List[Word]]] = {}


def _words_by_charge(length: int) -> Dict[int, List[Word]]:
    got = _WORD_CACHE.get(length)
    if got is None:
        got = {}
        for w in _words_of_length(length):
            q = sum(_CHARGE_OF[x] for x in w)
            got.setdefault(q, []).append(w)
        _WORD_CACHE[length] = got
    return got


# -- sparse exact elimination -------------------------------------------------


def _word_key(w: Word) -> Tuple[int, Word]:
    return (len(w), w)


class _Echelon:
    """Incremental row echelon over Gaussian rationals with combination traces."""

    def __init__(self, order_key):
        self.order_key = order_key
        self.pivots: Dict[object, Tuple[dict, dict]] = {}

    def insert(self, poly: dict, combo: dict) -> None:
        while poly:
            lead = max(poly, key=self.order_key)
            hit = self.pivots.get(lead)
            if hit is None:
                self.pivots[lead] = (poly, combo)
                return
            prow, pcombo = hit
            factor = poly[lead] / prow[lead]
            _axpy(poly, prow, -factor)
            _axpy(combo, pcombo, -factor)

    def reduce_fully(self, poly: dict) -> Tuple[dict, dict]:
        poly = dict(poly)
        combo: dict = {}
        key = self.order_key
        while True:
            hit = None
            for m in poly:
                if m in self.pivots and (hit is None or key(m) > key(hit)):
                    hit = m
            if hit is None:
                return poly, combo
            prow, pcombo = self.pivots[hit]
            factor = poly[hit] / prow[hit]
            _axpy(poly, prow, -factor)
            _axpy(combo, pcombo, -factor)


def _axpy(dst: dict, src: dict, factor: GaussianRational) -> None:
    for key, val in src.items():
        acc = dst.get(key)
        acc = val * factor if acc is None else acc + val * factor
        if acc:
            dst[key] = acc
        else:
            dst.pop(key, None)


# -- the solver ---------------------------------------------------------------


@dataclass
class _GenMeta:
    index: int  # position in the effective generator list
    poly: StarPoly
    degree: int
    charge: Optional[int]  # None when not homogeneous
    terms: List[Tuple[Monomial, GaussianRational]] = field(default_factory=list)

    def __post_init__(self):
        self.terms = list(self.poly.items())


def ideal_member(target: StarPoly, ideal: RelationIdeal, degree_bound: int,
                 product_ceiling: int = DEFAULT_PRODUCT_CEILING,
                 chunk: int = 256) -> Optional[MembershipCertificate]:
    """Search for a certificate of  target ∈ ideal  up to the degree bound.

    Returns the certificate on success and None when membership was not
    demonstrated within the bound (which is not a proof of non-membership).
    """
    if degree_bound < target.degree:
        raise DegreeBoundError(
            f"degree bound {degree_bound} is below the target degree {target.degree}")
    for rel in ideal.central_relations:
        if rel != _builtin_central_relation():
            raise NotImplementedError(
                "only the built-in central relation s^2 + c^2 - 1 is supported")

    gens = [_GenMeta(i, g, g.degree, _charge_of_poly(g))
            for i, g in enumerate(ideal.effective_generators())]

    if target.is_zero:
        return MembershipCertificate(
            target=format_poly(target), ideal=ideal.name, degree_bound=degree_bound,
            generators=tuple(format_poly(g.poly) for g in gens), terms=())
    if not gens:
        return None

    central_free = all(g.poly.is_central_free for g in gens)
    graded = all(g.charge is not None for g in gens)

    if central_free:
        components = _split_components(target)
        all_terms: List[CertTerm] = []
        for (s_exp, c_exp, charge), word_poly in components.items():
            want = charge if graded else None
            terms = _solve_words(word_poly, gens, degree_bound, want,
                                 product_ceiling, chunk)
            if terms is None:
                return None
            for coeff, left_word, gen_idx, right_word in terms:
                all_terms.append(CertTerm(
                    coefficient=format_coefficient(coeff),
                    left=_format_monomial(Monomial(left_word, s_exp, c_exp)) or "1",
                    generator=gen_idx,
                    right=_format_monomial(Monomial(right_word)) or "1"))
        cert = MembershipCertificate(
            target=format_poly(target), ideal=ideal.name, degree_bound=degree_bound,
            generators=tuple(format_poly(g.poly) for g in gens),
            terms=tuple(all_terms))
        return cert

    return _solve_general(target, gens, ideal, degree_bound, product_ceiling, chunk)


def _builtin_central_relation() -> StarPoly:
    s = StarPoly.central("s")
    c = StarPoly.central("c")
    return s * s + c * c - 1


def _charge_of_poly(p: StarPoly) -> Optional[int]:
    qs = p.charges()
    return qs.pop() if len(qs) == 1 else None


def _split_components(target: StarPoly) -> Dict[Tuple[int, int, int], Dict[Word, GaussianRational]]:
    components: Dict[Tuple[int, int, int], Dict[Word, GaussianRational]] = {}
    for m, q in target.items():
        key = (m.s_exp, m.c_exp, m.charge)
        components.setdefault(key, {})[m.word] = q
    return components


def _iter_products(gens: Sequence[_GenMeta], bound: int, charge: Optional[int]):
    """Yield (gen_index, left_word, right_word) by increasing multiplier length."""
    max_total = max((bound - g.degree for g in gens), default=-1)
    for total in range(max_total + 1):
        for g in gens:
            if total > bound - g.degree:
                continue
            for left_len in range(total + 1):
                right_len = total - left_len
                if charge is None:
                    for u in _words_of_length(left_len):
                        for v in _words_of_length(right_len):
                            yield (g.index, u, v)
                else:
                    need = charge - (g.charge or 0)
                    left_buckets = _words_by_charge(left_len)
                    right_buckets = _words_by_charge(right_len)
                    for qu in sorted(left_buckets):
                        vs = right_buckets.get(need - qu)
                        if not vs:
                            continue
                        for u in left_buckets[qu]:
                            for v in vs:
                                yield (g.index, u, v)


def _solve_words(word_target: Dict[Word, GaussianRational], gens: Sequence[_GenMeta],
                 bound: int, charge: Optional[int], product_ceiling: int,
                 chunk: int) -> Optional[List[Tuple[GaussianRational, Word, int, Word]]]:
    """Solve a pure word-polynomial membership; returns decomposition terms."""
    gen_by_index = {g.index: g for g in gens}
    echelon = _Echelon(_word_key)
    target_row = dict(word_target)
    products: List[Tuple[int, Word, Word]] = []

    def try_finish() -> Optional[List[Tuple[GaussianRational, Word, int, Word]]]:
        residue, combo = echelon.reduce_fully(target_row)
        if residue:
            return None
        out = []
        for j, lam in combo.items():
            gen_idx, u, v = products[j]
            out.append((-lam, u, gen_idx, v))
        return out

    pending = 0
    for item in _iter_products(gens, bound, charge):
        products.append(item)
        if len(products) > product_ceiling:
            raise DegreeBoundError(
                f"degree bound {bound} would enumerate more than "
                f"{product_ceiling} products")
        gen_idx, u, v = item
        row: Dict[Word, GaussianRational] = {}
        for m, q in gen_by_index[gen_idx].terms:
            w = u + m.word + v
            acc = row.get(w)
            acc = q if acc is None else acc + q
            if acc:
                row[w] = acc
            else:
                row.pop(w, None)
        if row:
            echelon.insert(row, {len(products) - 1: GaussianRational(1)})
        pending += 1
        if pending >= chunk:
            pending = 0
            solution = try_finish()
            if solution is not None:
                return solution
    return try_finish()


def _solve_general(target: StarPoly, gens: Sequence[_GenMeta], ideal: RelationIdeal,
                   bound: int, product_ceiling: int, chunk: int
                   ) -> Optional[MembershipCertificate]:
    """Fallback for generators carrying central symbols: enumerate central
    multipliers explicitly (complete up to the stated central degree cap)."""
    central_cap = target.central_degree + max(g.poly.central_degree for g in gens) + 2
    centrals = [(e, f) for e in (0, 1) for f in range(central_cap + 1)
                if e + f <= central_cap]
    gen_by_index = {g.index: g for g in gens}
    echelon = _Echelon(mono_key)
    target_row = dict(target.items())
    products: List[Tuple[int, Monomial, Word]] = []

    def try_finish() -> Optional[Tuple[CertTerm, ...]]:
        residue, combo = echelon.reduce_fully(target_row)
        if residue:
            return None
        out = []
        for j, lam in combo.items():
            gen_idx, left, v = products[j]
            out.append(CertTerm(
                coefficient=format_coefficient(-lam),
                left=_format_monomial(left) or "1",
                generator=gen_idx,
                right=_format_monomial(Monomial(v)) or "1"))
        return tuple(out)

    def finish_cert(terms: Tuple[CertTerm, ...]) -> MembershipCertificate:
        return MembershipCertificate(
            target=format_poly(target), ideal=ideal.name, degree_bound=bound,
            generators=tuple(format_poly(g.poly) for g in gens), terms=terms)

    pending = 0
    for gen_idx, u, v in _iter_products(gens, bound, None):
        for e, f in centrals:
            left = Monomial(u, e, f)
            products.append((gen_idx, left, v))
            if len(products) > product_ceiling:
                raise DegreeBoundError(
                    f"degree bound {bound} would enumerate more than "
                    f"{product_ceiling} products")
            p = StarPoly.monomial(left) * gen_by_index[gen_idx].poly * \
                StarPoly.monomial(Monomial(v))
            row = dict(p.items())
            if row:
                echelon.insert(row, {len(products) - 1: GaussianRational(1)})
        pending += 1
        if pending >= chunk:
            pending = 0
            terms = try_finish()
            if terms is not None:
                return finish_cert(terms)
    terms = try_finish()
    return None if terms is None else finish_cert(terms)

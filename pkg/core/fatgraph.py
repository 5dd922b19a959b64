# core/fatgraph.py
"""
Graded Wick engine over star fatgraphs.

A star has one central vertex per supertrace str N^{n_k} and one univalent
vertex per unpaired half-edge. Slots are numbered globally, vertex by vertex,
in cyclic order; slot t of a vertex carries the entry N_{c_t c_{t+1}} between
its corners.

Depends on: core.supermatrix, core.errors
"""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ_I

from .errors import CapExceededError, VerificationError
from .grassmann import as_coefficient
from .supermatrix import Grading


class FatgraphStar:
    """
    Partial pairing of the half-edge slots of a list of trace vertices
    """

    def __init__(self, valencies: Sequence[int], pairs: Sequence[Tuple[int, int]]):
        self.valencies = list(valencies)
        self.pairs = [tuple(sorted(p)) for p in pairs]
        self.slot_count = sum(self.valencies)

        self.partner: Dict[int, int] = {}
        for a, b in self.pairs:
            if a == b or a in self.partner or b in self.partner:
                raise ValueError(f"Pairing {self.pairs} is not a fixpoint-free involution")
            self.partner[a] = b
            self.partner[b] = a
        self.unpaired = [s for s in range(self.slot_count) if s not in self.partner]

        # slot -> (vertex, position)
        self.vertex_of: List[Tuple[int, int]] = []
        self.offsets: List[int] = []
        offset = 0
        for k, n in enumerate(self.valencies):
            self.offsets.append(offset)
            self.vertex_of.extend((k, t) for t in range(n))
            offset += n

        traced = self._trace_faces()
        self.faces = [count for count, _ in traced]
        self._face_slots = [slot for _, slot in traced]
        self.V = len(self.valencies) + len(self.unpaired)
        self.E = len(self.pairs) + len(self.unpaired)
        self.F = len(self.faces)
        self.component_genera = self._component_genera()
        self.genus = sum(self.component_genera)

    @property
    def m(self) -> int:
        return len(self.unpaired)

    @property
    def hbar_exponent(self) -> int:
        return self.E - self.V - self.F

    def rotate(self, slot: int) -> int:
        k, t = self.vertex_of[slot]
        return self.offsets[k] + (t + 1) % self.valencies[k]

    def _trace_faces(self) -> List[Tuple[int, int]]:
        """
        Cycles of φ = rotation ∘ edge involution

        Darts are the slots plus one dart (-1 - s) per univalent vertex of an
        unpaired slot s.

        Returns:
            (number of unpaired slots, one slot on the face) per face
        """
        def phi(dart: int) -> int:
            if dart < 0:
                return self.rotate(-1 - dart)
            if dart in self.partner:
                return self.rotate(self.partner[dart])
            return -1 - dart

        darts = list(range(self.slot_count)) + [-1 - s for s in self.unpaired]
        seen = set()
        faces = []
        for start in darts:
            if start in seen:
                continue
            count = 0
            slot = None
            dart = start
            while dart not in seen:
                seen.add(dart)
                if dart < 0:
                    count += 1
                elif slot is None:
                    slot = dart
                dart = phi(dart)
            faces.append((count, slot))
        return faces

    def _component_genera(self) -> List[int]:
        d = len(self.valencies)
        parent = list(range(d))

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for a, b in self.pairs:
            ra, rb = find(self.vertex_of[a][0]), find(self.vertex_of[b][0])
            if ra != rb:
                parent[ra] = rb

        stats: Dict[int, List[int]] = {}
        for k in range(d):
            stats.setdefault(find(k), [0, 0, 0])[0] += 1
        for s in self.unpaired:
            entry = stats[find(self.vertex_of[s][0])]
            entry[0] += 1
            entry[1] += 1
        for a, _ in self.pairs:
            stats[find(self.vertex_of[a][0])][1] += 1

        for face_slot in self._face_slots:
            stats[find(self.vertex_of[face_slot][0])][2] += 1

        genera = []
        for V, E, F in stats.values():
            chi = V - E + F
            if chi > 2 or chi % 2:
                raise VerificationError(f"Non-integer genus from χ={chi}",
                                        {'valencies': self.valencies, 'pairs': self.pairs})
            genera.append((2 - chi) // 2)
        return genera

    def to_dict(self) -> Dict[str, Any]:
        return {
            'valencies': self.valencies,
            'pairs': [list(p) for p in self.pairs],
            'unpaired': self.unpaired,
            'V': self.V,
            'E': self.E,
            'F': self.F,
            'faces': self.faces,
            'genus': self.genus,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'FatgraphStar':
        return cls(data['valencies'], [tuple(p) for p in data['pairs']])

    def __repr__(self):
        return f"FatgraphStar({self.valencies}, pairs={self.pairs}, g={self.genus})"


class MomentPolynomial:
    """
    Σ c · ħ^e Π p_{m_i}; keys are (e, sorted p indices)
    """

    def __init__(self, valencies: Sequence[int], terms: Optional[Dict[Tuple[int, Tuple[int, ...]], int]] = None):
        self.valencies = list(valencies)
        self.terms = {k: c for k, c in (terms or {}).items() if c}

    def add(self, hbar_exponent: int, faces: Sequence[int], coefficient: int = 1):
        key = (hbar_exponent, tuple(sorted(faces)))
        self.terms[key] = self.terms.get(key, 0) + coefficient
        if not self.terms[key]:
            del self.terms[key]

    def merge(self, other: 'MomentPolynomial'):
        for (e, faces), c in other.terms.items():
            self.add(e, faces, c)

    def is_zero(self) -> bool:
        return not self.terms

    def hbar_exponents(self) -> List[int]:
        return sorted({e for e, _ in self.terms})

    def coefficient(self, hbar_exponent: int, faces: Sequence[int]) -> int:
        return self.terms.get((hbar_exponent, tuple(sorted(faces))), 0)

    def leading(self, hbar_exponent: int) -> 'MomentPolynomial':
        return MomentPolynomial(self.valencies, {k: c for k, c in self.terms.items() if k[0] == hbar_exponent})

    def __eq__(self, other):
        return isinstance(other, MomentPolynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'valencies': self.valencies,
            'terms': [{'hbar_power': e, 'p': list(faces), 'coefficient': c}
                      for (e, faces), c in sorted(self.terms.items())],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'MomentPolynomial':
        poly = cls(data['valencies'])
        for term in data['terms']:
            poly.add(int(term['hbar_power']), term['p'], int(term['coefficient']))
        return poly

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (e, faces), c in sorted(self.terms.items()):
            ps = "*".join(f"p{k}" for k in faces)
            parts.append(f"{c}*hbar^{e}" + (f"*{ps}" if ps else ""))
        return " + ".join(parts)


def koszul_sign(degrees: Sequence[int], order: Sequence[int]) -> int:
    """
    Sign of reordering graded factors into `order`

    Args:
        degrees: Parity of each factor in its original position
        order: New order as a list of original positions

    Returns:
        ±1
    """
    sign = 1
    for x in range(len(order)):
        for y in range(x + 1, len(order)):
            if order[x] > order[y] and degrees[order[x]] and degrees[order[y]]:
                sign = -sign
    return sign


def _contraction_order(pairs: Sequence[Tuple[int, int]], unpaired: Sequence[int]) -> List[int]:
    order = []
    for a, b in sorted(pairs):
        order.extend([a, b])
    order.extend(sorted(unpaired))
    return order


class FatgraphEngine:
    """
    Star enumeration, face/genus data and the topological moment polynomial
    """

    def __init__(self, config: Dict[str, Any] = None):
        self.config = config or {}
        self.logger = logging.getLogger(__name__)

        self.enumeration_cap = self.config.get('enumeration_cap', 12)
        self.indexsum_cap = self.config.get('indexsum_cap', 8)
        self.size_cap = self.config.get('oracle_size_cap', 4)
        self.jobs = self.config.get('jobs', 1)

        self.logger.info("FatgraphEngine initialized")

    # --- enumeration -----------------------------------------------------

    def _check_valencies(self, valencies: Sequence[int], cap: int):
        if any(int(n) < 1 for n in valencies):
            raise ValueError(f"Valencies must be positive, got {list(valencies)}")
        if sum(valencies) > cap:
            raise CapExceededError(f"Total valency {sum(valencies)} exceeds cap {cap}",
                                   {'valencies': list(valencies), 'cap': cap})

    def enumerate_stars(self, valencies: Sequence[int], allow_unpaired: bool = True) -> Iterator[FatgraphStar]:
        """
        Every partial (or perfect) pairing of the slots, each exactly once

        The smallest free slot is always decided first.
        """
        self._check_valencies(valencies, self.enumeration_cap)
        total = sum(valencies)

        def walk(free: List[int], pairs: List[Tuple[int, int]]):
            if not free:
                yield FatgraphStar(valencies, pairs)
                return
            s, rest = free[0], free[1:]
            if allow_unpaired:
                yield from walk(rest, pairs)
            for idx, t in enumerate(rest):
                yield from walk(rest[:idx] + rest[idx + 1:], pairs + [(s, t)])

        if not allow_unpaired and total % 2:
            return
        yield from walk(list(range(total)), [])

    def euler_genus(self, star: FatgraphStar) -> Tuple[int, int, int, int]:
        """(V, E, F, g) of a star"""
        return star.V, star.E, star.F, star.genus

    # --- signs and weights -------------------------------------------------

    def pairing_sign(self, entries: Sequence[Tuple[int, int]], grading: Grading,
                     pairs: Sequence[Tuple[int, int]]) -> int:
        """
        Koszul sign of bringing paired factors next to each other

        Args:
            entries: (row, col) index of each factor, 0-based
            grading: Grading giving ε
            pairs: Paired factor positions

        Returns:
            ±1
        """
        degrees = [(grading.epsilon(i) + grading.epsilon(j)) & 1 for i, j in entries]
        paired = {s for p in pairs for s in p}
        unpaired = [s for s in range(len(entries)) if s not in paired]
        return koszul_sign(degrees, _contraction_order(pairs, unpaired))

    def entry_weight(self, entries: Sequence[Tuple[int, int]], grading: Grading,
                     pairs: Sequence[Tuple[int, int]]) -> Dict[str, Any]:
        """
        Structured Wick weight of a product of matrix entries

        Each pair (a, b) contributes ħσ(col_a) δ_{row_a col_b} δ_{col_a row_b};
        each unpaired factor contributes ħ Y_{row col}.

        Returns:
            Dict with sign, hbar_power, deltas and y_factors (0-based indices)
        """
        sign = self.pairing_sign(entries, grading, pairs)
        deltas = []
        for a, b in sorted(tuple(sorted(p)) for p in pairs):
            sign *= grading.sigma(entries[a][1])
            for x, y in ((entries[a][0], entries[b][1]), (entries[a][1], entries[b][0])):
                if x != y:
                    deltas.append([x, y])
        paired = {s for p in pairs for s in p}
        y_factors = [list(entries[s]) for s in range(len(entries)) if s not in paired]
        return {
            'sign': sign,
            'hbar_power': len(pairs) + len(y_factors),
            'deltas': deltas,
            'y_factors': y_factors,
        }

    def star_indexsum(self, star: FatgraphStar, grading: Grading, mean_values: Sequence[Any], hbar):
        """
        Raw Wick weight of a star summed over all index assignments

        Includes σ(i_1) for each trace vertex; unpaired slots take the given
        diagonal mean values.

        Returns:
            Exact QQ_I value
        """
        hbar = as_coefficient(hbar)
        means = [as_coefficient(y) for y in mean_values] if mean_values else [QQ_I.zero] * grading.size
        size = grading.size
        n_corner = star.slot_count
        parent = list(range(n_corner))

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a: int, b: int):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

        # corner of a slot equals its slot number; its column corner is the rotation
        for a, b in star.pairs:
            union(a, star.rotate(b))
            union(star.rotate(a), b)
        for s in star.unpaired:
            union(s, star.rotate(s))

        roots = sorted({find(c) for c in range(n_corner)})
        label = {r: k for k, r in enumerate(roots)}
        cls = [label[find(c)] for c in range(n_corner)]
        n_cls = len(roots)

        sigma_count = [0] * n_cls
        y_count = [0] * n_cls
        for offset in star.offsets:
            sigma_count[cls[offset]] += 1
        for a, _ in star.pairs:
            sigma_count[cls[star.rotate(a)]] += 1
        for s in star.unpaired:
            y_count[cls[s]] += 1

        even_idx = [i for i in range(size) if not grading.epsilon(i)]
        odd_idx = [i for i in range(size) if grading.epsilon(i)]
        power_sums = {}
        for parity, idx in ((0, even_idx), (1, odd_idx)):
            for k in set(y_count):
                total = QQ_I.zero
                for i in idx:
                    total = total + means[i] ** k
                power_sums[(parity, k)] = total

        order = _contraction_order(star.pairs, star.unpaired)
        total = QQ_I.zero
        for parities in product((0, 1), repeat=n_cls):
            factor = QQ_I.one
            for c in range(n_cls):
                value = power_sums[(parities[c], y_count[c])]
                if not value:
                    factor = QQ_I.zero
                    break
                if parities[c] and sigma_count[c] & 1:
                    value = -value
                factor = factor * value
            if not factor:
                continue
            degrees = [(parities[cls[s]] + parities[cls[star.rotate(s)]]) & 1 for s in range(n_corner)]
            if koszul_sign(degrees, order) < 0:
                factor = -factor
            total = total + factor
        return total * hbar ** len(star.pairs)

    # --- moments -----------------------------------------------------------

    def _parallel_map(self, fn, items: List[Any]) -> List[Any]:
        if self.jobs > 1 and len(items) > 1:
            with ThreadPoolExecutor(max_workers=self.jobs) as executor:
                return list(executor.map(fn, items))
        return [fn(item) for item in items]

    def moment_polynomial(self, valencies: Sequence[int], perfect_only: bool = False) -> MomentPolynomial:
        """
        Σ_Γ ħ^{E-V-F} Π_faces p_{m_i} over star fatgraphs

        Args:
            valencies: Trace lengths
            perfect_only: Restrict to perfect pairings (Y = 0)

        Returns:
            MomentPolynomial with p_0 kept formal
        """
        poly = MomentPolynomial(valencies)
        count = 0
        for star in self.enumerate_stars(valencies, allow_unpaired=not perfect_only):
            poly.add(star.hbar_exponent, star.faces)
            count += 1
        self.logger.debug(f"Moment polynomial for {list(valencies)}: {count} stars, {len(poly.terms)} terms")
        return poly

    def moment_indexsum(self, valencies: Sequence[int], grading: Grading, y_values: Sequence[Any], hbar):
        """
        ħ^{-d} Σ_stars (index-summed Wick weight with mean Y)

        Returns:
            Exact QQ_I value
        """
        self._check_valencies(valencies, self.indexsum_cap)
        if grading.size > self.size_cap:
            raise CapExceededError(f"Grading size {grading.size} exceeds cap {self.size_cap}",
                                   {'p': grading.p, 'q': grading.q})
        hbar = as_coefficient(hbar)
        stars = list(self.enumerate_stars(valencies, allow_unpaired=True))
        weights = self._parallel_map(lambda s: self.star_indexsum(s, grading, y_values, hbar), stars)
        total = QQ_I.zero
        for w in weights:
            total = total + w
        return total / hbar ** len(valencies)

    def specialize(self, poly: MomentPolynomial, grading: Grading, y_values: Optional[Sequence[Any]], hbar):
        """
        Substitute p_k = ħ str Y^k and p_0 = ħ(p-q)

        Returns:
            Exact QQ_I value
        """
        hbar = as_coefficient(hbar)
        means = [as_coefficient(y) for y in y_values] if y_values else [QQ_I.zero] * grading.size
        cache: Dict[int, Any] = {}

        def p_value(k: int):
            if k not in cache:
                if k == 0:
                    cache[k] = hbar * (grading.p - grading.q)
                else:
                    s = QQ_I.zero
                    for i, y in enumerate(means):
                        s = s + y ** k if grading.sigma(i) > 0 else s - y ** k
                    cache[k] = hbar * s
            return cache[k]

        total = QQ_I.zero
        for (e, faces), c in poly.terms.items():
            term = as_coefficient(c) * hbar ** e
            for k in faces:
                term = term * p_value(k)
            total = total + term
        return total

    # --- corollaries ---------------------------------------------------------

    def genus_series(self, valencies: Sequence[int], grading: Optional[Grading] = None) -> Dict[str, Any]:
        """
        Perfect-pairing count per genus; with a grading, the value at ħ = 1/(p-q), Y = 0
        """
        by_genus: Counter = Counter()
        by_power: Counter = Counter()
        for star in self.enumerate_stars(valencies, allow_unpaired=False):
            by_genus[star.genus] += 1
            by_power[star.hbar_exponent] += 1
        result: Dict[str, Any] = {'by_genus': dict(sorted(by_genus.items())),
                                  'by_hbar_power': dict(sorted(by_power.items()))}
        if grading is not None:
            if grading.p == grading.q:
                raise ValueError("ħ = 1/(p-q) needs p ≠ q")
            hbar = QQ_I.one / (grading.p - grading.q)
            value = QQ_I.zero
            for e, c in by_power.items():
                value = value + hbar ** e * c
            result['value'] = value
        return result

    def one_edge_trace_weight(self, n: int, k: int, l: int, grading: Grading, mean_values: Sequence[Any], hbar):
        """
        Single trace str N^n with one edge linking half-edges k < l and mean ħY elsewhere:
        ħ · str(ħY)^{n+k-l-1} · str(ħY)^{l-k-1}, with str(ħY)^0 = p - q
        """
        if not 0 <= k < l < n:
            raise ValueError(f"Need 0 <= k < l < n, got k={k}, l={l}, n={n}")
        hbar = as_coefficient(hbar)
        means = [as_coefficient(y) for y in mean_values]

        def str_power(j: int):
            total = QQ_I.zero
            for i, y in enumerate(means):
                term = y ** j if j else QQ_I.one
                total = total + term if grading.sigma(i) > 0 else total - term
            return total

        return hbar * str_power(n + k - l - 1) * str_power(l - k - 1)

    def phi_map_invariance(self, valencies: Sequence[int], grading: Grading, y_values: Sequence[Any],
                           hbar, extra_value=0) -> Dict[str, Any]:
        """
        Compare the index-sum moment on (p|q) with its matched-pair extension (p+1|q+1)
        """
        p, q = grading.p, grading.q
        y = [as_coefficient(v) for v in y_values]
        extended = y[:p] + [as_coefficient(extra_value)] + y[p:] + [as_coefficient(extra_value)]
        base = self.moment_indexsum(valencies, grading, y, hbar)
        wide = self.moment_indexsum(valencies, Grading(p + 1, q + 1), extended, hbar)
        return {'base': base, 'extended': wide, 'holds': base == wide}


# Test the fatgraph engine
if __name__ == "__main__":
    logging.basicConfig(level=logging.DEBUG)

    engine = FatgraphEngine()
    print(f"[4] perfect: {engine.moment_polynomial([4], perfect_only=True)}")
    print(f"[2]: {engine.moment_polynomial([2])}")
    star = FatgraphStar([8], [(0, 4), (1, 6), (2, 5)])
    print(f"V, E, F, g = {engine.euler_genus(star)}")

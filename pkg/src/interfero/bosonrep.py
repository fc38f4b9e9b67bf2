"""Exact boson-realization algebra for su(n) irreducible representations.

A state is a polynomial in creation operators a†_{i,k} (site i = 1..n,
species k = 1..n-1) acting on the vacuum, stored as a sparse map from
occupation matrices to coefficients.  Construction work (highest-weight
states, generator actions, basis growth, orthogonalization) is carried out
with exact ``Fraction`` coefficients, so linear-independence and
orthogonality decisions are made without tolerances; floating point enters
only when a state is normalized for numeric contraction.

Generators, acting on site indices only (summed over species):

    c_{i,j} = sum_k a†_{i,k} a_{j,k}     (moves one boson from site j to i)
    h_i     = sum_k (a†_{i,k} a_{i,k} - a†_{i+1,k} a_{i+1,k})

The su(m) subalgebra of the canonical chain acts on the first m sites.
"""
import itertools
from collections import deque
from fractions import Fraction

from .errors import (
    InvalidDimension,
    LabelError,
    NotHighestWeight,
)


def _validate_label(kappas, n=None):
    kappas = tuple(int(k) for k in kappas)
    if n is None:
        n = len(kappas) + 1
    if len(kappas) != n - 1:
        raise LabelError("irrep label must have n-1 entries",
                         n=n, label=list(kappas))
    if any(k < 0 for k in kappas):
        raise LabelError("irrep label entries must be nonnegative",
                         label=list(kappas))
    return kappas


class BosonPolynomial:
    """Sparse polynomial in creation operators applied to the vacuum.

    ``terms`` maps an occupation matrix — a tuple of ``n_sites`` tuples of
    ``n_species`` exponents — to a coefficient.  ``scale2`` is an exact
    squared inverse normalization: the state represented is
    (1/sqrt(scale2)) * sum_m terms[m] * m |vac>.  All algebraic operations
    act on the raw coefficients and require matching ``scale2``.
    """

    __slots__ = ("n_sites", "n_species", "terms", "scale2")

    def __init__(self, n_sites, n_species, terms=None, scale2=Fraction(1)):
        self.n_sites = int(n_sites)
        self.n_species = int(n_species)
        self.terms = dict(terms) if terms else {}
        self.scale2 = scale2

    # -- constructors -------------------------------------------------------
    @classmethod
    def vacuum(cls, n_sites, n_species):
        empty = tuple((0,) * n_species for _ in range(n_sites))
        return cls(n_sites, n_species, {empty: 1})

    def copy(self):
        return BosonPolynomial(self.n_sites, self.n_species, self.terms,
                               self.scale2)

    # -- structure ----------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def _check_compatible(self, other):
        if (self.n_sites != other.n_sites
                or self.n_species != other.n_species):
            raise InvalidDimension(
                "polynomials live on different mode sets",
                a=[self.n_sites, self.n_species],
                b=[other.n_sites, other.n_species])

    def occupations(self, verify=True):
        """Per-site boson totals, or None if monomials disagree.

        With ``verify=False`` only the first monomial is inspected; valid
        when the state is known to be weight-homogeneous (e.g. produced by
        generator chains from a definite-occupation state).
        """
        occ = None
        for mono in self.terms:
            this = tuple(sum(row) for row in mono)
            if occ is None:
                occ = this
                if not verify:
                    return occ
            elif this != occ:
                return None
        return occ

    def weight(self, m=None):
        """su(m) weight (nu_1 - nu_2, ..., nu_{m-1} - nu_m)."""
        if m is None:
            m = self.n_sites
        occ = self.occupations()
        if occ is None:
            raise LabelError("state has no definite site occupations")
        return tuple(occ[i] - occ[i + 1] for i in range(m - 1))

    def boson_count(self):
        occ = self.occupations()
        return None if occ is None else sum(occ)

    # -- ring operations ----------------------------------------------------
    def __add__(self, other):
        self._check_compatible(other)
        assert self.scale2 == other.scale2, "cannot add differently scaled states"
        out = dict(self.terms)
        for mono, c in other.terms.items():
            s = out.get(mono, 0) + c
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        return BosonPolynomial(self.n_sites, self.n_species, out, self.scale2)

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, c):
        if not c:
            return BosonPolynomial(self.n_sites, self.n_species, {},
                                   self.scale2)
        return BosonPolynomial(
            self.n_sites, self.n_species,
            {mono: c * v for mono, v in self.terms.items()}, self.scale2)

    def product(self, other):
        """Polynomial product (creation operators commute)."""
        self._check_compatible(other)
        out = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                mono = tuple(tuple(x + y for x, y in zip(ra, rb))
                             for ra, rb in zip(ma, mb))
                s = out.get(mono, 0) + ca * cb
                if s:
                    out[mono] = s
                else:
                    out.pop(mono, None)
        return BosonPolynomial(self.n_sites, self.n_species, out)

    def reduce_content(self):
        """Divide out the rational content (gcd of all coefficients).

        Keeps coefficient growth in check along chains of generator
        applications; only the ray matters until the final normalization.
        """
        if not self.terms:
            return self
        from math import gcd
        if all(isinstance(c, int) for c in self.terms.values()):
            g = 0
            for c in self.terms.values():
                g = gcd(g, c)
                if g == 1:
                    return self
            return BosonPolynomial(
                self.n_sites, self.n_species,
                {mono: c // g for mono, c in self.terms.items()}, self.scale2)
        num = 0
        den = 1
        for c in self.terms.values():
            f = Fraction(c)
            num = gcd(num, abs(f.numerator))
            den = den * f.denominator // gcd(den, f.denominator)
        g = Fraction(num, den)
        if g in (0, 1):
            return self
        return BosonPolynomial(
            self.n_sites, self.n_species,
            {mono: c / g for mono, c in self.terms.items()}, self.scale2)

    # -- generator actions --------------------------------------------------
    def apply_c(self, i, j):
        """Apply c_{i,j} (1-based sites): move one boson from site j to i."""
        if not (1 <= i <= self.n_sites and 1 <= j <= self.n_sites and i != j):
            raise InvalidDimension("site indices out of range", i=i, j=j,
                                   n_sites=self.n_sites)
        si, sj = i - 1, j - 1
        out = {}
        get = out.get
        for mono, c in self.terms.items():
            for new, occ in _lowering_moves(mono, si, sj):
                s = get(new, 0) + c * occ
                if s:
                    out[new] = s
                else:
                    del out[new]
        return BosonPolynomial(self.n_sites, self.n_species, out, self.scale2)

    def apply_h(self, i):
        """Apply h_i = number(site i) - number(site i+1) (1-based)."""
        if not (1 <= i <= self.n_sites - 1):
            raise InvalidDimension("Cartan index out of range", i=i,
                                   n_sites=self.n_sites)
        out = {}
        for mono, c in self.terms.items():
            ev = sum(mono[i - 1]) - sum(mono[i])
            if ev:
                out[mono] = c * ev
        return BosonPolynomial(self.n_sites, self.n_species, out, self.scale2)

    # -- metric -------------------------------------------------------------
    def raw_inner(self, other):
        """Bosonic inner product of the raw coefficient parts.

        <mono, mono'> = delta_{mono,mono'} * prod factorial(exponent).
        Exact (Fraction/int) when both coefficient sets are rational.
        """
        self._check_compatible(other)
        small, big = ((self.terms, other.terms)
                      if len(self.terms) <= len(other.terms)
                      else (other.terms, self.terms))
        total = 0
        for mono, _ in small.items():
            ca = self.terms.get(mono)
            cb = other.terms.get(mono)
            if ca is None or cb is None:
                continue
            total += _conj(ca) * cb * monomial_weight(mono)
        return total

    def inner(self, other):
        """Inner product of the (scale2-normalized) states, as a number."""
        raw = self.raw_inner(other)
        if self.scale2 == 1 and other.scale2 == 1:
            return raw
        import math
        return raw / math.sqrt(float(self.scale2) * float(other.scale2))

    def norm2_raw(self):
        return self.raw_inner(self)

    def normalized_exact(self):
        """Same raw coefficients with scale2 set to the exact squared norm."""
        n2 = self.norm2_raw()
        assert n2 > 0, "cannot normalize the zero state"
        return BosonPolynomial(self.n_sites, self.n_species, self.terms, n2)

    def to_float(self):
        """Complex-coefficient copy with the normalization folded in."""
        import math
        s = 1.0 / math.sqrt(float(self.scale2))
        return BosonPolynomial(
            self.n_sites, self.n_species,
            {mono: complex(c) * s for mono, c in self.terms.items()})


def _conj(c):
    return c.conjugate() if isinstance(c, complex) else c


from functools import lru_cache


@lru_cache(maxsize=1 << 18)
def _lowering_moves(mono, si, sj):
    """All single-boson moves site sj -> si of one monomial, with counts.

    Monomials repeat heavily across the states of an irrep, so the move
    table is memoized on the monomial itself.
    """
    out = []
    row_j = mono[sj]
    for k, occ in enumerate(row_j):
        if occ:
            rows = list(mono)
            rj = list(row_j)
            rj[k] -= 1
            rows[sj] = tuple(rj)
            ri = list(rows[si])
            ri[k] += 1
            rows[si] = tuple(ri)
            out.append((tuple(rows), occ))
    return tuple(out)


_FACTORIAL = [1]
while len(_FACTORIAL) < 256:
    _FACTORIAL.append(_FACTORIAL[-1] * len(_FACTORIAL))


def monomial_weight(mono):
    """prod over all cells of exponent! — the squared norm of one monomial."""
    w = 1
    for row in mono:
        for e in row:
            if e > 1:
                w *= _FACTORIAL[e]
    return w


def apply_generator(op, state):
    """Apply a generator named by ("c", i, j) or ("h", i) to a state."""
    kind = op[0]
    if kind == "c":
        return state.apply_c(op[1], op[2])
    if kind == "h":
        return state.apply_h(op[1])
    raise LabelError("unknown generator", op=list(op))


# ---------------------------------------------------------------------------
# Highest-weight states
# ---------------------------------------------------------------------------
def hws(kappas, n=None):
    """Highest-weight state of the su(n) irrep labelled by ``kappas``.

    Built as the product over k of the k-th leading determinant of the
    site-by-species creation array, raised to the power kappa_k, applied to
    the vacuum.  Returned exactly normalized (integer coefficients with the
    squared norm recorded in ``scale2``).
    """
    kappas = _validate_label(kappas, n)
    n = len(kappas) + 1
    n_species = max(n - 1, 1)
    poly = BosonPolynomial.vacuum(n, n_species)
    for k, power in enumerate(kappas, start=1):
        if power == 0:
            continue
        det = _creation_determinant(n, n_species, k)
        for _ in range(power):
            poly = poly.product(det)
    return poly.normalized_exact()


def _creation_determinant(n_sites, n_species, k):
    """Determinant of the k x k leading block of the creation array."""
    out = {}
    for perm in itertools.permutations(range(k)):
        sign = _perm_sign(perm)
        rows = [[0] * n_species for _ in range(n_sites)]
        for i, kk in enumerate(perm):
            rows[i][kk] += 1
        mono = tuple(tuple(r) for r in rows)
        out[mono] = out.get(mono, 0) + sign
    out = {m: c for m, c in out.items() if c}
    return BosonPolynomial(n_sites, n_species, out)


def _perm_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def hws_occupations(kappas):
    """Site occupations of the highest-weight state: nu_i = sum_{k>=i} kappa_k."""
    kappas = _validate_label(kappas)
    n = len(kappas) + 1
    return tuple(sum(kappas[i - 1:]) for i in range(1, n + 1))


# ---------------------------------------------------------------------------
# Exact linear-independence bookkeeping
# ---------------------------------------------------------------------------
class _EchelonSpace:
    """Incrementally reduced row space over monomial coordinates (exact).

    Integer-coefficient vectors go through a fraction-free elimination
    (cross-multiplied rows, content removed afterwards) so no Fraction
    objects are created on the hot path; anything else falls back to
    exact rational elimination.
    """

    def __init__(self):
        self.rows = []  # list of (pivot_mono, {mono: int|Fraction})

    def try_insert(self, terms):
        from math import gcd
        if all(isinstance(c, int) for c in terms.values()):
            vec = dict(terms)
            for pivot, row in self.rows:
                coef = vec.get(pivot)
                if not coef:
                    continue
                rp = row[pivot]
                g = gcd(coef, rp)
                a, b = rp // g, coef // g
                # vec <- a*vec - b*row  (kills the pivot, stays integral)
                for m, c in row.items():
                    s = a * vec.get(m, 0) - b * c
                    if s:
                        vec[m] = s
                    else:
                        vec.pop(m, None)
                if a != 1:
                    for m in list(vec):
                        if m not in row:
                            vec[m] = a * vec[m]
                g = 0
                for c in vec.values():
                    g = gcd(g, c)
                    if g == 1:
                        break
                if g > 1:
                    vec = {m: c // g for m, c in vec.items()}
        else:
            vec = {m: Fraction(c) for m, c in terms.items()}
            for pivot, row in self.rows:
                coef = vec.get(pivot)
                if not coef:
                    continue
                factor = coef / row[pivot]
                for m, c in row.items():
                    s = vec.get(m, 0) - factor * c
                    if s:
                        vec[m] = s
                    else:
                        vec.pop(m, None)
        if not vec:
            return False
        pivot = max(vec)
        self.rows.append((pivot, vec))
        return True


# ---------------------------------------------------------------------------
# Basis growth by lowering (breadth-first)
# ---------------------------------------------------------------------------
class BasisSet:
    """Weight-resolved basis of one su(m) irrep grown from its HWS.

    ``by_weight`` maps each su(m) weight to the independent states found
    there, in discovery order; ``states`` is the flat discovery order;
    ``lowering_count`` is the number of lowering-operator applications
    performed (the certified bound is dim * m(m-1)/2).
    """

    def __init__(self, by_weight, states, lowering_count, m):
        self.by_weight = by_weight
        self.states = states
        self.lowering_count = lowering_count
        self.m = m

    def dimension(self):
        return len(self.states)


def assert_highest_weight(state, m):
    """Check that every raising operator of su(m) annihilates the state."""
    if state.is_zero():
        raise NotHighestWeight("zero state cannot be a highest-weight state")
    if state.occupations() is None:
        raise NotHighestWeight("state has no definite weight")
    for i in range(1, m):
        for j in range(i + 1, m + 1):
            if not state.apply_c(i, j).is_zero():
                raise NotHighestWeight(
                    "state is not annihilated by a raising operator",
                    raising=[i, j])


def basis_set(hws_state, m):
    """Grow the full basis of the su(m) irrep generated by ``hws_state``.

    Breadth-first application of the m(m-1)/2 lowering operators c_{i,j}
    (i > j), keeping a state only if it is linearly independent of the
    states already found at its weight (decided exactly).  Raises
    NotHighestWeight if the input is not a valid highest-weight state.
    """
    assert_highest_weight(hws_state, m)
    start = BosonPolynomial(hws_state.n_sites, hws_state.n_species,
                            hws_state.terms)
    lowering_pairs = [(i, j) for j in range(1, m + 1)
                      for i in range(j + 1, m + 1)]

    spaces = {}
    by_weight = {}
    states = []
    count = 0

    def admit(state):
        occ = state.occupations(verify=False)
        space = spaces.setdefault(occ, _EchelonSpace())
        if not space.try_insert(state.terms):
            return False
        w = tuple(occ[i] - occ[i + 1] for i in range(m - 1))
        by_weight.setdefault(w, []).append(state)
        states.append(state)
        return True

    admit(start)
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for i, j in lowering_pairs:
            count += 1
            new = s.apply_c(i, j).reduce_content()
            if new.is_zero():
                continue
            if admit(new):
                queue.append(new)
    return BasisSet(by_weight, states, count, m)


# ---------------------------------------------------------------------------
# Fast basis growth in determinant variables
# ---------------------------------------------------------------------------
# The highest-weight state is a product of leading minors of the creation
# array, and the lowering operators map minors to minors:
#     c_{i,j} Delta_R = +/- Delta_{(R \ {j}) u {i}}   if j in R, i not in R
#                     = 0                              otherwise,
# so the whole lowering orbit stays inside polynomials in the minor
# variables Delta_R (R a sorted site subset, columns = species 1..|R|).
# A state that expands to millions of boson monomials is only a handful of
# minor monomials, which makes the breadth-first growth tractable for
# conjugate-heavy irreps.
#
# Linear independence in this encoding is certified by evaluation
# fingerprints: substituting random integer matrices (mod a large prime)
# for the creation array turns each minor monomial into a product of
# numeric determinants.  A rational dependence between states forces the
# fingerprint vectors to be dependent mod p, so a state is admitted only
# when its fingerprint is independent — dependent states can never be
# admitted, and a false rejection (probability ~ deg/p per comparison,
# p ~ 2^61) would make the count fall short of the dimension formula,
# which the caller checks.

_FP_PRIME = (1 << 61) - 1


def _replace_row(subset, j, i):
    """(sign, new sorted subset) for replacing row j by row i in a minor."""
    rest = tuple(x for x in subset if x != j)
    lo, hi = (i, j) if i < j else (j, i)
    crossings = sum(1 for x in rest if lo < x < hi)
    sign = -1 if crossings % 2 else 1
    new = tuple(sorted(rest + (i,)))
    return sign, new


def _minor_lowerings(mono, i, j):
    """Action of c_{i,j} on a minor monomial (sorted tuple of subsets)."""
    out = {}
    seen = set()
    for pos, subset in enumerate(mono):
        if subset in seen:
            continue
        seen.add(subset)
        if j not in subset or i in subset:
            continue
        mult = mono.count(subset)
        sign, new_subset = _replace_row(subset, j, i)
        new = list(mono)
        new[pos] = new_subset
        key = tuple(sorted(new))
        out[key] = out.get(key, 0) + mult * sign
    return out


def _minor_det_mod(matrix_rows, p):
    """Determinant of a small square integer matrix mod p (Leibniz)."""
    k = len(matrix_rows)
    total = 0
    for perm in itertools.permutations(range(k)):
        term = _perm_sign(perm)
        for r in range(k):
            term = term * matrix_rows[r][perm[r]] % p
        total = (total + term) % p
    return total


class _ModEchelon:
    """Row echelon over GF(p) for fingerprint vectors."""

    def __init__(self, p=_FP_PRIME):
        self.p = p
        self.rows = []  # (pivot_index, row list)

    def try_insert(self, vec):
        p = self.p
        vec = list(vec)
        for pivot, row in self.rows:
            c = vec[pivot]
            if c:
                factor = c * pow(row[pivot], p - 2, p) % p
                for idx, val in enumerate(row):
                    if val:
                        vec[idx] = (vec[idx] - factor * val) % p
        for idx, val in enumerate(vec):
            if val:
                self.rows.append((idx, vec))
                return True
        return False


def minor_basis_count(kappas, n=None, seed=0, n_points=24):
    """Dimension of the lowering orbit of hws(kappas), counted in minor
    variables with fingerprint-certified linear independence.

    Equivalent to ``basis_set(hws(kappas, n), n).dimension()`` but feasible
    for irreps whose boson expansion is exponentially large.
    """
    kappas = _validate_label(kappas, n)
    n = len(kappas) + 1
    n_species = max(n - 1, 1)

    import numpy as np
    rng = np.random.default_rng([int(seed), *kappas])
    sizes = {k for k, power in enumerate(kappas, start=1) if power}
    if not sizes:
        return 1
    subsets = [s for k in sizes
               for s in itertools.combinations(range(1, n + 1), k)]
    det_tables = []
    for _ in range(n_points):
        a = rng.integers(1, _FP_PRIME, size=(n, n_species))
        table = {}
        for s in subsets:
            rows = [[int(a[r - 1][c]) for c in range(len(s))] for r in s]
            table[s] = _minor_det_mod(rows, _FP_PRIME)
        det_tables.append(table)

    def fingerprint(terms):
        vec = []
        for table in det_tables:
            total = 0
            for mono, coeff in terms.items():
                prod = coeff % _FP_PRIME
                for subset in mono:
                    prod = prod * table[subset] % _FP_PRIME
                total = (total + prod) % _FP_PRIME
            vec.append(total)
        return vec

    def occupations(mono):
        occ = [0] * n
        for subset in mono:
            for site in subset:
                occ[site - 1] += 1
        return tuple(occ)

    start_mono = tuple(sorted(
        tuple(range(1, k + 1))
        for k, power in enumerate(kappas, start=1) for _ in range(power)))
    start = {start_mono: 1}
    lowering_pairs = [(i, j) for j in range(1, n + 1)
                      for i in range(j + 1, n + 1)]
    spaces = {}
    count = 0
    queue = deque()

    def admit(terms):
        occ = occupations(next(iter(terms)))
        space = spaces.setdefault(occ, _ModEchelon())
        return space.try_insert(fingerprint(terms))

    if admit(start):
        count += 1
        queue.append(start)
    while queue:
        terms = queue.popleft()
        for i, j in lowering_pairs:
            out = {}
            for mono, coeff in terms.items():
                for new, factor in _minor_lowerings(mono, i, j).items():
                    s = out.get(new, 0) + coeff * factor
                    if s:
                        out[new] = s
                    else:
                        del out[new]
            if not out:
                continue
            from math import gcd
            g = 0
            for c in out.values():
                g = gcd(g, c)
                if g == 1:
                    break
            if g > 1:
                out = {m: c // g for m, c in out.items()}
            if admit(out):
                count += 1
                queue.append(out)
    return count


# ---------------------------------------------------------------------------
# Dimension formula
# ---------------------------------------------------------------------------
def irrep_dimension(kappas):
    """Exact dimension of the su(n) irrep labelled by ``kappas``.

    Product over all index windows [a..b] of 1 + (kappa_a+...+kappa_b)/(b-a+1).
    """
    kappas = _validate_label(kappas)
    r = len(kappas)
    dim = Fraction(1)
    for a in range(r):
        running = 0
        for b in range(a, r):
            running += kappas[b]
            dim *= 1 + Fraction(running, b - a + 1)
    assert dim.denominator == 1
    return int(dim)

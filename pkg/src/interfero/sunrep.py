"""Canonical orthonormal bases of su(n) irreps and their D-functions.

The canonical basis is labelled by the subgroup chain
su(n) > su(n-1) > ... > su(2), where su(m) acts on the first m sites.
Each basis state has definite site occupations and a definite irrep label
at every level of the chain; the construction partitions an irrep copy of
su(m) into su(m-1) copies by extracting highest-weight vectors from the
orthogonal complement of what has already been claimed.  Because the
u(m) -> u(m-1) branching is multiplicity-free, the extracted copies are
exactly orthogonal, and the whole construction runs in exact rational
arithmetic; floats only appear in the final normalization and when
contracting against a numeric matrix.

Overall phases follow the convention that the matrix element of the
ordered product c_{1,2}^{p_1} c_{2,3}^{p_2} ... c_{n-1,n}^{p_{n-1}}
between the highest-weight state and the basis state is positive, with
the powers p_l fixed by the occupation deficit below site l.
"""
import itertools
import math
from fractions import Fraction

import numpy as np

from . import bosonrep, linalg
from .bosonrep import BosonPolynomial
from .errors import (
    InternalInconsistency,
    LabelError,
    ShapeError,
)

_FACT = bosonrep._FACTORIAL


class CanonicalStateLabel:
    """Chain label of one canonical basis state.

    ``chain_irreps``: the irrep labels (K^(n), K^(n-1), ..., K^(2)) down
    the subgroup chain.  ``occupations``: the per-site boson numbers,
    which pin the weight at every level of the chain.
    """

    __slots__ = ("chain_irreps", "occupations")

    def __init__(self, chain_irreps, occupations):
        self.chain_irreps = tuple(tuple(int(x) for x in k)
                                  for k in chain_irreps)
        self.occupations = tuple(int(x) for x in occupations)

    @property
    def n(self):
        return len(self.occupations)

    @property
    def irrep(self):
        return self.chain_irreps[0]

    def chain_weights(self):
        """su(m) weights for m = n, n-1, ..., 2 (derived from occupations)."""
        nu = self.occupations
        return tuple(tuple(nu[i] - nu[i + 1] for i in range(m - 1))
                     for m in range(self.n, 1, -1))

    def key(self):
        return (self.chain_irreps, self.occupations)

    def __eq__(self, other):
        return (isinstance(other, CanonicalStateLabel)
                and self.key() == other.key())

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        occ = "".join(str(x) for x in self.occupations)
        chain = "".join("(" + ",".join(str(x) for x in k) + ")"
                        for k in self.chain_irreps[1:])
        return f"CanonicalStateLabel[{occ}{chain}]"


# ---------------------------------------------------------------------------
# Canonical basis construction
# ---------------------------------------------------------------------------
_CANONICAL_CACHE = {}


def canonical_basis_states(n, kappas):
    """Orthonormal canonical basis of the su(n) irrep labelled ``kappas``.

    Returns a list of (CanonicalStateLabel, BosonPolynomial) pairs; the
    polynomials carry exact rational coefficients with the normalization
    recorded in ``scale2``, and are exactly orthogonal.
    """
    kappas = tuple(int(k) for k in kappas)
    key = (int(n), kappas)
    if key in _CANONICAL_CACHE:
        return _CANONICAL_CACHE[key]

    h = bosonrep.hws(kappas, n)
    top = bosonrep.basis_set(BosonPolynomial(h.n_sites, h.n_species, h.terms),
                             n)
    out = []
    _partition_su(top.states, n, (kappas,), out)
    dim = bosonrep.irrep_dimension(kappas)
    if len(out) != dim:
        raise InternalInconsistency(
            "canonical construction produced the wrong state count",
            expected=dim, got=len(out))

    result = []
    for chain, state in out:
        fixed = _fix_phase(h, state)
        label = CanonicalStateLabel(chain, fixed.occupations())
        result.append((label, fixed.normalized_exact()))
    _CANONICAL_CACHE[key] = result
    return result


def _weight_from_occ(occ, m):
    return tuple(occ[i] - occ[i + 1] for i in range(m - 1))


def _residual(state, orth):
    """Exact orthogonal complement of ``state`` w.r.t. pairs (e, |e|^2)."""
    r = state
    for e, n2 in orth:
        c = e.raw_inner(r)
        if c:
            if isinstance(c, int) and isinstance(n2, int):
                c = Fraction(c, n2)
            else:
                c = c / n2
            r = r - e.scaled(c)
    return r


def _partition_su(pool, m, chain, out):
    """Split an su(m) irrep copy (basis in discovery order) down the chain."""
    if m == 2:
        for s in pool:
            out.append((chain, s))
        return

    total = len(pool)
    groups = {}
    for s in pool:
        groups.setdefault(s.occupations(), []).append(s)
    orth = {occ: [] for occ in groups}
    done = 0
    while done < total:
        best = max(
            groups,
            key=lambda occ: (len(groups[occ]) - len(orth[occ]),
                             _weight_from_occ(occ, m)))
        if len(groups[best]) <= len(orth[best]):
            raise InternalInconsistency(
                "no remaining multiplicity at any weight", stage=m)
        seed = None
        for s in groups[best]:
            r = _residual(s, orth[best])
            if not r.is_zero():
                seed = r.reduce_content()
                break
        if seed is None:
            raise InternalInconsistency(
                "weight multiplicity bookkeeping is out of step", stage=m)

        # raise the seed to a highest-weight state of su(m-1)
        cur = seed
        raised = True
        while raised:
            raised = False
            for jj in range(2, m):
                for ii in range(1, jj):
                    t = cur.apply_c(ii, jj)
                    if not t.is_zero():
                        cur = t.reduce_content()
                        raised = True
                        break
                if raised:
                    break
        km1 = cur.weight(m - 1)
        if any(x < 0 for x in km1):
            raise InternalInconsistency("raised seed has a negative weight",
                                        weight=list(km1))

        sub = bosonrep.basis_set(cur, m - 1)
        for s in sub.states:
            occ = s.occupations()
            r = _residual(s, orth.setdefault(occ, []))
            if r.is_zero():
                raise InternalInconsistency(
                    "extracted copy overlaps the claimed span", stage=m)
            r = r.reduce_content()
            orth[occ].append((r, r.norm2_raw()))
        done += sub.dimension()
        if done > total:
            raise InternalInconsistency("extracted more states than present",
                                        stage=m)
        _partition_su(sub.states, m - 1, chain + (km1,), out)


def _fix_phase(h, state):
    """Flip the sign so the canonical raising-product overlap is positive.

    The powers are fixed by occupations: p_l = sum_{j>l} (nu_j - nu_j^hws).
    The product is applied rightmost factor (c_{n-1,n}) first; if the
    resulting overlap vanishes, fall back to greedy simple raising.
    """
    n = state.n_sites
    nu = state.occupations()
    nu_h = h.occupations()
    cur = state
    for ell in range(n - 1, 0, -1):
        p = sum(nu[j] - nu_h[j] for j in range(ell, n))
        for _ in range(p):
            cur = cur.apply_c(ell, ell + 1).reduce_content()
    overlap = h.raw_inner(cur)
    if overlap == 0:
        cur = state
        raised = True
        while raised:
            raised = False
            for ell in range(1, n):
                t = cur.apply_c(ell, ell + 1)
                if not t.is_zero():
                    cur = t.reduce_content()
                    raised = True
                    break
        overlap = h.raw_inner(cur)
        if overlap == 0:
            raise InternalInconsistency(
                "state could not be raised to the highest weight")
    return state.scaled(-1) if overlap < 0 else state


# ---------------------------------------------------------------------------
# Group-element parameterizations
# ---------------------------------------------------------------------------
def euler_matrix(alpha, beta, gamma):
    """2x2 special unitary from Euler angles (z-y-z convention)."""
    c = math.cos(beta / 2.0)
    s = math.sin(beta / 2.0)
    return np.array([
        [np.exp(-1j * (alpha + gamma) / 2) * c,
         -np.exp(-1j * (alpha - gamma) / 2) * s],
        [np.exp(1j * (alpha - gamma) / 2) * s,
         np.exp(1j * (alpha + gamma) / 2) * c],
    ])


def embedded_rotation(n, p, q, alpha, beta, gamma):
    """n x n identity with an Euler 2x2 block in rows/columns (p, q)."""
    if not (1 <= p < q <= n):
        raise ShapeError("rotation plane indices out of range", p=p, q=q, n=n)
    r = euler_matrix(alpha, beta, gamma)
    out = np.eye(n, dtype=complex)
    out[p - 1, p - 1] = r[0, 0]
    out[p - 1, q - 1] = r[0, 1]
    out[q - 1, p - 1] = r[1, 0]
    out[q - 1, q - 1] = r[1, 1]
    return out


def fundamental_matrix(n, omega, tol=1e-8):
    """Resolve a group-element description to its n x n unitary matrix.

    Accepts a raw unitary matrix, an (alpha, beta, gamma) Euler triple for
    n == 2, or a sequence of (p, q, alpha, beta, gamma) two-level rotations
    multiplied left to right.
    """
    arr = np.asarray(omega, dtype=object)
    if arr.ndim == 2 and arr.shape == (n, n):
        v = np.asarray(omega, dtype=complex)
        linalg.assert_unitary(v, tol=tol)
        return v
    if n == 2 and arr.ndim == 1 and arr.shape == (3,):
        a, b, g = (float(x) for x in omega)
        return euler_matrix(a, b, g)
    if arr.ndim in (1, 2):
        try:
            rotations = [tuple(item) for item in omega]
        except TypeError:
            rotations = None
        if rotations and all(len(r) == 5 for r in rotations):
            v = np.eye(n, dtype=complex)
            for p, q, a, b, g in rotations:
                v = v @ embedded_rotation(n, int(p), int(q),
                                          float(a), float(b), float(g))
            return v
    raise ShapeError("unrecognized group-element description", n=n)


# ---------------------------------------------------------------------------
# D-functions
# ---------------------------------------------------------------------------
def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _transform_monomial(mono, v):
    """Expand prod a†_{i,k}^e under a†_{i,k} -> sum_j v[j,i] a†_{j,k}.

    The column convention makes the fundamental-irrep matrix equal to v
    itself, so the D-matrices compose covariantly: D(vw) = D(v)D(w).
    """
    n = v.shape[0]
    zero = tuple((0,) * len(mono[0]) for _ in range(n))
    acc = {zero: 1.0 + 0.0j}
    for i, row in enumerate(mono):
        for k, e in enumerate(row):
            if e == 0:
                continue
            new = {}
            for comp in _compositions(e, n):
                coef = _FACT[e]
                for j, c_j in enumerate(comp):
                    if c_j:
                        coef = coef / _FACT[c_j] * v[j, i] ** c_j
                if coef == 0:
                    continue
                for mat, c0 in acc.items():
                    rows = list(mat)
                    for j, c_j in enumerate(comp):
                        if c_j:
                            r = list(rows[j])
                            r[k] += c_j
                            rows[j] = tuple(r)
                    key2 = tuple(rows)
                    new[key2] = new.get(key2, 0.0) + c0 * coef
            acc = new
    return acc


def _transform_state(state_float, v):
    out = {}
    for mono, c in state_float.terms.items():
        for mat, t in _transform_monomial(mono, v).items():
            out[mat] = out.get(mat, 0.0) + c * t
    return BosonPolynomial(state_float.n_sites, state_float.n_species, out)


def _float_basis(n, kappas):
    basis = canonical_basis_states(n, kappas)
    return [(label, state.to_float()) for label, state in basis]


def dfunction(n, omega, row, col):
    """Matrix element <row| D(omega) |col> in the canonical basis.

    ``row`` and ``col`` are CanonicalStateLabel instances; elements between
    different irreps vanish identically.
    """
    if row.irrep != col.irrep:
        return 0.0 + 0.0j
    v = fundamental_matrix(n, omega)
    basis = _float_basis(n, row.irrep)
    lookup = {label.key(): state for label, state in basis}
    try:
        row_state = lookup[row.key()]
        col_state = lookup[col.key()]
    except KeyError as exc:
        raise LabelError("label does not name a canonical basis state",
                         label=repr(exc.args[0])) from exc
    return complex(row_state.raw_inner(_transform_state(col_state, v)))


def dfunction_matrix(n, omega, kappas):
    """Full irrep matrix D(omega) in canonical-basis order.

    Returns (labels, matrix) with matrix[r, c] = <labels[r]|D|labels[c]>.
    """
    v = fundamental_matrix(n, omega)
    basis = _float_basis(n, tuple(int(k) for k in kappas))
    labels = [label for label, _ in basis]
    dim = len(basis)
    mat = np.zeros((dim, dim), dtype=complex)
    for c_idx, (_, col_state) in enumerate(basis):
        transformed = _transform_state(col_state, v)
        for r_idx, (_, row_state) in enumerate(basis):
            mat[r_idx, c_idx] = row_state.raw_inner(transformed)
    return labels, mat


# ---------------------------------------------------------------------------
# Gelfand-Tsetlin conversion
# ---------------------------------------------------------------------------
def state_to_gt(label):
    """Gelfand-Tsetlin pattern of a canonical basis state.

    Row l (length l) is the u(l) partition: the su(l) label fixes the part
    differences and the boson count in the first l sites fixes the uniform
    offset.  Rows are returned top (length n) first.  Raises LabelError if
    the chain labels and occupations are incompatible.
    """
    nu = label.occupations
    n = label.n
    chain = label.chain_irreps  # K^(n) ... K^(2)
    rows = []
    for ell in range(n, 1, -1):
        kap = chain[n - ell]
        if len(kap) != ell - 1:
            raise LabelError("chain label has the wrong length",
                             level=ell, label=list(kap))
        parts = [sum(kap[k:]) for k in range(ell - 1)] + [0]
        n_ell = sum(nu[:ell])
        shift, rem = divmod(n_ell - sum(parts), ell)
        if rem != 0 or shift < 0:
            raise LabelError(
                "occupations are incompatible with the chain label",
                level=ell, boson_count=n_ell, label=list(kap))
        rows.append(tuple(p + shift for p in parts))
    rows.append((nu[0],))

    for upper, lower in zip(rows, rows[1:]):
        for k, low in enumerate(lower):
            if not (upper[k] >= low >= upper[k + 1]):
                raise LabelError("betweenness violated in the derived pattern",
                                 upper=list(upper), lower=list(lower))
    for ell in range(1, n + 1):
        above = sum(rows[n - ell])
        below = sum(rows[n - ell + 1]) if ell > 1 else 0
        if above - below != nu[ell - 1]:
            raise LabelError("pattern row sums disagree with occupations",
                             level=ell)
    return tuple(rows)


def labels_with_weight(n, kappas, occupations):
    """All canonical labels of one irrep at a given occupation tuple."""
    occ = tuple(int(x) for x in occupations)
    return [label for label, _ in canonical_basis_states(n, kappas)
            if label.occupations == occ]

"""Cosine-sine decomposition of block unitaries and the iterative
factorization of an (n_s·n_p)-dimensional unitary into internal elements,
balanced beam splitters and phase banks.

Conventions
-----------
A plan's ``elements`` list is stored in matrix-product order: the realized
unitary is ``M(elements[0]) @ M(elements[1]) @ ...``, i.e. the rightmost
element acts on states first (serialized ``order: rightmost-first``).
"""
import numpy as np

from . import linalg
from .errors import InvalidSplit, NotUnitary, ShapeMismatch, PlanCorrupt

# the balanced beam splitter constant
B2 = np.array([[1.0, 1.0j], [1.0j, 1.0]], dtype=complex) / np.sqrt(2.0)


class CsdBlocks:
    """Result of a single cosine-sine decomposition.

    left  : (m+n)×(m+n) block-diagonal unitary  L_m ⊕ L'_n
    thetas: m angles in [0, π/2], ordered by descending cos θ
    right : (m+n)×(m+n) block-diagonal unitary  R_m† ⊕ R'_n†
    """

    def __init__(self, left, thetas, right, m, n):
        self.left = left
        self.thetas = thetas
        self.right = right
        self.m = m
        self.n = n

    def middle(self):
        return cs_matrix(self.thetas, self.n - self.m)

    def reconstruct(self):
        return self.left @ self.middle() @ self.right


def cs_matrix(thetas, extra=0):
    """The orthogonal CS matrix S_2m(θ) ⊕ I_extra."""
    t = np.asarray(thetas, dtype=float)
    m = len(t)
    c = np.cos(t)
    s = np.sin(t)
    out = np.zeros((2 * m + extra, 2 * m + extra), dtype=complex)
    out[:m, :m] = np.diag(c)
    out[:m, m:2 * m] = np.diag(s)
    out[m:2 * m, :m] = -np.diag(s)
    out[m:2 * m, m:2 * m] = np.diag(c)
    for i in range(2 * m, 2 * m + extra):
        out[i, i] = 1.0
    return out


def _mgs(cols):
    """Orthonormalize columns in place, earliest columns perturbed least."""
    q = cols.copy()
    n = q.shape[1]
    for j in range(n):
        for i in range(j):
            q[:, j] -= q[:, i] * np.vdot(q[:, i], q[:, j])
        nrm = np.linalg.norm(q[:, j])
        q[:, j] /= nrm
    return q


def csd(u, m, tol=linalg.DEFAULT_UNITARITY_TOL):
    """Cosine-sine decomposition U = (L_m ⊕ L'_n)·(S_2m ⊕ I_{n−m})·(R_m† ⊕ R'_n†).

    The left/right factors are built from the singular vectors of the upper
    left block A; the residual diagonal phases of the B and C blocks are
    absorbed into the primed factors so the middle matrix is real.  Angles
    come out in [0, π/2], ordered by descending singular value of A.
    """
    u = linalg.as_complex_matrix(u)
    dim = u.shape[0]
    n = dim - m
    if m < 1 or m > n:
        raise InvalidSplit("require 1 <= m <= n", m=m, n=n)
    if linalg.unitarity_defect(u) > tol:
        raise NotUnitary("csd input is not unitary within tolerance",
                         defect=linalg.unitarity_defect(u))

    a = u[:m, :m]
    b = u[:m, m:]
    c = u[m:, :m]
    d = u[m:, m:]

    lm, ca, rm = linalg.svd(a)
    ca = np.clip(ca, 0.0, 1.0)
    sa = np.sqrt(np.maximum(0.0, 1.0 - ca ** 2))
    thetas = np.arctan2(sa, ca)

    # right-primed columns from rows of L_m† B, left-primed from C R_m.
    z = lm.conj().T @ b              # m×n, row i ≈ s_i · r'_i†
    y = c @ rm                       # n×m, col i ≈ −s_i · l'_i
    dir_tol = 1e-8
    rp = np.zeros((n, m), dtype=complex)
    lp = np.zeros((n, m), dtype=complex)
    undecided = []
    for i in range(m):
        zn = np.linalg.norm(z[i, :])
        yn = np.linalg.norm(y[:, i])
        if zn > dir_tol and yn > dir_tol:
            rp[:, i] = z[i, :].conj() / zn
            lp[:, i] = -y[:, i] / yn
        else:
            undecided.append(i)

    if undecided:
        # θ_i ≈ 0: B/C carry no information; pick r'_i from the
        # orthocomplement of the decided ones and let D transport it.
        decided = [i for i in range(m) if i not in undecided]
        basis = rp[:, decided] if decided else np.zeros((n, 0), dtype=complex)
        fresh = []
        for j in range(n):
            if len(fresh) == len(undecided):
                break
            cand = np.zeros(n, dtype=complex)
            cand[j] = 1.0
            for _ in range(2):
                if basis.shape[1]:
                    cand -= basis @ (basis.conj().T @ cand)
                for f in fresh:
                    cand -= f * np.vdot(f, cand)
            nrm = np.linalg.norm(cand)
            if nrm > 0.5:
                fresh.append(cand / nrm)
        for i, vec in zip(undecided, fresh):
            rp[:, i] = vec
            dv = d @ vec
            lp[:, i] = dv / np.linalg.norm(dv)

    # orthonormal completions; R'⊥ = D† L'⊥ keeps the trailing block exactly I
    lp_full = np.zeros((n, n), dtype=complex)
    lp_full[:, :m] = lp
    lp_full = linalg._orthonormal_completion(lp_full, n, m) if n > m else lp
    if n > m:
        lp_tail = lp_full[:, m:]
        rp_full = np.concatenate([rp, d.conj().T @ lp_tail], axis=1)
    else:
        rp_full = rp
    # final polish: tiny-angle directions may be slightly non-orthogonal
    rp_full = _mgs(rp_full)
    lp_full = _mgs(lp_full)

    left = np.zeros((dim, dim), dtype=complex)
    left[:m, :m] = lm
    left[m:, m:] = lp_full
    right_fac = np.zeros((dim, dim), dtype=complex)
    right_fac[:m, :m] = rm
    right_fac[m:, m:] = rp_full
    right = right_fac.conj().T

    # re-derive the angles from the actual middle matrix so that small
    # orthonormalization corrections are absorbed optimally
    lam = left.conj().T @ u @ right.conj().T
    for i in range(m):
        thetas[i] = np.arctan2(max(-np.real(lam[m + i, i]), 0.0),
                               max(np.real(lam[i, i]), 0.0))

    return CsdBlocks(left, thetas, right, m, n)


# ---------------------------------------------------------------------------
# Optical elements and plans
# ---------------------------------------------------------------------------
def bs_element(mode):
    return {"kind": "BS", "mode": mode}


def iu_element(mode, matrix):
    return {"kind": "IU", "mode": mode, "matrix": np.asarray(matrix, dtype=complex)}


def ip_element(mode, phases):
    """Phase bank: phases for internal modes of spatial modes (mode, mode+1)."""
    return {"kind": "IP", "mode": mode, "phases": np.asarray(phases, dtype=float)}


class DecompositionPlan:
    def __init__(self, n_s, n_p, elements):
        self.n_s = n_s
        self.n_p = n_p
        self.elements = list(elements)

    def census(self):
        counts = {"BS": 0, "IU": 0, "IP": 0}
        for e in self.elements:
            counts[e["kind"]] += 1
        return counts


def element_matrix(element, n_s, n_p):
    """Embed one optical element into the full n_s·n_p space."""
    dim = n_s * n_p
    k = element["mode"]
    kind = element["kind"]
    out = np.eye(dim, dtype=complex)
    lo = (k - 1) * n_p
    if kind == "BS":
        if k < 1 or k + 1 > n_s:
            raise PlanCorrupt("beam splitter mode out of range", mode=k)
        out[lo:lo + 2 * n_p, lo:lo + 2 * n_p] = np.kron(B2, np.eye(n_p))
    elif kind == "IU":
        mat = element["matrix"]
        if mat.shape != (n_p, n_p):
            raise PlanCorrupt("internal unitary has wrong dimension",
                              mode=k, shape=list(mat.shape))
        out[lo:lo + n_p, lo:lo + n_p] = mat
    elif kind == "IP":
        phases = np.asarray(element["phases"], dtype=float)
        if len(phases) % n_p != 0 or k - 1 + len(phases) // n_p > n_s:
            raise PlanCorrupt("phase bank has wrong length",
                              mode=k, count=len(phases))
        out[lo:lo + len(phases), lo:lo + len(phases)] = np.diag(np.exp(1j * phases))
    else:
        raise PlanCorrupt(f"unknown element kind {kind!r}")
    return out


def reconstruct(plan):
    """Multiply out a plan's elements (list order = product order)."""
    dim = plan.n_s * plan.n_p
    out = np.eye(dim, dtype=complex)
    for e in plan.elements:
        out = out @ element_matrix(e, plan.n_s, plan.n_p)
    return out


def factor_cs_matrix(angles, n_p, mode=1):
    """Factor S_{2n_p}(θ) into 2 balanced beam splitters and 2 phase banks.

    S = (𝓑₂⊗I)(Θ ⊕ Θ†)(𝓑₂†⊗I) exactly; since the element set carries only
    the balanced splitter, 𝓑₂† is rewritten as P·𝓑₂·P with P = phases
    (0, π) on the two spatial modes, leaving the element sequence
    [BS, IP(θ_l ; π−θ_l), BS, IP(0 ; π)] whose product equals S exactly.
    """
    t = np.asarray(angles, dtype=float)
    assert len(t) == n_p, "need one angle per internal mode"
    bank1 = np.concatenate([t, np.pi - t])
    bank2 = np.concatenate([np.zeros(n_p), np.pi * np.ones(n_p)])
    return [bs_element(mode), ip_element(mode, bank1),
            bs_element(mode), ip_element(mode, bank2)]


def decompose(u, n_s, n_p, tol=linalg.DEFAULT_UNITARITY_TOL):
    """Factor an n_s·n_p unitary into a plan of BS/IU/IP elements.

    Runs n_s−1 iterations; iteration j peels spatial mode j off the current
    unitary by a chain of CSDs, emitting one CS block per mode pair and
    merging the primed right factors (they commute past the already emitted
    CS matrices, acting on disjoint spatial modes) into the next iteration's
    input.
    """
    u = linalg.as_complex_matrix(u)
    dim = n_s * n_p
    if u.shape != (dim, dim):
        raise ShapeMismatch("matrix dimension must equal n_s*n_p",
                            shape=list(u.shape), n_s=n_s, n_p=n_p)
    if linalg.unitarity_defect(u) > tol:
        raise NotUnitary("decompose input is not unitary",
                         defect=linalg.unitarity_defect(u))

    elements = []
    cur = np.array(u)  # acts on spatial modes j..n_s
    for j in range(1, n_s):
        seq_left = []
        seq_mid = []
        modes_here = n_s - j + 1
        acc = np.eye((modes_here - 1) * n_p, dtype=complex)
        w = cur
        for p in range(j, n_s):
            blocks = csd(w, n_p, tol=tol)
            l_np = blocks.left[:n_p, :n_p]
            l_prime = blocks.left[n_p:, n_p:]
            r_np_dag = blocks.right[:n_p, :n_p]
            r_prime_dag = blocks.right[n_p:, n_p:]
            seq_left.append(iu_element(p, l_np))
            seq_mid = (factor_cs_matrix(blocks.thetas, n_p, mode=p)
                       + [iu_element(p, r_np_dag)] + seq_mid)
            # merge R'† into the accumulated right matrix (modes j+1..n_s)
            off = (p - j) * n_p
            emb = np.eye((modes_here - 1) * n_p, dtype=complex)
            emb[off:, off:] = r_prime_dag
            acc = emb @ acc
            w = l_prime
        seq_left.append(iu_element(n_s, w))  # bottom of the L chain
        elements.extend(seq_left)
        elements.extend(seq_mid)
        cur = acc
    elements.append(iu_element(n_s, cur))
    return DecompositionPlan(n_s, n_p, elements)


def cost_report(n_s, n_p):
    """Element-count accounting versus the triangular single-DOF mesh."""
    assert n_s >= 1 and n_p >= 1
    bs = n_s * (n_s - 1)
    reck = n_s * n_p * (n_s * n_p - 1) // 2
    return {
        "beam_splitters": bs,
        "internal_elements": n_s * n_p * (n_s * n_p + n_s - 1),
        "reck_beam_splitters": reck,
        "reduction_factor": (reck / bs) if bs else float("inf"),
    }

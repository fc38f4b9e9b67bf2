"""Dense complex matrix core: SVD, Haar sampling, trace distance,
nearest-unitary projection and representative canonicalization.

All functions are pure: inputs are never mutated and fresh arrays are
returned.  The one iterative primitive (SVD) is a one-sided Jacobi sweep,
implemented here directly so the rest of the toolkit does not depend on an
external decomposition routine.
"""
import numpy as np

from .errors import (
    NumericalFailure,
    InvalidDimension,
    ShapeError,
    SingularInput,
    PhaseUndefined,
)

DEFAULT_UNITARITY_TOL = 1e-10


def as_complex_matrix(m):
    """Return a fresh complex 2-D array, validating finiteness."""
    a = np.array(m, dtype=complex)
    assert a.ndim == 2, "expected a 2-D matrix"
    if not np.all(np.isfinite(a)):
        raise ShapeError("matrix contains non-finite entries")
    return a


def unitarity_defect(u):
    """Max-norm of U†U − I."""
    u = np.asarray(u, dtype=complex)
    n = u.shape[0]
    return float(np.max(np.abs(u.conj().T @ u - np.eye(n))))


def assert_unitary(u, tol=DEFAULT_UNITARITY_TOL):
    u = as_complex_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise ShapeError("unitary must be square", shape=list(u.shape))
    d = unitarity_defect(u)
    if d > tol:
        from .errors import NotUnitary

        raise NotUnitary(f"unitarity defect {d:.3e} exceeds tolerance {tol:.1e}",
                         defect=d, tol=tol)
    return u


# ---------------------------------------------------------------------------
# One-sided Jacobi SVD
# ---------------------------------------------------------------------------
def _orthonormal_completion(u_cols, r, have):
    """Extend the orthonormal columns u_cols[:, :have] to a full r×r basis."""
    u = u_cols
    filled = have
    for j in range(r):
        if filled == r:
            break
        cand = np.zeros(r, dtype=complex)
        cand[j] = 1.0
        # two rounds of classical Gram-Schmidt for numerical safety
        for _ in range(2):
            cand = cand - u[:, :filled] @ (u[:, :filled].conj().T @ cand)
        nrm = np.linalg.norm(cand)
        if nrm > 0.5:
            u[:, filled] = cand / nrm
            filled += 1
    if filled != r:
        raise NumericalFailure("failed to complete orthonormal basis")
    return u


def svd(m, tol=1e-14, max_sweeps=100):
    """Singular value decomposition M = W diag(s) V† by one-sided Jacobi.

    Parameters
    ----------
    m : array_like, shape (r, c)
    tol : float
        Relative off-diagonal threshold for column-pair rotations.
    max_sweeps : int
        Iteration cap; exceeding it raises NumericalFailure.

    Returns
    -------
    w : (r, r) ndarray, unitary
    s : (min(r, c),) ndarray, nonincreasing nonnegative
    v : (c, c) ndarray, unitary  (note: V itself, not V†)
    """
    a = as_complex_matrix(m)
    r, c = a.shape
    if r < c:
        # work on the conjugate transpose and swap factors
        w, s, v = svd(a.conj().T, tol=tol, max_sweeps=max_sweeps)
        return v, s, w

    v = np.eye(c, dtype=complex)
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        return np.eye(r, dtype=complex), np.zeros(c), v
    a = a / scale  # keep column norms O(1); restored on the spectrum below

    for _ in range(max_sweeps):
        rotated = False
        for p in range(c - 1):
            for q in range(p + 1, c):
                app = np.real(np.vdot(a[:, p], a[:, p]))
                aqq = np.real(np.vdot(a[:, q], a[:, q]))
                apq = np.vdot(a[:, p], a[:, q])
                b = abs(apq)
                # negligible columns contribute singular values ~0; rotating
                # against them only rephases and can cycle forever
                if app < 1e-280 or aqq < 1e-280:
                    continue
                if b <= tol * np.sqrt(app * aqq) or b == 0.0:
                    continue
                rotated = True
                phi = apq / b  # e^{i*arg(apq)}
                tau = (aqq - app) / (2.0 * b)
                if abs(tau) > 1e8:
                    t = 1.0 / (2.0 * tau)
                else:
                    t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                if tau == 0.0:
                    t = 1.0
                cs = 1.0 / np.sqrt(1.0 + t * t)
                sn = t * cs
                # columns [p, q] <- [p, q] @ [[cs, sn], [-sn/phi, cs/phi]]
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = cs * ap - (sn / phi) * aq
                a[:, q] = sn * ap + (cs / phi) * aq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = cs * vp - (sn / phi) * vq
                v[:, q] = sn * vp + (cs / phi) * vq
        if not rotated:
            break
    else:
        raise NumericalFailure("Jacobi SVD did not converge",
                               sweeps=max_sweeps)

    s = np.sqrt(np.maximum(np.real(np.einsum("ij,ij->j", a.conj(), a)), 0.0))
    order = np.argsort(-s, kind="stable")
    s = s[order]
    a = a[:, order]
    v = v[:, order]

    w = np.zeros((r, r), dtype=complex)
    rank_tol = max(r, c) * np.finfo(float).eps * (s[0] if len(s) else 0.0)
    have = 0
    for j in range(c):
        if s[j] > rank_tol and s[j] > 0.0:
            w[:, j] = a[:, j] / s[j]
            have = j + 1
        else:
            break
    w = _orthonormal_completion(w, r, have)
    return w, s * scale, v


def singular_values(m):
    return svd(m)[1]


# ---------------------------------------------------------------------------
# Derived operations
# ---------------------------------------------------------------------------
def trace_distance(a, b):
    """Half the sum of singular values of (a − b)."""
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    if a.shape != b.shape:
        raise ShapeError("dimension mismatch", a=list(a.shape), b=list(b.shape))
    return float(0.5 * np.sum(singular_values(a - b)))


def nearest_unitary(u_tilde):
    """Frobenius-nearest unitary W = (ŨŨ†)^{−1/2} Ũ via polar decomposition."""
    a = as_complex_matrix(u_tilde)
    if a.shape[0] != a.shape[1]:
        raise ShapeError("input must be square", shape=list(a.shape))
    w, s, v = svd(a)
    if s[-1] <= 1e-12 * s[0]:
        raise SingularInput("rank-deficient input to nearest_unitary",
                            singular_values=[float(x) for x in s])
    return w @ v.conj().T


def haar_random_unitary(m, seed=None, rng=None):
    """Haar-random m×m unitary via QR of a complex Ginibre matrix.

    The R-diagonal phase fix makes the distribution exactly Haar.  Exactly
    one of ``seed``/``rng`` should be given for reproducible draws.
    """
    if m < 1:
        raise InvalidDimension("m must be >= 1", m=m)
    if rng is None:
        rng = np.random.default_rng(seed)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))[np.newaxis, :]
    return q


def canonicalize_representative(v, zero_tol=1e-12):
    """Strip the unobservable port phases: D1·V·D2† with real nonnegative
    first row and first column.  Idempotent; preserves |entries|."""
    u = as_complex_matrix(v)
    if u.shape[0] != u.shape[1]:
        raise ShapeError("input must be square", shape=list(u.shape))
    m = u.shape[0]
    col = np.abs(u[:, 0])
    row = np.abs(u[0, :])
    if np.any(col <= zero_tol) or np.any(row <= zero_tol):
        bad_out = [int(i) + 1 for i in np.nonzero(col <= zero_tol)[0]]
        bad_in = [int(j) + 1 for j in np.nonzero(row <= zero_tol)[0]]
        raise PhaseUndefined(
            "zero entry in first row/column leaves port phase unconstrained",
            output_ports=bad_out, input_ports=bad_in)
    d1 = np.conj(u[:, 0]) / col           # e^{-i arg(V_i1)}
    w = u * d1[:, np.newaxis]
    d2 = w[0, :] / np.abs(w[0, :])        # e^{+i arg((D1 V)_1j)}
    w = w * np.conj(d2)[np.newaxis, :]
    # exact realness on the border
    w[:, 0] = np.abs(w[:, 0])
    w[0, :] = np.abs(w[0, :])
    return w

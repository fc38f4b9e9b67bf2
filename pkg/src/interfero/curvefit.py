"""Weighted least-squares fitting of coincidence curves.

All fitted curves share one shape: C(τ) = scale·(base(s) + amp(s)·Q(τ−shift))
with a single shape parameter s (the mode-matching parameter, an argument
magnitude |θ| or a phase combination β), an ordinate scale and an abscissa
shift.  The optimizer is a Levenberg–Marquardt-style damped least squares
with analytic Jacobians: accepted steps are strictly monotone in the
objective, and fits are multi-started over the four canonical shape seeds
{π/4, 3π/4, 5π/4, 7π/4} (one per qualitative curve shape).
"""
import numpy as np

from .errors import FitFailure

SHAPE_SEEDS = (np.pi / 4, 3 * np.pi / 4, 5 * np.pi / 4, 7 * np.pi / 4)


class CurveModel:
    """C(τ) = scale·(base(shape) + amp(shape)·Q(τ−shift)).

    q must be callable on arrays and expose ``q.derivative``; base/amp and
    their derivatives are functions of the shape parameter.
    """

    def __init__(self, q, base, amp, dbase, damp):
        self.q = q
        self.base = base
        self.amp = amp
        self.dbase = dbase
        self.damp = damp

    def _q(self, tau, shift):
        if hasattr(self.q, "shifted"):
            return self.q.shifted(tau, shift)
        return self.q(tau - shift)

    def _dq(self, tau, shift):
        if hasattr(self.q, "shifted_derivative"):
            return self.q.shifted_derivative(tau, shift)
        return self.q.derivative(tau - shift)

    def curve(self, tau, shape, scale, shift):
        return scale * (self.base(shape) + self.amp(shape) * self._q(tau, shift))

    def jacobian(self, tau, shape, scale, shift):
        qv = self._q(tau, shift)
        dq = self._dq(tau, shift)
        inner = self.base(shape) + self.amp(shape) * qv
        d_shape = scale * (self.dbase(shape) + self.damp(shape) * qv)
        d_scale = inner
        d_shift = -scale * self.amp(shape) * dq
        return np.stack([d_shape, d_scale, d_shift], axis=1), scale * inner


class FitResult:
    def __init__(self, shape, scale, shift, residuals, objective,
                 degenerate=False, starts=None):
        self.shape = shape
        self.scale = scale
        self.shift = shift
        self.residuals = residuals
        self.objective = objective
        self.degenerate = degenerate
        self.starts = starts or []


def fit_weights(counts):
    """w(τ) = 1/C_exp(τ), with w = 1 where the measured count is zero
    (or nonpositive, which only happens through floating-point noise)."""
    counts = np.asarray(counts, dtype=float)
    w = np.ones_like(counts)
    pos = counts > 0
    w[pos] = 1.0 / counts[pos]
    return w


def guess_shift(tau, counts):
    """Place the global extremum farther from the mean at zero delay."""
    counts = np.asarray(counts, dtype=float)
    mean = counts.mean()
    imax = int(np.argmax(counts))
    imin = int(np.argmin(counts))
    idx = imax if counts[imax] - mean >= mean - counts[imin] else imin
    return float(tau[idx])


def _lm(model, tau, counts, w, x0, max_iter=200, lam0=1e-3):
    x = np.array(x0, dtype=float)
    curve = model.curve(tau, *x)
    r = counts - curve
    obj = float(np.sum(w * r * r))
    lam = lam0
    converged = False
    for _ in range(max_iter):
        jac, _ = model.jacobian(tau, *x)
        jtw = jac.T * w
        h = jtw @ jac
        g = jtw @ r
        if np.max(np.abs(g)) < 1e-14 * max(1.0, obj):
            converged = True
            break
        accepted = False
        for _damp in range(60):
            h_damped = h + lam * np.diag(np.maximum(np.diag(h), 1e-30))
            try:
                step = np.linalg.solve(h_damped, g)
            except np.linalg.LinAlgError:
                lam *= 4.0
                continue
            x_new = x + step
            r_new = counts - model.curve(tau, *x_new)
            obj_new = float(np.sum(w * r_new * r_new))
            if obj_new < obj:
                rel_drop = (obj - obj_new) / max(obj, 1e-300)
                x, r, obj = x_new, r_new, obj_new
                lam = max(lam / 3.0, 1e-12)
                accepted = True
                if rel_drop < 1e-14 or np.max(np.abs(step)) < 1e-14:
                    converged = True
                break
            lam *= 4.0
        if not accepted or converged:
            converged = converged or not accepted and obj < np.inf
            converged = True
            break
    return x, r, obj, converged


def fit_curve(model, tau, counts, seeds=None, scale_guess=None,
              shift_guess=None, max_iter=200):
    """Fit (shape, scale, shift) to measured counts; best seed wins.

    Raises FitFailure when no start converges or when the data carry no
    shape information (flat curve); near-degenerate fits are returned with
    ``degenerate=True``.
    """
    tau = np.asarray(tau, dtype=float)
    counts = np.asarray(counts, dtype=float)
    assert len(tau) >= 5, "need at least 5 data points"
    assert np.all(np.isfinite(counts))
    w = fit_weights(counts)
    if seeds is None:
        seeds = SHAPE_SEEDS

    c_inf = 0.5 * (counts[0] + counts[-1])
    span = counts.max() - counts.min()
    if span <= 1e-12 * max(1.0, counts.max()):
        raise FitFailure("flat data: shape parameter is unconstrained",
                         span=float(span))

    shift0 = guess_shift(tau, counts) if shift_guess is None else shift_guess

    best = None
    diagnostics = []
    for seed in seeds:
        base = model.base(seed)
        if scale_guess is not None:
            scale0 = scale_guess
        else:
            scale0 = c_inf / base if abs(base) > 1e-12 else max(counts.mean(), 1e-12)
        x, r, obj, ok = _lm(model, tau, counts, w, (seed, scale0, shift0),
                            max_iter=max_iter)
        diagnostics.append({"seed": float(seed), "objective": float(obj),
                            "converged": bool(ok)})
        if ok and (best is None or obj < best[2]):
            best = (x, r, obj)
    if best is None:
        raise FitFailure("no start converged", starts=diagnostics)

    (shape, scale, shift), residuals, objective = best
    # degenerate-shape flag: the fitted interference term is buried in the
    # residual noise floor
    qspan = float(np.ptp(model.q(tau - shift)))
    signal = abs(scale * model.amp(shape)) * qspan
    noise = np.sqrt(objective / max(len(tau), 1)) * np.sqrt(max(counts.mean(), 1e-300))
    degenerate = signal < 3.0 * noise
    return FitResult(float(shape), float(scale), float(shift), residuals,
                     float(objective), degenerate=degenerate,
                     starts=diagnostics)


def param_sigmas(model, tau, counts, fit):
    """Linearized 1σ uncertainties (shape, scale, shift) at the optimum.

    Standard weighted-least-squares covariance (JᵀWJ)⁻¹ scaled by the
    reduced objective; infinite where the normal matrix is singular.
    """
    tau = np.asarray(tau, dtype=float)
    counts = np.asarray(counts, dtype=float)
    w = fit_weights(counts)
    jac, _ = model.jacobian(tau, fit.shape, fit.scale, fit.shift)
    h = (jac.T * w) @ jac
    dof = max(len(tau) - 3, 1)
    try:
        cov = np.linalg.inv(h) * (fit.objective / dof)
    except np.linalg.LinAlgError:
        return np.full(3, np.inf)
    return np.sqrt(np.maximum(np.diag(cov), 0.0))


def fold_angle(x):
    """Fold any real angle into [0, π] (cos-equivalent representative)."""
    y = np.mod(np.abs(x), 2 * np.pi)
    return float(2 * np.pi - y) if y > np.pi else float(y)

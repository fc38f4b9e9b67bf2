"""Interferometer characterization from photon-counting data.

Pipeline: amplitude ratios from single-photon counts, mode-matching
calibration on a reference beam splitter, argument magnitudes and signs
from two-photon coincidence curves (with port relabeling and an
instability-mitigation rule for near-degenerate phase references),
maximum-likelihood recovery of the representative unitary, and bootstrap
error bars by residual resampling.
"""
import numpy as np

from . import linalg, photonic
from .curvefit import (CurveModel, fit_curve, fold_angle, param_sigmas,
                       SHAPE_SEEDS)
from .errors import (BootstrapUnstable, CalibrationOutOfRange,
                     DegenerateAmplitudes, DivisionByZeroCount, FitFailure,
                     InsufficientData, InterferoError, ParseError, PortError)


# ---------------------------------------------------------------------------
# dataset container
# ---------------------------------------------------------------------------
def required_choice_keys(m):
    """Canonical keys of every coincidence curve the argument sweep may
    consume without relabeling: ports (i,i',j,j') with i,j ∈ {1,2}."""
    keys = set()
    for i in (1, 2):
        for i2 in range(1, m + 1):
            for j in (1, 2):
                for j2 in range(1, m + 1):
                    if i != i2 and j != j2:
                        keys.add(photonic.canonical_curve_key((i, i2, j, j2)))
    return keys


def all_curve_keys(m):
    """Every distinct canonical coincidence key on m ports."""
    keys = set()
    for i in range(1, m + 1):
        for i2 in range(1, m + 1):
            for j in range(1, m + 1):
                for j2 in range(1, m + 1):
                    if i != i2 and j != j2:
                        keys.add(photonic.canonical_curve_key((i, i2, j, j2)))
    return keys


class CharacterizationDataset:
    """Raw data for one characterization run.

    single_counts: (m, m, B) array N[i-1, j-1, b-1] of detection counts for
    input j, output i, repetition b.  coincidence maps canonical port keys
    to (tau, counts) pairs.  spectra is one SpectralFunction per input port.
    The calibration fields hold the reference beam-splitter data.
    """

    def __init__(self, single_counts, coincidence, spectra,
                 calibration_single=None, calibration_curve=None,
                 calibration_spectra=None):
        self.single_counts = np.asarray(single_counts, dtype=float)
        assert self.single_counts.ndim == 3
        self.m = self.single_counts.shape[0]
        assert self.single_counts.shape[0] == self.single_counts.shape[1]
        self.n_blocks = self.single_counts.shape[2]
        self.coincidence = {photonic.canonical_curve_key(k):
                            (np.asarray(v[0], dtype=float),
                             np.asarray(v[1], dtype=float))
                            for k, v in coincidence.items()}
        self.spectra = list(spectra)
        assert len(self.spectra) == self.m
        self.calibration_single = (None if calibration_single is None
                                   else np.asarray(calibration_single, dtype=float))
        self.calibration_curve = calibration_curve
        self.calibration_spectra = calibration_spectra
        self._envelopes = {}

    def curve(self, ports):
        return self.coincidence.get(photonic.canonical_curve_key(ports))

    def envelope(self, j, j2):
        """Cached normalized overlap envelope Q for input ports (j, j')."""
        key = (min(j, j2), max(j, j2))
        if key not in self._envelopes:
            q, _ = photonic.cross_envelope(self.spectra[key[0] - 1],
                                           self.spectra[key[1] - 1])
            self._envelopes[key] = q
        return self._envelopes[key]

    def missing_choice_keys(self):
        return sorted(required_choice_keys(self.m) - set(self.coincidence))


# ---------------------------------------------------------------------------
# amplitudes
# ---------------------------------------------------------------------------
def estimate_amplitudes(single_counts):
    """Loss-immune amplitude ratios α̃_ij with per-entry standard deviations.

    α̃_ij averages √(N_{11b₁}N_{ijb_j}/(N_{1jb_j}N_{i1b₁})) over all
    repetition pairs (b₁, b_j); the construction cancels every per-port
    efficiency and per-(input, repetition) photon-number fluctuation.
    """
    n = np.asarray(single_counts, dtype=float)
    m, _, n_blocks = n.shape
    for b in range(n_blocks):
        for j in range(m):
            if n[0, j, b] == 0:
                raise DivisionByZeroCount("zero reference count",
                                          output=1, input=j + 1, repetition=b + 1)
        for i in range(m):
            if n[i, 0, b] == 0:
                raise DivisionByZeroCount("zero reference count",
                                          output=i + 1, input=1, repetition=b + 1)
    alpha = np.ones((m, m))
    sigma = np.zeros((m, m))
    for i in range(1, m):
        for j in range(1, m):
            left = np.sqrt(n[0, 0, :] / n[i, 0, :])     # indexed by b₁
            right = np.sqrt(n[i, j, :] / n[0, j, :])    # indexed by b_j
            vals = np.outer(left, right).ravel()
            alpha[i, j] = float(np.mean(vals))
            sigma[i, j] = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
    return alpha, sigma


def repetition_convergence(single_counts, limit=0.2):
    """Post-hoc check that the repetition count B is large enough: the
    amplitude standard deviations from the first half of the blocks must
    agree with the full-B estimate within the given relative change."""
    n = np.asarray(single_counts, dtype=float)
    n_blocks = n.shape[2]
    if n_blocks < 4:
        return {"type": "repetition-convergence", "status": "skipped",
                "n_blocks": int(n_blocks)}
    _, sig_half = estimate_amplitudes(n[:, :, : n_blocks // 2])
    _, sig_full = estimate_amplitudes(n)
    a = float(np.mean(sig_half))
    b = float(np.mean(sig_full))
    rel = abs(a - b) / b if b > 1e-9 else 0.0
    status = "ok" if rel <= limit else "warning"
    return {"type": "repetition-convergence", "status": status,
            "relative_change": rel, "n_blocks": int(n_blocks)}


# ---------------------------------------------------------------------------
# calibration
# ---------------------------------------------------------------------------
def reflectivity_from_alpha(alpha22):
    """Invert α₂₂ = cot²ϑ for the beam-splitter reflectivity cos ϑ."""
    assert alpha22 >= 0
    return float(np.sqrt(alpha22 / (1.0 + alpha22)))


def cosine_curve_model(q, base_const, amp_const):
    """C(τ) = scale·(base + amp_const·cos(shape)·Q(τ−shift)): the common
    form of every coincidence curve with the phase combination as shape."""
    return CurveModel(
        q,
        base=lambda s: base_const,
        amp=lambda s: amp_const * np.cos(s),
        dbase=lambda s: 0.0,
        damp=lambda s: -amp_const * np.sin(s),
    )


def calibration_curve_model(q, cos_vartheta):
    """Reference beam-splitter coincidence with γ as the shape parameter:
    C(τ) = scale·(c⁴ + s⁴ − 2γc²s²·Q(τ−shift))."""
    c2 = cos_vartheta ** 2
    s2 = 1.0 - c2
    base_const = c2 ** 2 + s2 ** 2
    amp_const = -2.0 * c2 * s2
    return CurveModel(
        q,
        base=lambda g: base_const,
        amp=lambda g: amp_const * g,
        dbase=lambda g: 0.0,
        damp=lambda g: amp_const,
    )


def calibrate_gamma(calibration_single, calibration_curve, q,
                    eps=0.05, warm=None):
    """Estimate the mode-matching parameter γ from the reference
    beam-splitter data; returns (γ̃, σ(γ̃), fit)."""
    alpha, _ = estimate_amplitudes(calibration_single)
    cos_vt = reflectivity_from_alpha(alpha[1, 1])
    model = calibration_curve_model(q, cos_vt)
    tau, counts = calibration_curve
    seeds = (warm,) if warm is not None else SHAPE_SEEDS
    fit = fit_curve(model, tau, counts, seeds=seeds)
    gamma = fit.shape
    if not -eps <= gamma <= 1.0 + eps:
        raise CalibrationOutOfRange("fitted mode matching outside [0, 1]",
                                    gamma=float(gamma), eps=eps)
    sigma = float(param_sigmas(model, tau, counts, fit)[0])
    return float(np.clip(gamma, 0.0, 1.0)), sigma, fit


# ---------------------------------------------------------------------------
# argument magnitudes and signs
# ---------------------------------------------------------------------------
def estimate_argument_magnitude(dataset, i, j, alpha, gamma, warm=None):
    """|θ̃_ij| ∈ [0, π] from the coincidence curve on ports (1,i,1,j),
    whose phase combination reduces to θ_ij itself."""
    data = dataset.curve((1, i, 1, j))
    if data is None:
        raise InsufficientData("missing coincidence curve",
                               required=[photonic.canonical_curve_key((1, i, 1, j))])
    a = alpha[i - 1, j - 1]
    model = cosine_curve_model(dataset.envelope(1, j), a ** 2 + 1.0,
                               2.0 * gamma * a)
    seeds = (warm,) if warm is not None else None
    try:
        fit = fit_curve(model, data[0], data[1], seeds=seeds)
    except FitFailure as exc:
        exc.details["ports"] = (1, i, 1, j)
        raise
    return fold_angle(fit.shape), fit


def sign_calc(beta, th_ref, th_a, th_b, abs_target):
    """Resolve sgn θ from a measured phase combination β ∈ [0, π].

    The candidates are β± = fold(th_ref − th_a − th_b ± |θ|); the sign of
    the candidate closer to β wins, 0 on an exact tie.
    """
    k = th_ref - th_a - th_b
    beta_plus = fold_angle(k + abs_target)
    beta_minus = fold_angle(k - abs_target)
    d = abs(beta - beta_minus) - abs(beta - beta_plus)
    if d > 0:
        return 1
    if d < 0:
        return -1
    return 0


def reference_distance(k):
    """Distance of a folded phase combination from the degenerate set
    {0, π} where β⁺ and β⁻ coincide."""
    fk = fold_angle(k)
    return min(fk, np.pi - fk)


def _fit_beta(dataset, ports, alpha, gamma, warm=None):
    """Measured phase combination β ∈ [0, π] for ports (a,i,b,j)."""
    data = dataset.curve(ports)
    if data is None:
        return None, None
    a1, a2, b1, b2 = ports
    al = alpha
    base = (al[a1 - 1, b1 - 1] ** 2 * al[a2 - 1, b2 - 1] ** 2
            + al[a1 - 1, b2 - 1] ** 2 * al[a2 - 1, b1 - 1] ** 2)
    ampc = (2.0 * gamma * al[a1 - 1, b1 - 1] * al[a1 - 1, b2 - 1]
            * al[a2 - 1, b1 - 1] * al[a2 - 1, b2 - 1])
    model = cosine_curve_model(dataset.envelope(b1, b2), base, ampc)
    seeds = (warm,) if warm is not None else None
    fit = fit_curve(model, data[0], data[1], seeds=seeds)
    return fold_angle(fit.shape), fit


def estimate_arguments(dataset, alpha, gamma, threshold=0.1, plan=None,
                       warm_theta=None):
    """Full argument matrix θ̃ with first row/column ≡ 0 and sgn θ₂₂ = +1.

    Magnitudes come from two-port curves against the reference ports;
    signs follow the standard sweep (second column, second row, interior)
    after relabeling ports so the magnitude nearest π/2 sits at (2,2).
    Sign decisions whose reference combination lies within ``threshold`` of
    {0, π} are re-derived from the best available alternate port pair.

    Returns (theta, diagnostics, plan, fits); pass ``plan`` back in to
    reuse the relabeling and tuple choices (bootstrap replicates).
    """
    m = dataset.m
    diagnostics = []
    fits = {}
    absth = np.zeros((m, m))
    for i in range(2, m + 1):
        for j in range(2, m + 1):
            warm = None
            if warm_theta is not None:
                warm = abs(warm_theta[i - 1, j - 1])
            absth[i - 1, j - 1], fit = estimate_argument_magnitude(
                dataset, i, j, alpha, gamma, warm=warm)
            fits[photonic.canonical_curve_key((1, i, 1, j))] = fit

    # ---- relabel so the magnitude nearest π/2 is at (2,2) ----------------
    if plan is not None:
        istar, jstar = plan["relabel"]
    else:
        sub = np.abs(absth[1:, 1:] - np.pi / 2)
        flat = int(np.argmin(sub))
        istar = flat // (m - 1) + 2
        jstar = flat % (m - 1) + 2
    po = np.arange(m)          # relabeled index -> original index (0-based)
    pi_ = np.arange(m)
    po[1], po[istar - 1] = po[istar - 1], po[1]
    pi_[1], pi_[jstar - 1] = pi_[jstar - 1], pi_[1]
    if istar != 2 or jstar != 2:
        diagnostics.append({"type": "relabel", "output": int(istar),
                            "input": int(jstar)})
    rel_alpha = alpha[np.ix_(po, pi_)]
    rel_abs = absth[np.ix_(po, pi_)]
    warm_rel = None
    if warm_theta is not None:
        warm_rel = warm_theta[np.ix_(po, pi_)]

    def orig_ports(a, i, b, j):
        """Map a relabeled-frame port tuple (0-based) to original labels."""
        return (int(po[a]) + 1, int(po[i]) + 1, int(pi_[b]) + 1, int(pi_[j]) + 1)

    theta = np.zeros((m, m))
    known = np.zeros((m, m), dtype=bool)
    known[0, :] = True
    known[:, 0] = True
    theta[1, 1] = rel_abs[1, 1]     # sign fixed positive by convention
    known[1, 1] = True

    sign_plan = {} if plan is None else plan["signs"]

    def decide_sign(i, j, default_ab):
        warm_phi = None
        if plan is not None:
            a, b = sign_plan[(i, j)]
        else:
            a, b = default_ab
            k_ref = theta[a, b] - theta[a, j] - theta[i, b]
            if reference_distance(k_ref) <= threshold:
                a, b = _mitigate(i, j, (a, b), k_ref)
            sign_plan[(i, j)] = (a, b)
        ports = orig_ports(a, i, b, j)
        if warm_rel is not None:
            warm_phi = (theta[a, b] - theta[a, j] - theta[i, b]
                        + warm_rel[i, j])
        # ports are in original labels, so use the original-frame alpha
        beta, fit = _fit_beta(dataset, ports, alpha, gamma, warm=warm_phi)
        if beta is None:
            raise InsufficientData("missing coincidence curve for sign",
                                   required=[photonic.canonical_curve_key(ports)])
        fits[photonic.canonical_curve_key(ports)] = fit
        s = sign_calc(beta, theta[a, b], theta[a, j], theta[i, b],
                      rel_abs[i, j])
        if s == 0:
            if rel_abs[i, j] > 1e-9:
                diagnostics.append({"type": "sign-tie",
                                    "target": (int(po[i]) + 1, int(pi_[j]) + 1)})
            s = 1
        return s

    def _mitigate(i, j, default_ab, k_default):
        ref_default = reference_distance(k_default)
        candidates = []
        for a in range(m):
            for b in range(m):
                if a == i or b == j or (a, b) == default_ab:
                    continue
                if not (known[a, b] and known[a, j] and known[i, b]):
                    continue
                if (rel_alpha[a, b] * rel_alpha[a, j] * rel_alpha[i, b]
                        * rel_alpha[i, j]) < 1e-9:
                    continue
                k = theta[a, b] - theta[a, j] - theta[i, b]
                candidates.append((reference_distance(k), a, b))
        candidates.sort(reverse=True)
        good = [c for c in candidates
                if c[0] > max(threshold, ref_default)]
        for ref, a, b in good:
            if dataset.curve(orig_ports(a, i, b, j)) is not None:
                diagnostics.append({
                    "type": "sign-rederived",
                    "target": (int(po[i]) + 1, int(pi_[j]) + 1),
                    "reference_distance": float(ref_default),
                    "alternate": orig_ports(a, i, b, j),
                    "alternate_distance": float(ref)})
                return a, b
        if good:
            raise InsufficientData(
                "instability mitigation needs curves that are absent",
                required=[photonic.canonical_curve_key(orig_ports(a, i, b, j))
                          for _, a, b in good])
        diagnostics.append({
            "type": "sign-unstable",
            "target": (int(po[i]) + 1, int(pi_[j]) + 1),
            "reference_distance": float(ref_default)})
        return default_ab

    # second column of the relabeled frame: targets θ_{i2}, curve (2,i;1,2)
    for i in range(2, m):
        s = decide_sign(i, 1, (1, 0))
        theta[i, 1] = s * rel_abs[i, 1]
        known[i, 1] = True
    # second row: targets θ_{2j}, curve (1,2;2,j)
    for j in range(2, m):
        s = decide_sign(1, j, (0, 1))
        theta[1, j] = s * rel_abs[1, j]
        known[1, j] = True
    # interior: curve (2,i;2,j)
    for i in range(2, m):
        for j in range(2, m):
            s = decide_sign(i, j, (1, 1))
            theta[i, j] = s * rel_abs[i, j]
            known[i, j] = True

    out = np.zeros((m, m))
    out[np.ix_(po, pi_)] = theta
    plan_out = {"relabel": (istar, jstar), "signs": sign_plan}
    return out, diagnostics, plan_out, fits


# ---------------------------------------------------------------------------
# maximum-likelihood unitary
# ---------------------------------------------------------------------------
def max_likely_unitary(alpha, theta):
    """Recover the representative unitary from (α̃, θ̃).

    The diagonal dressings solve A·μ = e₁ and A†·λ = e₁/μ₁ (λ₁ ≡ 1); the
    dressed matrix is projected onto the unitary group and canonicalized.
    """
    a = np.asarray(alpha, dtype=float) * np.exp(1j * np.asarray(theta))
    m = a.shape[0]
    e1 = np.zeros(m)
    e1[0] = 1.0
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > 1e12:
        raise DegenerateAmplitudes("amplitude matrix numerically singular",
                                   cond=float(cond))
    mu = np.linalg.solve(a, e1)
    if abs(mu[0]) < 1e-300:
        raise DegenerateAmplitudes("vanishing first dressing element")
    lam = np.linalg.solve(a.conj().T, e1 / mu[0])
    lam = lam / lam[0]
    mu_r = np.maximum(np.real(mu), 1e-300)
    lam_r = np.maximum(np.real(lam), 1e-300)
    dressed = np.sqrt(lam_r)[:, None] * a * np.sqrt(mu_r)[None, :]
    w = linalg.nearest_unitary(dressed)
    return linalg.canonicalize_representative(w)


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------
class PointEstimate:
    def __init__(self, w, alpha, theta, gamma, gamma_sigma, plan, fits,
                 calibration_fit, diagnostics):
        self.w = w
        self.alpha = alpha
        self.theta = theta
        self.gamma = gamma
        self.gamma_sigma = gamma_sigma
        self.plan = plan
        self.fits = fits
        self.calibration_fit = calibration_fit
        self.diagnostics = diagnostics


class CharacterizedInterferometer:
    """Final characterization result: representative W with bootstrap
    error bars on its real and imaginary parts, the fitted mode-matching
    parameter and the accumulated diagnostics."""

    def __init__(self, w, sigma_re, sigma_im, gamma, gamma_sigma,
                 diagnostics):
        self.w = w
        self.sigma_re = sigma_re
        self.sigma_im = sigma_im
        self.gamma = gamma
        self.gamma_sigma = gamma_sigma
        self.diagnostics = diagnostics


def characterize_dataset(dataset, threshold=0.1, gamma_override=None,
                         warm=None):
    """Point-estimate pipeline: amplitudes → calibration → arguments → W."""
    missing = dataset.missing_choice_keys()
    if missing:
        raise InsufficientData("dataset lacks required coincidence curves",
                               required=missing)
    diagnostics = [repetition_convergence(dataset.single_counts)]
    alpha, _alpha_sigma = estimate_amplitudes(dataset.single_counts)

    cal_fit = None
    gamma_sigma = 0.0
    if gamma_override is not None:
        gamma = float(gamma_override)
    elif (dataset.calibration_single is not None
          and dataset.calibration_curve is not None):
        spectra = dataset.calibration_spectra
        if spectra is None:
            spectra = (dataset.spectra[0], dataset.spectra[1])
        q_cal, _ = photonic.cross_envelope(*spectra)
        gamma, gamma_sigma, cal_fit = calibrate_gamma(
            dataset.calibration_single, dataset.calibration_curve, q_cal,
            warm=None if warm is None else warm.gamma)
    else:
        gamma = 1.0
        diagnostics.append({"type": "no-calibration-data",
                            "gamma_assumed": 1.0})

    theta, arg_diag, plan, fits = estimate_arguments(
        dataset, alpha, gamma, threshold=threshold,
        plan=None if warm is None else warm.plan,
        warm_theta=None if warm is None else warm.theta)
    diagnostics.extend(arg_diag)
    w = max_likely_unitary(alpha, theta)
    return PointEstimate(w, alpha, theta, gamma, gamma_sigma, plan, fits,
                         cal_fit, diagnostics)


# ---------------------------------------------------------------------------
# bootstrap
# ---------------------------------------------------------------------------
def _resample_curve(tau, counts, fit, model_curve, rng):
    """Replicate curve: C^fit·(1 + resampled normalized residuals)."""
    norm = fit.residuals / np.maximum(model_curve, 1e-300)
    shuffled = rng.choice(norm, size=len(norm), replace=True)
    return tau, model_curve * (1.0 + shuffled)


def _fitted_values(dataset, key, fit, alpha, gamma):
    a1, a2, b1, b2 = key
    al = alpha
    base = (al[a1 - 1, b1 - 1] ** 2 * al[a2 - 1, b2 - 1] ** 2
            + al[a1 - 1, b2 - 1] ** 2 * al[a2 - 1, b1 - 1] ** 2)
    ampc = (2.0 * gamma * al[a1 - 1, b1 - 1] * al[a1 - 1, b2 - 1]
            * al[a2 - 1, b1 - 1] * al[a2 - 1, b2 - 1])
    model = cosine_curve_model(dataset.envelope(b1, b2), base, ampc)
    tau, _ = dataset.coincidence[key]
    return model.curve(tau, fit.shape, fit.scale, fit.shift)


def bootstrap(dataset, n_replicates=100, seed=0, threshold=0.1,
              gamma_override=None, max_failure_rate=0.1):
    """Error bars by residual resampling around the point estimate.

    Each replicate resamples the single-count repetitions with replacement
    and rebuilds every consumed coincidence curve from its fitted model
    plus resampled normalized residuals, then re-runs the pipeline
    warm-started from the point estimate.  σ(Re W), σ(Im W) and σ(γ) are
    standard deviations over the successful replicates.
    """
    point = characterize_dataset(dataset, threshold=threshold,
                                 gamma_override=gamma_override)
    m = dataset.m
    model_curves = {key: _fitted_values(dataset, key, fit, point.alpha,
                                        point.gamma)
                    for key, fit in point.fits.items()}
    if point.calibration_fit is not None:
        cal_tau, cal_counts = dataset.calibration_curve
        cal_alpha, _ = estimate_amplitudes(dataset.calibration_single)
        cos_vt = reflectivity_from_alpha(cal_alpha[1, 1])
        spectra = dataset.calibration_spectra
        if spectra is None:
            spectra = (dataset.spectra[0], dataset.spectra[1])
        q_cal, _ = photonic.cross_envelope(*spectra)
        cal_model = calibration_curve_model(q_cal, cos_vt)
        cal_values = cal_model.curve(cal_tau, point.calibration_fit.shape,
                                     point.calibration_fit.scale,
                                     point.calibration_fit.shift)

    ws, gammas, failures = [], [], []
    for idx in range(n_replicates):
        rng = np.random.default_rng([int(seed), idx])
        pick = rng.integers(0, dataset.n_blocks, dataset.n_blocks)
        singles = dataset.single_counts[:, :, pick]
        curves = dict(dataset.coincidence)
        for key, fit in point.fits.items():
            tau, _ = dataset.coincidence[key]
            curves[key] = _resample_curve(tau, dataset.coincidence[key][1],
                                          fit, model_curves[key], rng)
        rep = CharacterizationDataset(
            singles, curves, dataset.spectra,
            calibration_single=None if dataset.calibration_single is None
            else dataset.calibration_single[:, :, pick % dataset.calibration_single.shape[2]],
            calibration_curve=None if point.calibration_fit is None
            else _resample_curve(cal_tau, cal_counts, point.calibration_fit,
                                 cal_values, rng),
            calibration_spectra=dataset.calibration_spectra)
        rep._envelopes = dataset._envelopes   # same spectra, reuse cache
        try:
            est = characterize_dataset(rep, threshold=threshold,
                                       gamma_override=gamma_override,
                                       warm=point)
            ws.append(est.w)
            gammas.append(est.gamma)
        except (InterferoError, np.linalg.LinAlgError) as exc:
            failures.append({"replicate": idx, "error": str(exc)})
    rate = len(failures) / n_replicates
    if rate > max_failure_rate:
        raise BootstrapUnstable("too many replicate failures",
                                failure_rate=rate, failures=failures[:20])
    stack = np.array(ws)
    ddof = 1 if len(ws) > 1 else 0
    sigma_re = np.std(np.real(stack), axis=0, ddof=ddof)
    sigma_im = np.std(np.imag(stack), axis=0, ddof=ddof)
    gamma_sigma = float(np.std(gammas, ddof=ddof)) if gammas else 0.0
    diagnostics = list(point.diagnostics)
    if failures:
        diagnostics.append({"type": "bootstrap-failures",
                            "count": len(failures), "log": failures[:20]})
    return CharacterizedInterferometer(point.w, sigma_re, sigma_im,
                                       point.gamma, gamma_sigma, diagnostics)


# ---------------------------------------------------------------------------
# scattershot extraction
# ---------------------------------------------------------------------------
def scattershot_extract(records, m, n_blocks, spectra=None):
    """Build a CharacterizationDataset from a heralded event log.

    Events with one herald and one click feed the single-count tensor
    (repetition blocks partitioned by arrival order); events with two
    heralds and two clicks feed the coincidence bins keyed by their delay
    setting; everything else is discarded and counted.
    Returns (dataset, diagnostics).
    """
    singles_events = []
    coinc_bins = {}
    discarded = {"too_many_heralds": 0, "too_many_clicks": 0,
                 "herald_click_mismatch": 0, "empty": 0}
    for lineno, rec in enumerate(records, start=1):
        try:
            heralds = list(rec["heralds"])
            clicks = list(rec["clicks"])
            tau = float(rec["tau_setting"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError("malformed event record", line=lineno,
                             reason=str(exc))
        for p in heralds + clicks:
            if not 1 <= int(p) <= m:
                raise ParseError("port out of range", line=lineno, port=p)
        nh, nc = len(heralds), len(clicks)
        if nh == 1 and nc == 1:
            singles_events.append((clicks[0], heralds[0]))
        elif nh == 2 and nc == 2 and heralds[0] != heralds[1] \
                and clicks[0] != clicks[1]:
            key = photonic.canonical_curve_key(
                (clicks[0], clicks[1], heralds[0], heralds[1]))
            coinc_bins.setdefault(key, {}).setdefault(tau, 0)
            coinc_bins[key][tau] += 1
        elif nh == 0 or nc == 0:
            discarded["empty"] += 1
        elif nh > 2:
            discarded["too_many_heralds"] += 1
        elif nc > 2:
            discarded["too_many_clicks"] += 1
        else:
            discarded["herald_click_mismatch"] += 1

    singles = np.zeros((m, m, n_blocks))
    total = len(singles_events)
    per_block = max(1, -(-total // n_blocks))  # ceil division
    for ordinal, (i, j) in enumerate(singles_events):
        b = min(ordinal // per_block, n_blocks - 1)
        singles[i - 1, j - 1, b] += 1

    curves = {}
    for key, bins in coinc_bins.items():
        taus = np.array(sorted(bins))
        counts = np.array([bins[t] for t in taus], dtype=float)
        curves[key] = (taus, counts)

    if spectra is None:
        spectra = [photonic.gaussian_spectrum() for _ in range(m)]
    dataset = CharacterizationDataset(singles, curves, spectra)
    diagnostics = {"singles_used": total,
                   "coincidence_used": int(sum(
                       sum(b.values()) for b in coinc_bins.values())),
                   "discarded": discarded}
    return dataset, diagnostics

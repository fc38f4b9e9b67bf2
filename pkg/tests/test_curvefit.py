import numpy as np
import pytest

from interfero import curvefit, photonic
from interfero.errors import FitFailure


def make_model():
    f = photonic.gaussian_spectrum()
    q, _ = photonic.cross_envelope(f, f)
    return curvefit.CurveModel(
        q,
        base=lambda s: np.cos(s) ** 2 + 1.5,
        amp=lambda s: np.cos(s),
        dbase=lambda s: -2 * np.cos(s) * np.sin(s),
        damp=lambda s: -np.sin(s),
    )


def test_fit_weights_zero_counts():
    w = curvefit.fit_weights([0.0, 2.0, 4.0])
    assert np.allclose(w, [1.0, 0.5, 0.25])


def test_guess_shift_picks_dip():
    model = make_model()
    tau = np.linspace(-4, 4, 81)
    counts = model.curve(tau, 2.5, 1.0, 0.7)  # cos<0: dip at tau=0.7
    assert abs(curvefit.guess_shift(tau, counts) - 0.7) < 0.15


def test_fold_angle():
    assert abs(curvefit.fold_angle(-0.3) - 0.3) < 1e-15
    assert abs(curvefit.fold_angle(2 * np.pi - 0.3) - 0.3) < 1e-15
    assert abs(curvefit.fold_angle(np.pi + 0.2) - (np.pi - 0.2)) < 1e-15


@pytest.mark.parametrize("truth", [0.4, 1.1, 2.0, 2.8])
def test_exact_recovery(truth):
    model = make_model()
    tau = np.linspace(-5, 5, 41)
    scale, shift = 3000.0, 0.35
    counts = model.curve(tau, truth, scale, shift)
    fit = curvefit.fit_curve(model, tau, counts)
    assert fit.objective < 1e-10 * scale
    assert abs(np.cos(curvefit.fold_angle(fit.shape)) - np.cos(truth)) < 1e-6
    assert abs(fit.scale - scale) < 1e-4 * scale
    assert abs(fit.shift - shift) < 1e-6


def test_flat_data_raises():
    model = make_model()
    tau = np.linspace(-5, 5, 21)
    with pytest.raises(FitFailure):
        curvefit.fit_curve(model, tau, np.full(21, 250.0))


def test_noisy_recovery_monte_carlo():
    model = make_model()
    rng = np.random.default_rng(17)
    tau = np.linspace(-5, 5, 41)
    truth, scale, shift = 2.2, 20000.0, -0.4
    errs = []
    for _ in range(20):
        counts = rng.poisson(model.curve(tau, truth, scale, shift)).astype(float)
        fit = curvefit.fit_curve(model, tau, counts)
        errs.append(abs(np.cos(curvefit.fold_angle(fit.shape)) - np.cos(truth)))
    assert np.mean(errs) < 0.02
    assert np.max(errs) < 0.08


def test_degenerate_flag_when_interference_buried():
    model = make_model()
    rng = np.random.default_rng(5)
    tau = np.linspace(-5, 5, 41)
    # shape ~ pi/2: amp ~ 0, curve variation far below shot noise
    counts = rng.poisson(model.curve(tau, np.pi / 2 + 1e-4, 5000.0, 0.0))
    fit = curvefit.fit_curve(model, tau, counts.astype(float))
    assert fit.degenerate


def test_monotone_objective_and_start_diagnostics():
    model = make_model()
    tau = np.linspace(-5, 5, 41)
    counts = model.curve(tau, 0.9, 1500.0, 0.1)
    fit = curvefit.fit_curve(model, tau, counts)
    assert len(fit.starts) == 4
    best = min(s["objective"] for s in fit.starts if s["converged"])
    assert abs(best - fit.objective) <= 1e-12 * max(1.0, best)

"""File formats: matrix/plan JSON, dataset bundles, and result reports.

All JSON emitted here is deterministic (sorted keys, fixed separators,
trailing newline) so that repeated runs with identical inputs produce
byte-identical artifacts.  Every schema carries a ``"schema": "v1"`` tag.

Formats
-------
matrix JSON     {"schema": "v1", "rows": R, "cols": C,
                 "re": [row-major reals], "im": [row-major reals]}
plan JSON       {"schema": "v1", "n_s", "n_p", "elements": [...]} where each
                element is {"kind": "BS", "mode"}, {"kind": "IU", "mode",
                "matrix": matrix JSON} or {"kind": "IP", "mode", "phases"}.
dataset bundle  directory with counts.csv ("i,j,b,count"), one
                coincidence/<i>_<i'>_<j>_<j'>.csv ("tau,count") per curve,
                spectra/<j>.csv ("omega,value"), optional calibration.csv
                ("record,i,j,b,tau,count" mixing "single" and "curve" rows),
                and manifest.json with m, B (repetition blocks), units and
                the generating seed.
result JSON     {"schema": "v1", "w": matrix JSON, "gamma", "gamma_sigma",
                 "sigma_re"/"sigma_im": matrix JSON (bootstrap only),
                 "diagnostics": [...]}
"""

import csv
import json
import os

import numpy as np

from . import csd
from .characterize import CharacterizationDataset
from .errors import ParseError
from .photonic import SpectralFunction

SCHEMA = "v1"


# ---------------------------------------------------------------------------
# deterministic JSON
# ---------------------------------------------------------------------------
def dump_json(obj, path):
    """Write JSON with a canonical byte representation."""
    text = json.dumps(obj, sort_keys=True, separators=(",", ": "), indent=1)
    with open(path, "w") as fh:
        fh.write(text + "\n")


def json_text(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ": "), indent=1) + "\n"


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read JSON file {path}: {exc}") from exc


def _require(obj, key, path):
    if key not in obj:
        raise ParseError(f"missing key {key!r} in {path}")
    return obj[key]


def _check_schema(obj, path):
    if obj.get("schema", SCHEMA) != SCHEMA:
        raise ParseError(f"unsupported schema {obj.get('schema')!r} in {path}")


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------
def matrix_to_json(m):
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return {
        "schema": SCHEMA,
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": [float(x) for x in np.real(m).ravel()],
        "im": [float(x) for x in np.imag(m).ravel()],
    }


def matrix_from_json(obj, path="<matrix>"):
    _check_schema(obj, path)
    rows = int(_require(obj, "rows", path))
    cols = int(_require(obj, "cols", path))
    re = np.asarray(_require(obj, "re", path), dtype=float)
    im = np.asarray(obj.get("im", np.zeros(rows * cols)), dtype=float)
    if re.size != rows * cols or im.size != rows * cols:
        raise ParseError(f"matrix entry count mismatch in {path}",
                         rows=rows, cols=cols, re=int(re.size),
                         im=int(im.size))
    return (re + 1j * im).reshape(rows, cols)


def read_matrix(path):
    return matrix_from_json(load_json(path), path)


def write_matrix(m, path):
    dump_json(matrix_to_json(m), path)


# ---------------------------------------------------------------------------
# decomposition plans
# ---------------------------------------------------------------------------
def plan_to_json(plan):
    elements = []
    for e in plan.elements:
        out = {"kind": e["kind"], "mode": int(e["mode"])}
        if e["kind"] == "IU":
            out["matrix"] = matrix_to_json(e["matrix"])
        elif e["kind"] == "IP":
            out["phases"] = [float(x) for x in e["phases"]]
        elements.append(out)
    return {"schema": SCHEMA, "n_s": plan.n_s, "n_p": plan.n_p,
            "elements": elements}


def plan_from_json(obj, path="<plan>"):
    _check_schema(obj, path)
    n_s = int(_require(obj, "n_s", path))
    n_p = int(_require(obj, "n_p", path))
    elements = []
    for raw in _require(obj, "elements", path):
        kind = _require(raw, "kind", path)
        mode = int(_require(raw, "mode", path))
        if kind == "BS":
            elements.append(csd.bs_element(mode))
        elif kind == "IU":
            elements.append(csd.iu_element(
                mode, matrix_from_json(_require(raw, "matrix", path), path)))
        elif kind == "IP":
            elements.append(csd.ip_element(mode, _require(raw, "phases", path)))
        else:
            raise ParseError(f"unknown element kind {kind!r} in {path}")
    return csd.DecompositionPlan(n_s, n_p, elements)


def read_plan(path):
    return plan_from_json(load_json(path), path)


def write_plan(plan, path):
    dump_json(plan_to_json(plan), path)


# ---------------------------------------------------------------------------
# dataset bundles
# ---------------------------------------------------------------------------
def _fmt(x):
    return repr(float(x))


def write_bundle(dataset, path, seed=None, extra_manifest=None):
    """Write a CharacterizationDataset as a bundle directory."""
    os.makedirs(path, exist_ok=True)
    os.makedirs(os.path.join(path, "coincidence"), exist_ok=True)
    os.makedirs(os.path.join(path, "spectra"), exist_ok=True)

    with open(os.path.join(path, "counts.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "b", "count"])
        m, _, n_blocks = dataset.single_counts.shape
        for i in range(m):
            for j in range(m):
                for b in range(n_blocks):
                    w.writerow([i + 1, j + 1, b + 1,
                                _fmt(dataset.single_counts[i, j, b])])

    for key in sorted(dataset.coincidence):
        tau, counts = dataset.coincidence[key]
        name = "_".join(str(k) for k in key) + ".csv"
        with open(os.path.join(path, "coincidence", name), "w",
                  newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["tau", "count"])
            for t, c in zip(tau, counts):
                w.writerow([_fmt(t), _fmt(c)])

    for j, spec in enumerate(dataset.spectra, start=1):
        with open(os.path.join(path, "spectra", f"{j}.csv"), "w",
                  newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["omega", "value"])
            for om, val in zip(spec.omega, spec.values):
                w.writerow([_fmt(om), _fmt(val)])

    has_cal = (dataset.calibration_single is not None
               and dataset.calibration_curve is not None)
    if has_cal:
        with open(os.path.join(path, "calibration.csv"), "w",
                  newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["record", "i", "j", "b", "tau", "count"])
            cal = dataset.calibration_single
            for i in range(cal.shape[0]):
                for j in range(cal.shape[1]):
                    for b in range(cal.shape[2]):
                        w.writerow(["single", i + 1, j + 1, b + 1, "",
                                    _fmt(cal[i, j, b])])
            tau, counts = dataset.calibration_curve
            for t, c in zip(tau, counts):
                w.writerow(["curve", "", "", "", _fmt(t), _fmt(c)])

    manifest = {
        "schema": SCHEMA,
        "m": dataset.m,
        "B": dataset.n_blocks,
        "units": {"tau": "ps", "omega": "rad/ps", "count": "events"},
        "seed": seed,
        "calibration": bool(has_cal),
    }
    if extra_manifest:
        manifest.update(extra_manifest)
    dump_json(manifest, os.path.join(path, "manifest.json"))


def _read_csv(path, expect_header):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if not rows or rows[0] != expect_header:
        raise ParseError(f"bad header in {path}",
                         expected=expect_header,
                         found=rows[0] if rows else None)
    return rows[1:]


def read_bundle(path):
    """Load a bundle directory into a CharacterizationDataset."""
    manifest = load_json(os.path.join(path, "manifest.json"))
    _check_schema(manifest, path)
    m = int(_require(manifest, "m", path))
    n_blocks = int(_require(manifest, "B", path))

    singles = np.zeros((m, m, n_blocks))
    for i, j, b, count in _read_csv(os.path.join(path, "counts.csv"),
                                    ["i", "j", "b", "count"]):
        singles[int(i) - 1, int(j) - 1, int(b) - 1] = float(count)

    curves = {}
    cdir = os.path.join(path, "coincidence")
    for name in sorted(os.listdir(cdir)):
        if not name.endswith(".csv"):
            continue
        try:
            key = tuple(int(tok) for tok in name[:-4].split("_"))
        except ValueError as exc:
            raise ParseError(f"bad coincidence file name {name!r}") from exc
        if len(key) != 4:
            raise ParseError(f"bad coincidence file name {name!r}")
        rows = _read_csv(os.path.join(cdir, name), ["tau", "count"])
        tau = np.array([float(r[0]) for r in rows])
        counts = np.array([float(r[1]) for r in rows])
        curves[key] = (tau, counts)

    spectra = []
    for j in range(1, m + 1):
        rows = _read_csv(os.path.join(path, "spectra", f"{j}.csv"),
                         ["omega", "value"])
        omega = np.array([float(r[0]) for r in rows])
        values = np.array([float(r[1]) for r in rows])
        spectra.append(SpectralFunction(omega, values))

    cal_single = cal_curve = cal_spectra = None
    cal_path = os.path.join(path, "calibration.csv")
    if manifest.get("calibration") and os.path.exists(cal_path):
        singles_entries, tau_list, count_list = [], [], []
        for record, i, j, b, tau, count in _read_csv(
                cal_path, ["record", "i", "j", "b", "tau", "count"]):
            if record == "single":
                singles_entries.append((int(i), int(j), int(b), float(count)))
            elif record == "curve":
                tau_list.append(float(tau))
                count_list.append(float(count))
            else:
                raise ParseError(f"unknown calibration record {record!r}")
        if singles_entries:
            nb = max(e[2] for e in singles_entries)
            cal_single = np.zeros((2, 2, nb))
            for i, j, b, count in singles_entries:
                cal_single[i - 1, j - 1, b - 1] = count
        if tau_list:
            cal_curve = (np.array(tau_list), np.array(count_list))
        # the reference beam splitter is fed from inputs 1 and 2
        cal_spectra = (spectra[0], spectra[1])

    return CharacterizationDataset(singles, curves, spectra,
                                   calibration_single=cal_single,
                                   calibration_curve=cal_curve,
                                   calibration_spectra=cal_spectra)


# ---------------------------------------------------------------------------
# characterization results
# ---------------------------------------------------------------------------
def result_to_json(est):
    """Serialize a PointEstimate or CharacterizedInterferometer."""
    out = {
        "schema": SCHEMA,
        "w": matrix_to_json(est.w),
        "gamma": float(est.gamma),
        "gamma_sigma": float(est.gamma_sigma),
        "diagnostics": _plain(est.diagnostics),
    }
    sigma_re = getattr(est, "sigma_re", None)
    if sigma_re is not None:
        out["sigma_re"] = matrix_to_json(sigma_re)
        out["sigma_im"] = matrix_to_json(est.sigma_im)
    return out


def _plain(obj):
    """Recursively convert numpy scalars/arrays for JSON output."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_result(est, path):
    dump_json(result_to_json(est), path)


# ---------------------------------------------------------------------------
# plot-ready CSV (x, y, series)
# ---------------------------------------------------------------------------
def write_plot_csv(rows, path):
    """Write (x, y, series) triples for external plotting tools."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "series"])
        for x, y, series in rows:
            w.writerow([_fmt(x), _fmt(y), series])

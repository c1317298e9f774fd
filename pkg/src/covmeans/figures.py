"""Optional plot rendering for result CSVs.

The CSV is the canonical artifact; these helpers draw quick-look PNGs next to
it. Layout is inferred from which columns vary: a spiked model with overlaps
gets overlap/eigenvalue panels against theta, grids over (p, b) get error
curves with the less-varied quantity as the facet, and a single-cell run
falls back to a per-trial strip. Headless by construction (Agg backend).
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import ValidationError

_INT_COLS = ("trial", "seed", "p", "n", "n_splits")
_FLOAT_COLS = (
    "gamma",
    "model_param",
    "op_error",
    "op_rel_error",
    "frob_sq_per_p",
    "lambda1",
    "overlap_sq",
    "pred_op_error",
    "pred_lambda1",
    "pred_overlap_sq",
)


def read_records(csv_path) -> list:
    """Parse a results CSV into dicts with numeric fields converted;
    empty cells become None."""
    csv_path = Path(csv_path)
    try:
        with open(csv_path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ValidationError(f"cannot read {csv_path}: {exc}") from None
    if not rows:
        raise ValidationError(f"{csv_path} has no data rows")
    out = []
    for row in rows:
        rec = dict(row)
        for col in _INT_COLS:
            rec[col] = int(rec[col]) if rec.get(col) else None
        for col in _FLOAT_COLS:
            rec[col] = float(rec[col]) if rec.get(col) else None
        out.append(rec)
    return out


def _estimators(rows) -> list:
    return sorted({r["estimator"] for r in rows})


def _mean_band(values) -> tuple:
    arr = np.asarray(values, dtype=float)
    return float(arr.mean()), 2.0 * float(arr.std())


def _curve(ax, rows, xkey, ykey, predkey=None):
    """Mean +/- 2 std per estimator against xkey; dashed prediction overlay."""
    for est in _estimators(rows):
        sub = [r for r in rows if r["estimator"] == est]
        xs = sorted({r[xkey] for r in sub})
        means, bands, preds = [], [], []
        for x in xs:
            cell = [r for r in sub if r[xkey] == x]
            m, band = _mean_band([r[ykey] for r in cell])
            means.append(m)
            bands.append(band)
            pvals = [r[predkey] for r in cell if predkey and r.get(predkey) is not None]
            preds.append(np.mean(pvals) if pvals else None)
        xs = np.asarray(xs, dtype=float)
        means = np.asarray(means)
        bands = np.asarray(bands)
        (line,) = ax.plot(xs, means, marker="o", label=est)
        ax.fill_between(xs, means - bands, means + bands, alpha=0.2, color=line.get_color())
        if any(v is not None for v in preds):
            pred_arr = [np.nan if v is None else v for v in preds]
            ax.plot(xs, pred_arr, linestyle="--", color=line.get_color(), alpha=0.8)
    ax.legend()
    ax.set_xlabel(xkey)
    ax.set_ylabel(ykey)


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _render_spike(rows, path: Path) -> Path:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    _curve(ax1, rows, "model_param", "overlap_sq", "pred_overlap_sq")
    _curve(ax2, rows, "model_param", "lambda1", "pred_lambda1")
    ax1.set_xlabel("theta")
    ax2.set_xlabel("theta")
    fig.suptitle("spike recovery")
    return _save(fig, path)


def _render_trials(rows, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    for est in _estimators(rows):
        sub = sorted((r for r in rows if r["estimator"] == est), key=lambda r: r["trial"])
        xs = [r["trial"] for r in sub]
        ys = [r["op_error"] for r in sub]
        (line,) = ax.plot(xs, ys, marker="o", linestyle="", label=est)
        preds = [r["pred_op_error"] for r in sub if r["pred_op_error"] is not None]
        if preds:
            ax.axhline(np.mean(preds), linestyle="--", color=line.get_color(), alpha=0.8)
    ax.set_xlabel("trial")
    ax.set_ylabel("op_error")
    ax.legend()
    return _save(fig, path)


def render_csv(csv_path, out_dir=None) -> list:
    """Render every figure a results CSV supports; returns the PNG paths."""
    csv_path = Path(csv_path)
    rows = read_records(csv_path)
    out_dir = Path(out_dir) if out_dir is not None else csv_path.parent
    stem = csv_path.stem
    paths = []

    spike = [r for r in rows if r["model"] == "spiked" and r["overlap_sq"] is not None]
    rest = [r for r in rows if not (r["model"] == "spiked" and r["overlap_sq"] is not None)]
    if spike:
        paths.append(_render_spike(spike, out_dir / f"{stem}_spike.png"))
    if not rest:
        return paths

    by_gamma = defaultdict(set)
    for r in rest:
        by_gamma[(r["p"], r["model_param"])].add(r["gamma"])
    if any(len(g) > 1 for g in by_gamma.values()):
        # sample-budget sweep: q = T / (2 p), absolute error on the y axis
        for r in rest:
            r["q"] = 1.0 / (2.0 * r["gamma"])
        for (p, b), _ in sorted(by_gamma.items()):
            sub = [r for r in rest if r["p"] == p and r["model_param"] == b]
            fig, ax = plt.subplots(figsize=(6, 4))
            _curve(ax, sub, "q", "op_error", "pred_op_error")
            ax.set_title(f"p = {p}, b = {b:g}")
            paths.append(_save(fig, out_dir / f"{stem}_p{p}_b{b:g}.png"))
        return paths

    ps = sorted({r["p"] for r in rest})
    bs = sorted({r["model_param"] for r in rest}, key=lambda v: (v is None, v))
    if len(bs) > 1 and bs[0] is not None and len(bs) > len(ps):
        for p in ps:
            sub = [r for r in rest if r["p"] == p]
            fig, ax = plt.subplots(figsize=(6, 4))
            _curve(ax, sub, "model_param", "op_rel_error", "pred_op_error")
            ax.set_xlabel("b")
            ax.set_title(f"p = {p}")
            paths.append(_save(fig, out_dir / f"{stem}_p{p}.png"))
    elif len(ps) > 1:
        for b in bs:
            sub = [r for r in rest if r["model_param"] == b]
            fig, ax = plt.subplots(figsize=(6, 4))
            _curve(ax, sub, "p", "op_rel_error", "pred_op_error")
            title = "identity" if b is None else f"b = {b:g}"
            ax.set_title(title)
            tag = "identity" if b is None else f"b{b:g}"
            paths.append(_save(fig, out_dir / f"{stem}_{tag}.png"))
    else:
        paths.append(_render_trials(rest, out_dir / f"{stem}_trials.png"))
    return paths

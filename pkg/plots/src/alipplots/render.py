"""Figure rendering from simulation CSV logs.

Reads only the documented CSV contract (column names below); no simulator
types are imported, so the package works on any log that honors the
contract.  Four figure kinds: tracking overlays, applied torque with its
bounds, per-step torque-decay bars, and a zoomed perturbation window.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["FigureSpec", "PlotError", "load_log", "step_mean_abs_tau", "render", "KINDS"]

KINDS = ("tracking", "torque", "torque-decay", "perturbation-window")

REQUIRED_COLUMNS = [
    "t",
    "theta_c",
    "L",
    "theta_des",
    "L_des",
    "tau_commanded",
    "tau_applied",
    "r_c",
    "step_index",
    "impact",
    "perturb_active",
    "fell",
    "qp_status",
]

STYLE = {
    "figsize": (8.0, 5.0),
    "dpi": 120,
    "actual_color": "tab:blue",
    "desired_color": "tab:red",
    "impact_color": "0.4",
    "bound_color": "tab:red",
}


class PlotError(ValueError):
    """Bad figure request: missing columns, empty window, unknown kind."""


@dataclass(frozen=True)
class FigureSpec:
    csv_path: str
    kind: str
    out_path: str
    t0: float | None = None
    t1: float | None = None
    u_max: float = 23.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PlotError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")


def load_log(path) -> dict:
    """Parse a contract CSV into named numpy columns."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise PlotError(f"{path}: missing columns {missing}")
        index = {name: header.index(name) for name in REQUIRED_COLUMNS}
        raw = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    if not raw:
        raise PlotError(f"{path}: no data rows")
    cols = {}
    for name in REQUIRED_COLUMNS:
        i = index[name]
        if name == "qp_status":
            cols[name] = np.array([row[i] for row in raw])
        elif name == "step_index":
            cols[name] = np.array([int(row[i]) for row in raw])
        elif name in ("impact", "perturb_active", "fell"):
            cols[name] = np.array([bool(int(row[i])) for row in raw])
        else:
            cols[name] = np.array([float(row[i]) for row in raw])
    return cols


def _window(cols, t0, t1):
    t = cols["t"]
    lo = t[0] if t0 is None else t0
    hi = t[-1] if t1 is None else t1
    if t0 is not None and (t0 < t[0] - 1e-12 or t0 > t[-1] + 1e-12):
        raise PlotError(f"window start {t0} outside the log range [{t[0]}, {t[-1]}]")
    if t1 is not None and (t1 < t[0] - 1e-12 or t1 > t[-1] + 1e-12):
        raise PlotError(f"window end {t1} outside the log range [{t[0]}, {t[-1]}]")
    mask = (t >= lo - 1e-12) & (t <= hi + 1e-12)
    if not mask.any():
        raise PlotError(f"time window [{lo}, {hi}] selects no samples")
    return mask


def step_mean_abs_tau(cols) -> dict:
    """Per-step mean of |tau_applied| following the CSV contract grouping.

    Rows are grouped by step_index; the lone boundary row that closes a
    non-fallen run belongs to the next step and is left out.
    """
    step = cols["step_index"]
    tau = np.abs(cols["tau_applied"])
    fell = bool(cols["fell"][-1])
    means = {}
    for k in sorted(set(step.tolist())):
        mask = step == k
        if (
            not fell
            and k == step[-1]
            and bool(cols["impact"][-1])
            and int(mask.sum()) == 1
        ):
            continue
        means[int(k)] = float(tau[mask].mean())
    return means


def _mark_impacts(ax, cols, mask):
    for t_imp in cols["t"][mask & cols["impact"]]:
        ax.axvline(t_imp, color=STYLE["impact_color"], lw=0.6, ls=":")


def _render_tracking(cols, spec, mask):
    fig, axes = plt.subplots(2, 1, sharex=True, figsize=STYLE["figsize"])
    t = cols["t"][mask]
    axes[0].plot(t, cols["theta_des"][mask], color=STYLE["desired_color"],
                 ls="--", label="desired")
    axes[0].plot(t, cols["theta_c"][mask], color=STYLE["actual_color"],
                 label="simulated")
    axes[0].set_ylabel("CoM angle (rad)")
    axes[0].legend(loc="best")
    axes[1].plot(t, cols["L_des"][mask], color=STYLE["desired_color"], ls="--",
                 label="desired")
    axes[1].plot(t, cols["L"][mask], color=STYLE["actual_color"],
                 label="simulated")
    axes[1].set_ylabel("angular momentum (kg m$^2$/s)")
    axes[1].set_xlabel("time (s)")
    for ax in axes:
        _mark_impacts(ax, cols, mask)
    fig.suptitle("Nominal vs simulated tracking")
    return fig


def _render_torque(cols, spec, mask):
    fig, ax = plt.subplots(figsize=STYLE["figsize"])
    t = cols["t"][mask]
    ax.plot(t, cols["tau_applied"][mask], color=STYLE["actual_color"],
            label="applied torque")
    ax.axhline(spec.u_max, color=STYLE["bound_color"], lw=0.9, ls="--",
               label=f"bound $\\pm${spec.u_max:g}")
    ax.axhline(-spec.u_max, color=STYLE["bound_color"], lw=0.9, ls="--")
    _mark_impacts(ax, cols, mask)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("stance ankle torque (N m)")
    ax.legend(loc="best")
    fig.suptitle("Stance ankle torque")
    return fig


def _render_torque_decay(cols, spec, mask):
    means = step_mean_abs_tau(cols)
    steps = sorted(means)
    values = [means[k] for k in steps]
    fig, ax = plt.subplots(figsize=STYLE["figsize"])
    ax.bar([str(k + 1) for k in steps], values, color=STYLE["actual_color"])
    ax.set_xlabel("step")
    ax.set_ylabel("mean |torque| (N m)")
    non_increasing = all(values[i + 1] <= values[i] + 1e-12
                         for i in range(len(values) - 1))
    note = "non-increasing" if non_increasing else "not monotone"
    fig.suptitle(f"Per-step torque effort ({note})")
    return fig


def _render_perturbation_window(cols, spec, mask):
    active = cols["perturb_active"] & mask
    if not active.any():
        raise PlotError("no active perturbation samples in the selected window")
    fig, axes = plt.subplots(2, 1, sharex=True, figsize=STYLE["figsize"])
    t = cols["t"][mask]
    axes[0].plot(t, cols["theta_c"][mask] - cols["theta_des"][mask],
                 color=STYLE["actual_color"])
    axes[0].set_ylabel("angle deviation (rad)")
    axes[1].plot(t, cols["L"][mask] - cols["L_des"][mask],
                 color=STYLE["actual_color"])
    axes[1].set_ylabel("momentum deviation")
    axes[1].set_xlabel("time (s)")
    t_active = cols["t"][active]
    for ax in axes:
        ax.axvspan(t_active[0], t_active[-1], color="tab:orange", alpha=0.25)
        _mark_impacts(ax, cols, mask)
    fig.suptitle("Deviation through the perturbation window")
    return fig


_RENDERERS = {
    "tracking": _render_tracking,
    "torque": _render_torque,
    "torque-decay": _render_torque_decay,
    "perturbation-window": _render_perturbation_window,
}


def render(spec: FigureSpec) -> str:
    """Write the requested figure; returns the output path."""
    cols = load_log(spec.csv_path)
    mask = _window(cols, spec.t0, spec.t1)
    fig = _RENDERERS[spec.kind](cols, spec, mask)
    fig.savefig(spec.out_path, dpi=STYLE["dpi"], metadata={"Software": None})
    plt.close(fig)
    return spec.out_path

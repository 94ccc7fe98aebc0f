"""Figure renderers over the simulator's CSV outputs.

Each figure family reads one CSV (runs, per-client shares, or per-pair
probabilities), averages across seeds at render time, and writes one image.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

SCHEME_ORDER = ["proposed", "oracle", "maxrate", "greedy", "random", "halfduplex"]
SCHEME_STYLE = {
    "proposed": dict(color="tab:red", marker="o"),
    "oracle": dict(color="tab:purple", marker="v"),
    "maxrate": dict(color="tab:brown", marker="^"),
    "greedy": dict(color="tab:green", marker="s"),
    "random": dict(color="tab:orange", marker="d"),
    "halfduplex": dict(color="tab:blue", marker="x"),
}


class SchemaError(ValueError):
    """The input CSV lacks a column the figure needs."""


@dataclass
class FigureSpec:
    csv_path: str
    figure: str
    out_path: str


def _require(df: pd.DataFrame, columns, figure: str):
    for col in columns:
        if col not in df.columns:
            raise SchemaError(f"figure {figure!r} requires column {col!r}")


def _schemes_in(df):
    present = df["scheme"].unique().tolist()
    return [s for s in SCHEME_ORDER if s in present] + [
        s for s in present if s not in SCHEME_ORDER
    ]


def _series(ax, df, x_col, y_col):
    """One line per scheme: mean across seeds with std error bars."""
    for scheme in _schemes_in(df):
        sub = df[df["scheme"] == scheme]
        grouped = sub.groupby(x_col)[y_col]
        xs = np.array(sorted(grouped.groups))
        means = grouped.mean().loc[xs].to_numpy()
        stds = grouped.std().fillna(0.0).loc[xs].to_numpy()
        ax.errorbar(
            xs, means, yerr=stds, label=scheme, capsize=3,
            **SCHEME_STYLE.get(scheme, {}),
        )
    ax.grid(True, alpha=0.3)
    ax.legend()


def _numeric_arrivals(df):
    out = df.copy()
    out["arrival_fps"] = pd.to_numeric(out["arrival_fps"], errors="coerce")
    return out.dropna(subset=["arrival_fps"])


def fig_throughput_vs_clients(df, spec):
    _require(df, ["scheme", "n_clients", "seed", "tput_total_mbps", "tput_down_mbps", "tput_up_mbps"], spec.figure)
    fig, axes = plt.subplots(1, 3, figsize=(15, 4.2), sharex=True)
    for ax, col, title in zip(
        axes,
        ["tput_total_mbps", "tput_down_mbps", "tput_up_mbps"],
        ["Total", "Downlink", "Uplink"],
    ):
        _series(ax, df, "n_clients", col)
        ax.set_xlabel("number of clients")
        ax.set_ylabel("throughput (Mb/s)")
        ax.set_title(title)
    fig.tight_layout()
    return fig


def fig_throughput_vs_arrival(df, spec):
    _require(df, ["scheme", "arrival_fps", "seed", "tput_total_mbps"], spec.figure)
    df = _numeric_arrivals(df)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    _series(ax, df, "arrival_fps", "tput_total_mbps")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("traffic arrival rate (frames/s per client)")
    ax.set_ylabel("total throughput (Mb/s)")
    fig.tight_layout()
    return fig


def fig_airtime_share(df, spec):
    _require(df, ["scheme", "arrival_fps", "seed", "fd_time_frac", "hd_time_frac"], spec.figure)
    df = _numeric_arrivals(df)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for scheme in _schemes_in(df):
        sub = df[df["scheme"] == scheme]
        grouped = sub.groupby("arrival_fps")
        xs = np.array(sorted(grouped.groups))
        fd = grouped["fd_time_frac"].mean().loc[xs].to_numpy()
        style = SCHEME_STYLE.get(scheme, {})
        ax.plot(xs, fd, label=f"{scheme} full-duplex", **style)
        ax.plot(xs, 1.0 - fd, linestyle="--", label=f"{scheme} half-duplex",
                color=style.get("color"))
    ax.set_xscale("log", base=2)
    ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel("traffic arrival rate (frames/s per client)")
    ax.set_ylabel("share of transmission time")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def fig_uplink_cdf(df, spec):
    _require(df, ["scheme", "seed", "client", "uplink_share"], spec.figure)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for scheme in _schemes_in(df):
        shares = df[df["scheme"] == scheme]["uplink_share"].to_numpy()
        xs = np.sort(shares)
        ys = np.arange(1, len(xs) + 1) / len(xs)
        ax.step(xs, ys, where="post", label=scheme,
                color=SCHEME_STYLE.get(scheme, {}).get("color"))
    ax.set_xlabel("uplink transmission probability")
    ax.set_ylabel("CDF across clients")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def regression_slope(assigned, realized) -> float:
    """Least-squares slope through the origin of realized vs assigned."""
    x = np.asarray(assigned, dtype=float)
    y = np.asarray(realized, dtype=float)
    denom = float(np.dot(x, x))
    if denom == 0.0:
        return float("nan")
    return float(np.dot(x, y) / denom)


def fig_prob_scatter(df, spec):
    _require(df, ["scheme", "seed", "down", "up", "p_assigned", "freq_realized"], spec.figure)
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    ax.scatter(df["p_assigned"], df["freq_realized"], s=14, alpha=0.6,
               color="tab:red", edgecolors="none")
    lim = max(df["p_assigned"].max(), df["freq_realized"].max(), 1e-3) * 1.1
    ax.plot([0, lim], [0, lim], color="k", linewidth=1, label="y = x")
    slope = regression_slope(df["p_assigned"], df["freq_realized"])
    ax.set_xlim(0, lim)
    ax.set_ylim(0, lim)
    ax.set_xlabel("assigned access probability")
    ax.set_ylabel("realized access frequency")
    ax.set_title(f"slope through origin: {slope:.3f}")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def fig_delta_sweep(df, spec):
    _require(df, ["scheme", "delta_db", "seed", "tput_total_mbps", "tput_down_mbps", "tput_up_mbps"], spec.figure)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    sub = df[df["scheme"].isin(["proposed", "oracle"])]
    if sub.empty:
        sub = df
    for col, label, style in (
        ("tput_total_mbps", "total", dict(color="tab:red", marker="o")),
        ("tput_down_mbps", "downlink", dict(color="tab:blue", marker="s")),
        ("tput_up_mbps", "uplink", dict(color="tab:green", marker="^")),
    ):
        grouped = sub.groupby("delta_db")[col]
        xs = np.array(sorted(grouped.groups))
        ax.errorbar(xs, grouped.mean().loc[xs], yerr=grouped.std().fillna(0.0).loc[xs],
                    label=label, capsize=3, **style)
    ax.set_xlabel("interference threshold (dB)")
    ax.set_ylabel("throughput (Mb/s)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def fig_sic_sweep(df, spec):
    _require(df, ["scheme", "sic_db", "seed", "tput_total_mbps"], spec.figure)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    _series(ax, df, "sic_db", "tput_total_mbps")
    ax.set_xlabel("self-interference suppression (dB)")
    ax.set_ylabel("total throughput (Mb/s)")
    fig.tight_layout()
    return fig


def fig_protocol_effectiveness(df, spec):
    _require(df, ["scheme", "n_clients", "seed", "collision_prob", "mean_contention_us"], spec.figure)
    fig, axes = plt.subplots(1, 2, figsize=(11, 4.2))
    ns = sorted(df["n_clients"].unique())
    schemes = _schemes_in(df)
    width = 0.8 / max(len(schemes), 1)
    for k, scheme in enumerate(schemes):
        sub = df[df["scheme"] == scheme]
        coll = sub.groupby("n_clients")["collision_prob"].mean().reindex(ns)
        cont = sub.groupby("n_clients")["mean_contention_us"].mean().reindex(ns)
        offs = np.arange(len(ns)) + (k - (len(schemes) - 1) / 2) * width
        color = SCHEME_STYLE.get(scheme, {}).get("color")
        axes[0].bar(offs, coll, width=width, label=scheme, color=color)
        axes[1].bar(offs, cont, width=width, label=scheme, color=color)
    for ax, ylabel, title in zip(
        axes, ["collision probability", "mean contention time (us)"],
        ["(a) collision probability", "(b) contention overhead"],
    ):
        ax.set_xticks(np.arange(len(ns)))
        ax.set_xticklabels([str(n) for n in ns])
        ax.set_xlabel("number of clients")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.grid(True, axis="y", alpha=0.3)
        ax.legend()
    fig.tight_layout()
    return fig


FIGURES = {
    "throughput_vs_clients": fig_throughput_vs_clients,
    "throughput_vs_arrival": fig_throughput_vs_arrival,
    "airtime_share": fig_airtime_share,
    "uplink_cdf": fig_uplink_cdf,
    "prob_scatter": fig_prob_scatter,
    "delta_sweep": fig_delta_sweep,
    "sic_sweep": fig_sic_sweep,
    "protocol_effectiveness": fig_protocol_effectiveness,
}


def render(spec: FigureSpec) -> str:
    """Render one figure family from its CSV; returns the output path."""
    if spec.figure not in FIGURES:
        raise ValueError(
            f"unknown figure {spec.figure!r}; choose from {sorted(FIGURES)}"
        )
    df = pd.read_csv(spec.csv_path)
    fig = FIGURES[spec.figure](df, spec)
    try:
        fig.savefig(spec.out_path)
    finally:
        plt.close(fig)
    return spec.out_path

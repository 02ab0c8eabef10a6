import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGURE_PARAMS = {
    'font.family': 'sans-serif',
    'font.size': 11,
    'axes.titlesize': 13,
    'axes.labelsize': 12,
    'legend.fontsize': 10,
    'axes.linewidth': 0.8,
    'figure.dpi': 110,
}

PALETTE = ['#0C5DA5', '#00A08A', '#F2AD00', '#F98400', '#5BBCD6', '#B40F20']

METRICS = (
    ("r_star", "optimal reward r*"),
    ("participation_fraction", "participation fraction"),
    ("company_payoff", "company payoff"),
    ("map_aoi_at_optimum", "map AoI at optimum"),
)


def finalize_axes(ax):
    for spine in ('top', 'right'):
        ax.spines[spine].set_visible(False)
    ax.grid(alpha=0.25, linewidth=0.5, linestyle='--')
    ax.tick_params(direction='out', length=4, width=0.7)


def render_sweep_figures(records, out_dir):
    """One PNG per (family, metric): per-seed traces plus the seed mean.

    `records` are SweepRecords in (seed, n) order. Returns the written paths.
    """
    plt.rcParams.update(FIGURE_PARAMS)
    os.makedirs(out_dir, exist_ok=True)

    families = {}
    for rec in records:
        families.setdefault(rec.family, {}).setdefault(rec.seed, []).append(rec)

    paths = []
    for family, by_seed in families.items():
        for metric, label in METRICS:
            fig, ax = plt.subplots(figsize=(5.2, 3.6))
            series = []
            for k, seed in enumerate(sorted(by_seed)):
                rows = by_seed[seed]
                ns = [r.n_vehicles for r in rows]
                ys = [getattr(r, metric) for r in rows]
                series.append(ys)
                ax.plot(ns, ys, color=PALETTE[k % len(PALETTE)], alpha=0.3, linewidth=0.9)
            if series and all(len(s) == len(series[0]) for s in series):
                ax.plot(ns, np.mean(series, axis=0), color='black', linewidth=2.0,
                        label=f"mean over {len(series)} seeds")
                ax.legend(frameon=False)
            ax.set_xscale('log')
            ax.set_xlabel("number of vehicles")
            ax.set_ylabel(label)
            ax.set_title(family)
            finalize_axes(ax)
            fig.tight_layout()
            path = os.path.join(out_dir, f"{family}_{metric}.png")
            fig.savefig(path, dpi=300, bbox_inches='tight')
            plt.close(fig)
            paths.append(path)
    return paths

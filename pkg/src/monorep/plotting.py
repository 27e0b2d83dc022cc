"""Matplotlib figures written next to the CSV/JSON reports.

Rendering happens off-screen (Agg backend); every function takes an output
path and returns it.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "lines.markersize": 3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
}

# fixed metadata keeps PNG output reproducible across runs
_META = {"Software": None}


def _figure(width=4.0, height=3.0):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(width, height))
    return fig, ax


def _save(fig, path):
    with plt.rc_context(STYLE):
        fig.tight_layout()
        fig.savefig(path, metadata=_META)
    plt.close(fig)
    return path


def gap_heatmap(X, V, gap, path, title="h(x,v) - <x,v>"):
    """Heatmap of the coupling gap over a 1-D x 1-D grid (flattened inputs)."""
    xs, vs = np.unique(X), np.unique(V)
    Z = np.asarray(gap, dtype=float).reshape(xs.size, vs.size).T
    Z = np.where(np.isfinite(Z), Z, np.nan)
    fig, ax = _figure()
    with plt.rc_context(STYLE):
        im = ax.imshow(Z, origin="lower", aspect="auto", cmap="viridis",
                       extent=(xs[0], xs[-1], vs[0], vs[-1]))
        fig.colorbar(im, ax=ax)
        ax.set_xlabel("x")
        ax.set_ylabel("v")
        ax.set_title(title)
    return _save(fig, path)


def extraction_plot(graph, path, reference=None, title="extracted graph"):
    """Extracted pairs: ``v`` against ``x`` in 1-D, arrows ``x -> x + v/4`` in 2-D."""
    fig, ax = _figure()
    with plt.rc_context(STYLE):
        if graph.dim == 1:
            if reference is not None:
                ax.plot(reference[0], reference[1], color="0.6", label="analytic")
            ax.plot(graph.xs[:, 0], graph.vs[:, 0], "o", label="extracted")
            ax.set_xlabel("x")
            ax.set_ylabel("v")
            ax.legend(frameon=False)
        else:
            ax.quiver(graph.xs[:, 0], graph.xs[:, 1], graph.vs[:, 0], graph.vs[:, 1],
                      angles="xy", scale_units="xy", scale=4.0, width=0.004)
            ax.set_xlabel("x1")
            ax.set_ylabel("x2")
            ax.set_aspect("equal")
        ax.set_title(title)
    return _save(fig, path)


def resolvent_plot(certificates, path, analytic=None, title="resolvent certificates"):
    """Resolvent output per probe.

    One dimension: ``x`` and ``v`` against ``v0`` (and the analytic ``x`` if
    given).  Otherwise: gap and fixed-point residual per probe, log scale.
    """
    fig, ax = _figure()
    with plt.rc_context(STYLE):
        if certificates and certificates[0].x.size == 1:
            v0 = np.array([c.v0[0] for c in certificates])
            ax.plot(v0, [c.x[0] for c in certificates], "o-", label="x")
            ax.plot(v0, [c.v[0] for c in certificates], "s-", label="v")
            if analytic is not None:
                ax.plot(v0, np.asarray(analytic)[:, 0], "k--", label="x analytic")
            ax.set_xlabel("v0")
            ax.legend(frameon=False)
        else:
            k = np.arange(len(certificates))
            floor = 1e-17
            ax.semilogy(k, [abs(c.gap) + floor for c in certificates], "o", label="|gap|")
            ax.semilogy(k, [c.fixedpoint_residual + floor for c in certificates], "s",
                        label="fixed-point residual")
            ax.set_xlabel("probe")
            ax.legend(frameon=False)
        ax.set_title(title)
    return _save(fig, path)


def demo_overview(rows, path):
    """Bar chart of accepted fractions per catalog entry."""
    fig, ax = _figure(width=5.0)
    with plt.rc_context(STYLE):
        names = [r["name"] for r in rows]
        frac = [float(r["accepted_fraction"]) for r in rows]
        colors = ["tab:green" if r["status"] == "PASS" else "tab:red" for r in rows]
        ax.bar(range(len(rows)), frac, color=colors)
        ax.set_xticks(range(len(rows)))
        ax.set_xticklabels(names, rotation=30, ha="right")
        ax.set_ylim(0, 1.05)
        ax.set_ylabel("accepted fraction")
    return _save(fig, path)

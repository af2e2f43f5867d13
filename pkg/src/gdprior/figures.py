"""Figure rendering for the experiment CLI.

Each report renders a PNG next to its delimited output.  The CSV/JSON
files stay canonical; figures are a convenience view and can be disabled
with --no-figures.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "render_moments", "render_flex", "render_consistency", "render_posterior",
    "render_realization", "render_samples", "render_cf_residual",
    "render_density",
]


def _save(fig, path):
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def render_moments(path, quantities, values):
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.bar(range(len(values)), values, color="steelblue")
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels(quantities, rotation=20, ha="right")
    ax.set_ylabel("value")
    ax.set_title("prior random-mean moments")
    _save(fig, path)


def render_flex(path, curve, kurtosis_curve=None):
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.plot(curve["x"], curve["rho"], label="skewness ratio")
    ax.axhline(curve["rho_max"], ls="--", lw=0.8, color="gray")
    ax.axhline(curve["rho_min"], ls="--", lw=0.8, color="gray")
    ax.axhline(1.0, ls=":", lw=0.8, color="black")
    if kurtosis_curve is not None:
        ax.plot(kurtosis_curve["x"], kurtosis_curve["kurtosis_ratio"],
                label="kurtosis ratio")
    ax.set_xlabel("x = b / b0")
    ax.set_ylabel("ratio vs matched Dirichlet")
    ax.legend()
    _save(fig, path)


def render_consistency(path, result):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(result["n"], result["u"], ".", ms=3, label="u_n")
    fit = np.exp(result["intercept"]) * result["n"] ** result["slope"]
    ax.loglog(result["n"], fit, "-", lw=1,
              label=f"slope {result['slope']:.3f}")
    ax.set_xlabel("n")
    ax.set_ylabel("prior weight scale u_n")
    ax.legend()
    _save(fig, path)


def render_posterior(path, summary):
    ratios = {k: v for k, v in summary.items()
              if k.endswith("_over_a") or k == "w_n"}
    fig, ax = plt.subplots(figsize=(6, 3))
    keys = list(ratios)
    ax.bar(range(len(keys)), [ratios[k] for k in keys], color="darkseagreen")
    ax.set_xticks(range(len(keys)))
    ax.set_xticklabels(keys, rotation=45, ha="right", fontsize=7)
    ax.set_title("posterior constants (normalized)")
    _save(fig, path)


def render_realization(path, realization, title="stick realization"):
    fig, ax = plt.subplots(figsize=(5.5, 3))
    if realization.atoms is not None:
        ax.vlines(realization.atoms, 0.0, realization.weights, lw=1)
        ax.set_xlabel("atom")
    else:
        ax.vlines(np.arange(1, realization.weights.size + 1), 0.0,
                  realization.weights, lw=1)
        ax.set_xlabel("stick index")
    ax.set_ylabel("weight")
    ax.set_title(f"{title} (remainder {realization.remainder:.2e})")
    _save(fig, path)


def render_samples(path, samples, title="samples"):
    fig, ax = plt.subplots(figsize=(5, 3))
    finite = samples[np.isfinite(samples)]
    lo, hi = np.percentile(finite, [0.5, 99.5])
    ax.hist(finite, bins=80, range=(lo, hi), density=True, color="slategray")
    ax.set_title(title)
    _save(fig, path)


def render_cf_residual(path, result):
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.semilogy(result["u"], np.maximum(result["residual"], 1e-18), "o-")
    ax.set_xlabel("u")
    ax.set_ylabel("identity residual")
    _save(fig, path)


def render_density(path, estimate, data):
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.plot(estimate.t, estimate.p_hat, label="predictive density")
    ax.plot(data, np.zeros_like(data), "|", ms=12, color="black",
            label="observations")
    ax.set_xlabel("t")
    ax.set_ylabel("density")
    ax.legend()
    _save(fig, path)

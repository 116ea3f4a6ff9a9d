"""Static SVG step plots of fitted hazards (needs matplotlib)."""

import numpy as np


def _steps(hazard, right_end):
    # the last breakpoint closes the final finite piece
    d = hazard.to_dict()
    x = [b for b in d["breakpoints"] if b <= right_end]
    y = list(d["values"])[:len(x) - 1]
    return np.asarray(x, dtype=float), np.asarray(y + y[-1:], dtype=float)


def plot_hazard(path, hazard, right_end, constrained=None, interval=None,
                x0=None):
    """Write the fitted step hazard, optionally a constrained fit and a
    confidence interval at x0, to an SVG file."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "monohaz"
    fig, ax = plt.subplots(figsize=(6, 4))
    x, y = _steps(hazard, right_end)
    ax.step(x, y, where="post", label="NPMLE")
    if constrained is not None:
        cx, cy = _steps(constrained, right_end)
        ax.step(cx, cy, where="post", linestyle="--", label="constrained")
    if interval is not None and x0 is not None:
        lo, hi = interval
        ax.vlines(x0, lo, hi, color="k", linewidth=3, label="interval at x0")
    ax.set_xlabel("time")
    ax.set_ylabel("baseline hazard")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)

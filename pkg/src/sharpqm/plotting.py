"""Optional PNG rendering of CSV series (``--figures``).

matplotlib is imported on first use so the data path never depends on it.
"""

from __future__ import annotations

import io


def render_png(columns: dict, x: str, ys: list[str], title: str = "", logy: bool = False) -> bytes:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.0), dpi=120)
    for y in ys:
        ax.plot(columns[x], columns[y], label=y, lw=1.2)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(x)
    if len(ys) > 1:
        ax.legend(fontsize=7, ncol=2)
    else:
        ax.set_ylabel(ys[0])
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    buf = io.BytesIO()
    # fixed metadata keeps the bytes reproducible
    fig.savefig(buf, format="png", metadata={"Software": None})
    plt.close(fig)
    return buf.getvalue()

"""Bar charts for benchmark records (persisted size and shred time per document)."""
import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SERIES = (
    ("xrecursive", "tree", "XRecursive (tree)"),
    ("xrecursive", "stream", "XRecursive (stream)"),
    ("edge", "tree", "Edge (tree)"),
)


def _grouped_bars(ax, records, field, series):
    docs = []
    for r in records:
        if r.doc_name not in docs:
            docs.append(r.doc_name)
    lookup = {(r.doc_name, r.mapping, r.parse_mode): getattr(r, field) for r in records}
    x = np.arange(len(docs))
    width = 0.8 / len(series)
    for k, (mapping, mode, label) in enumerate(series):
        heights = [lookup.get((d, mapping, mode), 0) for d in docs]
        ax.bar(x + (k - (len(series) - 1) / 2) * width, heights, width, label=label)
    ax.set_xticks(x)
    ax.set_xticklabels(docs, rotation=30, ha="right", fontsize=8)
    ax.legend(fontsize=8)


def size_figure(records, path, dpi=100):
    fig, ax = plt.subplots(figsize=(max(6, len(records) * 0.4), 4))
    # stream and tree persist identical bytes, so one XRecursive series suffices
    _grouped_bars(ax, records, "store_bytes", (SERIES[0], SERIES[2]))
    ax.set_ylabel("persisted size (bytes)")
    ax.set_title("Store size per document")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)


def time_figure(records, path, dpi=100):
    fig, ax = plt.subplots(figsize=(max(6, len(records) * 0.4), 4))
    _grouped_bars(ax, records, "shred_millis", SERIES)
    ax.set_ylabel("median shred time (ms)")
    ax.set_title("Parse + shred time per document")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)


def render_report(records, paths):
    """Write the size and time charts to paths['size'] and paths['time']."""
    size_figure(records, paths["size"])
    time_figure(records, paths["time"])
    return paths

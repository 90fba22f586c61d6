"""Storage-size and shred-time benchmarks against a minimal Edge baseline.

For every file in a corpus we time XRecursive shredding in tree and stream
mode and Edge shredding in tree mode, and record the persisted size and the
number of rows each mapping emits. Records go to a CSV file; bar charts of
size and time are written next to it.
"""
from __future__ import annotations

import csv
import logging
import os
import statistics
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, NamedTuple, Union

from .errors import IoFailure, XmlError
from .shredder import shred_stream, shred_tree
from .store import Store, escape_field
from .xml_model import XmlTree, parse_events, parse_tree

log = logging.getLogger(__name__)

CSV_HEADER = ("doc", "nodes", "mapping", "mode", "shred_ms", "store_bytes", "rows")
EDGE_HEADER = "#EDGE v1"


class EdgeRow(NamedTuple):
    source: int
    ordinal: int
    name: str
    flag: str
    target: Union[int, str]


def shred_edge(tree: XmlTree) -> List[EdgeRow]:
    """Edge-table shredding: one ref row per element/attribute, one val row per value.

    Node ids are assigned in pre-order with attributes before child elements;
    0 is the virtual root. Ordinals count the outgoing edges of a source,
    attributes first.
    """
    rows = []
    next_id = 1
    stack = [(tree.root, 0, 1)]
    while stack:
        node, source, ordinal = stack.pop()
        node_id = next_id
        next_id += 1
        rows.append(EdgeRow(source, ordinal, node.name, "ref", node_id))
        k = 0
        for attr_name, attr_value in node.attributes:
            k += 1
            attr_id = next_id
            next_id += 1
            rows.append(EdgeRow(node_id, k, attr_name, "ref", attr_id))
            rows.append(EdgeRow(attr_id, 1, attr_name, "val", attr_value))
        if node.text is not None:
            rows.append(EdgeRow(node_id, k + 1, node.name, "val", node.text))
        stack.extend((child, node_id, k + j + 1) for j, child in reversed(list(enumerate(node.children))))
    return rows


def dump_edges(rows: List[EdgeRow]) -> str:
    lines = [EDGE_HEADER]
    for r in rows:
        target = str(r.target) if r.flag == "ref" else escape_field(r.target)
        lines.append("%d\t%d\t%s\t%s\t%s" % (r.source, r.ordinal, escape_field(r.name), r.flag, target))
    lines.append("")
    return "\n".join(lines)


def tree_counts(tree: XmlTree):
    """(elements, attributes, elements with text) of a parsed tree."""
    elements = attributes = texts = 0
    for node in tree.iter():
        elements += 1
        attributes += len(node.attributes)
        texts += node.text is not None
    return elements, attributes, texts


def xrecursive_row_count(tree: XmlTree) -> int:
    elements, attributes, texts = tree_counts(tree)
    return (1 + elements + attributes) + (attributes + texts)


def edge_row_count(tree: XmlTree) -> int:
    elements, attributes, texts = tree_counts(tree)
    return elements + 2 * attributes + texts


@dataclass(frozen=True)
class BenchRecord:
    doc_name: str
    node_count: int
    mapping: str
    parse_mode: str
    shred_millis: float
    store_bytes: int
    rows_emitted: int

    def csv_row(self):
        return (self.doc_name, self.node_count, self.mapping, self.parse_mode,
                "%.3f" % self.shred_millis, self.store_bytes, self.rows_emitted)


def median_millis(fn: Callable[[], object], repetitions: int) -> float:
    samples = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - t0) * 1000.0)
    return statistics.median(samples)


def bench_document(doc_name: str, text: str, repetitions: int) -> List[BenchRecord]:
    tree = parse_tree(text)
    elements, attributes, _ = tree_counts(tree)
    nodes = elements + attributes
    records = []

    for mode in ("tree", "stream"):
        if mode == "tree":
            def run():
                return shred_tree(parse_tree(text), doc_name)
        else:
            def run():
                return shred_stream(parse_events(text), doc_name)
        result = run()
        store = Store()
        store.insert_document(result, doc_name)
        records.append(BenchRecord(
            doc_name, nodes, "xrecursive", mode,
            median_millis(run, repetitions),
            len(store.dumps().encode("utf-8")),
            result.row_count,
        ))

    def run_edge():
        return shred_edge(parse_tree(text))
    edges = run_edge()
    records.append(BenchRecord(
        doc_name, nodes, "edge", "tree",
        median_millis(run_edge, repetitions),
        len(dump_edges(edges).encode("utf-8")),
        len(edges),
    ))
    return records


def write_records(records: List[BenchRecord], output_path) -> None:
    try:
        with open(output_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in records:
                w.writerow(r.csv_row())
    except OSError as e:
        raise IoFailure("cannot write %s: %s" % (output_path, e)) from e


def read_records(path) -> List[BenchRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError("unexpected header %r" % (header,))
        return [BenchRecord(d, int(n), m, mode, float(ms), int(b), int(rows))
                for d, n, m, mode, ms, b, rows in reader]


def stream_tree_ratios(records: List[BenchRecord]):
    """Per document: xrecursive stream time divided by tree time."""
    by_doc = {}
    for r in records:
        if r.mapping == "xrecursive":
            by_doc.setdefault(r.doc_name, {})[r.parse_mode] = r.shred_millis
    return {doc: (t["stream"] / t["tree"] if t.get("tree") else float("nan"))
            for doc, t in by_doc.items() if "stream" in t and "tree" in t}


def run_bench(corpus_dir, repetitions: int = 5, output_path="bench.csv",
              figures: bool = True) -> List[BenchRecord]:
    """Benchmark every *.xml file directly inside `corpus_dir`."""
    if repetitions < 3:
        raise ValueError("repetitions must be at least 3")
    corpus = Path(corpus_dir)
    if not corpus.is_dir():
        raise IoFailure("corpus directory %s does not exist" % corpus)
    files = sorted(p for p in corpus.iterdir() if p.suffix.lower() == ".xml" and p.is_file())
    if not files:
        log.warning("no XML files in %s", corpus)

    records = []
    for path in files:
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise IoFailure("cannot read %s: %s" % (path, e)) from e
        try:
            records.extend(bench_document(path.name, text, repetitions))
        except XmlError as e:
            log.warning("skipping %s: %s", path.name, e)

    write_records(records, output_path)
    for doc, ratio in stream_tree_ratios(records).items():
        log.info("%s: stream/tree shred time ratio %.2f", doc, ratio)
    if figures and records:
        from .plotting import render_report
        render_report(records, figure_paths(output_path))
    return records


def figure_paths(output_path):
    base, _ = os.path.splitext(os.fspath(output_path))
    return {"size": base + "_size.png", "time": base + "_time.png"}

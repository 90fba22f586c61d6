"""Command-line front end: load, query, export, stats, drop, bench.

Exit status: 0 success, 1 usage error, 2 XML error, 3 query error,
4 store error. The store file is rewritten after every mutating command;
running several invocations against one store file at once is not supported.
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys

from .bench import run_bench
from .errors import DuplicateDocument, QuerySyntax, StoreError, UnknownDocument, XmlError
from .query import evaluate, parse_query, reconstruct
from .shredder import shred_stream, shred_tree
from .store import Store
from .xml_model import escape, parse_events, parse_tree

EXIT_OK, EXIT_USAGE, EXIT_XML, EXIT_QUERY, EXIT_STORE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError("%s: %s" % (self.prog, message))


def build_parser():
    p = _Parser(prog="xrecursive", description="Store and query XML in two relational tables.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    c = sub.add_parser("load", help="shred an XML file into a store")
    c.add_argument("xml_path", help="XML file, or - for standard input")
    c.add_argument("--store", required=True)
    c.add_argument("--name", help="document name (default: file base name)")
    c.add_argument("--mode", choices=("tree", "stream"), default="stream")

    c = sub.add_parser("query", help="evaluate a path expression")
    c.add_argument("expression")
    c.add_argument("--store", required=True)
    c.add_argument("--doc", help="restrict matches to one document")
    c.add_argument("--output", choices=("ids", "values", "xml"), default="values")

    c = sub.add_parser("export", help="print a document as XML, or the store as SQL")
    c.add_argument("--store", required=True)
    c.add_argument("--doc")
    c.add_argument("--format", choices=("xml", "sql"), default="xml")

    c = sub.add_parser("stats", help="print table sizes")
    c.add_argument("--store", required=True)

    c = sub.add_parser("drop", help="remove a document from a store")
    c.add_argument("--store", required=True)
    c.add_argument("--doc", required=True)

    c = sub.add_parser("bench", help="time and size the mappings over a corpus")
    c.add_argument("corpus_dir")
    c.add_argument("--repetitions", type=int, default=5)
    c.add_argument("--output", default="bench.csv")
    c.add_argument("--no-figures", dest="figures", action="store_false")
    return p


def _open_or_new(path):
    if os.path.exists(path):
        return Store.open(path)
    return Store()


def cmd_load(args, out):
    store = _open_or_new(args.store)
    if args.xml_path == "-":
        name = args.name or "stdin.xml"
    else:
        name = args.name or os.path.basename(args.xml_path)
    if name in store.docs:
        raise DuplicateDocument("document %r is already stored" % name)
    if args.xml_path == "-":
        src = contextlib.nullcontext(sys.stdin)
    else:
        try:
            src = open(args.xml_path, encoding="utf-8")
        except OSError as e:
            raise UsageError("cannot read %s: %s" % (args.xml_path, e))
    with src as fh:
        if args.mode == "tree":
            shred = shred_tree(parse_tree(fh), name, store.next_id)
        else:
            shred = shred_stream(parse_events(fh), name, store.next_id)
    root = store.insert_document(shred, name)
    store.save(args.store)
    out.write("root=%d\nstructure_rows=%d\nvalue_rows=%d\n" % (root, len(shred.structure), len(shred.values)))


def cmd_query(args, out):
    store = Store.open(args.store)
    query = parse_query(args.expression, args.doc)
    for m in evaluate(store, query):
        if args.output == "ids":
            out.write("%d\n" % m.node_id)
        elif args.output == "values":
            out.write("%d\t%s\n" % (m.node_id, m.value if m.value is not None else ""))
        elif store.is_attribute(m.node_id):
            out.write('%s="%s"\n' % (store.rows[m.node_id].tag_name, escape(m.value)))
        else:
            out.write(reconstruct(store, m.node_id) + "\n")


def cmd_export(args, out):
    store = Store.open(args.store)
    if args.format == "sql":
        out.write(store.export_sql())
        return
    doc = args.doc
    if doc is None:
        if len(store.docs) != 1:
            raise UsageError("--doc is required when the store holds %d documents" % len(store.docs))
        (doc,) = store.docs
    root = store.doc_root(doc)
    if root is None:
        raise UnknownDocument("no document named %r" % doc)
    out.write(reconstruct(store, root) + "\n")


def cmd_stats(args, out):
    s = Store.open(args.store).stats()
    out.write("docs=%d\nstructure_rows=%d\nvalue_rows=%d\nfile_bytes=%d\n" % (
        s.doc_count, s.structure_row_count, s.value_row_count, s.file_bytes))


def cmd_drop(args, out):
    store = Store.open(args.store)
    removed = store.drop_document(args.doc)
    store.save(args.store)
    out.write("removed=%d\n" % removed)


def cmd_bench(args, out):
    if args.repetitions < 3:
        raise UsageError("--repetitions must be at least 3")
    records = run_bench(args.corpus_dir, args.repetitions, args.output, figures=args.figures)
    out.write("records=%d\noutput=%s\n" % (len(records), args.output))


COMMANDS = {
    "load": cmd_load,
    "query": cmd_query,
    "export": cmd_export,
    "stats": cmd_stats,
    "drop": cmd_drop,
    "bench": cmd_bench,
}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args, out)
    except UsageError as e:
        err.write("%s\n" % e)
        return EXIT_USAGE
    except (XmlError, UnicodeDecodeError) as e:
        err.write("xml error: %s\n" % e)
        return EXIT_XML
    except QuerySyntax as e:
        err.write("%s\n" % e)
        return EXIT_QUERY
    except StoreError as e:
        err.write("store error: %s\n" % e)
        return EXIT_STORE
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    return EXIT_OK


def main():
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    sys.exit(run())

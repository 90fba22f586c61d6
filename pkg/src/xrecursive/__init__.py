"""Schema-oblivious XML storage in two tables (tag_structure, tag_value)
with recursive parent-id labels, path queries and lossless reconstruction."""

from .errors import (
    CorruptStore,
    DuplicateDocument,
    IdCollision,
    IoFailure,
    MalformedXml,
    MixedContent,
    NotAnElement,
    QuerySyntax,
    StoreError,
    UnknownDocument,
    UnknownNode,
    UnsupportedConstruct,
    XmlError,
    XRecursiveError,
)
from .query import Axis, Match, PathQuery, Predicate, Step, evaluate, parse_query, reconstruct, reconstruct_node
from .shredder import ShredResult, StructRow, ValueRow, shred_stream, shred_tree
from .store import Store, StoreStats
from .xml_model import (
    EndElement,
    StartElement,
    Text,
    XmlNode,
    XmlTree,
    build_tree,
    parse_events,
    parse_tree,
    serialize,
    trees_equal,
)

__version__ = "0.1.0"


def load_document(store, source, doc_name, mode="stream"):
    """Parse, shred and insert one document; returns its document row id."""
    if mode == "tree":
        shred = shred_tree(parse_tree(source), doc_name, store.next_id)
    elif mode == "stream":
        shred = shred_stream(parse_events(source), doc_name, store.next_id)
    else:
        raise ValueError("mode must be 'tree' or 'stream'")
    return store.insert_document(shred, doc_name)

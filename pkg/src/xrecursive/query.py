"""Path queries over a Store, answered by walking parent ids upward.

Grammar::

    Path := ('/' | '//') Step (('/' | '//') Step)*
    Step := Name Pred? | '@' Name
    Pred := '[' (Name | '@' Name) '=' "'" chars "'" ']'

``''`` inside a predicate literal stands for one quote character.

Evaluation starts from the nodes carrying the last step's name (the by-name
index) and checks each one's chain of parent ids against the earlier steps,
so the work per candidate is bounded by the tree height.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, NamedTuple, Optional, Tuple

from .errors import NotAnElement, QuerySyntax, UnknownDocument, UnknownNode
from .shredder import ATTRIBUTE, ELEMENT
from .store import Store
from .xml_model import XmlNode, serialize

_NAME_RE = re.compile(r"[\w.\-:]+")


class Axis(Enum):
    CHILD = "/"
    DESCENDANT_OR_SELF = "//"


class Predicate(NamedTuple):
    name: str
    value: str
    attribute: bool = False


@dataclass(frozen=True)
class Step:
    axis: Axis
    name: str
    attribute: bool = False
    predicate: Optional[Predicate] = None

    def __post_init__(self):
        if self.attribute and self.predicate is not None:
            raise ValueError("an attribute step cannot carry a predicate")

    def __str__(self):
        out = self.axis.value + ("@" if self.attribute else "") + self.name
        if self.predicate is not None:
            p = self.predicate
            out += "[%s%s='%s']" % ("@" if p.attribute else "", p.name, p.value.replace("'", "''"))
        return out


@dataclass(frozen=True)
class PathQuery:
    steps: Tuple[Step, ...]
    doc_scope: Optional[str] = None

    def __post_init__(self):
        if not self.steps:
            raise ValueError("a path needs at least one step")
        if any(s.attribute for s in self.steps[:-1]):
            raise ValueError("an attribute step may only come last")

    def __str__(self):
        return "".join(str(s) for s in self.steps)


class Match(NamedTuple):
    node_id: int
    value: Optional[str] = None


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, reason):
        raise QuerySyntax(self.pos, reason)

    def peek(self, s):
        return self.text.startswith(s, self.pos)

    def expect(self, s, what):
        if not self.peek(s):
            self.error("expected %s" % what)
        self.pos += len(s)

    def name(self):
        m = _NAME_RE.match(self.text, self.pos)
        if m is None:
            self.error("expected a name")
        self.pos = m.end()
        return m.group(0)

    def literal(self):
        self.expect("'", "opening quote")
        out = []
        while True:
            i = self.text.find("'", self.pos)
            if i < 0:
                self.pos = len(self.text)
                self.error("unterminated string literal")
            out.append(self.text[self.pos:i])
            self.pos = i + 1
            if self.peek("'"):
                out.append("'")
                self.pos += 1
            else:
                return "".join(out)

    def step(self, axis):
        if self.peek("@"):
            self.pos += 1
            return Step(axis, self.name(), attribute=True)
        name = self.name()
        predicate = None
        if self.peek("["):
            self.pos += 1
            is_attr = self.peek("@")
            if is_attr:
                self.pos += 1
            pname = self.name()
            self.expect("=", "'='")
            value = self.literal()
            self.expect("]", "']' closing the predicate")
            predicate = Predicate(pname, value, is_attr)
        return Step(axis, name, predicate=predicate)

    def path(self):
        steps = []
        while self.pos < len(self.text):
            if steps and steps[-1].attribute:
                self.error("an attribute step may only come last")
            if self.peek("//"):
                axis = Axis.DESCENDANT_OR_SELF
                self.pos += 2
            elif self.peek("/"):
                axis = Axis.CHILD
                self.pos += 1
            else:
                self.error("expected '/' or '//'")
            steps.append(self.step(axis))
        if not steps:
            self.error("empty path")
        return tuple(steps)


def parse_query(expression: str, doc_scope: Optional[str] = None) -> PathQuery:
    """Parse a path expression.

    >>> str(parse_query("//Employee[Name='Robin']/@type"))
    "//Employee[Name='Robin']/@type"
    """
    return PathQuery(_Parser(expression).path(), doc_scope)


class _Evaluator:
    """Bottom-up matcher.

    For a node, `prefixes` is the set of step indices i such that steps
    0..i can be matched along the node's ancestor chain with step i landing
    on the node itself (-1 stands for the document row). `open` holds the
    prefixes ending strictly above the node that a following '//' step may
    continue from. Both depend only on the ancestor chain, so they are
    memoized per node and shared between candidates.
    """

    def __init__(self, store: Store, query: PathQuery):
        self.store = store
        self.steps = query.steps
        self.scope_id = None
        if query.doc_scope is not None:
            self.scope_id = store.doc_root(query.doc_scope)
            if self.scope_id is None:
                raise UnknownDocument("no document named %r" % query.doc_scope)
        self.steps_named: Dict[str, List[int]] = {}
        for i, step in enumerate(self.steps):
            self.steps_named.setdefault(step.name, []).append(i)
        # prefixes that some '//' step continues from
        self.desc_sources = frozenset(i - 1 for i, s in enumerate(self.steps)
                                      if s.axis is Axis.DESCENDANT_OR_SELF)
        self.memo: Dict[int, Tuple[frozenset, frozenset]] = {}

    def state(self, node_id: int) -> Tuple[frozenset, frozenset]:
        rows = self.store.rows
        path = []
        nid = node_id
        while nid not in self.memo:
            row = rows[nid]
            if row.pid == row.id:
                in_scope = self.scope_id is None or nid == self.scope_id
                self.memo[nid] = (frozenset((-1,)) if in_scope else frozenset(), frozenset())
                break
            path.append(nid)
            nid = row.pid
        for nid in reversed(path):
            row = rows[nid]
            parent_prefixes, parent_open = self.memo[row.pid]
            carried = parent_prefixes & self.desc_sources
            open_ = parent_open | carried if carried else parent_open
            prefixes = set()
            for i in self.steps_named.get(row.tag_name, ()):
                step = self.steps[i]
                context = parent_prefixes if step.axis is Axis.CHILD else open_
                if i - 1 in context and self.node_test(nid, step):
                    prefixes.add(i)
            self.memo[nid] = (frozenset(prefixes), open_)
        return self.memo[node_id]

    def node_test(self, node_id: int, step: Step) -> bool:
        if self.store.is_attribute(node_id) != step.attribute:
            return False
        return step.predicate is None or self.predicate_holds(node_id, step.predicate)

    def predicate_holds(self, node_id: int, pred: Predicate) -> bool:
        want = ATTRIBUTE if pred.attribute else ELEMENT
        for child in self.store.children.get(node_id, ()):
            if self.store.rows[child].tag_name != pred.name:
                continue
            v = self.store.values.get(child)
            if v is not None and v.kind == want and v.value == pred.value:
                return True
        return False

    def run(self) -> List[Match]:
        last = len(self.steps) - 1
        out = []
        for node_id in self.store.by_name.get(self.steps[-1].name, ()):
            if self.store.is_document(node_id):
                continue
            if last in self.state(node_id)[0]:
                v = self.store.values.get(node_id)
                out.append(Match(node_id, v.value if v is not None else None))
        return out


def evaluate(store: Store, query) -> List[Match]:
    """Evaluate a PathQuery (or expression string); matches ascend by node id."""
    if isinstance(query, str):
        query = parse_query(query)
    return _Evaluator(store, query).run()


def reconstruct_node(store: Store, node_id: int) -> XmlNode:
    """Rebuild the element subtree rooted at `node_id` from the tables."""
    row = store.row(node_id)
    if row is None:
        raise UnknownNode("no node with id %d" % node_id)
    if store.is_attribute(node_id):
        raise NotAnElement("node %d is an attribute" % node_id)
    if row.id == row.pid:
        roots = store.children.get(node_id, ())
        if len(roots) != 1:
            raise UnknownNode("document row %d does not have exactly one root element" % node_id)
        node_id = roots[0]
    built: Dict[int, XmlNode] = {}
    # children always carry larger ids than their parent
    for nid in reversed(store.subtree_ids(node_id)):
        if store.is_attribute(nid):
            continue
        attrs = []
        kids = []
        for child in store.children.get(nid, ()):
            v = store.values.get(child)
            if v is not None and v.kind == ATTRIBUTE:
                attrs.append((store.rows[child].tag_name, v.value))
            else:
                kids.append(built.pop(child))
        v = store.values.get(nid)
        text = v.value if v is not None and v.kind == ELEMENT else None
        built[nid] = XmlNode(store.rows[nid].tag_name, tuple(attrs), text, tuple(kids))
    return built[node_id]


def reconstruct(store: Store, node_id: int) -> str:
    return serialize(reconstruct_node(store, node_id))

"""Shred XML into tag_structure / tag_value rows with recursive parent labels.

Labels are assigned in pre-order. The document itself gets the first id
and is its own parent; every element or attribute then records only the id
of its parent, so a path is recovered by walking the parent chain.
Within an element the attributes are labeled before the child elements.

Values reuse the id of the node they belong to: an attribute's value is a
kind ``A`` row, an element's text a kind ``E`` row.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Tuple

from .errors import MalformedXml, MixedContent
from .xml_model import EndElement, ParseEvent, StartElement, Text, XmlTree, trim

ATTRIBUTE = "A"
ELEMENT = "E"


class StructRow(NamedTuple):
    tag_name: str
    id: int
    pid: int


class ValueRow(NamedTuple):
    tag_id: int
    value: str
    kind: str


@dataclass(frozen=True)
class ShredResult:
    structure: Tuple[StructRow, ...]
    values: Tuple[ValueRow, ...]
    next_id: int

    @property
    def start_id(self) -> int:
        return self.structure[0].id

    @property
    def row_count(self) -> int:
        return len(self.structure) + len(self.values)


def _check_args(doc_name, start_id):
    if not doc_name:
        raise ValueError("doc_name must be non-empty")
    if start_id < 1:
        raise ValueError("start_id must be >= 1")


def shred_tree(tree: XmlTree, doc_name: str, start_id: int = 1) -> ShredResult:
    _check_args(doc_name, start_id)
    structure = [StructRow(doc_name, start_id, start_id)]
    values = []
    next_id = start_id + 1
    stack = [(tree.root, start_id)]
    while stack:
        node, pid = stack.pop()
        node_id = next_id
        next_id += 1
        structure.append(StructRow(node.name, node_id, pid))
        if node.text is not None:
            values.append(ValueRow(node_id, trim(node.text), ELEMENT))
        for attr_name, attr_value in node.attributes:
            structure.append(StructRow(attr_name, next_id, node_id))
            values.append(ValueRow(next_id, attr_value, ATTRIBUTE))
            next_id += 1
        stack.extend((child, node_id) for child in reversed(node.children))
    return ShredResult(tuple(structure), tuple(values), next_id)


def shred_stream(events: Iterable[ParseEvent], doc_name: str, start_id: int = 1) -> ShredResult:
    """Single-pass shredding driven by parse events and a parent-id stack."""
    _check_args(doc_name, start_id)
    structure = [StructRow(doc_name, start_id, start_id)]
    values = []
    next_id = start_id + 1
    # frames: [name, id, text pieces, has element children]
    stack = []
    seen_root = False
    for ev in events:
        if isinstance(ev, StartElement):
            if stack:
                parent = stack[-1]
                if parent[2]:
                    raise MixedContent("<%s> has both text and element children" % parent[0])
                parent[3] = True
                pid = parent[1]
            elif seen_root:
                raise MalformedXml("multiple root elements")
            else:
                seen_root = True
                pid = start_id
            node_id = next_id
            next_id += 1
            structure.append(StructRow(ev.name, node_id, pid))
            for attr_name, attr_value in ev.attributes:
                structure.append(StructRow(attr_name, next_id, node_id))
                values.append(ValueRow(next_id, attr_value, ATTRIBUTE))
                next_id += 1
            stack.append([ev.name, node_id, [], False])
        elif isinstance(ev, Text):
            if not trim(ev.content):
                continue
            if not stack:
                raise MalformedXml("text outside the root element")
            if stack[-1][3]:
                raise MixedContent("<%s> has both text and element children" % stack[-1][0])
            stack[-1][2].append(ev.content)
        elif isinstance(ev, EndElement):
            if not stack or stack[-1][0] != ev.name:
                raise MalformedXml("unbalanced end event for %r" % (ev.name,))
            name, node_id, pieces, _ = stack.pop()
            text = trim("".join(pieces))
            if text:
                values.append(ValueRow(node_id, text, ELEMENT))
        else:
            raise TypeError("not a parse event: %r" % (ev,))
    if stack:
        raise MalformedXml("unclosed element <%s>" % stack[-1][0])
    if not seen_root:
        raise MalformedXml("no root element")
    # text rows are only known at EndElement, after the attribute rows
    values.sort(key=lambda v: v.tag_id)
    return ShredResult(tuple(structure), tuple(values), next_id)

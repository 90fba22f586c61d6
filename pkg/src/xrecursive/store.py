"""Indexed in-memory store for the two tables, with a text persistence format.

File layout (UTF-8, LF line endings)::

    #XRECURSIVE v1
    [tag_structure]
    tagName<TAB>id<TAB>pId
    ...
    [tag_value]
    tagId<TAB>value<TAB>type
    ...

Backslash, tab and newline inside names and values are written as
``\\\\``, ``\\t`` and ``\\n``.

Mutations (insert/drop) need exclusive access; lookups, stats and save are
read-only and may run concurrently between mutations.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Dict, List, Optional

from .errors import (
    CorruptStore,
    DuplicateDocument,
    IdCollision,
    IoFailure,
    UnknownDocument,
)
from .shredder import ATTRIBUTE, ELEMENT, ShredResult, StructRow, ValueRow

HEADER = "#XRECURSIVE v1"
STRUCTURE_MARKER = "[tag_structure]"
VALUE_MARKER = "[tag_value]"

_ESC = {"\\": "\\\\", "\t": "\\t", "\n": "\\n"}
_UNESC = {"\\": "\\", "t": "\t", "n": "\n"}


def escape_field(text: str) -> str:
    if "\\" not in text and "\t" not in text and "\n" not in text:
        return text
    return "".join(_ESC.get(c, c) for c in text)


def unescape_field(text: str) -> str:
    if "\\" not in text:
        return text
    out = []
    it = iter(text)
    for c in it:
        if c != "\\":
            out.append(c)
            continue
        nxt = next(it, None)
        if nxt not in _UNESC:
            raise CorruptStore("bad escape sequence in %r" % text)
        out.append(_UNESC[nxt])
    return "".join(out)


@dataclass(frozen=True)
class StoreStats:
    doc_count: int
    structure_row_count: int
    value_row_count: int
    file_bytes: int


class Store:
    def __init__(self):
        self.rows: Dict[int, StructRow] = {}
        self.children: Dict[int, List[int]] = {}
        self.by_name: Dict[str, List[int]] = {}
        self.values: Dict[int, ValueRow] = {}
        self.docs: Dict[str, int] = {}
        self.next_id = 1

    def __len__(self):
        return len(self.rows)

    def __repr__(self):
        return "<Store docs=%d rows=%d values=%d next_id=%d>" % (
            len(self.docs), len(self.rows), len(self.values), self.next_id)

    # -- mutation ----------------------------------------------------------

    def insert_document(self, shred: ShredResult, doc_name: Optional[str] = None) -> int:
        """Insert one shredded document atomically and return its row id."""
        head = shred.structure[0]
        if doc_name is None:
            doc_name = head.tag_name
        if doc_name in self.docs:
            raise DuplicateDocument("document %r is already stored" % doc_name)
        if head.tag_name != doc_name or head.id != head.pid:
            raise ValueError("shred does not start with a document row for %r" % doc_name)
        if head.id != self.next_id:
            raise IdCollision("shred starts at id %d but the store expects %d" % (head.id, self.next_id))
        # validate everything before touching the indexes
        seen = set()
        for i, row in enumerate(shred.structure):
            if row.id != head.id + i:
                raise IdCollision("shred ids are not contiguous at %d" % row.id)
            if i and row.pid not in seen:
                raise ValueError("row %d refers to unknown parent %d" % (row.id, row.pid))
            seen.add(row.id)
        valued = set()
        for v in shred.values:
            if v.tag_id not in seen or v.tag_id == head.id or v.tag_id in valued:
                raise ValueError("bad value row for id %d" % v.tag_id)
            if v.kind not in (ATTRIBUTE, ELEMENT):
                raise ValueError("bad value kind %r" % (v.kind,))
            valued.add(v.tag_id)

        for row in shred.structure:
            self._index(row)
        for v in shred.values:
            self.values[v.tag_id] = v
        self.docs[doc_name] = head.id
        self.next_id = shred.next_id
        return head.id

    def _index(self, row: StructRow):
        self.rows[row.id] = row
        if row.pid != row.id:
            self.children.setdefault(row.pid, []).append(row.id)
        self.by_name.setdefault(row.tag_name, []).append(row.id)

    def drop_document(self, doc_name: str) -> int:
        """Remove a document and its whole subtree; returns rows removed."""
        if doc_name not in self.docs:
            raise UnknownDocument("no document named %r" % doc_name)
        doomed = self.subtree_ids(self.docs[doc_name])
        dead = set(doomed)
        names = set()
        for node_id in doomed:
            row = self.rows.pop(node_id)
            names.add(row.tag_name)
            self.values.pop(node_id, None)
            self.children.pop(node_id, None)
        for name in names:
            kept = [i for i in self.by_name[name] if i not in dead]
            if kept:
                self.by_name[name] = kept
            else:
                del self.by_name[name]
        del self.docs[doc_name]
        return len(doomed)

    # -- lookup ------------------------------------------------------------

    def row(self, node_id: int) -> Optional[StructRow]:
        return self.rows.get(node_id)

    def child_ids(self, node_id: int) -> List[int]:
        return list(self.children.get(node_id, ()))

    def value(self, node_id: int) -> Optional[ValueRow]:
        return self.values.get(node_id)

    def ids_named(self, tag_name: str) -> List[int]:
        return list(self.by_name.get(tag_name, ()))

    def doc_root(self, doc_name: str) -> Optional[int]:
        return self.docs.get(doc_name)

    def lookup(self, request: str, key):
        """Dispatch by request name: row, children, value, by_name, doc_root."""
        handlers = {
            "row": self.row,
            "children": self.child_ids,
            "value": self.value,
            "by_name": self.ids_named,
            "doc_root": self.doc_root,
        }
        try:
            handler = handlers[request]
        except KeyError:
            raise ValueError("unknown lookup %r" % (request,))
        return handler(key)

    def is_attribute(self, node_id: int) -> bool:
        v = self.values.get(node_id)
        return v is not None and v.kind == ATTRIBUTE

    def is_document(self, node_id: int) -> bool:
        row = self.rows.get(node_id)
        return row is not None and row.id == row.pid

    def document_of(self, node_id: int) -> int:
        """Walk the parent chain up to the owning document row."""
        row = self.rows[node_id]
        while row.pid != row.id:
            row = self.rows[row.pid]
        return row.id

    def subtree_ids(self, node_id: int) -> List[int]:
        out = []
        stack = [node_id]
        while stack:
            i = stack.pop()
            out.append(i)
            stack.extend(self.children.get(i, ()))
        out.sort()
        return out

    # -- consistency -------------------------------------------------------

    def validate(self):
        """Check every table invariant; raises CorruptStore on the first failure."""
        doc_ids = set(self.docs.values())
        for node_id, row in self.rows.items():
            if row.id != node_id:
                raise CorruptStore("row keyed %d carries id %d" % (node_id, row.id))
            if row.pid not in self.rows:
                raise CorruptStore("row %d has dangling parent %d" % (node_id, row.pid))
            if (row.pid == node_id) != (node_id in doc_ids):
                raise CorruptStore("row %d: self-parent iff document row violated" % node_id)
            if row.pid > node_id:
                raise CorruptStore("row %d has a parent with a larger id" % node_id)
            if row.pid != node_id and self.is_attribute(row.pid):
                raise CorruptStore("row %d is a child of attribute %d" % (node_id, row.pid))
            if node_id >= self.next_id:
                raise CorruptStore("row %d is not below next_id %d" % (node_id, self.next_id))
        for name, doc_id in self.docs.items():
            row = self.rows.get(doc_id)
            if row is None or row.tag_name != name:
                raise CorruptStore("document registry entry %r is stale" % name)
        for tag_id, v in self.values.items():
            if v.tag_id != tag_id:
                raise CorruptStore("value keyed %d carries tag_id %d" % (tag_id, v.tag_id))
            if tag_id not in self.rows or tag_id in doc_ids:
                raise CorruptStore("value for unknown node %d" % tag_id)
            if v.kind not in (ATTRIBUTE, ELEMENT):
                raise CorruptStore("invalid value kind %r" % (v.kind,))
        for node_id in self.rows:
            if self.is_attribute(node_id) and node_id in self.children:
                raise CorruptStore("attribute %d has children" % node_id)
        children, by_name = _inverted(self.rows)
        if children != self.children or by_name != self.by_name:
            raise CorruptStore("indexes are out of sync with tag_structure")

    # -- persistence -------------------------------------------------------

    def dumps(self) -> str:
        lines = [HEADER, STRUCTURE_MARKER]
        for node_id in sorted(self.rows):
            row = self.rows[node_id]
            lines.append("%s\t%d\t%d" % (escape_field(row.tag_name), row.id, row.pid))
        lines.append(VALUE_MARKER)
        for tag_id in sorted(self.values):
            v = self.values[tag_id]
            lines.append("%d\t%s\t%s" % (v.tag_id, escape_field(v.value), v.kind))
        lines.append("")
        return "\n".join(lines)

    def save(self, destination) -> int:
        """Write the canonical file; returns the number of bytes written."""
        data = self.dumps().encode("utf-8")
        if hasattr(destination, "write"):
            destination.write(data)
            return len(data)
        tmp = "%s.tmp" % os.fspath(destination)
        try:
            with open(tmp, "wb") as fh:
                fh.write(data)
            os.replace(tmp, destination)
        except OSError as e:
            raise IoFailure("cannot write %s: %s" % (destination, e)) from e
        return len(data)

    @classmethod
    def loads(cls, text: str) -> "Store":
        lines = text.split("\n")
        if not lines or lines[0] != HEADER:
            raise CorruptStore("missing %r header" % HEADER)
        if len(lines) < 2 or lines[1] != STRUCTURE_MARKER:
            raise CorruptStore("missing %s section" % STRUCTURE_MARKER)
        if lines[-1] != "":
            raise CorruptStore("file does not end with a newline")
        store = cls()
        section = STRUCTURE_MARKER
        last_id = 0
        for lineno, line in enumerate(lines[2:-1], start=3):
            if line == VALUE_MARKER and section == STRUCTURE_MARKER:
                section = VALUE_MARKER
                last_id = 0
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise CorruptStore("line %d: expected 3 tab-separated fields" % lineno)
            try:
                if section == STRUCTURE_MARKER:
                    row = StructRow(unescape_field(fields[0]), _parse_id(fields[1]), _parse_id(fields[2]))
                    if row.id <= last_id:
                        raise CorruptStore("line %d: duplicate or unordered id %d" % (lineno, row.id))
                    last_id = row.id
                    store._index(row)
                    if row.id == row.pid:
                        if row.tag_name in store.docs:
                            raise CorruptStore("line %d: duplicate document %r" % (lineno, row.tag_name))
                        store.docs[row.tag_name] = row.id
                else:
                    v = ValueRow(_parse_id(fields[0]), unescape_field(fields[1]), fields[2])
                    if v.tag_id <= last_id:
                        raise CorruptStore("line %d: duplicate or unordered tag_id %d" % (lineno, v.tag_id))
                    last_id = v.tag_id
                    store.values[v.tag_id] = v
            except ValueError as e:
                raise CorruptStore("line %d: %s" % (lineno, e)) from e
        if section != VALUE_MARKER:
            raise CorruptStore("missing %s section" % VALUE_MARKER)
        store.next_id = max(store.rows, default=0) + 1
        store.validate()
        return store

    @classmethod
    def open(cls, source) -> "Store":
        if hasattr(source, "read"):
            data = source.read()
        else:
            try:
                with open(source, "rb") as fh:
                    data = fh.read()
            except OSError as e:
                raise IoFailure("cannot read %s: %s" % (source, e)) from e
        if isinstance(data, bytes):
            try:
                data = data.decode("utf-8")
            except UnicodeDecodeError as e:
                raise CorruptStore("store file is not UTF-8") from e
        return cls.loads(data)

    def export_sql(self) -> str:
        """SQL script recreating both tables, one INSERT per row in id order."""
        out = [
            "CREATE TABLE tag_structure(tagName VARCHAR, id INTEGER PRIMARY KEY, pId INTEGER);",
            "CREATE TABLE tag_value(tagId INTEGER, value VARCHAR, type CHAR(1));",
        ]
        for node_id in sorted(self.rows):
            row = self.rows[node_id]
            out.append("INSERT INTO tag_structure VALUES (%s, %d, %d);" % (sql_quote(row.tag_name), row.id, row.pid))
        for tag_id in sorted(self.values):
            v = self.values[tag_id]
            out.append("INSERT INTO tag_value VALUES (%d, %s, %s);" % (v.tag_id, sql_quote(v.value), sql_quote(v.kind)))
        return "\n".join(out) + "\n"

    def stats(self) -> StoreStats:
        return StoreStats(
            doc_count=len(self.docs),
            structure_row_count=len(self.rows),
            value_row_count=len(self.values),
            file_bytes=len(self.dumps().encode("utf-8")),
        )


def sql_quote(text: str) -> str:
    # newlines are kept literally inside the string; SQL allows that
    return "'" + text.replace("'", "''") + "'"


def _parse_id(field: str) -> int:
    if not field.isdigit() or not field.isascii():
        raise ValueError("bad id %r" % field)
    n = int(field)
    if n < 1:
        raise ValueError("ids must be positive")
    return n


def _inverted(rows: Dict[int, StructRow]):
    children: Dict[int, List[int]] = {}
    by_name: Dict[str, List[int]] = {}
    for node_id in sorted(rows):
        row = rows[node_id]
        if row.pid != node_id:
            children.setdefault(row.pid, []).append(node_id)
        by_name.setdefault(row.tag_name, []).append(node_id)
    return children, by_name


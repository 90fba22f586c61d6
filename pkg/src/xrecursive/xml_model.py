"""In-memory XML documents, a pull-based event reader and a canonical writer.

Only the subset of XML that the two-table storage can represent is accepted:
elements, attributes, and element text without interleaved children.
Comments, processing instructions and the XML declaration are skipped;
a DOCTYPE is refused.

>>> tree = parse_tree('<a b="c">t</a>')
>>> tree.root.name, tree.root.attributes, tree.root.text
('a', (('b', 'c'),), 't')
>>> serialize(tree)
'<a b="c">t</a>'
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Optional, TextIO, Tuple, Union

from .errors import MalformedXml, MixedContent, UnsupportedConstruct

XML_WHITESPACE = " \t\r\n"

_NAME_RE = re.compile(r"""[^\s<>&/='"]+""")
_ATTR_RE = re.compile(r"""\s+([^\s<>&/='"]+)\s*=\s*(?:"([^"]*)"|'([^']*)')""")
_TAG_TAIL_RE = re.compile(r"\s*(/?)\s*$")
_REF_RE = re.compile(r"&(#x[0-9A-Fa-f]+|#[0-9]+|[A-Za-z][A-Za-z0-9]*);")

_PREDEFINED = {"lt": "<", "gt": ">", "amp": "&", "quot": '"', "apos": "'"}
_ESCAPES = {"&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;", "'": "&apos;",
            "\r": "&#13;", "\t": "&#9;", "\n": "&#10;"}
_TEXT_ESCAPE_RE = re.compile(r"""[&<>"'\r]""")
# literal whitespace in attribute values is normalized by readers, so keep it as references
_ATTR_ESCAPE_RE = re.compile(r"""[&<>"'\r\t\n]""")
_ATTR_WS_RE = re.compile(r"\r\n|[\r\n\t]")

Attributes = Tuple[Tuple[str, str], ...]
Source = Union[str, TextIO, Iterable[str]]


def is_valid_name(name: str) -> bool:
    return bool(name) and _NAME_RE.fullmatch(name) is not None


def trim(text: str) -> str:
    return text.strip(XML_WHITESPACE)


@dataclass(frozen=True)
class XmlNode:
    name: str
    attributes: Attributes = ()
    text: Optional[str] = None
    children: Tuple["XmlNode", ...] = ()

    def __post_init__(self):
        if not is_valid_name(self.name):
            raise ValueError("invalid element name %r" % (self.name,))
        seen = set()
        for attr_name, attr_value in self.attributes:
            if not is_valid_name(attr_name):
                raise ValueError("invalid attribute name %r" % (attr_name,))
            if attr_name in seen:
                raise ValueError("duplicate attribute %r on <%s>" % (attr_name, self.name))
            if not isinstance(attr_value, str):
                raise TypeError("attribute values must be str")
            seen.add(attr_name)
        if self.text is not None:
            if not trim(self.text):
                raise ValueError("text must be absent or non-blank")
            if self.children:
                raise ValueError("<%s> mixes text and element children" % self.name)

    def iter(self) -> Iterator["XmlNode"]:
        """Pre-order walk over this node and its element descendants."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


@dataclass(frozen=True)
class XmlTree:
    root: XmlNode

    def iter(self) -> Iterator[XmlNode]:
        return self.root.iter()


class StartElement(NamedTuple):
    name: str
    attributes: Attributes = ()


class Text(NamedTuple):
    content: str


class EndElement(NamedTuple):
    name: str


ParseEvent = Union[StartElement, Text, EndElement]


# -- reading ---------------------------------------------------------------

class _Reader:
    """Forward-only character buffer over a chunked source.

    Consumed text is dropped at every token boundary, so the buffer never
    holds more than the token currently being read plus one chunk.
    """

    def __init__(self, source: Source, chunk_size: int = 1 << 16):
        if isinstance(source, str):
            self._chunks = iter((source,))
        elif hasattr(source, "read"):
            self._chunks = iter(lambda: source.read(chunk_size), "")
        else:
            self._chunks = iter(source)
        self.buf = ""
        self.pos = 0
        self.base = 0
        self.eof = False

    @property
    def offset(self) -> int:
        return self.base + self.pos

    def mark(self):
        if self.pos:
            self.base += self.pos
            self.buf = self.buf[self.pos:]
            self.pos = 0

    def more(self) -> bool:
        while not self.eof:
            try:
                chunk = next(self._chunks)
            except StopIteration:
                self.eof = True
                return False
            if chunk:
                self.buf += chunk
                return True
        return False

    def at_end(self) -> bool:
        return self.pos >= len(self.buf) and not self.more()

    def startswith(self, prefix: str) -> bool:
        while len(self.buf) - self.pos < len(prefix):
            if not self.more():
                break
        return self.buf.startswith(prefix, self.pos)

    def find(self, needle: str) -> int:
        start = self.pos
        while True:
            i = self.buf.find(needle, start)
            if i >= 0:
                return i
            start = max(self.pos, len(self.buf) - len(needle) + 1)
            if not self.more():
                return -1

    def find_tag_end(self) -> int:
        # '>' may legally appear inside a quoted attribute value
        i = self.pos
        quote = None
        while True:
            if i >= len(self.buf):
                if not self.more():
                    return -1
                continue
            c = self.buf[i]
            if quote:
                if c == quote:
                    quote = None
            elif c in "\"'":
                quote = c
            elif c == ">":
                return i
            i += 1


def normalize_newlines(text: str) -> str:
    if "\r" not in text:
        return text
    return text.replace("\r\n", "\n").replace("\r", "\n")


def decode_entities(raw: str, offset: int = 0) -> str:
    if "&" not in raw:
        return raw
    out = []
    last = 0
    for m in _REF_RE.finditer(raw):
        if "&" in raw[last:m.start()]:
            raise MalformedXml("bare '&' in character data", offset + raw.index("&", last))
        out.append(raw[last:m.start()])
        ref = m.group(1)
        if ref[0] == "#":
            try:
                out.append(chr(int(ref[2:], 16) if ref[1] == "x" else int(ref[1:])))
            except (ValueError, OverflowError):
                raise MalformedXml("bad character reference &%s;" % ref, offset + m.start())
        elif ref in _PREDEFINED:
            out.append(_PREDEFINED[ref])
        else:
            raise MalformedXml("undefined entity &%s;" % ref, offset + m.start())
        last = m.end()
    if "&" in raw[last:]:
        raise MalformedXml("bare '&' in character data", offset + raw.index("&", last))
    out.append(raw[last:])
    return "".join(out)


def _parse_tag(body: str, offset: int) -> Tuple[str, Attributes, bool]:
    m = _NAME_RE.match(body)
    if m is None:
        raise MalformedXml("expected element name", offset)
    name = m.group(0)
    pos = m.end()
    attrs = []
    seen = set()
    while True:
        am = _ATTR_RE.match(body, pos)
        if am is None:
            break
        attr_name = am.group(1)
        raw = am.group(2) if am.group(2) is not None else am.group(3)
        if "<" in raw:
            raise MalformedXml("'<' in attribute value", offset + am.start())
        if attr_name in seen:
            raise MalformedXml("duplicate attribute %r" % attr_name, offset + am.start())
        seen.add(attr_name)
        raw = _ATTR_WS_RE.sub(" ", raw)
        attrs.append((attr_name, decode_entities(raw, offset + am.start())))
        pos = am.end()
    tail = _TAG_TAIL_RE.match(body, pos)
    if tail is None:
        raise MalformedXml("bad attribute syntax in <%s>" % name, offset + pos)
    return name, tuple(attrs), tail.group(1) == "/"


def _tokens(reader: _Reader):
    """Yield ('start', name, attrs, empty) / ('end', name) / ('chars', text)."""
    while True:
        reader.mark()
        if reader.at_end():
            return
        if not reader.startswith("<"):
            i = reader.find("<")
            end = len(reader.buf) if i < 0 else i
            raw = normalize_newlines(reader.buf[reader.pos:end])
            yield ("chars", decode_entities(raw, reader.offset))
            reader.pos = end
            continue
        start = reader.offset
        if reader.startswith("<!--"):
            i = reader.find("-->")
            if i < 0:
                raise MalformedXml("unterminated comment", start)
            reader.pos = i + 3
        elif reader.startswith("<![CDATA["):
            i = reader.find("]]>")
            if i < 0:
                raise MalformedXml("unterminated CDATA section", start)
            yield ("chars", normalize_newlines(reader.buf[reader.pos + 9:i]))
            reader.pos = i + 3
        elif reader.startswith("<!DOCTYPE"):
            raise UnsupportedConstruct("DOCTYPE declarations are not supported")
        elif reader.startswith("<!"):
            raise MalformedXml("unsupported markup declaration", start)
        elif reader.startswith("<?"):
            i = reader.find("?>")
            if i < 0:
                raise MalformedXml("unterminated processing instruction", start)
            reader.pos = i + 2
        else:
            i = reader.find_tag_end()
            if i < 0:
                raise MalformedXml("unterminated tag", start)
            body = reader.buf[reader.pos + 1:i]
            reader.pos = i + 1
            if body.startswith("/"):
                name = body[1:].rstrip(XML_WHITESPACE)
                if not is_valid_name(name):
                    raise MalformedXml("bad end tag </%s>" % body[1:], start)
                yield ("end", name)
            else:
                yield ("start",) + _parse_tag(body, start + 1)


def parse_events(source: Source) -> Iterator[ParseEvent]:
    """Stream the document as events in a single forward pass.

    `source` may be a string, a text file object, or any iterable of string
    chunks. Character data between two tags is coalesced into at most one
    Text event; whitespace-only runs are dropped. Mixed content is passed
    through for the consumer to reject.
    """
    reader = _Reader(source)
    stack = []
    seen_root = False
    pending = []

    def flush():
        data = "".join(pending)
        pending.clear()
        if trim(data):
            if not stack:
                raise MalformedXml("text outside the root element", reader.offset)
            return Text(data)
        return None

    for tok in _tokens(reader):
        kind = tok[0]
        if kind == "chars":
            pending.append(tok[1])
            continue
        text = flush()
        if text is not None:
            yield text
        if kind == "start":
            _, name, attrs, empty = tok
            if not stack:
                if seen_root:
                    raise MalformedXml("multiple root elements", reader.offset)
                seen_root = True
            yield StartElement(name, attrs)
            if empty:
                yield EndElement(name)
            else:
                stack.append(name)
        else:
            name = tok[1]
            if not stack:
                raise MalformedXml("unexpected end tag </%s>" % name, reader.offset)
            if stack[-1] != name:
                raise MalformedXml("end tag </%s> does not match <%s>" % (name, stack[-1]), reader.offset)
            stack.pop()
            yield EndElement(name)
    flush()
    if stack:
        raise MalformedXml("unclosed element <%s>" % stack[-1], reader.offset)
    if not seen_root:
        raise MalformedXml("no root element", reader.offset)


def build_tree(events: Iterable[ParseEvent]) -> XmlTree:
    """Fold an event sequence into an XmlTree."""
    # each frame: [name, attrs, text pieces, children]
    stack = []
    root = None
    for ev in events:
        if isinstance(ev, StartElement):
            if stack and stack[-1][2]:
                raise MixedContent("<%s> has both text and element children" % stack[-1][0])
            stack.append([ev.name, tuple(ev.attributes), [], []])
        elif isinstance(ev, Text):
            if not stack:
                raise MalformedXml("text outside the root element")
            if stack[-1][3]:
                raise MixedContent("<%s> has both text and element children" % stack[-1][0])
            stack[-1][2].append(ev.content)
        else:
            if not stack or stack[-1][0] != ev.name:
                raise MalformedXml("unbalanced end event for %r" % (ev.name,))
            name, attrs, pieces, children = stack.pop()
            text = trim("".join(pieces)) or None
            node = XmlNode(name, attrs, text, tuple(children))
            if stack:
                stack[-1][3].append(node)
            elif root is None:
                root = node
            else:
                raise MalformedXml("multiple root elements")
    if stack:
        raise MalformedXml("unclosed element <%s>" % stack[-1][0])
    if root is None:
        raise MalformedXml("no root element")
    return XmlTree(root)


def parse_tree(source: Source) -> XmlTree:
    """Parse a whole document into memory."""
    return build_tree(parse_events(source))


# -- writing ---------------------------------------------------------------

def escape(text: str) -> str:
    return _TEXT_ESCAPE_RE.sub(lambda m: _ESCAPES[m.group(0)], text)


def escape_attribute(text: str) -> str:
    return _ATTR_ESCAPE_RE.sub(lambda m: _ESCAPES[m.group(0)], text)


def serialize(tree: Union[XmlTree, XmlNode]) -> str:
    """Write a tree as compact XML text (no declaration, no indentation)."""
    root = tree.root if isinstance(tree, XmlTree) else tree
    out = []
    # stack items are nodes to open, or strings to emit verbatim
    stack = [root]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        out.append("<" + item.name)
        for attr_name, attr_value in item.attributes:
            out.append(' %s="%s"' % (attr_name, escape_attribute(attr_value)))
        if item.text is not None:
            out.append(">%s</%s>" % (escape(trim(item.text)), item.name))
        elif item.children:
            out.append(">")
            stack.append("</%s>" % item.name)
            stack.extend(reversed(item.children))
        else:
            out.append("/>")
    return "".join(out)


def trees_equal(a: Union[XmlTree, XmlNode], b: Union[XmlTree, XmlNode]) -> bool:
    """Structural equality: names, trimmed text, ordered attributes and children."""
    a = a.root if isinstance(a, XmlTree) else a
    b = b.root if isinstance(b, XmlTree) else b
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x.name != y.name or tuple(x.attributes) != tuple(y.attributes):
            return False
        if trim(x.text or "") != trim(y.text or ""):
            return False
        if len(x.children) != len(y.children):
            return False
        stack.extend(zip(x.children, y.children))
    return True

"""Seeded random documents and queries, plus a top-down reference evaluator.

The reference evaluator labels nodes with its own pre-order counter and
walks the in-memory tree from the document downwards, so it shares no code
with the store's bottom-up evaluation.
"""
import random

from xrecursive.query import Axis
from xrecursive.xml_model import XmlNode, XmlTree

ELEMENT_NAMES = ["a", "b", "c", "item", "x-y", "n.1", "ns:tag", "Employee", "type"]
ATTR_NAMES = ["id", "type", "x", "lang", "b", "k.v"]
TEXT_POOL = ["t", "1", "Robin", "O'Brien", 'say "hi"', "a&b", "<tag>", "tab\there",
             "line\nbreak", "back\\slash", "ünïcødé", "x y z", "42", "]]>"]
ATTR_POOL = TEXT_POOL + ["", " padded ", "1"]

MAX_DEPTH = 6
MAX_NODES = 200


def random_tree(rng, max_depth=MAX_DEPTH, max_nodes=MAX_NODES):
    """Random mixed-content-free tree with at most max_nodes elements+attributes."""
    budget = [rng.randint(1, max_nodes)]

    def make(depth):
        budget[0] -= 1
        name = rng.choice(ELEMENT_NAMES)
        attrs = []
        for attr in rng.sample(ATTR_NAMES, rng.choice([0, 0, 0, 1, 1, 2, 3])):
            if budget[0] <= 0:
                break
            budget[0] -= 1
            attrs.append((attr, rng.choice(ATTR_POOL)))
        children = []
        if depth < max_depth and budget[0] > 0 and rng.random() < 0.65:
            for _ in range(rng.randint(1, 5)):
                if budget[0] <= 0:
                    break
                children.append(make(depth + 1))
        text = None
        if not children and rng.random() < 0.6:
            text = rng.choice(TEXT_POOL)
        return XmlNode(name, tuple(attrs), text, tuple(children))

    return XmlTree(make(1))


def random_corpus(seed, n):
    rng = random.Random(seed)
    return [random_tree(rng) for _ in range(n)]


# -- reference labeling and evaluation --------------------------------------

class RefNode:
    __slots__ = ("id", "name", "kind", "value", "kids")

    def __init__(self, node_id, name, kind, value=None):
        self.id = node_id
        self.name = name
        self.kind = kind          # "doc", "elem" or "attr"
        self.value = value
        self.kids = []            # attributes first, then elements

    def descendants(self):
        out = []
        stack = list(reversed(self.kids))
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(reversed(n.kids))
        return out


def label(tree, doc_name, start_id):
    """Pre-order labeling; returns (document RefNode, next id)."""
    counter = [start_id]

    def take():
        i = counter[0]
        counter[0] += 1
        return i

    doc = RefNode(take(), doc_name, "doc")

    def visit(node, parent):
        ref = RefNode(take(), node.name, "elem", node.text)
        parent.kids.append(ref)
        for attr_name, attr_value in node.attributes:
            ref.kids.append(RefNode(take(), attr_name, "attr", attr_value))
        for child in node.children:
            visit(child, ref)

    visit(tree.root, doc)
    return doc, counter[0]


def _test(node, step):
    if node.name != step.name:
        return False
    if node.kind != ("attr" if step.attribute else "elem"):
        return False
    pred = step.predicate
    if pred is None:
        return True
    want = "attr" if pred.attribute else "elem"
    return any(k.name == pred.name and k.kind == want and k.value == pred.value for k in node.kids)


def reference_evaluate(docs, query):
    """docs: list of (doc_name, RefNode). Returns sorted [(id, value)]."""
    context = [d for name, d in docs if query.doc_scope is None or name == query.doc_scope]
    for step in query.steps:
        found = {}
        for ctx in context:
            pool = ctx.kids if step.axis is Axis.CHILD else ctx.descendants()
            for n in pool:
                if _test(n, step):
                    found[n.id] = n
        context = list(found.values())
    return sorted((n.id, n.value) for n in context)


# -- random queries ----------------------------------------------------------

def _quote(value):
    return "'" + value.replace("'", "''") + "'"


def random_query(rng, tree):
    """Random expression string from the query grammar, biased toward hits."""
    elems = list(tree.iter())
    names = sorted({n.name for n in elems}) + ["zzz"]
    attr_names = sorted({a for n in elems for a, _ in n.attributes}) + ["nope"]
    child_pairs = [(c.name, c.text) for n in elems for c in n.children if c.text is not None]
    attr_pairs = [(a, v) for n in elems for a, v in n.attributes]

    # half the time follow a real root-to-node path so deep queries can hit
    path_names = []
    if rng.random() < 0.5:
        node = tree.root
        path_names.append(node.name)
        while node.children and rng.random() < 0.7:
            node = rng.choice(node.children)
            path_names.append(node.name)
    else:
        path_names = [rng.choice(names) for _ in range(rng.randint(1, 4))]

    out = []
    for name in path_names:
        axis = "//" if rng.random() < 0.4 else "/"
        if rng.random() < 0.25 and rng.random() < 0.5:
            name = rng.choice(names)
        step = axis + name
        r = rng.random()
        if r < 0.15 and child_pairs:
            n, v = rng.choice(child_pairs)
            step += "[%s=%s]" % (n, _quote(v))
        elif r < 0.25 and attr_pairs:
            n, v = rng.choice(attr_pairs)
            step += "[@%s=%s]" % (n, _quote(v))
        elif r < 0.28:
            step += "[%s=%s]" % (rng.choice(names), _quote(rng.choice(TEXT_POOL)))
        out.append(step)
    if rng.random() < 0.3:
        out.append(("//" if rng.random() < 0.5 else "/") + "@" + rng.choice(attr_names))
    return "".join(out)


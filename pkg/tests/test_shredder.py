import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xrecursive.errors import MixedContent
from xrecursive.shredder import ShredResult, StructRow, ValueRow, shred_stream, shred_tree
from xrecursive.xml_model import EndElement, StartElement, Text, XmlNode, XmlTree, parse_events, parse_tree, serialize

from docgen import random_tree
from printed_tables import CORRECTIONS, TABLE_1, TABLE_2, corrected


def test_sample_matches_printed_labeling(sample_text):
    result = shred_tree(parse_tree(sample_text), "Personal.xml", 1)
    assert [tuple(r) for r in result.structure] == corrected(TABLE_1, CORRECTIONS)
    assert [tuple(v) for v in result.values] == corrected(TABLE_2, CORRECTIONS)
    assert result.next_id == 18


def test_sample_ids_and_kinds_as_printed(sample_text):
    result = shred_tree(parse_tree(sample_text), "Personal.xml", 1)
    assert [(r.id, r.pid) for r in result.structure] == [(i, p) for _, i, p in TABLE_1]
    assert [(v.tag_id, v.kind) for v in result.values] == [(t, k) for t, _, k in TABLE_2]


def test_empty_element():
    result = shred_tree(parse_tree("<a/>"), "d.xml", 1)
    assert result.structure == (StructRow("d.xml", 1, 1), StructRow("a", 2, 1))
    assert result.values == ()
    assert result.next_id == 3


def test_attribute_then_child_trace():
    # hand trace: d=1 (self), a=2 (pid 1), x=3 (attr of a), b=4 (child of a)
    result = shred_tree(parse_tree('<a x="1"><b>t</b></a>'), "d", 1)
    assert [tuple(r) for r in result.structure] == [("d", 1, 1), ("a", 2, 1), ("x", 3, 2), ("b", 4, 2)]
    assert [tuple(v) for v in result.values] == [(3, "1", "A"), (4, "t", "E")]


def test_text_and_attribute_on_same_element_sorted_by_id():
    result = shred_tree(parse_tree('<a x="1" y="2">t</a>'), "d", 1)
    assert [tuple(v) for v in result.values] == [(2, "t", "E"), (3, "1", "A"), (4, "2", "A")]
    assert shred_stream(parse_events('<a x="1" y="2">t</a>'), "d", 1) == result


def test_start_id_offsets_everything():
    a = shred_tree(parse_tree('<a x="1"><b>t</b></a>'), "d", 1)
    b = shred_tree(parse_tree('<a x="1"><b>t</b></a>'), "d", 18)
    assert b.structure[0] == StructRow("d", 18, 18)
    assert [(r.id - 17, r.pid - 17) for r in b.structure] == [(r.id, r.pid) for r in a.structure]
    assert b.next_id == 22


def test_stream_equals_tree_on_sample(sample_text):
    assert shred_stream(parse_events(sample_text), "Personal.xml", 1) == \
        shred_tree(parse_tree(sample_text), "Personal.xml", 1)


def test_stream_empty_element():
    assert shred_stream(parse_events("<a/>"), "d.xml", 1) == shred_tree(parse_tree("<a/>"), "d.xml", 1)


@pytest.mark.parametrize("events", [
    [StartElement("a"), Text("x"), StartElement("b"), EndElement("b"), EndElement("a")],
    [StartElement("a"), StartElement("b"), EndElement("b"), Text("x"), EndElement("a")],
])
def test_stream_mixed_content(events):
    with pytest.raises(MixedContent):
        shred_stream(events, "d", 1)


def test_stream_ignores_blank_text_events():
    events = [StartElement("a"), Text("  "), StartElement("b"), EndElement("b"), Text("\n"), EndElement("a")]
    assert shred_stream(events, "d", 1) == shred_tree(parse_tree("<a><b/></a>"), "d", 1)


@pytest.mark.parametrize("bad", [{"doc_name": ""}, {"start_id": 0}])
def test_bad_arguments(bad):
    kwargs = {"doc_name": "d", "start_id": 1, **bad}
    with pytest.raises(ValueError):
        shred_tree(parse_tree("<a/>"), **kwargs)


def _counts(tree):
    elements = attrs = texts = 0
    for n in tree.iter():
        elements += 1
        attrs += len(n.attributes)
        texts += n.text is not None
    return elements, attrs, texts


def _check_result(tree, result: ShredResult, start):
    elements, attrs, texts = _counts(tree)
    assert len(result.structure) == 1 + elements + attrs
    assert len(result.values) == attrs + texts
    assert [r.id for r in result.structure] == list(range(start, result.next_id))
    seen = set()
    for i, r in enumerate(result.structure):
        if i == 0:
            assert r.pid == r.id
        else:
            assert r.pid in seen and r.pid < r.id
        seen.add(r.id)
    tag_ids = [v.tag_id for v in result.values]
    assert tag_ids == sorted(set(tag_ids))
    assert set(tag_ids) <= seen - {start}


def test_random_trees_row_counts_and_equivalence():
    rng = random.Random(3)
    for _ in range(200):
        tree = random_tree(rng)
        start = rng.randint(1, 1000)
        result = shred_tree(tree, "doc", start)
        _check_result(tree, result, start)
        assert shred_stream(parse_events(serialize(tree)), "doc", start) == result
        assert shred_tree(tree, "doc", start) == result


names = st.sampled_from(["a", "b", "c"])


@st.composite
def trees(draw, depth=0):
    attrs = tuple(draw(st.dictionaries(st.sampled_from(["x", "y"]), st.text(max_size=3), max_size=2)).items())
    if depth < 4 and draw(st.booleans()):
        kids = tuple(draw(st.lists(trees(depth + 1), min_size=1, max_size=3)))
        return XmlNode(draw(names), attrs, None, kids)
    text = draw(st.none() | st.sampled_from(["v", "w w", "1"]))
    return XmlNode(draw(names), attrs, text)


@settings(max_examples=150, deadline=None)
@given(trees(), st.integers(min_value=1, max_value=10 ** 6))
def test_shred_properties(root, start):
    tree = XmlTree(root)
    result = shred_tree(tree, "doc", start)
    _check_result(tree, result, start)
    # document order: each element's children, read by ascending id, are its original children
    kids = {}
    for r in result.structure[1:]:
        kids.setdefault(r.pid, []).append(r)
    by_id = {r.id: r for r in result.structure}
    attr_ids = {v.tag_id for v in result.values if v.kind == "A"}

    def check(node, node_id):
        ordered = sorted(kids.get(node_id, []), key=lambda r: r.id)
        attrs = [r for r in ordered if r.id in attr_ids]
        elems = [r for r in ordered if r.id not in attr_ids]
        assert [r.tag_name for r in attrs] == [a for a, _ in node.attributes]
        assert [r.tag_name for r in elems] == [c.name for c in node.children]
        for child, row in zip(node.children, elems):
            check(child, row.id)

    check(root, by_id[start + 1].id)


def test_value_rows_hold_values():
    result = shred_tree(parse_tree('<a x="&lt;1&gt;"><b> t </b></a>'), "d", 5)
    assert result.values == (ValueRow(7, "<1>", "A"), ValueRow(8, "t", "E"))

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from attractor_control.errors import ParseError
from attractor_control.formats import (
    parse_boolean_rules,
    parse_network,
    parse_network_document,
    parse_tss,
    serialize_network,
    serialize_tss,
    to_json,
)
from attractor_control.genlab import random_network, random_threshold_ruleset_network
from attractor_control.network import Attractor, RegulatoryNetwork, Threshold, TruthTable
from attractor_control.reduction import build_augmented
from attractor_control.tss import Auxiliary, Original, TssInstance
from attractor_control.verify import verify_exhaustive

NET_A = """\
node x1 = COPY(x1)
node x2 = COPY(x2)
node x3 = OR(x1, x2)
attractor 111
"""


def test_parse_net_a(net_a):
    doc = parse_network_document(NET_A)
    assert doc.net.n == 3
    assert doc.net.rules == net_a.rules
    assert doc.attractor == Attractor([(1, 1, 1)])


def test_threshold_line():
    net = parse_network("node x1 = THRESH(+x2, -x3; tau=1)\nnode x2 = CONST(1)\nnode x3 = CONST(0)\n")
    assert net.rules[0] == Threshold((1, 2), (1, -1), 1)


def test_other_rule_forms():
    text = """\
node a = NCF(b=1->0, a=0->1; default=0)
node b = RULESET(COPY(a) | CONST(1))
node c = TABLE(a, b; 0110) inputs(a, b, c)
node d = THRESH(+2.5*a, -b; tau=-0.5)
node e = AND(a, b)
node f = NOT(e)
"""
    net = parse_network(text)
    assert net.in_neighbors[2] == (0, 1, 2)
    assert net.rules[3].weights == (2.5, -1)
    assert parse_network(serialize_network(net)) == net


def test_arity_error_names_line():
    with pytest.raises(ParseError) as err:
        parse_network("node x1 = COPY(x1)\nnode x2 = NOT(x1, x2)\n")
    assert err.value.line == 2
    assert "line 2" in str(err.value)


def test_unknown_name_and_duplicate():
    with pytest.raises(ParseError):
        parse_network("node x1 = COPY(y)\n")
    with pytest.raises(ParseError):
        parse_network("node x1 = CONST(1)\nnode x1 = CONST(0)\n")
    with pytest.raises(ParseError):
        parse_network("node x1 = CONST(1)\nattractor 10\n")


def test_boolean_rule_shim():
    net = parse_boolean_rules("a = b and not c\nb = a | (c & 1)\n")
    assert net.names == ("a", "b", "c")
    assert net.rules[2] == TruthTable((2,), (0, 1))
    assert net.rules[0].evaluate((0, 1, 0)) == 1


def test_tss_examples():
    path = TssInstance.from_edges(3, [(0, 1), (1, 2)], (1, 1, 1))
    text = serialize_tss(path)
    assert serialize_tss(parse_tss(text)) == text
    multi = TssInstance.from_edges(2, [(0, 1), (0, 1)], (0, 2), (Original(0), Auxiliary(0, 3, 1)))
    text = serialize_tss(multi)
    assert "edge 0 1 x2" in text
    back = parse_tss(text)
    assert back == multi
    assert back.provenance[1] == Auxiliary(0, 3, 1)


def test_tss_errors():
    with pytest.raises(ParseError):
        parse_tss("nodes 2\n")
    with pytest.raises(ParseError):
        parse_tss("tss 2\nnode 0 tau=1 orig 0\n")
    with pytest.raises(ParseError):
        parse_tss("tss 1\nnode 0 tau=1 orig 0\nedge 0 3\n")


def test_report_json(net_a):
    text = to_json(verify_exhaustive(net_a, (1, 1, 1), {0: 1, 1: 1}))
    assert '"converged": 2' in text


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 9),
       st.sampled_from(("truth_table", "threshold", "nested_canalyzing", "ruleset")))
def test_network_round_trip(seed, n, kind):
    rng = np.random.default_rng(seed)
    if kind == "ruleset":
        net, _ = random_threshold_ruleset_network(rng, n)
    else:
        net = random_network(rng, n, kind)
    text = serialize_network(net)
    assert parse_network(text) == net
    assert serialize_network(parse_network(text)) == text


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 7))
def test_tss_round_trip(seed, n):
    rng = np.random.default_rng(seed)
    x = tuple(int(b) for b in rng.integers(0, 2, n))
    inst = build_augmented(random_network(rng, n, "truth_table", x_star=x), x)
    text = serialize_tss(inst)
    assert parse_tss(text) == inst
    assert serialize_tss(parse_tss(text)) == text

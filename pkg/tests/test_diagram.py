import random

import pytest
from hypothesis import given, settings, strategies as st

from maskprop import diagram as D
from maskprop import spectral as S
from maskprop.diagram import Gen, Generator as G, Graph, Id, Par, Seq, Swap, par, seq
from maskprop.fuzz import random_graph, random_term

from conftest import M

ENCODER = [[1, 0, 0, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0, 0, 0],
           [0, 0, 1, 0, 0, 0, 0, 0], [0, 0, 0, 1, 0, 0, 0, 0],
           [0, 0, 0, 0, 0, 0, 0, 1], [0, 0, 0, 0, 0, 0, 1, 0],
           [0, 0, 0, 0, 0, 1, 0, 0], [0, 0, 0, 0, 1, 0, 0, 0]]

I1 = Id(1)


def encoder_term():
    return seq(par(I1, Gen(G.DUP), I1), par(Gen(G.XOR), I1, Gen(G.DUP)),
               par(I1, Swap(), I1), par(Gen(G.XOR), Id(2)))


def test_generator_table():
    assert D.generator_matrix(G.XOR) == M([[1, 0, 0, 0], [0, 0, 0, 1]])
    assert D.generator_matrix(G.AND) == M([[1, 0, 0, 0], ["1/2", "1/2", "1/2", "-1/2"]])
    assert D.generator_matrix(G.FALSE) == M([[1], [1]])
    assert D.generator_matrix(G.TRUE) == M([[1], [-1]])
    assert D.generator_matrix(G.DUP) == M([[1, 0], [0, 1], [0, 1], [1, 0]])
    assert D.generator_matrix(G.ERASE) == M([[1, 0]])
    assert D.generator_matrix(G.RANDOM) == M([[1], [0]])


def test_generators_match_their_boolean_functions():
    tables = {G.XOR: ([0, 1, 1, 0], 2, 1), G.AND: ([0, 0, 0, 1], 2, 1),
              G.FALSE: ([0], 0, 1), G.TRUE: ([1], 0, 1), G.DUP: ([0, 3], 1, 2),
              G.ERASE: ([0, 0], 1, 0)}
    for g, (t, n, m) in tables.items():
        assert D.generator_matrix(g) == S.walsh_from_truth_table(t, n, m)


def test_encoder_term_evaluates_to_permutation():
    t = encoder_term()
    assert t.interface == (3, 3)
    assert D.term_matrix(t) == M(ENCODER)
    g = D.graph_from_term(t)
    assert g.count(G.XOR) == 2 and g.count(G.DUP) == 2
    assert D.eval(g) == M(ENCODER)


def test_term_type_error_names_subterm():
    bad = Seq(Gen(G.XOR), Gen(G.XOR))
    with pytest.raises(D.TermTypeError) as exc:
        D.term_interface(bad)
    assert exc.value.subterm == bad


def test_seq_par_helpers():
    assert par(Id(1), Id(0), Id(2)) == Id(3)
    assert seq(Id(2), Gen(G.XOR), Id(1)) == Gen(G.XOR)
    assert par() == Id(0)


def test_swap_matrix():
    assert D.term_matrix(Swap()) == S.walsh_from_truth_table([0, 2, 1, 3], 2, 2)


def test_cut_rule_and_counterexamples():
    xor_cut = Seq(Par(Gen(G.RANDOM), I1), Gen(G.XOR))
    assert D.term_matrix(xor_cut) == M([[1, 0], [0, 0]])
    and_cut = Seq(Par(Gen(G.RANDOM), I1), Gen(G.AND))
    assert D.term_matrix(and_cut) == M([[1, 0], ["1/2", "1/2"]])
    assert D.term_matrix(and_cut) != M([[1, 0], [0, 0]])
    dup_rand = Seq(Gen(G.RANDOM), Gen(G.DUP))
    assert D.term_matrix(dup_rand) == M([[1], [0], [0], [1]])
    assert D.term_matrix(dup_rand) != D.term_matrix(Par(Gen(G.RANDOM), Gen(G.RANDOM)))


# --- graphs --------------------------------------------------------------------

def test_validate_reports_linearity_and_boundary():
    g = Graph()
    i = g.add_input()
    x = g.add_node(G.XOR)
    g.connect(i, 0, x, 0)
    msgs = D.validate(g)
    assert any("in-port 1" in m for m in msgs)
    assert any("out-port 0" in m for m in msgs)
    with pytest.raises(D.GraphError):
        D.eval(g)


def test_validate_reports_cycle():
    g = Graph()
    i, o = g.add_input(), g.add_output()
    x = g.add_node(G.XOR)
    d = g.add_node(G.DUP)
    g.connect(i, 0, x, 0)
    g.connect(x, 0, d, 0)
    g.connect(d, 0, x, 1)
    g.connect(d, 1, o, 0)
    assert any("cycle" in m for m in D.validate(g))


def test_empty_graph_is_scalar_one():
    assert D.eval(Graph()) == M([[1]])


def test_graph_copy_is_independent():
    g = D.graph_from_term(encoder_term())
    h = g.copy()
    h.remove_node(h.generator_nodes()[0])
    assert not g.same_structure(h)
    assert D.validate(g) == []


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_eval_agrees_with_term_semantics(seed):
    rng = random.Random(seed)
    t = random_term(rng, rng.randint(0, 3), budget=6, max_wires=5)
    g = D.graph_from_term(t)
    assert D.validate(g) == []
    assert D.eval(g) == D.term_matrix(t)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_slicing_strategies_and_round_trip(seed):
    rng = random.Random(seed)
    g = random_graph(rng, max_wires=5, max_generators=10)
    ref = D.eval(g, "asap")
    assert D.eval(g, "alap") == ref
    for strategy in ("asap", "alap"):
        t = D.term_from_graph(g, strategy)
        assert D.term_matrix(t) == ref
        assert D.eval(D.graph_from_term(t)) == ref


def test_slices_are_antichains(rng):
    for _ in range(30):
        g = random_graph(rng)
        for strategy in ("asap", "alap"):
            layers = D.slices(g, strategy)
            where = {n: k for k, layer in enumerate(layers) for n in layer}
            assert sorted(where) == g.generator_nodes()
            for w in g.wires:
                if w.src in where and w.dst in where:
                    assert where[w.src] < where[w.dst]


def test_unknown_strategy():
    with pytest.raises(ValueError):
        D.slices(D.graph_from_term(encoder_term()), "middle")


def test_permutation_term():
    t = D.permutation_term(["a", "b", "c"], ["c", "a", "b"])
    # wire c (position 2, lowest) moves to the top
    assert D.term_matrix(t) == S.walsh_from_truth_table(
        [((x & 1) << 2) | (x >> 1) for x in range(8)], 3, 3)


def test_to_dot_is_deterministic():
    g = D.graph_from_term(encoder_term())
    text = D.to_dot(g, "enc")
    assert text == D.to_dot(g.copy(), "enc")
    assert text.startswith('digraph "enc" {')
    assert text.count('label="xor"') == 2
    assert "swap" not in text

import random

import pytest

from widthcalc.complexity import LT, compare, complexity
from widthcalc.gen import GenConfig, enumerate_moves, gen_complex
from widthcalc.model import parse_complex, emit_complex, validate
from widthcalc.moves import (
    BodySpec,
    Consolidate,
    DiscData,
    SplitData,
    ThickSpec,
    Untelescope,
    UntelescopeOutcome,
    is_reduced,
)
from widthcalc.search import (
    canonical_form,
    canonical_hash,
    rewrite_graph,
    rewrite_graph_dot,
    thin,
)
from conftest import bdy, cb, thick, thin as thin_level
from widthcalc.model import build_complex


def spheres_untelescope():
    return Untelescope(
        thick="H",
        disc_minus=DiscData(0, True, SplitData((0, 0), (0, 0), (("S2",), ("S1",)))),
        disc_plus=DiscData(0, True, SplitData((0, 0), (0, 0), (("S4",), ("S3",)))),
        outcome=UntelescopeOutcome(
            h_minus=ThickSpec("Hm", lower=BodySpec("cmd"), upper=BodySpec("cmu")),
            h_plus=ThickSpec("Hp", lower=BodySpec("cpd"), upper=BodySpec("cpu")),
            thin_id="F0"),
    )


# ---------------------------------------------------------------------------
# thin()
# ---------------------------------------------------------------------------

def test_thin_identity_on_locally_thin(one_bridge_sphere):
    final, trace = thin(one_bridge_sphere, proposer=lambda cx: [])
    assert final == one_bridge_sphere
    assert trace.terminal and trace.steps == []


def test_thin_scripted_untelescope(spheres_with_four_ends):
    move = spheres_untelescope()

    def proposer(cx):
        return [move] if "H" in cx.thick else []

    final, trace = thin(spheres_with_four_ends, proposer)
    assert trace.terminal
    assert len(trace.steps) == 1
    assert complexity(final) == (18, 18)
    vectors = trace.vectors()
    assert vectors == [(24,), (18, 18)]
    reduced, _ = is_reduced(final)
    assert reduced


def test_thin_prepass_reduces_first():
    # a certified product sits on a thin level: thin() must consolidate even
    # though the proposer has nothing to offer
    cx = build_complex(
        thick=[thick("H", 1, 4, "Hu", "Hd"), thick("J", 1, 0, "Ju", "Jd")],
        thin=[thin_level("F", 1, 0, from_cb="Hu", to_cb="Jd")],
        boundary=[bdy("B1", 0, 4, "Hu")],
        cbs=[cb("Hu", "H", minus=("F", "B1"), v=4), cb("Hd", "H", b=2),
             cb("Ju", "J"), cb("Jd", "J", minus=("F",), product=True)],
    )
    final, trace = thin(cx, proposer=lambda c: [])
    assert trace.terminal
    assert [s.move["kind"] for s in trace.steps] == ["consolidate"]
    assert set(final.thick) == {"H"}


def test_thin_cap_zero_reports(spheres_with_four_ends):
    move = spheres_untelescope()
    final, trace = thin(spheres_with_four_ends, lambda cx: [move], cap=0)
    assert not trace.terminal
    assert "cap reached" in trace.diagnostics
    assert final == spheres_with_four_ends


def test_thin_skips_bad_certificates(spheres_with_four_ends):
    bad = Untelescope("H", DiscData(0, False), DiscData(0, False),
                      spheres_untelescope().outcome)  # genus 0: non-separating fails
    good = spheres_untelescope()
    final, trace = thin(spheres_with_four_ends, lambda cx: [bad, good]
                        if "H" in cx.thick else [])
    assert trace.terminal
    assert len(trace.steps) == 1
    assert any("skipped Untelescope" in d for d in trace.diagnostics)
    assert complexity(final) == (18, 18)


def test_thin_policies_agree_on_random_instances():
    rng = random.Random(31)
    cfg = GenConfig(max_thick=3)
    for _ in range(25):
        cx = gen_complex(cfg, rng)
        final_f, trace_f = thin(cx, enumerate_moves, policy="first")
        final_g, trace_g = thin(cx, enumerate_moves, policy="greedy-max-drop")
        for trace in (trace_f, trace_g):
            vectors = trace.vectors()
            assert all(compare(b, a) == LT for a, b in zip(vectors, vectors[1:]))
        for final in (final_f, final_g):
            reduced, _ = is_reduced(final, enumerate_moves)
            assert reduced


# ---------------------------------------------------------------------------
# rewrite_graph
# ---------------------------------------------------------------------------

def test_rewrite_graph_single_node(one_bridge_sphere):
    graph = rewrite_graph(one_bridge_sphere, enumerate_moves)
    assert len(graph.nodes) == 1
    assert graph.edges == []
    assert graph.complete
    assert graph.sinks() == [graph.root]


def test_rewrite_graph_diamond_confluence():
    # two disjoint consolidatable components: either consolidation first,
    # both orders meet at the same sink; the components have different genus
    # so the two intermediate states hash apart
    def comp(prefix, genus):
        return dict(
            thick=[thick(f"{prefix}H", genus, 0, f"{prefix}Hu", f"{prefix}Hd"),
                   thick(f"{prefix}J", genus, 0, f"{prefix}Ju", f"{prefix}Jd")],
            thin=[thin_level(f"{prefix}F", genus, 0, from_cb=f"{prefix}Hu",
                             to_cb=f"{prefix}Jd")],
            cbs=[cb(f"{prefix}Hu", f"{prefix}H", minus=(f"{prefix}F",)),
                 cb(f"{prefix}Hd", f"{prefix}H"),
                 cb(f"{prefix}Ju", f"{prefix}J"),
                 cb(f"{prefix}Jd", f"{prefix}J", minus=(f"{prefix}F",), product=True)],
        )

    left, right = comp("L", 1), comp("R", 2)
    cx = build_complex(
        thick=left["thick"] + right["thick"],
        thin=left["thin"] + right["thin"],
        cbs=left["cbs"] + right["cbs"],
    )
    assert validate(cx).ok

    def proposer(c):
        return [m for m in enumerate_moves(c, untelescopes=False)
                if isinstance(m, Consolidate)]

    graph = rewrite_graph(cx, proposer)
    assert graph.complete
    assert len(graph.nodes) == 4
    assert len(graph.sinks()) == 1
    assert graph.is_acyclic()
    dot = rewrite_graph_dot(graph)
    assert dot.startswith("digraph") and "consolidate" in dot


def test_rewrite_graph_on_random_instances_is_acyclic():
    rng = random.Random(57)
    cfg = GenConfig(max_thick=3)
    for _ in range(10):
        cx = gen_complex(cfg, rng)
        graph = rewrite_graph(cx, enumerate_moves, max_nodes=60)
        assert graph.is_acyclic()
        for digest in graph.sinks():
            reduced, _ = is_reduced(graph.nodes[digest], enumerate_moves)
            assert reduced


def test_rewrite_graph_budget_flagging(spheres_with_four_ends):
    move = spheres_untelescope()
    graph = rewrite_graph(spheres_with_four_ends,
                          lambda cx: [move] if "H" in cx.thick else [],
                          max_nodes=1)
    assert not graph.complete


# ---------------------------------------------------------------------------
# canonical hashing
# ---------------------------------------------------------------------------

def _relabel(cx, salt):
    rng = random.Random(salt)
    ids = sorted(set(cx.thick) | set(cx.thin) | set(cx.boundary) | set(cx.cbs))
    shuffled = ids[:]
    rng.shuffle(shuffled)
    rename = dict(zip(ids, shuffled))
    doc = emit_complex(cx)
    for section, keys in (("thick", ("id", "upper_cb", "lower_cb")),
                          ("thin", ("id", "from_cb", "to_cb")),
                          ("boundary", ("id", "owner")),
                          ("cbs", ("id", "plus"))):
        for item in doc[section]:
            for key in keys:
                item[key] = rename[item[key]]
            if section == "cbs":
                item["minus"] = [rename[x] for x in item["minus"]]
    return parse_complex(doc)


def test_canonical_hash_invariant_under_relabelling(diamond_four, chain_two,
                                                    spheres_with_four_ends):
    for cx in (diamond_four, chain_two, spheres_with_four_ends):
        want = canonical_hash(cx)
        for salt in range(25):
            assert canonical_hash(_relabel(cx, salt)) == want


def test_canonical_hash_separates_different_surfaces():
    def torus_like(genus):
        return build_complex(thick=[thick("H", genus, 0, "u", "d")],
                             cbs=[cb("u", "H"), cb("d", "H")])

    assert canonical_hash(torus_like(1)) != canonical_hash(torus_like(2))


def test_canonical_form_is_parseable(diamond_four):
    import json

    doc = json.loads(canonical_form(diamond_four))
    cx = parse_complex(doc)
    assert validate(cx).ok
    assert complexity(cx) == complexity(diamond_four)


def test_canonical_hash_random_relabel_fuzz():
    rng = random.Random(91)
    cfg = GenConfig(max_thick=4)
    for i in range(40):
        cx = gen_complex(cfg, rng)
        want = canonical_hash(cx)
        for salt in range(5):
            assert canonical_hash(_relabel(cx, salt * 101 + i)) == want

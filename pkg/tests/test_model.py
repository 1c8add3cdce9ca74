import pytest
from hypothesis import given, settings, strategies as st

from widthcalc.model import (
    BoundaryLevel,
    Complex,
    CompressionBody,
    SchemaError,
    Surface,
    Tangle,
    ThickLevel,
    ThinLevel,
    ValidationError,
    body_index,
    build_complex,
    emit_complex,
    empty_body_index,
    euler_char,
    parse_complex,
    thick_digraph,
    validate,
)
from conftest import bdy, cb, thick, thin


def test_euler_char_values():
    assert euler_char(Surface(0, 0)) == 2
    assert euler_char(Surface(1, 5)) == 0
    assert euler_char(Surface(3, 2)) == -4


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def test_one_bridge_sphere_is_valid(one_bridge_sphere):
    assert validate(one_bridge_sphere).ok


def test_two_cycle_flow_is_rejected():
    cx = build_complex(
        thick=[thick("H", 2, 0, "Hu", "Hd"), thick("J", 2, 0, "Ju", "Jd")],
        thin=[thin("F1", 1, 0, from_cb="Hu", to_cb="Jd"),
              thin("F2", 1, 0, from_cb="Ju", to_cb="Hd")],
        cbs=[cb("Hu", "H", minus=("F1",)), cb("Hd", "H", minus=("F2",)),
             cb("Ju", "J", minus=("F2",)), cb("Jd", "J", minus=("F1",))],
    )
    report = validate(cx)
    assert "closed_flow_line" in report.codes()
    assert "closed flow line" in str(report)


def test_puncture_conservation_up():
    # verticals=1, bridges=1 against 2 punctures on top: needs 1 + 2*1 = 3
    cx = build_complex(
        thick=[thick("H", 0, 2, "u", "d")],
        cbs=[cb("u", "H", v=1, b=1), cb("d", "H", b=1)],
    )
    assert "conservation_up" in validate(cx).codes()


def test_puncture_conservation_down():
    cx = build_complex(
        thick=[thick("H", 0, 2, "u", "d")],
        boundary=[bdy("B", 0, 4, "u")],
        cbs=[cb("u", "H", minus=("B",), v=2, gh=0), cb("d", "H", b=1)],
    )
    assert "conservation_down" in validate(cx).codes()


def test_once_punctured_sphere_levels_rejected():
    cx = build_complex(
        thick=[thick("H", 0, 1, "u", "d")],
        boundary=[bdy("B", 0, 1, "u")],
        cbs=[cb("u", "H", minus=("B",), v=1), cb("d", "H", v=1)],
    )
    codes = validate(cx).codes()
    assert "boundary_once_punctured_sphere" in codes
    # down body breaks conservation (v=1 with no minus levels) and is reported
    assert "conservation_down" in codes


def test_drilled_vertex_needs_three_punctures():
    good = build_complex(
        thick=[thick("H", 0, 4, "u", "d")],
        boundary=[bdy("B", 0, 4, "u", drilled=True), bdy("C", 0, 4, "d", drilled=True)],
        cbs=[cb("u", "H", minus=("B",), v=4), cb("d", "H", minus=("C",), v=4)],
    )
    assert validate(good).ok
    bad = build_complex(
        thick=[thick("H", 0, 2, "u", "d")],
        boundary=[bdy("B", 0, 2, "u", drilled=True), bdy("C", 0, 2, "d", drilled=True)],
        cbs=[cb("u", "H", minus=("B",), v=2), cb("d", "H", minus=("C",), v=2)],
    )
    assert "drilled_vertex_profile" in validate(bad).codes()


def test_ball_certificate_conditions():
    bad = build_complex(
        thick=[thick("H", 1, 0, "u", "d")],
        cbs=[cb("u", "H", ball=True), cb("d", "H")],
    )
    assert "ball_certificate" in validate(bad).codes()
    conflict = build_complex(
        thick=[thick("H", 0, 0, "u", "d")],
        cbs=[cb("u", "H", ball=True, product=True), cb("d", "H")],
    )
    assert "certificate_conflict" in validate(conflict).codes()


def test_product_certificate_conditions(chain_two):
    # certify Hu, which really is a product profile: sphere over sphere
    cx = chain_two
    cx.cbs["Hu"] = cb("Hu", "H", minus=("F",), product=True)
    assert validate(cx).ok
    # but not with a bridge arc in it
    cx.cbs["Hu"] = cb("Hu", "H", minus=("F",), b=1, product=True)
    report = validate(cx)
    assert "product_certificate" in report.codes()


def test_ghost_arcs_need_genus_or_extra_levels():
    # two ghost arcs onto a single 4-punctured boundary sphere force genus 2
    cx = build_complex(
        thick=[thick("H", 0, 0, "u", "d")],
        boundary=[bdy("B", 0, 4, "u")],
        cbs=[cb("u", "H", minus=("B",), gh=2), cb("d", "H")],
    )
    assert "handle_feasibility" in validate(cx).codes()
    ok = build_complex(
        thick=[thick("H", 2, 0, "u", "d")],
        boundary=[bdy("B", 0, 4, "u")],
        cbs=[cb("u", "H", minus=("B",), gh=2), cb("d", "H")],
    )
    assert validate(ok).ok


def test_core_loops_need_genus():
    bad = build_complex(
        thick=[thick("H", 0, 0, "u", "d")],
        cbs=[cb("u", "H", loops=1), cb("d", "H")],
    )
    assert "handle_feasibility" in validate(bad).codes()
    solid_torus = build_complex(
        thick=[thick("H", 1, 0, "u", "d")],
        cbs=[cb("u", "H", loops=1), cb("d", "H")],
    )
    assert validate(solid_torus).ok


def test_empty_complex_rejected():
    assert "empty_complex" in validate(Complex()).codes()


def test_validate_is_idempotent(one_bridge_sphere):
    assert validate(one_bridge_sphere) == validate(one_bridge_sphere)


def test_orientation_coherence():
    # thin level claiming to exit a lower body
    cx = build_complex(
        thick=[thick("H", 0, 0, "Hu", "Hd"), thick("J", 1, 0, "Ju", "Jd")],
        thin=[thin("F", 0, 0, from_cb="Jd", to_cb="Hu")],
        cbs=[cb("Hu", "H", minus=("F",)), cb("Hd", "H"),
             cb("Ju", "J"), cb("Jd", "J", minus=("F",))],
    )
    assert "orientation_coherence" in validate(cx).codes()


# ---------------------------------------------------------------------------
# Body index
# ---------------------------------------------------------------------------

def _mirror_profile(g, p, ports, v=0, b=0, gh=0, loops=0):
    """Single thick level with the same profile above and below; ports become
    disjoint boundary levels on each side."""
    ups = [bdy(f"U{i}", s.genus, s.punctures, "u") for i, s in enumerate(ports)]
    downs = [bdy(f"D{i}", s.genus, s.punctures, "d") for i, s in enumerate(ports)]
    return build_complex(
        thick=[thick("H", g, p, "u", "d")],
        boundary=ups + downs,
        cbs=[cb("u", "H", minus=tuple(x.id for x in ups), v=v, b=b, gh=gh, loops=loops),
             cb("d", "H", minus=tuple(x.id for x in downs), v=v, b=b, gh=gh, loops=loops)],
    )


def test_index_trivial_table(one_bridge_sphere):
    ball = _mirror_profile(0, 0, [])
    assert body_index(ball, "u") == 0
    assert body_index(one_bridge_sphere, "u") == 4
    assert body_index(one_bridge_sphere, "d") == 4
    # every product profile indexes 6
    for g in range(4):
        for p in range(7):
            if (g, p) == (0, 1):
                continue
            cx = _mirror_profile(g, p, [Surface(g, p)], v=p)
            assert body_index(cx, "u") == 6, (g, p)


def test_index_handlebody_and_holed_spheres(spheres_with_four_ends):
    genus2 = _mirror_profile(2, 0, [])
    assert body_index(genus2, "u") == 12
    assert body_index(spheres_with_four_ends, "u") == 12
    assert body_index(spheres_with_four_ends, "d") == 12


def test_index_of_empty_piece():
    assert empty_body_index() == 0


def test_index_rejects_invalid_body():
    cx = build_complex(
        thick=[thick("H", 0, 2, "u", "d")],
        cbs=[cb("u", "H", v=1, b=1), cb("d", "H", b=1)],
    )
    with pytest.raises(ValidationError):
        body_index(cx, "u")
    with pytest.raises(ValidationError):
        body_index(cx, "nope")


def _enumerate_valid_profiles():
    """Every valid single-body profile with genus <= 3, punctures <= 6 and at
    most two minus levels drawn from a small port pool."""
    pool = [Surface(0, 0), Surface(0, 2), Surface(0, 3), Surface(0, 4),
            Surface(1, 0), Surface(1, 2), Surface(2, 1)]
    port_choices = [[]]
    port_choices += [[s] for s in pool]
    port_choices += [[a, b] for i, a in enumerate(pool) for b in pool[i:]]
    for g in range(4):
        for p in range(7):
            for ports in port_choices:
                p_minus = sum(s.punctures for s in ports)
                for b in range(p // 2 + 1):
                    v = p - 2 * b
                    if (p_minus - v) % 2 or p_minus < v:
                        continue
                    gh = (p_minus - v) // 2
                    for loops in range(3):
                        cx = _mirror_profile(g, p, ports, v=v, b=b, gh=gh, loops=loops)
                        if validate(cx).ok:
                            yield cx, g, p, ports, Tangle(v, b, gh, loops)


def test_index_even_nonnegative_and_trichotomy():
    seen = 0
    for cx, g, p, ports, tangle in _enumerate_valid_profiles():
        mu = body_index(cx, "u")
        seen += 1
        assert mu % 2 == 0
        assert mu >= 0
        ball_empty = (g, p) == (0, 0) and not ports and tangle == Tangle()
        ball_arc = (g, p) == (0, 2) and not ports and tangle == Tangle(bridges=1)
        if ball_empty:
            assert mu == 0
        elif ball_arc:
            assert mu == 4
        else:
            assert mu >= 6, (g, p, ports, tangle)
        assert (mu == 0) == ball_empty
        assert (mu == 4) == ball_arc
    assert seen > 500


# ---------------------------------------------------------------------------
# Flow digraph
# ---------------------------------------------------------------------------

def _cycles_exist(edges):
    # independent check: try every node as a walk start, depth-first
    def dfs(node, path):
        for nxt in edges.get(node, ()):
            if nxt in path:
                return True
            if dfs(nxt, path | {nxt}):
                return True
        return False

    return any(dfs(n, {n}) for n in edges)


def test_thick_digraph_shapes(one_bridge_sphere, chain_two, diamond_four):
    assert thick_digraph(one_bridge_sphere) == {"H": []}
    assert thick_digraph(chain_two) == {"H": ["J"], "J": []}
    edges = thick_digraph(diamond_four)
    assert edges == {"H": ["A", "B"], "A": ["K"], "B": ["K"], "K": []}
    assert not _cycles_exist(edges)


# ---------------------------------------------------------------------------
# Document format
# ---------------------------------------------------------------------------

def test_json_round_trip(one_bridge_sphere, spheres_with_four_ends, diamond_four):
    for cx in (one_bridge_sphere, spheres_with_four_ends, diamond_four):
        assert parse_complex(emit_complex(cx)) == cx


def test_parse_rejects_malformed():
    with pytest.raises(SchemaError):
        parse_complex({"thick": [{"id": "H"}]})
    with pytest.raises(SchemaError):
        parse_complex({"thick": [{"id": "H", "surface": {"genus": "x", "punctures": 0},
                                  "upper_cb": "u", "lower_cb": "d"}]})
    with pytest.raises(SchemaError):
        parse_complex(
            {"cbs": [{"id": "u", "plus": "H", "tangle": {"v": 0, "b": 0, "gh": 0, "loops": 0}},
                     {"id": "u", "plus": "H", "tangle": {"v": 0, "b": 0, "gh": 0, "loops": 0}}]})


def test_parse_accepts_domain_violations():
    # ill-formed domain data parses; validate reports it
    doc = {"thick": [{"id": "H", "surface": {"genus": -1, "punctures": 0},
                      "upper_cb": "u", "lower_cb": "u"}],
           "cbs": [{"id": "u", "plus": "H",
                    "tangle": {"v": 0, "b": 0, "gh": 0, "loops": 0}}]}
    cx = parse_complex(doc)
    codes = validate(cx).codes()
    assert "genus_negative" in codes
    assert "thick_sides" in codes


# ---------------------------------------------------------------------------
# Totality: arbitrary well-typed structures never crash validate
# ---------------------------------------------------------------------------

ids = st.text(alphabet="abcxyz", min_size=1, max_size=2)
small = st.integers(min_value=-2, max_value=4)
surfaces = st.builds(Surface, small, small)
tangles = st.builds(Tangle, small, small, small, small)


@st.composite
def messy_complexes(draw):
    n_thick = draw(st.integers(0, 3))
    thicks, cbs, thins, bdys = {}, {}, {}, {}
    for i in range(n_thick):
        t = ThickLevel(f"t{i}", draw(surfaces), draw(ids), draw(ids))
        thicks[t.id] = t
    for i in range(draw(st.integers(0, 5))):
        c = CompressionBody(f"c{i}", draw(ids),
                            tuple(draw(st.lists(ids, max_size=3))), draw(tangles))
        cbs[c.id] = c
    for i in range(draw(st.integers(0, 3))):
        f = ThinLevel(f"f{i}", draw(surfaces), draw(ids), draw(ids))
        thins[f.id] = f
    for i in range(draw(st.integers(0, 3))):
        b = BoundaryLevel(f"b{i}", draw(surfaces), draw(ids), draw(st.booleans()))
        bdys[b.id] = b
    return Complex(thick=thicks, thin=thins, boundary=bdys, cbs=cbs)


@settings(max_examples=300, deadline=None)
@given(messy_complexes())
def test_validate_total_on_arbitrary_structures(cx):
    report = validate(cx)
    assert report == validate(cx)  # idempotent, and it never raised

"""Thinning rewrites as certificate-carrying moves with numeric validation.

Whether a simplifying move exists is a topological question the summary data
cannot decide, so each move arrives as a certificate naming the levels it
touches and the pieces it produces.  The engine's job is the converse: verify
every numeric consequence the move is supposed to have, and reject the
certificate if any check fails.  Accepted moves always produce a valid
complex, keep the flow digraph acyclic, and strictly decrease the complexity
vector.

Move kinds:

* ``Consolidate`` deletes a thick/thin pair bounding a certified product and
  merges the three adjacent bodies; the merged index equals the sum of the
  outer two minus 6, exactly, and the complexity vector simply loses the
  deleted level's entry.
* ``Untelescope`` splits one thick level along a pair of disjoint discs on
  opposite sides into a lower level, an upper level, and a doubly spotted
  thin level between them.  The result is already consolidated against the
  parallel pieces the disc surgery creates, so the exact index bookkeeping
  (lower/upper sums gain 6, the near-side aggregates drop strictly, the
  far-side aggregates are fixed) is checked directly on the replacement.
* ``Destabilize`` removes one of six kinds of stabilization, compressing the
  thick level and possibly handing boundary levels and ghost arcs across it.
* ``Unperturb`` cancels a pair of adjacent bridge discs, dropping two
  punctures and one bridge arc on each side.
* ``UndoRemovable`` pulls a removable component off the thick level, dropping
  two punctures; by default the component becomes a core loop.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .model import (
    Complex,
    CompressionBody,
    SchemaError,
    Surface,
    Tangle,
    ThickLevel,
    ThinLevel,
    body_index,
    emit_tangle,
    euler_char,
    ghost_excess,
    is_ball_profile,
    is_product_profile,
    parse_tangle,
    require_valid,
    validate,
)
from .complexity import LT, compare, complexity, index_down, index_up

__all__ = [
    "MoveRejected",
    "SplitData",
    "DiscData",
    "BodySpec",
    "ThickSpec",
    "UntelescopeOutcome",
    "Consolidate",
    "Untelescope",
    "Destabilize",
    "Unperturb",
    "UndoRemovable",
    "Move",
    "DESTAB_VARIANTS",
    "compress_surface",
    "boundary_reduce",
    "ReducedPiece",
    "BoundaryReduction",
    "solve_tangle",
    "apply_consolidate",
    "apply_untelescope",
    "elementary_thinning_sequence",
    "apply_destabilize",
    "apply_unperturb",
    "apply_undo_removable",
    "apply_move",
    "find_product_on_thin",
    "is_reduced",
    "parse_move",
    "emit_move",
]


class MoveRejected(Exception):
    """A certificate failed one of its checks; ``rule`` names which."""

    def __init__(self, rule: str, message: str):
        super().__init__(f"{rule}: {message}")
        self.rule = rule


# ---------------------------------------------------------------------------
# Disc data and surface surgery
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitData:
    """How a separating disc divides the compressed body's data in two."""

    genus: tuple[int, int]
    punctures: tuple[int, int]
    ports: tuple[tuple[str, ...], tuple[str, ...]] = ((), ())
    tangles: tuple[Tangle, Tangle] | None = None


@dataclass(frozen=True)
class DiscData:
    """A compressing-disc summary: graph intersections (0 or 1) and whether
    the disc separates; separating discs carry the split of the original
    surface and minus-side data, side 1 being the piece that is kept."""

    punctures: int
    separating: bool
    split: SplitData | None = None


def compress_surface(s: Surface, d: DiscData) -> tuple[Surface, ...]:
    """Surgery on one closed surface along one disc.

    Non-separating: genus drops by one and the disc's graph punctures add a
    pair of scars.  Separating: the surface divides per the split, each side
    gaining one scar per disc puncture.
    """
    if d.punctures not in (0, 1):
        raise MoveRejected("disc.punctures", f"disc meets the graph 0 or 1 times, not {d.punctures}")
    if not d.separating:
        if d.split is not None:
            raise MoveRejected("disc.split", "non-separating disc carries no split")
        if s.genus < 1:
            raise MoveRejected("disc.genus", "non-separating compression needs genus >= 1")
        return (Surface(s.genus - 1, s.punctures + 2 * d.punctures),)
    if d.split is None:
        raise MoveRejected("disc.split", "separating disc needs split data")
    g1, g2 = d.split.genus
    p1, p2 = d.split.punctures
    if min(g1, g2, p1, p2) < 0:
        raise MoveRejected("disc.split", "split parts must be non-negative")
    if g1 + g2 != s.genus:
        raise MoveRejected("disc.split", f"genus parts {g1}+{g2} != {s.genus}")
    if p1 + p2 != s.punctures:
        raise MoveRejected("disc.split", f"puncture parts {p1}+{p2} != {s.punctures}")
    return (Surface(g1, p1 + d.punctures), Surface(g2, p2 + d.punctures))


@dataclass(frozen=True)
class ReducedPiece:
    surface: Surface
    ports: tuple[str, ...]
    index: int


@dataclass(frozen=True)
class BoundaryReduction:
    pieces: tuple[ReducedPiece, ...]
    before: int
    expected_sum: int  # before - 6 + 4q + 6*separating


def _profile_index(plus: Surface, minus: list[Surface]) -> int:
    chi_minus = sum(euler_char(s) for s in minus)
    p_minus = sum(s.punctures for s in minus)
    return (3 * (-euler_char(plus) + chi_minus)
            + 2 * (plus.punctures - p_minus) + 6)


def boundary_reduce(cx: Complex, cb_id: str, d: DiscData) -> BoundaryReduction:
    """Cut one compression body along a disc and account for its index.

    The pieces' indices always sum to ``index(body) - 6 + 4q + 6*delta`` and
    each piece indexes strictly below the body; a separating disc may not cut
    off a piece with the plain-ball profile, nor, when the disc meets the
    graph, with the ball-with-arc profile.  Violations mean the disc data is
    inconsistent with the body summary and the certificate is rejected.
    """
    before = body_index(cx, cb_id)  # validates the body locally
    cb = cx.cbs[cb_id]
    for port in cb.minus:
        s = cx.level_surface(port)
        if s.genus == 0 and s.punctures == 1:
            raise MoveRejected("boundary_reduce.once_punctured",
                               f"minus level {port!r} is a once-punctured sphere")
    if d.punctures == 1 and cb.tangle.counts() == (0, 0, 0, 0):
        raise MoveRejected("boundary_reduce.no_strand",
                           "a disc meeting the graph needs a graph piece in the body")
    plus = cx.thick[cb.plus].surface
    surfaces = compress_surface(plus, d)

    if not d.separating:
        piece_ports = (cb.minus,)
    else:
        split = d.split
        assert split is not None
        p1, p2 = (tuple(split.ports[0]), tuple(split.ports[1]))
        if sorted(p1 + p2) != sorted(cb.minus) or set(p1) & set(p2):
            raise MoveRejected("disc.split", "port sides must partition the minus levels")
        if split.tangles is not None:
            sums = tuple(a + b for a, b in zip(split.tangles[0].counts(), split.tangles[1].counts()))
            if sums != cb.tangle.counts():
                raise MoveRejected("disc.split", "tangle sides must sum to the body tangle")
        piece_ports = (p1, p2)

    pieces = []
    for surf, ports in zip(surfaces, piece_ports):
        port_surfaces = [cx.level_surface(p) for p in ports]
        pieces.append(ReducedPiece(surf, tuple(ports), _profile_index(surf, port_surfaces)))

    if d.separating:
        for piece in pieces:
            if piece.ports:
                continue
            if piece.surface == Surface(0, 0):
                raise MoveRejected("boundary_reduce.trivial_piece",
                                   "a separating disc may not cut off a plain ball")
            if d.punctures == 1 and piece.surface == Surface(0, 2):
                raise MoveRejected("boundary_reduce.trivial_piece",
                                   "a graph-meeting disc may not cut off a ball with one arc")

    expected = before - 6 + 4 * d.punctures + 6 * (1 if d.separating else 0)
    if sum(p.index for p in pieces) != expected:
        raise MoveRejected("boundary_reduce.identity",
                           f"piece indices sum to {sum(p.index for p in pieces)}, expected {expected}")
    for piece in pieces:
        if piece.index >= before:
            raise MoveRejected("boundary_reduce.strict_drop",
                               f"piece index {piece.index} does not drop below {before}")
    return BoundaryReduction(tuple(pieces), before, expected)


# ---------------------------------------------------------------------------
# Move certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Consolidate:
    thick: str
    thin: str
    merged_tangle: Tangle | None = None


@dataclass(frozen=True)
class BodySpec:
    id: str
    tangle: Tangle | None = None


@dataclass(frozen=True)
class ThickSpec:
    id: str
    lower: BodySpec
    upper: BodySpec


@dataclass(frozen=True)
class UntelescopeOutcome:
    h_minus: ThickSpec
    h_plus: ThickSpec
    thin_id: str


@dataclass(frozen=True)
class Untelescope:
    thick: str
    disc_minus: DiscData
    disc_plus: DiscData
    outcome: UntelescopeOutcome


DESTAB_VARIANTS = ("stab", "merid_stab", "bdy", "merid_bdy", "ghost_bdy", "merid_ghost_bdy")


@dataclass(frozen=True)
class Destabilize:
    variant: str
    thick: str
    side: str = "up"
    boundary_ids: tuple[str, ...] = ()
    ghost_arcs: int = 0
    tangle_up: Tangle | None = None
    tangle_down: Tangle | None = None


@dataclass(frozen=True)
class Unperturb:
    thick: str
    near_side: str = "up"
    merge_case: str = "bridge_bridge"


@dataclass(frozen=True)
class UndoRemovable:
    thick: str
    loop_side: str = "down"
    tangle_up: Tangle | None = None
    tangle_down: Tangle | None = None


Move = Consolidate | Untelescope | Destabilize | Unperturb | UndoRemovable


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def solve_tangle(plus: Surface, minus: list[Surface], loops: int = 0) -> Tangle | None:
    """Pick arc counts satisfying conservation with as many verticals as
    possible; None when no feasible assignment exists."""
    p_plus = plus.punctures
    p_minus = sum(s.punctures for s in minus)
    if (p_plus - p_minus) % 2:
        return None
    v = min(p_plus, p_minus)
    b = (p_plus - v) // 2
    gh = (p_minus - v) // 2
    anchors = sum(1 for s in minus if s.punctures > 0)
    need = sum(s.genus for s in minus) + loops + ghost_excess(gh, anchors)
    if plus.genus < need:
        return None
    return Tangle(v, b, gh, loops)


def _refresh_certificates(cx: Complex, cb_ids: set[str]) -> Complex:
    """Recompute triviality flags from profile data on engine-built bodies."""
    cbs = dict(cx.cbs)
    for cb_id in cb_ids:
        cb = cbs[cb_id]
        cbs[cb_id] = replace(
            cb,
            product_certificate=is_product_profile(cx, cb),
            ball_certificate=is_ball_profile(cx, cb),
        )
    return replace(cx, cbs=cbs)


def _accept(cx_before: Complex, cx_after: Complex, rule: str) -> Complex:
    report = validate(cx_after)
    if not report.ok:
        raise MoveRejected(f"{rule}.result_invalid", str(report))
    if compare(complexity(cx_after), complexity(cx_before)) != LT:
        raise MoveRejected(f"{rule}.monotone", "complexity did not strictly decrease")
    return cx_after


def _fresh(cx: Complex, ids: list[str], rule: str) -> None:
    pool: set[str] = set(cx.thick) | set(cx.thin) | set(cx.boundary) | set(cx.cbs)
    seen: set[str] = set()
    for i in ids:
        if i in pool or i in seen:
            raise MoveRejected(f"{rule}.fresh_ids", f"id {i!r} is not fresh")
        seen.add(i)


def _side_cbs(cx: Complex, thick_id: str, side: str) -> tuple[str, str]:
    """(side body, far body) of a thick level."""
    t = cx.thick[thick_id]
    if side == "up":
        return t.upper_cb, t.lower_cb
    if side == "down":
        return t.lower_cb, t.upper_cb
    raise MoveRejected("move.side", f"side must be 'up' or 'down', not {side!r}")


# ---------------------------------------------------------------------------
# Consolidation
# ---------------------------------------------------------------------------

def apply_consolidate(cx: Complex, m: Consolidate) -> Complex:
    """Delete a thick/thin pair around a certified product and merge bodies.

    The named thin level must join a product-certified body of the named
    thick level to some body A on its far side; A absorbs the product and the
    thick level's other body B.  The merged tangle may be supplied (strand
    composition through a product can create loops the summary cannot see);
    otherwise a canonical assignment is derived.  The merged body index is
    checked to equal ``index(A) + index(B) - 6`` and the complexity vector to
    strictly decrease (it loses exactly the deleted level's entry).
    """
    require_valid(cx)
    if m.thick not in cx.thick:
        raise MoveRejected("consolidate.thick", f"unknown thick level {m.thick!r}")
    if m.thin not in cx.thin:
        raise MoveRejected("consolidate.thin", f"unknown thin level {m.thin!r}")
    H = cx.thick[m.thick]
    Q = cx.thin[m.thin]

    p_id = None
    for cand in (H.upper_cb, H.lower_cb):
        if cx.cbs[cand].product_certificate and m.thin in cx.cbs[cand].minus:
            p_id = cand
            break
    if p_id is None:
        raise MoveRejected("consolidate.product",
                           f"no product-certified body of {m.thick!r} touches {m.thin!r}")
    if p_id not in (Q.from_cb, Q.to_cb):
        raise MoveRejected("consolidate.product", "thin level does not touch the product body")
    a_id = Q.to_cb if Q.from_cb == p_id else Q.from_cb
    b_id = H.lower_cb if p_id == H.upper_cb else H.upper_cb

    A, B = cx.cbs[a_id], cx.cbs[b_id]
    merged_minus = tuple(p for p in A.minus if p != m.thin) + B.minus
    plus_a = cx.thick[A.plus].surface
    minus_surfaces = [cx.level_surface(p) for p in merged_minus]
    if m.merged_tangle is not None:
        tangle = m.merged_tangle
    else:
        tangle = solve_tangle(plus_a, minus_surfaces, loops=A.tangle.loops + B.tangle.loops)
        if tangle is None:
            raise MoveRejected("consolidate.tangle", "no feasible merged tangle")
    merged = CompressionBody(a_id, A.plus, merged_minus, tangle)

    cbs = {k: v for k, v in cx.cbs.items() if k not in (a_id, b_id, p_id)}
    cbs[a_id] = merged
    thin = {k: v for k, v in cx.thin.items() if k != m.thin}
    for f in list(thin.values()):
        if f.from_cb == b_id:
            thin[f.id] = replace(f, from_cb=a_id)
        elif f.to_cb == b_id:
            thin[f.id] = replace(f, to_cb=a_id)
    boundary = dict(cx.boundary)
    for b in list(boundary.values()):
        if b.owner == b_id:
            boundary[b.id] = replace(b, owner=a_id)
    thick = {k: v for k, v in cx.thick.items() if k != m.thick}
    out = Complex(thick=thick, thin=thin, boundary=boundary, cbs=cbs)
    out = _refresh_certificates(out, {a_id})

    report = validate(out)
    if not report.ok:
        raise MoveRejected("consolidate.result_invalid", str(report))
    if body_index(out, a_id) != body_index(cx, a_id) + body_index(cx, b_id) - 6:
        raise MoveRejected("consolidate.merge_index",
                           "merged index != index(A) + index(B) - 6")
    return _accept(cx, out, "consolidate")


# ---------------------------------------------------------------------------
# Untelescoping
# ---------------------------------------------------------------------------

def apply_untelescope(cx: Complex, m: Untelescope) -> Complex:
    """Split a thick level along a weakly reducing disc pair.

    The certificate carries the disc data for each side and the ids/tangles of
    the replacement: a lower thick level (kept piece of the down-side cut), an
    upper one, and the doubly spotted thin level joining them.  The discarded
    piece of each cut is absorbed by the opposite new body, which is exactly
    the consolidation the surgery forces.  Checked: both cuts account via
    :func:`boundary_reduce`, the replacement validates, the lower/upper body
    index sums each gain exactly 6 while the near-side ones drop strictly, the
    far-side aggregate indices are fixed and near-side ones drop strictly,
    and the complexity vector strictly decreases.
    """
    require_valid(cx)
    if m.thick not in cx.thick:
        raise MoveRejected("untelescope.thick", f"unknown thick level {m.thick!r}")
    H = cx.thick[m.thick]
    out = m.outcome
    _fresh(cx, [out.h_minus.id, out.h_plus.id, out.thin_id,
                out.h_minus.lower.id, out.h_minus.upper.id,
                out.h_plus.lower.id, out.h_plus.upper.id], "untelescope")

    red_minus = boundary_reduce(cx, H.lower_cb, m.disc_minus)
    red_plus = boundary_reduce(cx, H.upper_cb, m.disc_plus)
    s_minus = red_minus.pieces[0].surface
    s_plus = red_plus.pieces[0].surface
    side1_minus = red_minus.pieces[0].ports
    side2_minus = red_minus.pieces[1].ports if len(red_minus.pieces) > 1 else ()
    side1_plus = red_plus.pieces[0].ports
    side2_plus = red_plus.pieces[1].ports if len(red_plus.pieces) > 1 else ()

    # The doubly spotted level is the double surgery on H; its data is forced.
    chi0 = euler_char(s_minus) + euler_char(s_plus) - euler_char(H.surface)
    p0 = s_minus.punctures + s_plus.punctures - H.surface.punctures
    if chi0 % 2 or chi0 > 2 or p0 < 0:
        raise MoveRejected("untelescope.doubly_spotted",
                           f"no surface with euler characteristic {chi0} and {p0} punctures")
    f0 = Surface((2 - chi0) // 2, p0)

    hm, hp = out.h_minus, out.h_plus
    new_thin = ThinLevel(out.thin_id, f0, from_cb=hm.upper.id, to_cb=hp.lower.id)

    def make_cb(spec: BodySpec, plus_id: str, plus_surface: Surface,
                minus: tuple[str, ...], thin_extra: bool) -> CompressionBody:
        ports = ((out.thin_id,) if thin_extra else ()) + minus
        if spec.tangle is not None:
            tangle = spec.tangle
        else:
            surfaces = [f0 if p == out.thin_id else cx.level_surface(p) for p in ports]
            solved = solve_tangle(plus_surface, surfaces)
            if solved is None:
                raise MoveRejected("untelescope.tangle",
                                   f"no feasible tangle for body {spec.id!r}")
            tangle = solved
        return CompressionBody(spec.id, plus_id, ports, tangle)

    cb_hm_down = make_cb(hm.lower, hm.id, s_minus, side1_minus, thin_extra=False)
    cb_hm_up = make_cb(hm.upper, hm.id, s_minus, side2_plus, thin_extra=True)
    cb_hp_down = make_cb(hp.lower, hp.id, s_plus, side2_minus, thin_extra=True)
    cb_hp_up = make_cb(hp.upper, hp.id, s_plus, side1_plus, thin_extra=False)

    thick = {k: v for k, v in cx.thick.items() if k != m.thick}
    thick[hm.id] = ThickLevel(hm.id, s_minus, upper_cb=hm.upper.id, lower_cb=hm.lower.id)
    thick[hp.id] = ThickLevel(hp.id, s_plus, upper_cb=hp.upper.id, lower_cb=hp.lower.id)

    new_owner: dict[str, str] = {}
    for port in side1_minus:
        new_owner[port] = cb_hm_down.id
    for port in side2_minus:
        new_owner[port] = cb_hp_down.id
    for port in side1_plus:
        new_owner[port] = cb_hp_up.id
    for port in side2_plus:
        new_owner[port] = cb_hm_up.id

    old_up, old_down = H.upper_cb, H.lower_cb
    thin = {k: v for k, v in cx.thin.items()}
    for f in list(thin.values()):
        if f.to_cb == old_down:
            thin[f.id] = replace(thin[f.id], to_cb=new_owner[f.id])
        if f.from_cb == old_up:
            thin[f.id] = replace(thin[f.id], from_cb=new_owner[f.id])
    thin[out.thin_id] = new_thin
    boundary = dict(cx.boundary)
    for b in list(boundary.values()):
        if b.owner in (old_down, old_up):
            boundary[b.id] = replace(b, owner=new_owner[b.id])

    cbs = {k: v for k, v in cx.cbs.items() if k not in (old_up, old_down)}
    for cb in (cb_hm_down, cb_hm_up, cb_hp_down, cb_hp_up):
        cbs[cb.id] = cb

    result = Complex(thick=thick, thin=thin, boundary=boundary, cbs=cbs)
    result = _refresh_certificates(result, {c.id for c in (cb_hm_down, cb_hm_up, cb_hp_down, cb_hp_up)})
    report = validate(result)
    if not report.ok:
        raise MoveRejected("untelescope.result_invalid", str(report))

    # Body-index bookkeeping around the split level.
    mu_down_before = body_index(cx, old_down)
    mu_up_before = body_index(cx, old_up)
    mu_down_hm = body_index(result, cb_hm_down.id)
    mu_down_hp = body_index(result, cb_hp_down.id)
    mu_up_hm = body_index(result, cb_hm_up.id)
    mu_up_hp = body_index(result, cb_hp_up.id)
    if mu_down_hm >= mu_down_before:
        raise MoveRejected("untelescope.lower_drop",
                           f"lower body index {mu_down_hm} must drop below {mu_down_before}")
    if mu_up_hp >= mu_up_before:
        raise MoveRejected("untelescope.upper_drop",
                           f"upper body index {mu_up_hp} must drop below {mu_up_before}")
    if mu_down_hm + mu_down_hp != mu_down_before + 6:
        raise MoveRejected("untelescope.lower_sum",
                           f"lower body indices {mu_down_hm}+{mu_down_hp} != {mu_down_before}+6")
    if mu_up_hm + mu_up_hp != mu_up_before + 6:
        raise MoveRejected("untelescope.upper_sum",
                           f"upper body indices {mu_up_hm}+{mu_up_hp} != {mu_up_before}+6")

    # Aggregate-index relations between the old level and the two new ones.
    iu_before = index_up(cx, m.thick)
    id_before = index_down(cx, m.thick)
    if index_down(result, hm.id) >= id_before:
        raise MoveRejected("untelescope.lower_index_drop", "lower aggregate index must drop")
    if index_up(result, hm.id) != iu_before:
        raise MoveRejected("untelescope.upper_index_fixed", "upper aggregate index must be unchanged")
    if index_down(result, hp.id) != id_before:
        raise MoveRejected("untelescope.lower_index_fixed", "lower aggregate index must be unchanged")
    if index_up(result, hp.id) >= iu_before:
        raise MoveRejected("untelescope.upper_index_drop", "upper aggregate index must drop")

    return _accept(cx, result, "untelescope")


def find_product_on_thin(cx: Complex) -> tuple[str, str] | None:
    """First (thick, thin) pair with a product-certified body between them."""
    for cb_id in sorted(cx.cbs):
        cb = cx.cbs[cb_id]
        if cb.product_certificate and len(cb.minus) == 1 and cb.minus[0] in cx.thin:
            return cb.plus, cb.minus[0]
    return None


def elementary_thinning_sequence(cx: Complex, m: Untelescope) -> Complex:
    """Untelescope, then consolidate every product the split exposes.

    Requires that no product-certified body touches a thin level beforehand.
    The untelescope output is already consolidated against the split's own
    parallel pieces, so the remaining work is merging the new bodies into
    their old thin neighbours, repeated until no certified product touches a
    thin level.  The doubly spotted level always survives and the complexity
    vector strictly decreases.
    """
    require_valid(cx)
    if find_product_on_thin(cx) is not None:
        raise MoveRejected("elementary.pre",
                           "a product-certified body already touches a thin level")
    result = apply_untelescope(cx, m)
    while True:
        hit = find_product_on_thin(result)
        if hit is None:
            break
        result = apply_consolidate(result, Consolidate(thick=hit[0], thin=hit[1]))
    if m.outcome.thin_id not in result.thin:
        raise MoveRejected("elementary.doubly_spotted",
                           "the doubly spotted level did not survive consolidation")
    if not result.thin:
        raise MoveRejected("elementary.thin_left", "result must keep a thin level")
    return _accept(cx, result, "elementary")


# ---------------------------------------------------------------------------
# Destabilization family
# ---------------------------------------------------------------------------

def apply_destabilize(cx: Complex, m: Destabilize) -> Complex:
    """Remove a generalized stabilization from one thick level.

    ``stab``/``merid_stab`` compress a genus handle, keeping or adding two
    punctures.  The boundary variants hand a set S of boundary levels (and,
    for the ghost variants, ``ghost_arcs`` many ghost arcs attached to S) from
    the ``side`` body across to the other side, compressing the level by
    ``chi(S) - 2*ghosts - 2`` worth of euler characteristic and adjusting
    punctures by ``2*ghosts - p(S) + 2q``.  Requires that no boundary level
    anywhere is a sphere with two or fewer punctures.  Both body indices must
    drop strictly and the complexity vector decreases.
    """
    require_valid(cx)
    if m.variant not in DESTAB_VARIANTS:
        raise MoveRejected("destabilize.variant", f"unknown variant {m.variant!r}")
    if m.thick not in cx.thick:
        raise MoveRejected("destabilize.thick", f"unknown thick level {m.thick!r}")
    for b in cx.boundary.values():
        if b.surface.genus == 0 and b.surface.punctures <= 2:
            raise MoveRejected("destabilize.boundary_sphere",
                               f"boundary level {b.id!r} is a sphere with <= 2 punctures")

    H = cx.thick[m.thick]
    side_id, far_id = _side_cbs(cx, m.thick, m.side)
    side_cb, far_cb = cx.cbs[side_id], cx.cbs[far_id]
    g, p = H.surface.genus, H.surface.punctures
    q = 1 if m.variant.startswith("merid") else 0
    gamma = m.ghost_arcs
    s_ids = tuple(m.boundary_ids)

    if m.variant in ("stab", "merid_stab"):
        if s_ids or gamma:
            raise MoveRejected("destabilize.params", "stab variants take no boundary levels or ghost arcs")
        if g < 1:
            raise MoveRejected("destabilize.genus", "genus >= 1 required")
        new_surface = Surface(g - 1, p + 2 * q)
        side_minus, far_minus = side_cb.minus, far_cb.minus
        if q:
            default_side = replace(side_cb.tangle, bridges=side_cb.tangle.bridges + 1)
            default_far = replace(far_cb.tangle, bridges=far_cb.tangle.bridges + 1)
        else:
            default_side, default_far = side_cb.tangle, far_cb.tangle
    else:
        if m.variant in ("bdy", "merid_bdy"):
            if gamma != 0:
                raise MoveRejected("destabilize.params", "plain boundary variants take no ghost arcs")
            if len(s_ids) != 1:
                raise MoveRejected("destabilize.params", "boundary variants name exactly one boundary level")
        else:
            if gamma < 1:
                raise MoveRejected("destabilize.params", "ghost variants need at least one ghost arc")
            if not s_ids:
                raise MoveRejected("destabilize.params",
                                   "ghost arcs attach to boundary levels; name them")
            if gamma < len(s_ids) - 1:
                raise MoveRejected("destabilize.params",
                                   f"{gamma} ghost arcs cannot connect {len(s_ids)} boundary levels")
        if len(set(s_ids)) != len(s_ids):
            raise MoveRejected("destabilize.params", "repeated boundary level")
        for s in s_ids:
            if s not in cx.boundary or s not in side_cb.minus:
                raise MoveRejected("destabilize.params",
                                   f"{s!r} is not a boundary level of the {m.side} body")
        if gamma > side_cb.tangle.ghosts:
            raise MoveRejected("destabilize.params",
                               f"side body has only {side_cb.tangle.ghosts} ghost arcs")
        s_surfaces = [cx.boundary[s].surface for s in s_ids]
        chi_s = sum(euler_char(s) for s in s_surfaces)
        p_s = sum(s.punctures for s in s_surfaces)
        if p_s < 2 * gamma:
            raise MoveRejected("destabilize.params",
                               f"{gamma} ghost arcs need {2 * gamma} punctures on the named levels")
        chi_new = euler_char(H.surface) - chi_s + 2 * gamma + 2
        p_new = p - p_s + 2 * gamma + 2 * q
        if chi_new > 2 or chi_new % 2 or p_new < 0:
            raise MoveRejected("destabilize.profile",
                               f"no surface with euler characteristic {chi_new} and {p_new} punctures")
        new_surface = Surface((2 - chi_new) // 2, p_new)
        side_minus = tuple(x for x in side_cb.minus if x not in s_ids)
        far_minus = far_cb.minus + s_ids
        default_side = None  # solve below
        default_far = None

    def pick(explicit: Tangle | None, default: Tangle | None,
             minus: tuple[str, ...], loops: int, who: str) -> Tangle:
        if explicit is not None:
            return explicit
        if default is not None:
            return default
        solved = solve_tangle(new_surface, [cx.level_surface(x) for x in minus], loops=loops)
        if solved is None:
            raise MoveRejected("destabilize.tangle", f"no feasible tangle for the {who} body")
        return solved

    explicit_side = m.tangle_up if m.side == "up" else m.tangle_down
    explicit_far = m.tangle_down if m.side == "up" else m.tangle_up
    tangle_side = pick(explicit_side, default_side, side_minus, side_cb.tangle.loops, "near")
    tangle_far = pick(explicit_far, default_far, far_minus, far_cb.tangle.loops, "far")

    cbs = dict(cx.cbs)
    cbs[side_id] = replace(side_cb, minus=side_minus, tangle=tangle_side,
                           product_certificate=False, ball_certificate=False)
    cbs[far_id] = replace(far_cb, minus=far_minus, tangle=tangle_far,
                          product_certificate=False, ball_certificate=False)
    thick = dict(cx.thick)
    thick[m.thick] = replace(H, surface=new_surface)
    boundary = dict(cx.boundary)
    for s in s_ids:
        boundary[s] = replace(boundary[s], owner=far_id)
    result = Complex(thick=thick, thin=dict(cx.thin), boundary=boundary, cbs=cbs)
    result = _refresh_certificates(result, {side_id, far_id})
    report = validate(result)
    if not report.ok:
        raise MoveRejected("destabilize.result_invalid", str(report))

    if body_index(result, cx.thick[m.thick].upper_cb) >= body_index(cx, H.upper_cb):
        raise MoveRejected("destabilize.upper_drop", "upper body index must drop strictly")
    if body_index(result, cx.thick[m.thick].lower_cb) >= body_index(cx, H.lower_cb):
        raise MoveRejected("destabilize.lower_drop", "lower body index must drop strictly")
    return _accept(cx, result, "destabilize")


# ---------------------------------------------------------------------------
# Unperturbing and removable arcs
# ---------------------------------------------------------------------------

def apply_unperturb(cx: Complex, m: Unperturb) -> Complex:
    """Cancel a perturbing disc pair: two punctures and a bridge arc on each
    side disappear; on the far side the merge consumes a second bridge arc
    (``bridge_bridge``) or pairs with a vertical arc (``vertical_bridge``),
    leaving vertical counts unchanged either way."""
    require_valid(cx)
    if m.thick not in cx.thick:
        raise MoveRejected("unperturb.thick", f"unknown thick level {m.thick!r}")
    if m.merge_case not in ("bridge_bridge", "vertical_bridge"):
        raise MoveRejected("unperturb.case", f"unknown merge case {m.merge_case!r}")
    H = cx.thick[m.thick]
    if H.surface.punctures < 2:
        raise MoveRejected("unperturb.punctures", "the level meets the graph fewer than twice")
    near_id, far_id = _side_cbs(cx, m.thick, m.near_side)
    near, far = cx.cbs[near_id], cx.cbs[far_id]
    if near.tangle.bridges < 1 or far.tangle.bridges < 1:
        raise MoveRejected("unperturb.bridges", "both side bodies need a bridge arc")
    if m.merge_case == "bridge_bridge" and far.tangle.bridges < 2:
        raise MoveRejected("unperturb.bridges", "bridge-bridge merge needs two far bridge arcs")
    if m.merge_case == "vertical_bridge" and far.tangle.verticals < 1:
        raise MoveRejected("unperturb.verticals", "vertical-bridge merge needs a far vertical arc")

    cbs = dict(cx.cbs)
    cbs[near_id] = replace(near, tangle=replace(near.tangle, bridges=near.tangle.bridges - 1),
                           product_certificate=False, ball_certificate=False)
    cbs[far_id] = replace(far, tangle=replace(far.tangle, bridges=far.tangle.bridges - 1),
                          product_certificate=False, ball_certificate=False)
    thick = dict(cx.thick)
    thick[m.thick] = replace(H, surface=Surface(H.surface.genus, H.surface.punctures - 2))
    result = Complex(thick=thick, thin=dict(cx.thin), boundary=dict(cx.boundary), cbs=cbs)
    result = _refresh_certificates(result, {near_id, far_id})
    report = validate(result)
    if not report.ok:
        raise MoveRejected("unperturb.result_invalid", str(report))
    return _accept(cx, result, "unperturb")


def apply_undo_removable(cx: Complex, m: UndoRemovable) -> Complex:
    """Pull a removable component off the level: two punctures fewer.

    Default pattern: one bridge arc on each side fuses into a core loop on
    ``loop_side``.  A general redistribution may supply both new tangles,
    subject to conservation against the two-fewer-punctures level.
    """
    require_valid(cx)
    if m.thick not in cx.thick:
        raise MoveRejected("undo_removable.thick", f"unknown thick level {m.thick!r}")
    H = cx.thick[m.thick]
    if H.surface.punctures < 2:
        raise MoveRejected("undo_removable.punctures", "the level meets the graph fewer than twice")
    up_id, down_id = cx.thick[m.thick].upper_cb, cx.thick[m.thick].lower_cb
    up, down = cx.cbs[up_id], cx.cbs[down_id]

    if m.tangle_up is not None and m.tangle_down is not None:
        t_up, t_down = m.tangle_up, m.tangle_down
    elif m.tangle_up is None and m.tangle_down is None:
        if up.tangle.bridges < 1 or down.tangle.bridges < 1:
            raise MoveRejected("undo_removable.bridges", "loop pattern needs a bridge arc on each side")
        t_up = replace(up.tangle, bridges=up.tangle.bridges - 1)
        t_down = replace(down.tangle, bridges=down.tangle.bridges - 1)
        if m.loop_side == "up":
            t_up = replace(t_up, loops=t_up.loops + 1)
        elif m.loop_side == "down":
            t_down = replace(t_down, loops=t_down.loops + 1)
        else:
            raise MoveRejected("move.side", f"side must be 'up' or 'down', not {m.loop_side!r}")
    else:
        raise MoveRejected("undo_removable.redistribution",
                           "a general redistribution supplies both tangles")

    cbs = dict(cx.cbs)
    cbs[up_id] = replace(up, tangle=t_up, product_certificate=False, ball_certificate=False)
    cbs[down_id] = replace(down, tangle=t_down, product_certificate=False, ball_certificate=False)
    thick = dict(cx.thick)
    thick[m.thick] = replace(H, surface=Surface(H.surface.genus, H.surface.punctures - 2))
    result = Complex(thick=thick, thin=dict(cx.thin), boundary=dict(cx.boundary), cbs=cbs)
    result = _refresh_certificates(result, {up_id, down_id})
    report = validate(result)
    if not report.ok:
        raise MoveRejected("undo_removable.result_invalid", str(report))
    return _accept(cx, result, "undo_removable")


# ---------------------------------------------------------------------------
# Dispatch, reducedness
# ---------------------------------------------------------------------------

def apply_move(cx: Complex, m: Move) -> Complex:
    """Apply any move; untelescope certificates run the full staged sequence."""
    if isinstance(m, Consolidate):
        return apply_consolidate(cx, m)
    if isinstance(m, Untelescope):
        return elementary_thinning_sequence(cx, m)
    if isinstance(m, Destabilize):
        return apply_destabilize(cx, m)
    if isinstance(m, Unperturb):
        return apply_unperturb(cx, m)
    if isinstance(m, UndoRemovable):
        return apply_undo_removable(cx, m)
    raise MoveRejected("move.kind", f"unknown move {m!r}")


def is_reduced(cx: Complex, proposer=None) -> tuple[bool, Move | None]:
    """No certified product touches a thin level and the proposer offers no
    applicable destabilize/unperturb/undo-removable certificate.  The witness
    is the first applicable move when the answer is no."""
    require_valid(cx)
    hit = find_product_on_thin(cx)
    if hit is not None:
        return False, Consolidate(thick=hit[0], thin=hit[1])
    if proposer is not None:
        for move in proposer(cx):
            if not isinstance(move, (Destabilize, Unperturb, UndoRemovable)):
                continue
            try:
                apply_move(cx, move)
            except MoveRejected:
                continue
            return False, move
    return True, None


# ---------------------------------------------------------------------------
# Move document format
# ---------------------------------------------------------------------------

def _emit_tangle_opt(t: Tangle | None):
    return None if t is None else emit_tangle(t)


def emit_move(m: Move) -> dict:
    if isinstance(m, Consolidate):
        return {"kind": "consolidate", "thick": m.thick, "thin": m.thin,
                "merged_tangle": _emit_tangle_opt(m.merged_tangle)}
    if isinstance(m, Untelescope):
        def disc(d: DiscData) -> dict:
            doc: dict = {"q": d.punctures, "separating": d.separating}
            if d.split is not None:
                doc["split"] = {
                    "genus": list(d.split.genus),
                    "punctures": list(d.split.punctures),
                    "ports": [list(d.split.ports[0]), list(d.split.ports[1])],
                }
                if d.split.tangles is not None:
                    doc["split"]["tangles"] = [emit_tangle(t) for t in d.split.tangles]
            return doc

        def spec(t: ThickSpec) -> dict:
            return {"id": t.id,
                    "lower": {"id": t.lower.id, "tangle": _emit_tangle_opt(t.lower.tangle)},
                    "upper": {"id": t.upper.id, "tangle": _emit_tangle_opt(t.upper.tangle)}}

        return {"kind": "untelescope", "thick": m.thick,
                "disc_minus": disc(m.disc_minus), "disc_plus": disc(m.disc_plus),
                "outcome": {"h_minus": spec(m.outcome.h_minus),
                            "h_plus": spec(m.outcome.h_plus),
                            "thin_id": m.outcome.thin_id}}
    if isinstance(m, Destabilize):
        return {"kind": "destabilize", "variant": m.variant, "thick": m.thick,
                "side": m.side, "boundary_ids": list(m.boundary_ids),
                "ghost_arcs": m.ghost_arcs,
                "tangle_up": _emit_tangle_opt(m.tangle_up),
                "tangle_down": _emit_tangle_opt(m.tangle_down)}
    if isinstance(m, Unperturb):
        return {"kind": "unperturb", "thick": m.thick,
                "near_side": m.near_side, "merge_case": m.merge_case}
    if isinstance(m, UndoRemovable):
        return {"kind": "undo_removable", "thick": m.thick, "loop_side": m.loop_side,
                "tangle_up": _emit_tangle_opt(m.tangle_up),
                "tangle_down": _emit_tangle_opt(m.tangle_down)}
    raise SchemaError(f"unknown move {m!r}")


def _parse_tangle_opt(doc, where: str) -> Tangle | None:
    return None if doc is None else parse_tangle(doc, where)


def parse_move(doc: dict) -> Move:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise SchemaError("move: expected an object with a 'kind' field")
    kind = doc["kind"]
    if kind == "consolidate":
        return Consolidate(str(doc["thick"]), str(doc["thin"]),
                           _parse_tangle_opt(doc.get("merged_tangle"), "merged_tangle"))
    if kind == "untelescope":
        def disc(d: dict, where: str) -> DiscData:
            if not isinstance(d, dict):
                raise SchemaError(f"{where}: expected an object")
            split = None
            if d.get("split") is not None:
                s = d["split"]
                tangles = None
                if s.get("tangles") is not None:
                    tangles = (parse_tangle(s["tangles"][0], where),
                               parse_tangle(s["tangles"][1], where))
                split = SplitData(
                    (int(s["genus"][0]), int(s["genus"][1])),
                    (int(s["punctures"][0]), int(s["punctures"][1])),
                    (tuple(map(str, s["ports"][0])), tuple(map(str, s["ports"][1]))),
                    tangles,
                )
            return DiscData(int(d.get("q", 0)), bool(d.get("separating", False)), split)

        def spec(s: dict, where: str) -> ThickSpec:
            return ThickSpec(
                str(s["id"]),
                BodySpec(str(s["lower"]["id"]), _parse_tangle_opt(s["lower"].get("tangle"), where)),
                BodySpec(str(s["upper"]["id"]), _parse_tangle_opt(s["upper"].get("tangle"), where)),
            )

        out = doc["outcome"]
        return Untelescope(
            str(doc["thick"]),
            disc(doc["disc_minus"], "disc_minus"),
            disc(doc["disc_plus"], "disc_plus"),
            UntelescopeOutcome(spec(out["h_minus"], "h_minus"),
                               spec(out["h_plus"], "h_plus"),
                               str(out["thin_id"])),
        )
    if kind == "destabilize":
        return Destabilize(
            str(doc["variant"]), str(doc["thick"]), str(doc.get("side", "up")),
            tuple(map(str, doc.get("boundary_ids", []))), int(doc.get("ghost_arcs", 0)),
            _parse_tangle_opt(doc.get("tangle_up"), "tangle_up"),
            _parse_tangle_opt(doc.get("tangle_down"), "tangle_down"),
        )
    if kind == "unperturb":
        return Unperturb(str(doc["thick"]), str(doc.get("near_side", "up")),
                         str(doc.get("merge_case", "bridge_bridge")))
    if kind == "undo_removable":
        return UndoRemovable(str(doc["thick"]), str(doc.get("loop_side", "down")),
                             _parse_tangle_opt(doc.get("tangle_up"), "tangle_up"),
                             _parse_tangle_opt(doc.get("tangle_down"), "tangle_down"))
    raise SchemaError(f"unknown move kind {kind!r}")

"""Data model for oriented leveled splittings of (3-manifold, graph) pairs.

A complex records a multilevel splitting in summary form: closed orientable
surfaces are (genus, puncture count) pairs, and each compression body between
levels is a boundary-and-tangle summary rather than an embedding. Topological
claims that cannot be decided from summary data (e.g. that a piece really is a
trivial product) travel as explicit certificate flags on the compression body;
every numeric consequence of such a claim is enforced here.

Levels come in three kinds:

* A *thick* level separates two distinct compression bodies that share it as
  their positive boundary; the transverse orientation points out of the lower
  body and into the upper one.
* A *thin* level lies in the negative boundary of exactly two compression
  bodies.  ``from_cb`` names the upper body the orientation exits, ``to_cb``
  the lower body it enters, so each thin level induces one edge of the flow
  digraph on thick levels.
* A *boundary* level is a component of the ambient boundary, owned by the one
  compression body whose negative boundary contains it.  Drilled-out graph
  vertices appear as boundary spheres with at least three punctures.

Tangles are summarised by four counts: vertical arcs (one end on the positive
boundary, one on the negative), bridge arcs (both ends positive), ghost arcs
(both ends negative) and closed core loops.  Puncture conservation ties these
counts to the surface data, and a handle-feasibility bound ties ghost arcs and
core loops to the available genus; together these make the body index (a
handle-count proxy) even, non-negative, and exactly 0 / 4 / at least 6 on the
ball / ball-with-arc / all other profiles.

All values are immutable; operations are pure functions and never mutate a
complex, so instances can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = [
    "Surface",
    "Tangle",
    "CompressionBody",
    "ThickLevel",
    "ThinLevel",
    "BoundaryLevel",
    "Complex",
    "Violation",
    "ValidationReport",
    "ValidationError",
    "SchemaError",
    "euler_char",
    "validate",
    "require_valid",
    "body_index",
    "empty_body_index",
    "is_product_profile",
    "is_ball_profile",
    "thick_digraph",
    "digraph_cycle",
    "parse_complex",
    "emit_complex",
    "build_complex",
]


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Surface:
    """A closed orientable surface transverse to the graph.

    ``genus`` is the genus of the closed surface and ``punctures`` the number
    of intersections with the graph.  Euler characteristic is always taken of
    the closed surface, so it is even and at most 2.

    >>> Surface(2, 3)
    Surface(genus=2, punctures=3)
    """

    genus: int
    punctures: int


def euler_char(s: Surface) -> int:
    """Euler characteristic of the closed surface, ``2 - 2 * genus``.

    >>> euler_char(Surface(0, 5))
    2
    >>> euler_char(Surface(3, 0))
    -4
    """
    return 2 - 2 * s.genus


@dataclass(frozen=True)
class Tangle:
    """Arc-type counts for the graph pieces inside one compression body."""

    verticals: int = 0
    bridges: int = 0
    ghosts: int = 0
    loops: int = 0

    def counts(self) -> tuple[int, int, int, int]:
        return (self.verticals, self.bridges, self.ghosts, self.loops)


EMPTY_TANGLE = Tangle(0, 0, 0, 0)


@dataclass(frozen=True)
class CompressionBody:
    """Boundary-and-tangle summary of one piece of the cut-open pair.

    ``plus`` names the thick level carrying the positive boundary; ``minus``
    lists the thin/boundary levels in the negative boundary.  The certificate
    flags assert triviality of the piece (as a product over its single minus
    level, or as a ball); validation checks the numeric conditions each flag
    forces but cannot, and does not try to, decide the converse.
    """

    id: str
    plus: str
    minus: tuple[str, ...] = ()
    tangle: Tangle = EMPTY_TANGLE
    product_certificate: bool = False
    ball_certificate: bool = False

    def __post_init__(self):
        # canonical port order keeps value equality independent of input order
        object.__setattr__(self, "minus", tuple(sorted(self.minus)))


@dataclass(frozen=True)
class ThickLevel:
    id: str
    surface: Surface
    upper_cb: str
    lower_cb: str


@dataclass(frozen=True)
class ThinLevel:
    id: str
    surface: Surface
    from_cb: str
    to_cb: str


@dataclass(frozen=True)
class BoundaryLevel:
    id: str
    surface: Surface
    owner: str
    is_drilled_vertex: bool = False


@dataclass(frozen=True)
class Complex:
    """An oriented leveled splitting, keyed by level / body ids."""

    thick: dict[str, ThickLevel] = field(default_factory=dict)
    thin: dict[str, ThinLevel] = field(default_factory=dict)
    boundary: dict[str, BoundaryLevel] = field(default_factory=dict)
    cbs: dict[str, CompressionBody] = field(default_factory=dict)

    def level_surface(self, level_id: str) -> Surface:
        """Surface of any level, whatever its kind. KeyError if unknown."""
        if level_id in self.thin:
            return self.thin[level_id].surface
        if level_id in self.boundary:
            return self.boundary[level_id].surface
        return self.thick[level_id].surface

    def minus_surfaces(self, cb: CompressionBody) -> list[Surface]:
        out = []
        for port in cb.minus:
            if port in self.thin:
                out.append(self.thin[port].surface)
            elif port in self.boundary:
                out.append(self.boundary[port].surface)
            else:
                raise KeyError(port)
        return out


def build_complex(
    thick: list[ThickLevel] | tuple[ThickLevel, ...] = (),
    thin: list[ThinLevel] | tuple[ThinLevel, ...] = (),
    boundary: list[BoundaryLevel] | tuple[BoundaryLevel, ...] = (),
    cbs: list[CompressionBody] | tuple[CompressionBody, ...] = (),
) -> Complex:
    """Assemble a complex from record lists, rejecting duplicate ids."""
    cx = Complex(
        thick={t.id: t for t in thick},
        thin={t.id: t for t in thin},
        boundary={b.id: b for b in boundary},
        cbs={c.id: c for c in cbs},
    )
    seen: set[str] = set()
    for pool in (cx.thick, cx.thin, cx.boundary, cx.cbs):
        for key in pool:
            if key in seen:
                raise SchemaError(f"duplicate id {key!r}")
            seen.add(key)
    if len(cx.thick) != len(thick) or len(cx.thin) != len(thin) \
            or len(cx.boundary) != len(boundary) or len(cx.cbs) != len(cbs):
        raise SchemaError("duplicate id within a collection")
    return cx


# ---------------------------------------------------------------------------
# Errors and reports
# ---------------------------------------------------------------------------

class SchemaError(ValueError):
    """Raised for malformed documents: bad types, missing fields, dup ids."""


@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.subject}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "\n".join(str(v) for v in self.violations)


class ValidationError(ValueError):
    """Raised when an operation requiring a valid complex gets an invalid one."""

    def __init__(self, report: ValidationReport):
        super().__init__(str(report))
        self.report = report


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _check_surface(subject: str, s: Surface, out: list[Violation]) -> None:
    if not isinstance(s.genus, int) or s.genus < 0:
        out.append(Violation("genus_negative", subject, f"genus {s.genus!r} must be a non-negative integer"))
    if not isinstance(s.punctures, int) or s.punctures < 0:
        out.append(Violation("punctures_negative", subject, f"punctures {s.punctures!r} must be a non-negative integer"))


def _check_tangle(subject: str, t: Tangle, out: list[Violation]) -> None:
    for name, n in zip(("verticals", "bridges", "ghosts", "loops"), t.counts()):
        if not isinstance(n, int) or n < 0:
            out.append(Violation("tangle_negative", subject, f"{name} {n!r} must be a non-negative integer"))


def ghost_excess(ghosts: int, anchors: int) -> int:
    """Least genus the ghost arcs force beyond the minus-side genus.

    Ghost arcs end on graph punctures of minus-side levels, so only levels
    that carry punctures (``anchors``) can hold them.  Spread over the
    anchors as a forest they are free; every arc beyond a spanning forest
    closes a cycle in the spine and forces one handle on the positive side.
    """
    return max(0, ghosts - max(0, anchors - 1))


def _check_cb(cx: Complex, cb: CompressionBody, out: list[Violation]) -> None:
    sub = cb.id
    _check_tangle(sub, cb.tangle, out)

    if cb.plus not in cx.thick:
        out.append(Violation("dangling_reference", sub, f"plus level {cb.plus!r} is not a thick level"))
        return
    plus = cx.thick[cb.plus].surface

    minus: list[Surface] = []
    broken = False
    for port in cb.minus:
        if port in cx.thin:
            minus.append(cx.thin[port].surface)
        elif port in cx.boundary:
            minus.append(cx.boundary[port].surface)
        else:
            out.append(Violation("dangling_reference", sub, f"minus port {port!r} is not a thin or boundary level"))
            broken = True
    if broken:
        return
    if len(set(cb.minus)) != len(cb.minus):
        out.append(Violation("port_multiplicity", sub, "repeated minus port"))
        return

    t = cb.tangle
    if any(n < 0 or not isinstance(n, int) for n in t.counts()):
        return  # counted above; arithmetic below would be meaningless
    p_plus = plus.punctures
    p_minus = sum(s.punctures for s in minus)
    if p_plus != t.verticals + 2 * t.bridges:
        out.append(Violation(
            "conservation_up", sub,
            f"positive punctures {p_plus} != verticals + 2*bridges = {t.verticals + 2 * t.bridges}"))
    if p_minus != t.verticals + 2 * t.ghosts:
        out.append(Violation(
            "conservation_down", sub,
            f"negative punctures {p_minus} != verticals + 2*ghosts = {t.verticals + 2 * t.ghosts}"))

    g_minus = sum(s.genus for s in minus)
    if plus.genus < g_minus:
        out.append(Violation(
            "genus_feasibility", sub,
            f"positive genus {plus.genus} < total negative genus {g_minus}"))
    else:
        anchors = sum(1 for s in minus if s.punctures > 0)
        need = g_minus + t.loops + ghost_excess(t.ghosts, anchors)
        if plus.genus < need:
            out.append(Violation(
                "handle_feasibility", sub,
                f"positive genus {plus.genus} cannot carry {t.ghosts} ghost arcs and "
                f"{t.loops} core loops over {anchors} punctured negative levels "
                f"(needs {need})"))

    if cb.product_certificate and cb.ball_certificate:
        out.append(Violation("certificate_conflict", sub, "product and ball certificates are mutually exclusive"))
    if cb.product_certificate:
        if len(cb.minus) != 1:
            out.append(Violation("product_certificate", sub, "product piece must have exactly one negative level"))
        else:
            m = minus[0]
            if m.genus != plus.genus or m.punctures != plus.punctures:
                out.append(Violation("product_certificate", sub, "product piece must have matching boundary surfaces"))
        if (t.bridges, t.ghosts, t.loops) != (0, 0, 0):
            out.append(Violation("product_certificate", sub, "product piece carries only vertical arcs"))
    if cb.ball_certificate:
        if cb.minus:
            out.append(Violation("ball_certificate", sub, "ball piece has empty negative boundary"))
        if plus.genus != 0 or plus.punctures not in (0, 2):
            out.append(Violation("ball_certificate", sub, "ball piece has a sphere with 0 or 2 punctures on top"))
        if t.counts() not in ((0, 0, 0, 0), (0, 1, 0, 0)):
            out.append(Violation("ball_certificate", sub, "ball piece tangle must be empty or one bridge arc"))


def validate(cx: Complex) -> ValidationReport:
    """Check every structural and numeric invariant; never raises.

    Returns an empty report exactly when the complex is well formed: all
    references resolve consistently, every surface/tangle count is a
    non-negative integer, puncture conservation and handle feasibility hold
    for each compression body, certificates match their numeric conditions,
    no once-punctured sphere occurs as a thin or boundary level, and the flow
    digraph on thick levels is acyclic and non-empty.
    """
    out: list[Violation] = []

    for t in cx.thick.values():
        _check_surface(t.id, t.surface, out)
    for t in cx.thin.values():
        _check_surface(t.id, t.surface, out)
        if t.surface.genus == 0 and t.surface.punctures == 1:
            out.append(Violation("thin_once_punctured_sphere", t.id,
                                 "a thin level may not be a once-punctured sphere"))
    for b in cx.boundary.values():
        _check_surface(b.id, b.surface, out)
        if b.surface.genus == 0 and b.surface.punctures == 1:
            out.append(Violation("boundary_once_punctured_sphere", b.id,
                                 "a boundary level may not be a once-punctured sphere"))
        if b.is_drilled_vertex and (b.surface.genus != 0 or b.surface.punctures < 3):
            out.append(Violation("drilled_vertex_profile", b.id,
                                 "a drilled vertex is a sphere with at least three punctures"))

    if not cx.thick:
        out.append(Violation("empty_complex", "-", "a complex has at least one thick level"))

    # Which body is the upper / lower side of which thick level.
    upper_of: dict[str, str] = {}
    lower_of: dict[str, str] = {}
    for t in cx.thick.values():
        if t.upper_cb == t.lower_cb:
            out.append(Violation("thick_sides", t.id, "upper and lower bodies must be distinct"))
        for role, cb_id in (("upper", t.upper_cb), ("lower", t.lower_cb)):
            if cb_id not in cx.cbs:
                out.append(Violation("dangling_reference", t.id, f"{role} body {cb_id!r} unknown"))
            else:
                if cx.cbs[cb_id].plus != t.id:
                    out.append(Violation("plus_mismatch", t.id,
                                         f"{role} body {cb_id!r} does not name this level as its positive boundary"))
                (upper_of if role == "upper" else lower_of)[cb_id] = t.id

    for cb in cx.cbs.values():
        _check_cb(cx, cb, out)
        roles = (cb.id in upper_of) + (cb.id in lower_of)
        if cb.plus in cx.thick and roles != 1:
            out.append(Violation("plus_mismatch", cb.id,
                                 "body must be the upper or lower side of exactly one thick level"))

    # Port incidence: a thin level lies in the minus set of exactly its two
    # named bodies, a boundary level in exactly its owner's.
    holders: dict[str, list[str]] = {}
    for cb in cx.cbs.values():
        for port in cb.minus:
            holders.setdefault(port, []).append(cb.id)
    for t in cx.thin.values():
        if t.from_cb == t.to_cb:
            out.append(Violation("thin_endpoints", t.id, "sides of a thin level must be distinct bodies"))
        expected = {t.from_cb, t.to_cb}
        if not expected <= set(cx.cbs):
            out.append(Violation("dangling_reference", t.id, "thin level names an unknown body"))
            continue
        got = sorted(holders.get(t.id, []))
        if got != sorted(expected):
            out.append(Violation("port_multiplicity", t.id,
                                 f"thin level held by {got} but names {sorted(expected)}"))
        if t.from_cb not in upper_of:
            out.append(Violation("orientation_coherence", t.id,
                                 "orientation must exit an upper body"))
        if t.to_cb not in lower_of:
            out.append(Violation("orientation_coherence", t.id,
                                 "orientation must enter a lower body"))
    for b in cx.boundary.values():
        if b.owner not in cx.cbs:
            out.append(Violation("dangling_reference", b.id, "owner body unknown"))
            continue
        got = holders.get(b.id, [])
        if got != [b.owner]:
            out.append(Violation("port_multiplicity", b.id,
                                 f"boundary level held by {sorted(got)} but owned by {b.owner!r}"))

    cycle = digraph_cycle(thick_digraph(cx))
    if cycle is not None:
        out.append(Violation("closed_flow_line", "->".join(cycle),
                             "closed flow line through thick levels " + " -> ".join(cycle)))

    return ValidationReport(tuple(out))


def require_valid(cx: Complex) -> None:
    report = validate(cx)
    if not report.ok:
        raise ValidationError(report)


# ---------------------------------------------------------------------------
# Index of a compression body
# ---------------------------------------------------------------------------

def body_index(cx: Complex, cb_id: str) -> int:
    """Handle-count proxy of one compression body: even and non-negative.

    Computed as ``3 * (-chi(plus) + chi(minus)) + 2 * (p(plus) - p(minus)) + 6``
    from the boundary surfaces alone.  On a valid body it is 0 exactly for the
    ball profile, 4 exactly for the ball-with-one-bridge-arc profile, and at
    least 6 otherwise.
    """
    if cb_id not in cx.cbs:
        raise ValidationError(ValidationReport((
            Violation("dangling_reference", cb_id, "unknown compression body"),)))
    cb = cx.cbs[cb_id]
    local: list[Violation] = []
    _check_cb(cx, cb, local)
    if local:
        raise ValidationError(ValidationReport(tuple(local)))
    plus = cx.thick[cb.plus].surface
    minus = cx.minus_surfaces(cb)
    chi_plus = euler_char(plus)
    chi_minus = sum(euler_char(s) for s in minus)
    p_plus = plus.punctures
    p_minus = sum(s.punctures for s in minus)
    return 3 * (-chi_plus + chi_minus) + 2 * (p_plus - p_minus) + 6


def empty_body_index() -> int:
    """Index of the empty piece, by convention 0."""
    return 0


def is_product_profile(cx: Complex, cb: CompressionBody) -> bool:
    """Numeric triviality test for a product piece (necessary conditions)."""
    if len(cb.minus) != 1:
        return False
    plus = cx.thick[cb.plus].surface
    m = cx.level_surface(cb.minus[0])
    t = cb.tangle
    return (plus.genus == m.genus and plus.punctures == m.punctures
            and t.bridges == 0 and t.ghosts == 0 and t.loops == 0)


def is_ball_profile(cx: Complex, cb: CompressionBody) -> bool:
    """Numeric triviality test for a ball piece (necessary conditions)."""
    if cb.minus:
        return False
    plus = cx.thick[cb.plus].surface
    return (plus.genus == 0 and plus.punctures in (0, 2)
            and cb.tangle.counts() in ((0, 0, 0, 0), (0, 1, 0, 0)))


# ---------------------------------------------------------------------------
# Flow digraph
# ---------------------------------------------------------------------------

def thick_digraph(cx: Complex) -> dict[str, list[str]]:
    """Edge multiset on thick levels, one edge per thin level.

    The edge runs from the thick level whose upper body the thin level exits
    to the one whose lower body it enters.
    """
    thick_of_upper = {t.upper_cb: t.id for t in cx.thick.values()}
    thick_of_lower = {t.lower_cb: t.id for t in cx.thick.values()}
    edges: dict[str, list[str]] = {t: [] for t in cx.thick}
    for f in cx.thin.values():
        src = thick_of_upper.get(f.from_cb)
        dst = thick_of_lower.get(f.to_cb)
        if src is not None and dst is not None:
            edges[src].append(dst)
    for outs in edges.values():
        outs.sort()
    return edges


def digraph_cycle(edges: dict[str, list[str]]) -> list[str] | None:
    """Return some directed cycle as a node list, or None if acyclic."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in edges}
    stack: list[str] = []

    def visit(n: str) -> list[str] | None:
        color[n] = GREY
        stack.append(n)
        for m in edges.get(n, ()):
            if color.get(m, WHITE) == GREY:
                return stack[stack.index(m):] + [m]
            if color.get(m, WHITE) == WHITE:
                found = visit(m)
                if found:
                    return found
        stack.pop()
        color[n] = BLACK
        return None

    for n in sorted(edges):
        if color[n] == WHITE:
            found = visit(n)
            if found:
                return found
    return None


# ---------------------------------------------------------------------------
# JSON document format
# ---------------------------------------------------------------------------

_TANGLE_KEYS = ("v", "b", "gh", "loops")


def _need(obj: dict, key: str, kind: type, where: str):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    val = obj[key]
    if kind is int and isinstance(val, bool):
        raise SchemaError(f"{where}.{key}: expected an integer")
    if not isinstance(val, kind):
        raise SchemaError(f"{where}.{key}: expected {kind.__name__}")
    return val


def parse_surface(obj: dict, where: str = "surface") -> Surface:
    return Surface(_need(obj, "genus", int, where), _need(obj, "punctures", int, where))


def emit_surface(s: Surface) -> dict:
    return {"genus": s.genus, "punctures": s.punctures}


def parse_tangle(obj: dict, where: str = "tangle") -> Tangle:
    return Tangle(*(_need(obj, k, int, where) for k in _TANGLE_KEYS))


def emit_tangle(t: Tangle) -> dict:
    return dict(zip(_TANGLE_KEYS, t.counts()))


def parse_complex(doc: dict) -> Complex:
    """Decode the instance document format; raises SchemaError when malformed.

    Top-level keys are ``thick``, ``thin``, ``boundary`` and ``cbs``; ids are
    strings; surfaces are ``{"genus": int, "punctures": int}``; tangles are
    ``{"v": int, "b": int, "gh": int, "loops": int}``; certificates are
    booleans.  Domain invariants are *not* checked here: any well-typed
    document parses and is then judged by :func:`validate`.
    """
    if not isinstance(doc, dict):
        raise SchemaError("instance: expected a JSON object")
    thick = []
    for item in doc.get("thick", []):
        thick.append(ThickLevel(
            _need(item, "id", str, "thick"),
            parse_surface(_need(item, "surface", dict, "thick"), "thick.surface"),
            _need(item, "upper_cb", str, "thick"),
            _need(item, "lower_cb", str, "thick"),
        ))
    thin = []
    for item in doc.get("thin", []):
        thin.append(ThinLevel(
            _need(item, "id", str, "thin"),
            parse_surface(_need(item, "surface", dict, "thin"), "thin.surface"),
            _need(item, "from_cb", str, "thin"),
            _need(item, "to_cb", str, "thin"),
        ))
    boundary = []
    for item in doc.get("boundary", []):
        boundary.append(BoundaryLevel(
            _need(item, "id", str, "boundary"),
            parse_surface(_need(item, "surface", dict, "boundary"), "boundary.surface"),
            _need(item, "owner", str, "boundary"),
            bool(item.get("is_drilled_vertex", False)),
        ))
    cbs = []
    for item in doc.get("cbs", []):
        minus = item.get("minus", [])
        if not isinstance(minus, list) or not all(isinstance(x, str) for x in minus):
            raise SchemaError("cbs.minus: expected a list of ids")
        cbs.append(CompressionBody(
            _need(item, "id", str, "cbs"),
            _need(item, "plus", str, "cbs"),
            tuple(minus),
            parse_tangle(_need(item, "tangle", dict, "cbs"), "cbs.tangle"),
            bool(item.get("product_certificate", False)),
            bool(item.get("ball_certificate", False)),
        ))
    return build_complex(thick, thin, boundary, cbs)


def emit_complex(cx: Complex) -> dict:
    """Encode to the instance document format, deterministically ordered."""
    return {
        "thick": [
            {"id": t.id, "surface": emit_surface(t.surface),
             "upper_cb": t.upper_cb, "lower_cb": t.lower_cb}
            for t in sorted(cx.thick.values(), key=lambda t: t.id)
        ],
        "thin": [
            {"id": t.id, "surface": emit_surface(t.surface),
             "from_cb": t.from_cb, "to_cb": t.to_cb}
            for t in sorted(cx.thin.values(), key=lambda t: t.id)
        ],
        "boundary": [
            {"id": b.id, "surface": emit_surface(b.surface),
             "owner": b.owner, "is_drilled_vertex": b.is_drilled_vertex}
            for b in sorted(cx.boundary.values(), key=lambda b: b.id)
        ],
        "cbs": [
            {"id": c.id, "plus": c.plus, "minus": sorted(c.minus),
             "tangle": emit_tangle(c.tangle),
             "product_certificate": c.product_certificate,
             "ball_certificate": c.ball_certificate}
            for c in sorted(cx.cbs.values(), key=lambda c: c.id)
        ],
    }

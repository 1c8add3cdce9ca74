"""Flow reachability, per-level indices, and the lexicographic complexity.

For a thick level H, the upper index aggregates the body indices of all upper
compression bodies reachable along flow lines starting at H (H itself
included), discounted 6 per body; the lower index is the mirror image.  Both
are non-negative on any valid complex.  The complexity of a complex is the
non-increasing sequence of per-level totals, compared lexicographically with
the shorter vector padded by -1, so that removing any entry from a
non-increasing non-negative vector strictly decreases it.
"""

from __future__ import annotations

from dataclasses import replace

from .model import (
    Complex,
    ValidationError,
    ValidationReport,
    Violation,
    body_index,
    require_valid,
    thick_digraph,
)

__all__ = [
    "reach_up",
    "reach_down",
    "index_up",
    "index_down",
    "total_index",
    "complexity",
    "compare",
    "LT",
    "EQ",
    "GT",
    "reverse_orientation",
    "complexity_table",
]

LT, EQ, GT = -1, 0, 1


def _known_thick(cx: Complex, thick_id: str) -> None:
    if thick_id not in cx.thick:
        raise ValidationError(ValidationReport((
            Violation("dangling_reference", thick_id, "unknown thick level"),)))


def _reach(edges: dict[str, list[str]], start: str) -> frozenset[str]:
    seen = {start}
    todo = [start]
    while todo:
        n = todo.pop()
        for m in edges.get(n, ()):
            if m not in seen:
                seen.add(m)
                todo.append(m)
    return frozenset(seen)


def reach_up(cx: Complex, thick_id: str) -> frozenset[str]:
    """Thick levels reachable from ``thick_id`` along flow lines, inclusive."""
    _known_thick(cx, thick_id)
    return _reach(thick_digraph(cx), thick_id)


def reach_down(cx: Complex, thick_id: str) -> frozenset[str]:
    """Thick levels from which ``thick_id`` is reachable, inclusive."""
    _known_thick(cx, thick_id)
    reversed_edges: dict[str, list[str]] = {t: [] for t in cx.thick}
    for src, outs in thick_digraph(cx).items():
        for dst in outs:
            reversed_edges[dst].append(src)
    return _reach(reversed_edges, thick_id)


def index_up(cx: Complex, thick_id: str) -> int:
    """Aggregate index of the upper bodies at and above a thick level.

    ``6 - 6*|R| + sum(body_index(upper side of J) for J in R)`` where R is the
    upward reach of the level.  Non-negative on every valid complex.
    """
    reach = reach_up(cx, thick_id)
    return 6 - 6 * len(reach) + sum(body_index(cx, cx.thick[j].upper_cb) for j in reach)


def index_down(cx: Complex, thick_id: str) -> int:
    """Mirror of :func:`index_up`, over lower bodies at and below the level."""
    reach = reach_down(cx, thick_id)
    return 6 - 6 * len(reach) + sum(body_index(cx, cx.thick[j].lower_cb) for j in reach)


def total_index(cx: Complex, thick_id: str) -> int:
    return index_up(cx, thick_id) + index_down(cx, thick_id)


def complexity(cx: Complex) -> tuple[int, ...]:
    """Non-increasing sequence of per-thick-level totals.

    >>> from .model import parse_complex
    >>> cx = parse_complex({
    ...     "thick": [{"id": "H", "surface": {"genus": 0, "punctures": 2},
    ...                "upper_cb": "u", "lower_cb": "d"}],
    ...     "cbs": [{"id": "u", "plus": "H", "minus": [],
    ...              "tangle": {"v": 0, "b": 1, "gh": 0, "loops": 0},
    ...              "ball_certificate": True},
    ...             {"id": "d", "plus": "H", "minus": [],
    ...              "tangle": {"v": 0, "b": 1, "gh": 0, "loops": 0},
    ...              "ball_certificate": True}]})
    >>> complexity(cx)
    (8,)
    """
    require_valid(cx)
    return tuple(sorted((total_index(cx, t) for t in cx.thick), reverse=True))


def compare(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    """Lexicographic comparison; the shorter vector is padded with -1.

    All true entries are non-negative, so a proper prefix is strictly smaller
    than the vector it prefixes, and removing any entry of a non-increasing
    non-negative vector strictly decreases it.  Returns -1, 0 or 1.

    >>> compare((6,), (6, 4))
    -1
    >>> compare((24,), (24,))
    0
    """
    n = max(len(a), len(b))
    pa = tuple(a) + (-1,) * (n - len(a))
    pb = tuple(b) + (-1,) * (n - len(b))
    if pa < pb:
        return LT
    if pa > pb:
        return GT
    return EQ


def reverse_orientation(cx: Complex) -> Complex:
    """Flip every transverse orientation: swaps upper/lower roles everywhere.

    Reversal exchanges index_up and index_down per thick level and leaves the
    complexity vector unchanged.
    """
    return Complex(
        thick={t.id: replace(t, upper_cb=t.lower_cb, lower_cb=t.upper_cb)
               for t in cx.thick.values()},
        thin={f.id: replace(f, from_cb=f.to_cb, to_cb=f.from_cb)
              for f in cx.thin.values()},
        boundary=dict(cx.boundary),
        cbs=dict(cx.cbs),
    )


def complexity_table(cx: Complex) -> list[dict]:
    """Per-thick-level report rows: body indices and aggregate indices."""
    require_valid(cx)
    rows = []
    for t in sorted(cx.thick.values(), key=lambda t: t.id):
        up = index_up(cx, t.id)
        down = index_down(cx, t.id)
        rows.append({
            "id": t.id,
            "body_up": body_index(cx, t.upper_cb),
            "body_down": body_index(cx, t.lower_cb),
            "index_up": up,
            "index_down": down,
            "index": up + down,
        })
    return rows

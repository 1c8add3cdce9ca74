"""Shared instance builders.

The fixtures here are the hand-checked configurations the suite keeps coming
back to: the one-bridge sphere, a two-level chain, and the spherical
splitting whose untelescope is worked out entry by entry in the move tests.
"""

import pytest

from widthcalc.model import (
    BoundaryLevel,
    Complex,
    CompressionBody,
    Surface,
    Tangle,
    ThickLevel,
    ThinLevel,
    build_complex,
)


def thick(id, g, p, upper, lower):
    return ThickLevel(id, Surface(g, p), upper_cb=upper, lower_cb=lower)


def thin(id, g, p, from_cb, to_cb):
    return ThinLevel(id, Surface(g, p), from_cb=from_cb, to_cb=to_cb)


def bdy(id, g, p, owner, drilled=False):
    return BoundaryLevel(id, Surface(g, p), owner=owner, is_drilled_vertex=drilled)


def cb(id, plus, minus=(), v=0, b=0, gh=0, loops=0, product=False, ball=False):
    return CompressionBody(id, plus, tuple(minus), Tangle(v, b, gh, loops),
                           product_certificate=product, ball_certificate=ball)


@pytest.fixture
def one_bridge_sphere() -> Complex:
    """A single bridge sphere with a ball-with-arc body on each side."""
    return build_complex(
        thick=[thick("H", 0, 2, "u", "d")],
        cbs=[cb("u", "H", b=1, ball=True), cb("d", "H", b=1, ball=True)],
    )


@pytest.fixture
def spheres_with_four_ends() -> Complex:
    """One thick sphere; each side is a sphere-with-two-holes onto unpunctured
    boundary spheres.  Both body indices are 12, so the vector is (24,)."""
    return build_complex(
        thick=[thick("H", 0, 0, "u", "d")],
        boundary=[bdy("S1", 0, 0, "d"), bdy("S2", 0, 0, "d"),
                  bdy("S3", 0, 0, "u"), bdy("S4", 0, 0, "u")],
        cbs=[cb("u", "H", minus=("S3", "S4")), cb("d", "H", minus=("S1", "S2"))],
    )


@pytest.fixture
def chain_two() -> Complex:
    """Two thick levels joined by one thin level: H above nothing, flow H -> J."""
    return build_complex(
        thick=[thick("H", 0, 0, "Hu", "Hd"), thick("J", 1, 0, "Ju", "Jd")],
        thin=[thin("F", 0, 0, from_cb="Hu", to_cb="Jd")],
        cbs=[
            cb("Hu", "H", minus=("F",)),
            cb("Hd", "H"),
            cb("Ju", "J"),
            cb("Jd", "J", minus=("F",)),
        ],
    )


@pytest.fixture
def diamond_four() -> Complex:
    """Four thick levels in a diamond H -> {A, B} -> K, four thin levels."""
    levels = [thick("H", 3, 0, "Hu", "Hd"), thick("A", 1, 0, "Au", "Ad"),
              thick("B", 1, 0, "Bu", "Bd"), thick("K", 2, 0, "Ku", "Kd")]
    thins = [thin("FA", 1, 0, from_cb="Hu", to_cb="Ad"),
             thin("FB", 1, 0, from_cb="Hu", to_cb="Bd"),
             thin("GA", 1, 0, from_cb="Au", to_cb="Kd"),
             thin("GB", 1, 0, from_cb="Bu", to_cb="Kd")]
    bodies = [
        cb("Hu", "H", minus=("FA", "FB")),
        cb("Hd", "H"),
        cb("Ad", "A", minus=("FA",)),
        cb("Au", "A", minus=("GA",)),
        cb("Bd", "B", minus=("FB",)),
        cb("Bu", "B", minus=("GB",)),
        cb("Kd", "K", minus=("GA", "GB")),
        cb("Ku", "K"),
    ]
    return build_complex(thick=levels, thin=thins, cbs=bodies)

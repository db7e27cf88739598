import math

import pytest

from squidflux import SquidGeometry, arm_segments, mean_width, perimeter
from squidflux.errors import ValidationError


def geom(X, Y, W, offset=350e-9):
    return SquidGeometry(X=X, Y=Y, W=W, b=190e-9, lam=40e-9, shadow_offset=offset)


def test_perimeter_examples():
    assert perimeter(geom(9.16e-6, 8e-6, 1e-6)) == pytest.approx(38.32e-6, rel=1e-12)
    assert perimeter(geom(6.41e-6, 5.6e-6, 2e-6)) == pytest.approx(32.02e-6, rel=1e-12)


def test_degenerate_geometry_rejected():
    with pytest.raises(ValidationError):
        SquidGeometry(X=0.0, Y=0.0, W=0.0, b=190e-9, lam=40e-9)
    with pytest.raises(ValidationError):
        geom(-1e-6, 8e-6, 1e-6)


def test_perimeter_monotone_in_each_dimension():
    base = geom(9.16e-6, 8e-6, 1e-6)
    p0 = perimeter(base)
    for name in ("X", "Y", "W"):
        kwargs = {"X": base.X, "Y": base.Y, "W": base.W}
        kwargs[name] = kwargs[name] * 1.25
        assert perimeter(geom(kwargs["X"], kwargs["Y"], kwargs["W"])) > p0


def test_edge_parameter_bound_enforced():
    # W <= 2 lam^2 / b puts the edge parameter at or above 1/2
    with pytest.raises(ValidationError):
        SquidGeometry(X=1e-6, Y=1e-6, W=16e-9, b=190e-9, lam=40e-9)


def test_width_bound_against_loop_sides():
    with pytest.raises(ValidationError):
        geom(0.5e-6, 8e-6, 1e-6)


def test_arm_segments_zero_offset():
    g = geom(9.16e-6, 8e-6, 1e-6, offset=0.0)
    segs = arm_segments(g)
    assert all(s.width == g.W for s in segs)
    assert sum(s.length for s in segs) == pytest.approx(perimeter(g), rel=1e-12)


def test_arm_segments_shadow_widening():
    g = geom(9.16e-6, 8e-6, 1e-6)
    widths = sorted({s.width for s in arm_segments(g)})
    assert widths == pytest.approx([1e-6, 1.35e-6], rel=1e-12)
    assert sum(s.length for s in arm_segments(g)) == pytest.approx(perimeter(g), rel=1e-12)


def test_mean_width_zero_offset_is_nominal():
    g = geom(12e-6, 5e-6, 1e-6, offset=0.0)
    assert mean_width(g) == g.W


def test_mean_width_square_loop():
    g = geom(8e-6, 8e-6, 1e-6)
    assert mean_width(g) == pytest.approx(1e-6 + 0.35e-6 / 2, rel=1e-12)


def test_mean_width_varied_y_record():
    # recomputed by hand from the segment lengths (X=18.32, Y=90.51, W=1, offset 0.35 um)
    g = geom(18.32e-6, 90.51e-6, 1e-6)
    assert mean_width(g) == pytest.approx(1.2889876e-6, rel=1e-6)


def test_mean_width_long_vertical_limit():
    g = geom(2e-6, 5000e-6, 1e-6)
    assert math.isclose(mean_width(g), 1.35e-6, rel_tol=2e-3)

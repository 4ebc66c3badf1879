"""Phantom/probe/aberration config parsing and geometry validation."""

import json

import numpy as np
import pytest

from rfpipe.configs import (
    AberrationProfile,
    PointTarget,
    ProbeGeometry,
    aberration_from_dict,
    aberration_to_dict,
    default_phantom,
    parse_phantom,
    phantom_to_dict,
    zero_aberration,
)
from rfpipe.errors import GeometryError, SchemaError

PAPER_PHANTOM = {
    "width_m": 0.045,
    "depth_m": 0.040,
    "scatterer_density": 10.0,
    "cysts": [
        {"x_m": -0.008, "z_m": 0.020, "r_m": 0.003},
        {"x_m": 0.008, "z_m": 0.020, "r_m": 0.003},
    ],
    "point_target": {"x_m": 0.0, "z_m": 0.027, "gain_db": 40.0},
    "seed": 1,
}


def test_paper_phantom_parses():
    p = parse_phantom(json.dumps(PAPER_PHANTOM))
    assert p.width_m == 0.045 and p.depth_m == 0.040
    assert len(p.cysts) == 2
    assert p.point_target is not None and p.point_target.gain_db == 40.0


def test_defaults_applied():
    p = parse_phantom("{}")
    assert p.cysts == ()
    assert p.point_target is None
    assert p.width_m == 0.045 and p.depth_m == 0.040


def test_cyst_outside_extent_rejected():
    # Extent spans z in [z_min, z_min + depth] = [0.005, 0.045] here.
    bad = dict(PAPER_PHANTOM, cysts=[{"x_m": 0.0, "z_m": 0.044, "r_m": 0.003}])
    with pytest.raises(GeometryError):
        parse_phantom(json.dumps(bad))
    shallow = dict(PAPER_PHANTOM, cysts=[{"x_m": 0.0, "z_m": 0.006, "r_m": 0.003}])
    with pytest.raises(GeometryError):
        parse_phantom(json.dumps(shallow))


def test_target_inside_cyst_rejected():
    bad = dict(PAPER_PHANTOM, point_target={"x_m": -0.008, "z_m": 0.020, "gain_db": 40.0})
    with pytest.raises(GeometryError):
        parse_phantom(json.dumps(bad))


def test_unknown_field_rejected():
    with pytest.raises(SchemaError):
        parse_phantom('{"depth": 0.04}')


def test_wrong_type_rejected():
    with pytest.raises(SchemaError):
        parse_phantom('{"width_m": "wide"}')


def test_invalid_json_rejected():
    with pytest.raises(SchemaError):
        parse_phantom("{not json")


def test_phantom_round_trips_through_dict():
    p = parse_phantom(json.dumps(PAPER_PHANTOM))
    again = parse_phantom(json.dumps(phantom_to_dict(p)))
    assert again == p


def test_default_phantom_matches_paper_extent():
    p = default_phantom(seed=0)
    assert (p.width_m, p.depth_m) == (0.045, 0.040)
    assert {(c.x_m, c.z_m, c.r_m) for c in p.cysts} == {
        (-0.005, 0.020, 0.002),
        (0.005, 0.020, 0.002),
    }
    assert p.point_target == PointTarget(0.0, 0.027, 40.0)


def test_probe_positions_symmetric_increasing():
    probe = ProbeGeometry(n_elements=128, pitch_m=0.3e-3)
    x = probe.element_x()
    assert x.size == 128
    assert np.all(np.diff(x) > 0)
    assert np.allclose(x, -x[::-1], atol=0)
    assert abs(x[1] - x[0] - 0.3e-3) < 1e-15


def test_probe_rejects_degenerate():
    with pytest.raises(SchemaError):
        ProbeGeometry(n_elements=1)
    with pytest.raises(SchemaError):
        ProbeGeometry(pitch_m=0.0)


def test_aberration_profile_validates_rms():
    with pytest.raises(SchemaError):
        AberrationProfile(np.array([1e-9, -1e-9]), rms_ns=50.0, corr_len_elements=6.0)


def test_aberration_json_round_trip():
    delays = np.array([30e-9, -30e-9])
    ab = AberrationProfile(delays, rms_ns=30.0, corr_len_elements=2.0, seed=5)
    back = aberration_from_dict(aberration_to_dict(ab))
    assert np.array_equal(back.delays_s, ab.delays_s)
    assert back.seed == 5


def test_zero_aberration_is_zero():
    ab = zero_aberration(8)
    assert np.all(ab.delays_s == 0.0) and ab.n_elements == 8

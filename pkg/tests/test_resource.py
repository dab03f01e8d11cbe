import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from loglab import ResourceProfile, classify_conditions
from loglab.errors import DomainError
from loglab.resource import eval_resource, eval_resource_derivative, positive_part


@pytest.mark.parametrize("profile, x, expected", [
    (ResourceProfile.constant(1.0), 0.37, 1.0),
    (ResourceProfile.linear(0.0, 1.0), 0.5, 0.5),
    (ResourceProfile.cosine_offset(1.0, 3.0), 0.0, 4.0),
])
def test_eval_examples(profile, x, expected):
    assert eval_resource(profile, x) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("profile, x, expected", [
    (ResourceProfile.constant(1.0), 0.61, 0.0),
    (ResourceProfile.linear(0.0, 1.0), 0.2, 1.0),
    (ResourceProfile.cosine_offset(1.0, 3.0), 0.5, -9.42477796076938),
])
def test_derivative_examples(profile, x, expected):
    assert eval_resource_derivative(profile, x) == pytest.approx(expected, rel=1e-14, abs=1e-15)


@pytest.mark.parametrize("x", [-1e-9, 1.0 + 1e-9, math.nan])
def test_outside_unit_interval(x):
    with pytest.raises(DomainError):
        eval_resource(ResourceProfile.linear(), x)


def test_array_evaluation_matches_scalar():
    p = ResourceProfile.sine_offset(1.5, 0.4)
    xs = np.linspace(0, 1, 17)
    assert np.array_equal(p(xs), np.array([p(x) for x in xs]))


def test_preset_by_name_and_unknown_params():
    p = ResourceProfile.preset("cosine_offset", c=2.0, A=0.5)
    assert p.param_dict == {"c": 2.0, "A": 0.5}
    with pytest.raises(ValueError):
        ResourceProfile.preset("cosine_offset", c=1.0, B=1.0)
    with pytest.raises(ValueError):
        ResourceProfile.preset("nope")


def test_sine_offset_conditions():
    r = classify_conditions(ResourceProfile.sine_offset(1.5, 0.4))
    assert r.m0 and r.m1 and not r.m2 and not r.m3
    assert r.m_max == pytest.approx(1.9, abs=1e-12)
    assert r.m_min == pytest.approx(1.1, abs=1e-12)
    assert "m2" in r.witnesses and "m3" in r.witnesses


def test_shifted_ramp_conditions():
    r = classify_conditions(ResourceProfile.shifted_ramp(0.25))
    assert r.m0 and r.mean == pytest.approx(0.25, abs=1e-12)
    assert r.m2 and r.m2_direction == "non-decreasing"
    assert not r.m1 and "m1" in r.witnesses


def test_single_peak_conditions():
    r = classify_conditions(ResourceProfile.single_peak())
    assert r.m3 and r.peak == pytest.approx(0.5, abs=1e-12)
    assert not r.m1


def test_constant_fails_m0_with_witness():
    r = classify_conditions(ResourceProfile.constant(2.0))
    assert not r.m0 and not r.nonconstant
    assert "m0" in r.witnesses


def test_mirrored_ramp_is_non_increasing():
    r = classify_conditions(ResourceProfile.linear(1.0, -1.0))
    assert r.m2 and r.m2_direction == "non-increasing"


def test_negative_mean_fails_m0():
    r = classify_conditions(ResourceProfile.linear(-1.0, 1.0))
    assert not r.m0 and r.mean == pytest.approx(-0.5)


def test_plateau_peak_is_not_single_peak():
    xs = np.linspace(0, 1, 9)
    vals = np.minimum(np.sin(np.pi * xs), 0.8)
    slopes = np.where(vals < 0.8, np.pi * np.cos(np.pi * xs), 0.0)
    r = classify_conditions(ResourceProfile.sampled(xs, vals, slopes))
    assert not r.m3


def test_sampled_reproduces_nodes_and_slopes():
    xs = np.linspace(0, 1, 11)
    p = ResourceProfile.sampled(xs, np.cos(np.pi * xs), -np.pi * np.sin(np.pi * xs))
    assert np.allclose(p(xs), np.cos(np.pi * xs), atol=1e-14)
    assert np.allclose(p.derivative(xs), -np.pi * np.sin(np.pi * xs), atol=1e-13)
    fine = np.linspace(0, 1, 1001)
    assert np.max(np.abs(p(fine) - np.cos(np.pi * fine))) < 1e-4


def test_sampled_rejects_bad_nodes():
    with pytest.raises(ValueError):
        ResourceProfile.sampled([0.0, 0.5], [1.0, 1.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        ResourceProfile.sampled([0.0, 0.6, 0.5, 1.0], [1, 1, 1, 1], [0, 0, 0, 0])


amplitude = st.floats(0.05, 2.0)
offset = st.floats(-1.0, 3.0)
smooth_profiles = st.one_of(
    st.builds(ResourceProfile.sine_offset, offset, amplitude),
    st.builds(ResourceProfile.cosine_offset, offset, amplitude),
    st.builds(ResourceProfile.single_peak, offset, amplitude),
)


@given(smooth_profiles)
def test_derivative_matches_central_difference_second_order(profile):
    xs = np.linspace(0.05, 0.95, 181)

    def fd_error(h):
        fd = (profile(xs + h) - profile(xs - h)) / (2 * h)
        return np.max(np.abs(fd - profile.derivative(xs)))

    assert fd_error(2e-3) / fd_error(1e-3) >= 3.5


positive_profiles = st.one_of(
    st.builds(ResourceProfile.sine_offset, st.floats(2.1, 4.0), st.floats(0.1, 2.0)),
    st.builds(ResourceProfile.cosine_offset, st.floats(2.1, 4.0), st.floats(0.1, 2.0)),
    st.builds(ResourceProfile.single_peak, st.floats(0.1, 2.0), st.floats(0.1, 2.0)),
    st.builds(ResourceProfile.linear, st.floats(0.1, 2.0), st.floats(-0.09, 2.0)),
)


@given(positive_profiles, st.floats(0.1, 10.0))
def test_conditions_scale_consistent(profile, kappa):
    a = classify_conditions(profile)
    b = classify_conditions(profile.scaled(kappa))
    assert (a.m1, a.m2, a.m2_direction, a.m3) == (b.m1, b.m2, b.m2_direction, b.m3)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_positive_part(values):
    v = np.array(values)
    p = positive_part(v)
    assert np.all(p >= 0)
    assert np.array_equal(p[v >= 0], v[v >= 0])

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entrolab.errors import InvalidSpec, IoFailure, TailTruncation
from entrolab.grid import (DEFAULT_CONFIG, DistributionSpec, GridConfig,
                           GridDensity, affine_transform, center, digest_of,
                           materialize, moments)

from conftest import (spec_gaussian, spec_laplace_unit_var, spec_mixture,
                      spec_smoothed_uniform)

trapz = getattr(np, "trapezoid", np.trapz)


# ---------------------------------------------------------------------------
# config and density validation


def test_config_rejects_non_power_of_two():
    with pytest.raises(InvalidSpec):
        GridConfig(num_points=1000)


def test_config_rejects_tiny_grid():
    with pytest.raises(InvalidSpec):
        GridConfig(num_points=8)


def test_config_rejects_narrow_window():
    with pytest.raises(InvalidSpec):
        GridConfig(half_width_sigmas=4.0)


def test_density_rejects_negative_values():
    vals = np.full(32, 1.0 / 31.0)
    vals[5] = -1e-3
    with pytest.raises(InvalidSpec):
        GridDensity(grid_start=0.0, grid_step=1.0, values=vals)


def test_density_rejects_bad_mass():
    vals = np.full(32, 2.0)
    with pytest.raises(InvalidSpec):
        GridDensity(grid_start=0.0, grid_step=1.0, values=vals)


def test_density_flags_truncated_tails():
    # mass fine, but the boundary values are far above tail_eps * peak
    vals = np.full(32, 1.0 / 31.0)
    with pytest.raises(TailTruncation):
        GridDensity(grid_start=0.0, grid_step=1.0, values=vals)


def test_density_values_are_read_only(gauss):
    with pytest.raises(ValueError):
        gauss.values[0] = 1.0


# ---------------------------------------------------------------------------
# spec validation


def test_unknown_family_rejected():
    with pytest.raises(InvalidSpec):
        DistributionSpec("cauchy", {})


def test_unknown_parameter_key_rejected():
    with pytest.raises(InvalidSpec):
        DistributionSpec("gaussian", {"variance": 1.0})


def test_nonpositive_variance_rejected():
    with pytest.raises(InvalidSpec):
        DistributionSpec("gaussian", {"var": -1.0})


def test_raw_uniform_rejected():
    # a hard-edged uniform has infinite Fisher information
    with pytest.raises(InvalidSpec):
        DistributionSpec("smoothed_uniform", {"a": -1.0, "b": 1.0})


def test_mixture_weights_must_sum_to_one():
    with pytest.raises(InvalidSpec):
        DistributionSpec("gaussian_mixture",
                         {"weights": [0.5, 0.4], "means": [0, 1], "vars": [1, 1]})


def test_spec_json_round_trip():
    spec = spec_mixture()
    again = DistributionSpec.from_json(spec.to_json())
    assert again.family == spec.family
    assert again.params == spec.params
    assert again.label == spec.label


def test_spec_from_malformed_json():
    with pytest.raises(InvalidSpec):
        DistributionSpec.from_json("{not json")


def test_spec_from_missing_file():
    with pytest.raises(IoFailure):
        DistributionSpec.from_file("/nonexistent/spec.json")


# ---------------------------------------------------------------------------
# materialization


@pytest.mark.parametrize("spec,mean,var,rel", [
    (spec_gaussian(), 0.0, 1.0, 1e-6),
    (spec_gaussian(var=4.0, mean=2.0), 2.0, 4.0, 1e-6),
    # trapezoid across the Laplace kink costs a few 1e-6 in the variance
    (spec_laplace_unit_var(), 0.0, 1.0, 2e-5),
    (spec_smoothed_uniform(), 0.0, 3.0 ** 2 / 12.0 + 0.05, 1e-6),
    (spec_mixture(), 0.0, 0.3 + 1.2 ** 2, 1e-6),
])
def test_materialize_moments(spec, mean, var, rel):
    d = materialize(spec)
    m, v = moments(d)
    assert m == pytest.approx(mean, abs=1e-8)
    assert v == pytest.approx(var, rel=rel)


def test_materialize_unit_mass(laplace):
    assert laplace.mass() == pytest.approx(1.0, abs=1e-9)


def test_materialize_power_of_two_length():
    d = materialize(spec_gaussian(), GridConfig(num_points=1024))
    assert d.n == 1024


def test_materialize_respects_tail_eps(gauss):
    assert gauss.values[0] <= gauss.tail_eps * gauss.values.max()
    assert gauss.values[-1] <= gauss.tail_eps * gauss.values.max()


def test_resampling_stability_smooth_families():
    # same analytic family at 4096 and 8192 points describes the same density
    for spec in (spec_gaussian(), spec_smoothed_uniform(), spec_mixture()):
        d1 = materialize(spec, GridConfig(num_points=4096))
        d2 = materialize(spec, GridConfig(num_points=8192))
        from entrolab.functionals import l1_distance
        assert l1_distance(d1, d2) < 1e-6, spec.family


def test_resampling_stability_laplace():
    # the kink at the mode caps interpolation accuracy well above the smooth
    # families; the distance is still far below every report tolerance
    from entrolab.functionals import l1_distance
    d1 = materialize(spec_laplace_unit_var(), GridConfig(num_points=4096))
    d2 = materialize(spec_laplace_unit_var(), GridConfig(num_points=8192))
    assert l1_distance(d1, d2) < 1e-4


def test_grid_file_round_trip(tmp_path, mixture):
    path = tmp_path / "density.csv"
    rows = "\n".join(f"{x:.12e},{f:.12e}" for x, f in zip(mixture.x, mixture.values))
    path.write_text(rows + "\n")
    spec = DistributionSpec("grid_file", {"path": str(path)})
    d = materialize(spec)
    m1, v1 = moments(mixture)
    m2, v2 = moments(d)
    assert m2 == pytest.approx(m1, abs=1e-6)
    assert v2 == pytest.approx(v1, rel=1e-6)


def test_grid_file_rejects_nonuniform(tmp_path):
    path = tmp_path / "bad.csv"
    x = np.concatenate([np.linspace(0, 1, 6), [1.5, 2.5]])
    path.write_text("\n".join(f"{xi},1.0" for xi in x) + "\n")
    with pytest.raises(InvalidSpec):
        materialize(DistributionSpec("grid_file", {"path": str(path)}))


# ---------------------------------------------------------------------------
# affine transforms


@settings(max_examples=25, deadline=None)
@given(a=st.floats(min_value=0.25, max_value=4.0),
       b=st.floats(min_value=-3.0, max_value=3.0))
def test_affine_moment_laws(a, b):
    d = materialize(spec_mixture())
    m0, v0 = moments(d)
    t = affine_transform(d, a, b)
    m1, v1 = moments(t)
    assert m1 == pytest.approx(a * m0 + b, abs=1e-9)
    assert v1 == pytest.approx(a * a * v0, rel=1e-12)


def test_affine_negative_scale(mixture):
    t = affine_transform(mixture, -1.0)
    m0, v0 = moments(mixture)
    m1, v1 = moments(t)
    assert m1 == pytest.approx(-m0, abs=1e-12)
    assert v1 == pytest.approx(v0, rel=1e-12)
    # reflection of an even-ish mixture preserves mass exactly
    assert t.mass() == pytest.approx(mixture.mass(), abs=1e-15)


def test_affine_is_exact_no_interpolation(gauss):
    round_trip = affine_transform(affine_transform(gauss, 2.0, 1.0), 0.5, -0.5)
    assert np.array_equal(round_trip.values, gauss.values)
    assert round_trip.grid_step == pytest.approx(gauss.grid_step, rel=1e-15)


def test_affine_rejects_zero_scale(gauss):
    with pytest.raises(InvalidSpec):
        affine_transform(gauss, 0.0)


def test_center_zeroes_mean():
    d = materialize(spec_gaussian(var=2.0, mean=3.0))
    c = center(d)
    assert moments(c)[0] == pytest.approx(0.0, abs=1e-10)
    assert moments(c)[1] == pytest.approx(moments(d)[1], rel=1e-14)


# ---------------------------------------------------------------------------
# digests


def test_digest_deterministic():
    assert digest_of("a", 1.5) == digest_of("a", 1.5)
    assert digest_of("a", 1.5) != digest_of("a", 1.6)
    assert len(digest_of("x")) == 12

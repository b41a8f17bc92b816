import math

import pytest

from entrolab.grid import DistributionSpec, center, materialize

INV_SQRT2 = 1.0 / math.sqrt(2.0)


def spec_gaussian(var=1.0, mean=0.0):
    return DistributionSpec("gaussian", {"mean": mean, "var": var})


def spec_laplace_unit_var():
    # scale 1/sqrt(2) gives variance 1
    return DistributionSpec("laplace", {"mean": 0.0, "scale": INV_SQRT2})


def spec_smoothed_uniform():
    return DistributionSpec("smoothed_uniform",
                            {"a": -1.5, "b": 1.5, "smooth_var": 0.05})


def spec_mixture():
    return DistributionSpec("gaussian_mixture",
                            {"weights": [0.5, 0.5], "means": [-1.2, 1.2],
                             "vars": [0.3, 0.3]})


@pytest.fixture(scope="session")
def gauss():
    return center(materialize(spec_gaussian()))


@pytest.fixture(scope="session")
def laplace():
    return center(materialize(spec_laplace_unit_var()))


@pytest.fixture(scope="session")
def smoothed_uniform():
    return center(materialize(spec_smoothed_uniform()))


@pytest.fixture(scope="session")
def mixture():
    return center(materialize(spec_mixture()))

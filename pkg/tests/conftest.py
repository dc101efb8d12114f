import pytest

from cvlab import (
    BuildOptions,
    build_metric,
    flat_metric,
    lp_counterexample,
    polynomial_xi,
    s3_metric,
    yau_counterexample,
)


@pytest.fixture(scope="session")
def poly05_n2():
    return build_metric(polynomial_xi(0.5), 2)


@pytest.fixture(scope="session")
def poly05_n3():
    return build_metric(polynomial_xi(0.5), 3)


@pytest.fixture(scope="session")
def yau_n3():
    # deep tail: the boundedness checks need a full decade past the last step
    return yau_counterexample(3, 2, options=BuildOptions(x_max=2.0e4))


@pytest.fixture(scope="session")
def lp_model():
    return lp_counterexample(2, p=2.0, alpha=2.0, beta=3.5)


@pytest.fixture(scope="session")
def s3_n2():
    return s3_metric(2, r0=1.0)


@pytest.fixture(scope="session")
def flat_n2():
    return flat_metric(2)

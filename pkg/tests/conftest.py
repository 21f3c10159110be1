import pytest

from gibbsfactor import build_pipeline, fixtures


@pytest.fixture(scope="session")
def ex2_exact():
    return build_pipeline(fixtures.example2(), exact=True)


@pytest.fixture(scope="session")
def ex2_float():
    return build_pipeline(fixtures.example2(), exact=False)


@pytest.fixture(scope="session")
def full2_exact():
    return build_pipeline(fixtures.full_shift_iid(), exact=True)


@pytest.fixture(scope="session")
def golden_float():
    return build_pipeline(fixtures.golden_mean(), exact=False)


@pytest.fixture(scope="session")
def rate_demo_float():
    return build_pipeline(fixtures.rate_demo(), exact=False)


@pytest.fixture(scope="session")
def markov_exact():
    return build_pipeline(fixtures.markov_chain_2x2(), exact=True)

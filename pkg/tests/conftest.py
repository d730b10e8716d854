import pytest

from sis_persuasion import ModelParams, PopulationState, SmithConfig


@pytest.fixture(scope="session")
def params_cost_floor_ok() -> ModelParams:
    """Protection cost above its floor; V-shaped static sweep."""
    return ModelParams(
        alpha=0.45, gamma=0.2, beta_p=0.5, beta_u=0.65, c_p=25.0, c_u=32.0, loss=80.0
    )


@pytest.fixture(scope="session")
def params_cost_floor_violated() -> ModelParams:
    """Protection cost below its floor; sweep rises with mu_s."""
    return ModelParams(
        alpha=0.45, gamma=0.2, beta_p=0.7, beta_u=0.9, c_p=19.0, c_u=20.0, loss=80.0
    )


@pytest.fixture(scope="session")
def params_horizon() -> ModelParams:
    """Parameter set used for the finite-horizon signaling experiments."""
    return ModelParams(
        alpha=0.45, gamma=0.2, beta_p=0.5, beta_u=0.65, c_p=20.0, c_u=25.0, loss=80.0
    )


@pytest.fixture(scope="session")
def smith20() -> SmithConfig:
    return SmithConfig(20.0)


@pytest.fixture(scope="session")
def init_state() -> PopulationState:
    return PopulationState(0.01, 0.5, 0.5)

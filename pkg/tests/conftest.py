"""Shared fixtures for service and CLI tests."""

import numpy as np
import pytest

from src.models.var import InnovationFamily, InnovationSpec, TransitionMatrix
from src.services.estimator_service import EstimatorService
from src.services.observation_service import ObservationService
from src.services.spectral_service import SpectralService
from src.services.storage_service import StorageService
from src.services.theory_service import TheoryService
from src.services.var_service import VarProcessService


@pytest.fixture
def var_service():
    """Create VAR process service instance."""
    return VarProcessService()


@pytest.fixture
def observation_service(var_service):
    """Create observation service instance."""
    return ObservationService(var_service)


@pytest.fixture
def spectral_service(var_service):
    """Create spectral service instance with the default grid."""
    return SpectralService(var_service=var_service)


@pytest.fixture
def estimator_service():
    """Create estimator service instance."""
    return EstimatorService()


@pytest.fixture
def theory_service(var_service, observation_service, spectral_service):
    """Create theory service with a small Monte Carlo minimum."""
    return TheoryService(
        var_service=var_service,
        observation_service=observation_service,
        spectral_service=spectral_service,
        min_trials=10,
    )


@pytest.fixture
def storage_service(tmp_path):
    """Create storage service rooted in a temporary directory."""
    return StorageService(tmp_path)


@pytest.fixture
def half_identity():
    """0.5 * I_2 as a transition matrix."""
    return TransitionMatrix(entries=0.5 * np.eye(2))


@pytest.fixture
def chain_matrix():
    """Four-node chain with entries 0.5 on the sub-diagonal."""
    B = np.zeros((4, 4))
    B[np.arange(1, 4), np.arange(3)] = 0.5
    return TransitionMatrix(entries=B)


def gaussian_spec(p: int) -> InnovationSpec:
    """Standard Gaussian innovations in dimension p."""
    return InnovationSpec(family=InnovationFamily.GAUSSIAN, covariance=np.eye(p))


@pytest.fixture
def spec2():
    """Standard Gaussian innovations in dimension 2."""
    return gaussian_spec(2)


@pytest.fixture
def spec4():
    """Standard Gaussian innovations in dimension 4."""
    return gaussian_spec(4)

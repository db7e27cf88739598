import pytest

from squidflux import PipelineConfig


@pytest.fixture(scope="session")
def pipeline190():
    """Default-resolution pipeline at the experimental film thickness."""
    return PipelineConfig(b=190e-9, lam=40e-9)


@pytest.fixture(scope="session")
def pipeline20():
    """Default-resolution pipeline for the thin-film validation cases."""
    return PipelineConfig(b=20e-9, lam=40e-9)


@pytest.fixture(scope="session")
def coarse190():
    """Cheap pipeline for structural tests that do not need tight numerics."""
    return PipelineConfig(
        b=190e-9,
        lam=40e-9,
        target_patch=60e-9,
        resolution_top=128,
        resolution_side=64,
        resolution_substrate=256,
    )

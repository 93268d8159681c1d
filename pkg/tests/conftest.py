import numpy as np
import pytest

import unhippo as uh


@pytest.fixture(scope="session")
def bank_64_500():
    """Uncertainty-aware bank at n=64 up to step 500 (closed form)."""
    return uh.build_init_bank(64, 500, "unhippo")


@pytest.fixture(scope="session")
def bank_128_1000():
    """Uncertainty-aware bank at the default scale n=128, t_max=1000."""
    return uh.build_init_bank(128, 1000, "unhippo")


@pytest.fixture(scope="session")
def reg_128():
    return uh.make_regularized(uh.make_hippo(128))


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)

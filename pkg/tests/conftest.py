import numpy as np
import pytest

from flightfall.stationary import StationaryModel

# Six-decimal reference values: heavy model (lambda=1, mu=2, c=3) on r = 0.2..4.0 and
# light model (lambda=1, mu=2, c=2, alpha=5) on r = 0.0..3.8, step 0.2.
HEAVY_REF = [
    0.074088, 0.049587, 0.036023, 0.027129, 0.020854,
    0.016243, 0.012771, 0.010110, 0.008046, 0.006430,
    0.005156, 0.004146, 0.003342, 0.002699, 0.002184,
    0.001770, 0.001436, 0.001167, 0.000949, 0.000772,
]
LIGHT_REF = [
    0.019894, 0.019896, 0.019901, 0.019887, 0.019814,
    0.019636, 0.019317, 0.018837, 0.018194, 0.017399,
    0.016472, 0.015442, 0.014339, 0.013196, 0.012040,
    0.010897, 0.009789, 0.008731, 0.007736, 0.006811,
]
HEAVY_R = np.round(0.2 * np.arange(1, 21), 10)
LIGHT_R = np.round(0.2 * np.arange(0, 20), 10)


@pytest.fixture
def heavy():
    return StationaryModel.heavy(lam=1.0, mu=2.0, c=3.0)


@pytest.fixture
def light():
    return StationaryModel.light(lam=1.0, mu=2.0, c=2.0, alpha=5.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)

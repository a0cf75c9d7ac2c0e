import functools

import numpy as np
import pytest

from dlspectra import operators
from dlspectra.geometry import make_curve
from dlspectra.spectral import eigenpairs

from oracles import ELLIPSE_C, ELLIPSE_R, PERTURBED


@functools.lru_cache(maxsize=None)
def _spectrum(kind, n, items):
    curve = make_curve(kind, **dict(items))
    return curve, eigenpairs(operators.assemble_dlp_2d(curve, n))


def spectrum_of(kind, n, **params):
    items = tuple(sorted((k, tuple(sorted(v.items())) if isinstance(v, dict) else v) for k, v in params.items()))
    if kind == "fourier":
        return _fourier(n)
    return _spectrum(kind, n, items)


@functools.lru_cache(maxsize=None)
def _fourier(n):
    curve = make_curve("fourier", coefficients=PERTURBED)
    return curve, eigenpairs(operators.assemble_dlp_2d(curve, n))


@pytest.fixture(scope="session")
def circle():
    return make_curve("circle", R=1.0)


@pytest.fixture(scope="session")
def ellipse():
    return make_curve("ellipse", c=ELLIPSE_C, R=ELLIPSE_R)


@pytest.fixture(scope="session")
def ellipse_spectrum():
    return spectrum_of("ellipse", 256, c=ELLIPSE_C, R=ELLIPSE_R)[1]


@pytest.fixture(scope="session")
def circle_spectrum():
    return spectrum_of("circle", 64, R=1.0)[1]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

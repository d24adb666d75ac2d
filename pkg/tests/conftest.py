import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kleinian.cli import load_curve, load_divisor
from kleinian.jacobian import K_characteristic
from kleinian.periods import compute_periods

ROOT = Path(__file__).resolve().parents[1]
CURVES = ROOT / "curves"
DATA = Path(__file__).resolve().parent / "data"

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def printed_matrix(name: str) -> np.ndarray:
    M = np.array(json.loads((DATA / "printed_matrices.json").read_text())[name])
    return M[..., 0] + 1j * M[..., 1]


def curve(n: int):
    return load_curve(str(CURVES / f"example{n}.json"))


def divisor(name: str):
    return load_divisor(str(CURVES / f"divisor{name}.json"))


@pytest.fixture(scope="session")
def ps1():
    return compute_periods(curve(1))


@pytest.fixture(scope="session")
def ps2():
    return compute_periods(curve(2))


@pytest.fixture(scope="session")
def ps3():
    return compute_periods(curve(3))


@pytest.fixture(scope="session")
def K1(ps1):
    return K_characteristic(ps1)


@pytest.fixture(scope="session")
def K3(ps3):
    return K_characteristic(ps3)

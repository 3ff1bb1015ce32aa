"""Shared fixtures and small helpers for the test suite."""

import math

import numpy as np
import pytest

from risdoa import derive_scene, nominal_scene


def steer_ref(theta_deg, m_elements, theta_rs_deg=0.0, spacing=0.5):
    """Independent steering-vector construction used as a reference."""
    s = math.sin(math.radians(theta_rs_deg + theta_deg))
    return np.exp(1j * 2.0 * math.pi * spacing * np.arange(m_elements) * s)


@pytest.fixture(scope="session")
def nominal():
    return nominal_scene()


@pytest.fixture(scope="session")
def nominal_derived(nominal):
    return derive_scene(nominal)

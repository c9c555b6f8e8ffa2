"""Shared fixtures: canonical metrics and curve helpers."""

from __future__ import annotations

import math

import numpy as np
import pytest

from acoustic_horizons.metrics import (
    acoustic_metric,
    minkowski_metric,
    radial_profile_flow,
    vortex_flow,
)


def circle(radius: float, n: int = 128) -> np.ndarray:
    th = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return radius * np.stack([np.cos(th), np.sin(th)], axis=1)


@pytest.fixture(scope="session")
def unit_vortex():
    """Acoustic metric of the outgoing unit vortex (white hole at r = 1)."""
    return acoustic_metric(vortex_flow(1.0, 1.0))


@pytest.fixture(scope="session")
def drain_vortex():
    """Acoustic metric of the draining vortex (black hole at r = 1)."""
    return acoustic_metric(vortex_flow(-1.0, 1.0))


@pytest.fixture(scope="session")
def minkowski():
    return minkowski_metric()


# cubic radial profile with sonic radii at 0.8 (white) and 1.15, 1.5 (black)
PROFILE_NODES_R = np.array([0.8, 1.15, 1.5, 1.8])
PROFILE_NODES_A = np.array([1.0, -1.0, -1.0, -0.2])
PROFILE_KAPPA = 24.0
PROFILE_R1 = 0.5
PROFILE_R0 = 1.8
PROFILE_COEF = np.linalg.solve(np.vander(PROFILE_NODES_R, 4), PROFILE_NODES_A)


def profile_a(r):
    return np.polyval(PROFILE_COEF, r)


def profile_b(r):
    return np.sqrt(np.maximum(
        1.0 + PROFILE_KAPPA * (PROFILE_R0 - r) - profile_a(r) ** 2, 0.0))


@pytest.fixture(scope="session")
def profile_metric():
    flow = radial_profile_flow(profile_a, profile_b, PROFILE_R1, PROFILE_R0)
    return acoustic_metric(flow)

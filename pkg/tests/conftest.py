"""Shared fixtures: small meshes and random-state helpers."""

import numpy as np
import pytest

from machfv import build_mesh


@pytest.fixture(scope="session")
def mesh44():
    return build_mesh(4, 4, 1.0, 1.0)


@pytest.fixture(scope="session")
def mesh88():
    return build_mesh(8, 8, 1.0, 1.0)


def random_positive_state(mesh, rng, rho_lo=0.5, rho_hi=2.0, u_amp=1.0):
    """Random positive density and velocity fields on a mesh."""
    rho = rng.uniform(rho_lo, rho_hi, mesh.n_cells)
    u = rng.uniform(-u_amp, u_amp, (mesh.n_cells, 2))
    return rho, u

"""Shared fixtures: the default sandwich setup and small flat lattices."""

import numpy as np
import pytest

from causalfields import (
    CARSpace,
    DiracKernel,
    FockRep,
    QuasifreeState,
    SymplecticSpace,
    WaveKernel,
    build_deformation,
    build_lattice,
    causal_graph,
    minkowski,
    sandwich,
)
from causalfields.harness import default_config
from causalfields.harness.spinstat import (
    scalar_basis,
    spinor_basis,
)


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def model(cfg):
    return cfg.model()


@pytest.fixture(scope="session")
def lattice(cfg, model):
    return cfg.lattice(model)


@pytest.fixture(scope="session")
def graph(model, lattice):
    return causal_graph(model, lattice)


@pytest.fixture(scope="session")
def wave_kernel(cfg, model, lattice):
    return WaveKernel(model, lattice, cfg.mass)


@pytest.fixture(scope="session")
def scalar_space(cfg, wave_kernel, lattice):
    return SymplecticSpace(wave_kernel, scalar_basis(cfg, lattice))


@pytest.fixture(scope="session")
def state(scalar_space):
    return QuasifreeState(scalar_space)


@pytest.fixture(scope="session")
def fock(cfg, state):
    return FockRep(state, n_modes=cfg.n_modes, n_max=cfg.fock_cutoff)


@pytest.fixture(scope="session")
def dirac_kernel(cfg, model, lattice):
    return DiracKernel(model, lattice, cfg.dirac_mass)


@pytest.fixture(scope="session")
def car_space(cfg, dirac_kernel, lattice):
    return CARSpace(dirac_kernel, spinor_basis(cfg, lattice))


@pytest.fixture(scope="session")
def deformation(cfg, model, lattice):
    return build_deformation(model, lattice, **cfg.deformation_params())


@pytest.fixture(scope="session")
def flat_model():
    return minkowski(t_min=0.0, t_max=2.0)


@pytest.fixture(scope="session")
def flat_lattice(flat_model):
    return build_lattice(flat_model, nt=97, nx=96, cfl_factor=0.98)


@pytest.fixture(scope="session")
def flat_graph(flat_model, flat_lattice):
    return causal_graph(flat_model, flat_lattice)


@pytest.fixture(scope="session")
def mink16():
    model = minkowski(t_min=0.0, t_max=3.0)
    lat = build_lattice(model, nt=16, nx=16, cfl_factor=0.98)
    return model, lat, causal_graph(model, lat)


@pytest.fixture(scope="session")
def curved16():
    model = sandwich(amplitude=0.35, t_past=0.9, t_fut=2.1, t_min=0.0, t_max=3.0)
    lat = build_lattice(model, nt=16, nx=16, cfl_factor=0.98)
    return model, lat, causal_graph(model, lat)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)

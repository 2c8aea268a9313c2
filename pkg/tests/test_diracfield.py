"""First-order spinor solver against characteristic, spectral, and
manufactured oracles, plus the self-dual CAR representation."""

from types import SimpleNamespace

import numpy as np
import pytest
import sympy as sp

from causalfields import (
    CARSpace,
    DiracKernel,
    Region,
    SpinorTestFunction,
    build_lattice,
    future,
    generic_model,
    minkowski,
    spinor_bump,
)
from causalfields.diracfield import (
    CAROperators,
    conjugate_spinor,
    spacelike_anticommutator,
)
from causalfields.errors import ConfigurationError, DomainError

# Frozen regression values for the default setup (sandwich, 193x384, m=1),
# source spinor_bump(t=0.45, x=1.0, t_half=0.25, x_half=0.5).
FROZEN_P1 = -0.014916677755942529  # p1[96, 71], purely real
FROZEN_P2 = -0.027043087630321632  # Im p2[96, 71]
FROZEN_MAX_P1 = 0.18296794716175308


def flat_setup(nx, t_span, mass, le=2.0):
    dx = le / nx
    dt = 0.9 * dx
    nt = int(round(t_span / dt)) + 1
    model = minkowski(length=le, t_min=0.0, t_max=dt * (nt - 1))
    lat = build_lattice(model, nt, nx)
    return model, lat, DiracKernel(model, lat, mass=mass)


# ------------------------------------------------------------ test functions


def test_spinor_validates_shape_and_margin(lattice):
    zero = np.zeros((lattice.nt, lattice.nx))
    with pytest.raises(ConfigurationError):
        SpinorTestFunction(lattice, np.zeros((3, 3)), zero)
    bad = zero.copy()
    bad[-1, 5] = 1.0
    with pytest.raises(DomainError):
        SpinorTestFunction(lattice, zero, bad)
    bad = zero.copy()
    bad[10, 5] = np.inf
    with pytest.raises(ConfigurationError):
        SpinorTestFunction(lattice, bad, zero)


def test_spinor_bump_is_chirality_fixed(lattice):
    f = spinor_bump(lattice, 0.5, 1.0, 0.2, 0.4)
    assert f.is_chirality_fixed
    assert f.support_mask().any()
    g = SpinorTestFunction(lattice, f.lower, f.lower)
    assert not g.is_chirality_fixed


# ------------------------------------------------------ characteristic oracle


def characteristic_retarded(lat, f1, f2):
    """Massless flat solution by integrating along the two characteristics."""
    nt, nx = lat.nt, lat.nx
    r = lat.dt / lat.dx
    p1 = np.zeros((nt, nx))
    p2 = np.zeros((nt, nx))
    for i in range(nt):
        acc1 = np.zeros(nx)
        acc2 = np.zeros(nx)
        for s in range(i):
            shift = (i - s) * r
            k = int(shift)
            frac = shift - k
            acc1 += np.roll(f2[s], -k) * (1 - frac) + np.roll(f2[s], -(k + 1)) * frac
            acc2 += np.roll(f1[s], k) * (1 - frac) + np.roll(f1[s], (k + 1)) * frac
        p1[i] = acc1 * lat.dt
        p2[i] = acc2 * lat.dt
    return p1, p2


def characteristic_error(nx):
    model, lat, ker = flat_setup(nx, 1.2, mass=0.0)
    f = spinor_bump(lat, 0.35, 0.8, 0.18, 0.25)
    p1, p2 = ker.solve_retarded(f)
    o1, o2 = characteristic_retarded(lat, f.upper, f.lower)
    scale = np.abs(o1).max()
    return float(np.abs(p1 - o1).max() / scale)


def test_massless_march_matches_characteristics():
    assert characteristic_error(400) < 0.06  # measured 3.5e-2


def test_massless_error_is_first_order():
    ratio = characteristic_error(200) / characteristic_error(400)
    assert 1.7 < ratio < 2.3  # measured 1.94


# ----------------------------------------------------- mode-expansion oracle


def spectral_dirac(lat, f1, f2, mass):
    """Retarded solution from the per-mode 2x2 matrix exponential."""
    nt, nx = lat.nt, lat.nx
    dt = lat.dt
    k = 2.0 * np.pi * np.fft.fftfreq(nx, d=lat.dx)
    om = np.sqrt(k ** 2 + mass ** 2)
    f1h = np.fft.fft(f1, axis=1)
    f2h = np.fft.fft(f2, axis=1)
    t = dt * np.arange(nt)
    p1 = np.zeros((nt, nx), dtype=complex)
    p2 = np.zeros((nt, nx), dtype=complex)
    safe = np.where(om == 0, 1.0, om)
    for i in range(1, nt):
        tau = t[i] - t[: i + 1, None]
        c = np.cos(om[None, :] * tau)
        s = np.where(om[None, :] == 0, tau, np.sin(om[None, :] * tau) / safe[None, :])
        g1 = (c + 1j * s * k[None, :]) * f2h[: i + 1] - 1j * s * mass * f1h[: i + 1]
        g2 = (c - 1j * s * k[None, :]) * f1h[: i + 1] - 1j * s * mass * f2h[: i + 1]
        p1[i] = np.trapezoid(g1, dx=dt, axis=0)
        p2[i] = np.trapezoid(g2, dx=dt, axis=0)
    return np.fft.ifft(p1, axis=1), np.fft.ifft(p2, axis=1)


def test_massive_march_matches_mode_expansion():
    model, lat, ker = flat_setup(400, 1.2, mass=1.0)
    f = spinor_bump(lat, 0.35, 0.8, 0.18, 0.25)
    p1, p2 = ker.solve_retarded(f)
    o1, o2 = spectral_dirac(lat, f.upper, f.lower, mass=1.0)
    scale = max(np.abs(o1).max(), np.abs(o2).max())
    dev = max(np.abs(p1 - o1).max(), np.abs(p2 - o2).max())
    assert dev / scale < 0.06  # measured 3.5e-2, first-order scheme


# ------------------------------------------------ curved manufactured source

_MANUFACTURED = {}


def manufactured_error(nt, nx):
    key = (nt, nx)
    if key in _MANUFACTURED:
        return _MANUFACTURED[key]
    t, x = sp.symbols("t x", real=True)
    a = 1 + sp.Rational(3, 10) * sp.exp(-((t - sp.Rational(3, 2)) ** 2)) * (
        1 + sp.cos(x) / 5
    )
    b = sp.exp(sp.sin(x) / 10) * (1 + sp.exp(-((t - sp.Rational(6, 5)) ** 2)) / 10)
    sb = sp.sqrt(b)
    cs = sb / a
    g1 = sp.diff(sb, x) / (2 * a) - sp.diff(a, t) / (2 * a)
    g2 = -sp.diff(sb, x) / (2 * a) - sp.diff(a, t) / (2 * a)
    z = (t - sp.Rational(3, 2)) / sp.Rational(55, 100)
    eta = sp.Piecewise(((1 - z ** 2) ** 6, abs(z) < 1), (0, True))
    p1s = eta * sp.sin(x)
    p2s = eta * sp.cos(2 * x) / 2
    f2s = (sp.diff(p1s, t) - cs * sp.diff(p1s, x) - g1 * p1s) / sb
    f1s = (sp.diff(p2s, t) + cs * sp.diff(p2s, x) - g2 * p2s) / sb
    lam = lambda e: sp.lambdify((t, x), e, "numpy")
    model = generic_model("mfd", lam(a), lam(b), t_min=0.0, t_max=3.0, length=2 * np.pi)
    lat = build_lattice(model, nt, nx, cfl_factor=0.95)
    tt, xx = lat.grids()
    f1v = np.asarray(lam(f1s)(tt, xx), float)
    f2v = np.asarray(lam(f2s)(tt, xx), float)
    for v in (f1v, f2v):
        v[:2] = 0.0
        v[-2:] = 0.0
    ker = DiracKernel(model, lat, mass=0.0)
    p1, p2 = ker.solve_retarded(SpinorTestFunction(lat, f1v, f2v))
    o1 = np.asarray(lam(p1s)(tt, xx), float)
    o2 = np.asarray(lam(p2s)(tt, xx), float)
    scale = max(np.abs(o1).max(), np.abs(o2).max())
    err = float(max(np.abs(p1 - o1).max(), np.abs(p2 - o2).max()) / scale)
    _MANUFACTURED[key] = err
    return err


def test_curved_march_solves_the_continuum_equations():
    assert manufactured_error(201, 128) < 0.06  # measured 3.1e-2


def test_curved_march_is_first_order():
    ratio = manufactured_error(201, 128) / manufactured_error(401, 256)
    assert 1.7 < ratio < 2.3  # measured 1.99


# ------------------------------------------------------------ scheme algebra


def test_frozen_probe_values(dirac_kernel, lattice):
    f = spinor_bump(lattice, 0.45, 1.0, 0.25, 0.5)
    p1, p2 = dirac_kernel.solve_retarded(f)
    assert p1[96, 71].imag == 0.0 and p2[96, 71].real == 0.0
    assert p1[96, 71].real == pytest.approx(FROZEN_P1, rel=1e-12)
    assert p2[96, 71].imag == pytest.approx(FROZEN_P2, rel=1e-12)
    assert np.abs(p1).max() == pytest.approx(FROZEN_MAX_P1, rel=1e-12)


def test_centered_operator_recovers_the_source(dirac_kernel, lattice):
    f = spinor_bump(lattice, 0.45, 1.0, 0.25, 0.5)
    p1, p2 = dirac_kernel.solve_retarded(f)
    r1, r2 = dirac_kernel.apply_operator(p1, p2)
    scale = np.abs(f.lower).max()
    dev = max(np.abs(r1[3:-3] - f.upper[3:-3]).max(), np.abs(r2[3:-3] - f.lower[3:-3]).max())
    assert dev / scale < 0.15  # measured 6.5e-2: centered check vs upwind march


def test_solution_support_stays_in_the_cone(dirac_kernel, graph, lattice):
    f = spinor_bump(lattice, 0.45, 1.0, 0.25, 0.5)
    p1, p2 = dirac_kernel.solve_retarded(f)
    hull = future(graph, Region(lattice, f.support_mask())).mask
    assert np.all(p1[~hull] == 0.0) and np.all(p2[~hull] == 0.0)
    a1, a2 = dirac_kernel.solve_advanced(f)
    assert np.all(a1[lattice.row_of(0.8) :] == 0.0)
    assert np.all(a2[lattice.row_of(0.8) :] == 0.0)


def test_conjugation_anticommutes_with_propagator(dirac_kernel, lattice):
    base = spinor_bump(lattice, 0.45, 1.0, 0.25, 0.5)
    g = SpinorTestFunction(lattice, 0.5 * base.lower, base.lower)
    s1, s2 = dirac_kernel.causal_propagator(g)
    cu, cl = conjugate_spinor((g.upper, g.lower))
    t1, t2 = dirac_kernel.causal_propagator(
        SpinorTestFunction(lattice, cu.real, cl.real)
    )
    u1, u2 = conjugate_spinor((s1, s2))
    assert np.array_equal(t1, -u1) and np.array_equal(t2, -u2)


def test_conjugation_is_an_involution(rng):
    v = rng.normal(size=(2, 8, 8)) + 1j * rng.normal(size=(2, 8, 8))
    w1, w2 = conjugate_spinor(conjugate_spinor((v[0], v[1])))
    assert np.array_equal(w1, v[0]) and np.array_equal(w2, v[1])


# -------------------------------------------------------------- CAR pairing


def test_pairing_gram_is_real_symmetric_psd(car_space):
    assert car_space.hermiticity_defect < 1e-12
    assert car_space.asymmetry_defect < 1e-12
    assert car_space.imag_defect < 1e-12
    assert np.array_equal(car_space.gram, car_space.gram.T)
    evals = np.linalg.eigvalsh(car_space.gram)
    assert evals.min() > -1e-12 * evals.max()
    assert car_space.pairing(0, 0) > 0


def test_car_space_rejects_bad_bases(dirac_kernel, lattice, flat_lattice):
    with pytest.raises(ConfigurationError):
        CARSpace(dirac_kernel, [])
    with pytest.raises(ConfigurationError):
        CARSpace(dirac_kernel, [spinor_bump(flat_lattice, 0.5, 1.0, 0.2, 0.4)])
    f = spinor_bump(lattice, 0.45, 1.0, 0.25, 0.5)
    mixed = SpinorTestFunction(lattice, f.lower, f.lower)
    with pytest.raises(DomainError, match="conjugation-fixed"):
        CARSpace(dirac_kernel, [mixed])


def test_anticommutation_relations_are_exact(car_space):
    ops = CAROperators(car_space)
    assert ops.anticommutator_defect() < 1e-12  # measured 6.9e-18
    assert ops.adjoint_defect() < 1e-12  # measured 0.0
    m = ops.majoranas[0]
    assert np.abs(m @ m - 0.5 * np.eye(ops.dim)).max() < 1e-15


def test_spacelike_pair_anticommutes(car_space):
    ops = CAROperators(car_space)
    report = spacelike_anticommutator(car_space, ops, 0, 1)
    assert report["pairing"] == 0.0  # disjoint cones: exact zero
    assert report["anticommutator"] < 1e-15
    expected = np.sqrt(car_space.gram[0, 0] * car_space.gram[1, 1])
    assert report["commutator_norm"] == pytest.approx(expected, rel=1e-10)


def test_null_directions_are_quotiented(dirac_kernel, lattice):
    f = spinor_bump(lattice, 0.45, 1.0, 0.25, 0.5)
    g = spinor_bump(lattice, 2.2, 4.0, 0.25, 0.5)
    space = CARSpace(dirac_kernel, [f, g, f])  # duplicate: singular Gram
    ops = CAROperators(space)
    assert ops.rank == 2
    assert ops.anticommutator_defect() < 1e-12


def test_car_operator_guards():
    gram = np.array([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(DomainError, match="positive semidefinite"):
        CAROperators(SimpleNamespace(gram=gram))
    big = SimpleNamespace(gram=np.eye(20))
    with pytest.raises(ConfigurationError, match="max_sites"):
        CAROperators(big)


def test_smeared_operator_is_linear(car_space):
    ops = CAROperators(car_space)
    v = np.array([1.0, -2.0, 0.5, 1j])[: len(car_space.basis)]
    direct = ops.smeared(v)
    assembled = sum(c * g for c, g in zip(v, ops.generators))
    assert np.abs(direct - assembled).max() < 1e-15

"""Wave solver against closed-form, spectral, and manufactured oracles,
plus pairing locality, the quasifree state, and the truncated Fock layer."""

import numpy as np
import pytest
import sympy as sp

from causalfields import (
    FockRep,
    QuasifreeState,
    Region,
    SymplecticSpace,
    TestFunction,
    WaveKernel,
    build_lattice,
    bump,
    causal_graph,
    future,
    generic_model,
    minkowski,
    separation_margin,
    strict_causal_law,
    symplectic_pairing,
)
from causalfields.errors import (
    ConfigurationError,
    DomainError,
)
from causalfields.scalarfield import LocalAlgebra, MatrixSpan, local_algebra

# Frozen regression values for the default setup (sandwich, 193x384, m=1),
# source bump(t=0.45, x=1.0, t_half=0.25, x_half=0.5).
FROZEN_PROBE = 0.031699247982467815  # u[96, 71]
FROZEN_MAX = 0.03932996388937645


def flat_setup(nx, t_span, mass, le=2.0):
    """Minkowski lattice with dt = 0.9 dx (off the exact-scheme step)."""
    dx = le / nx
    dt = 0.9 * dx
    nt = int(round(t_span / dt)) + 1
    model = minkowski(length=le, t_min=0.0, t_max=dt * (nt - 1))
    lat = build_lattice(model, nt, nx)
    return model, lat, WaveKernel(model, lat, mass=mass)


# ------------------------------------------------------------ test functions


def test_function_validates_shape_and_margin(lattice):
    with pytest.raises(ConfigurationError):
        TestFunction(lattice, np.zeros((3, 3)))
    bad = np.zeros((lattice.nt, lattice.nx))
    bad[0, 5] = 1.0
    with pytest.raises(DomainError):
        TestFunction(lattice, bad)
    bad = np.zeros((lattice.nt, lattice.nx))
    bad[10, 5] = np.nan
    with pytest.raises(ConfigurationError):
        TestFunction(lattice, bad)


def test_function_support_and_zero_flag(lattice):
    f = bump(lattice, 0.5, 1.0, 0.2, 0.4)
    assert not f.is_zero
    assert f.support().size > 0
    assert f.support().contains_site(lattice.row_of(0.5), lattice.col_of(1.0))
    z = TestFunction(lattice, np.zeros((lattice.nt, lattice.nx)))
    assert z.is_zero and z.support().is_empty
    with pytest.raises(ValueError):
        f.values[5, 5] = 1.0  # frozen buffer


def test_bump_wraps_around_the_circle(lattice):
    f = bump(lattice, 0.5, 0.0, 0.2, 0.4)
    cols = np.flatnonzero(f.values[lattice.row_of(0.5)] != 0.0)
    assert 0 in cols and (lattice.nx - 1) in cols


# --------------------------------------------------- closed-form flat oracle


def dalembert_causal(lattice, fvals, images=3):
    """E f on the circle by Riemann-summing the closed-form cone kernel."""
    nt, nx = lattice.nt, lattice.nx
    dt, dx, le = lattice.dt, lattice.dx, lattice.length
    tau = dt * np.arange(-(nt - 1), nt)
    xi = dx * np.arange(nx)
    xi = (xi + 0.5 * le) % le - 0.5 * le
    K = np.zeros((tau.size, nx))
    for n in range(-images, images + 1):
        d = np.abs(xi + n * le)[None, :]
        K += 0.25 * (np.sign(tau[:, None] - d) - np.sign(-tau[:, None] - d))
    pad = 2 * nt - 1
    Khat = np.fft.fft(np.fft.fft(K, axis=1), n=pad, axis=0)
    fhat = np.fft.fft(np.fft.fft(fvals, axis=1), n=pad, axis=0)
    conv = np.fft.ifft(np.fft.ifft(Khat * fhat, axis=0), axis=1).real
    return conv[nt - 1 : 2 * nt - 1] * dt * dx


def closed_form_error(nx):
    model, lat, ker = flat_setup(nx, t_span=1.8, mass=0.0)
    f = bump(lat, t_center=0.45, x_center=0.7, t_half=0.22, x_half=0.25)
    E = ker.causal_propagator(f.values)
    Eo = dalembert_causal(lat, f.values)
    return float(np.abs(E - Eo).max() / np.abs(Eo).max())


def test_massless_propagator_matches_closed_form():
    assert closed_form_error(400) < 0.05  # measured 5.1e-4


def test_closed_form_error_shrinks_under_mesh_halving():
    ratio = closed_form_error(200) / closed_form_error(400)
    assert 1.5 < ratio < 2.5  # cone-edge Riemann error is first order


# ----------------------------------------------------- mode-expansion oracle


def spectral_retarded(lattice, fvals, mass):
    """Retarded solution from the per-mode Duhamel integral."""
    nt, nx = lattice.nt, lattice.nx
    dt, dx = lattice.dt, lattice.dx
    k = 2.0 * np.pi * np.fft.fftfreq(nx, d=dx)
    om = np.sqrt(k ** 2 + mass ** 2)
    fh = np.fft.fft(fvals, axis=1)
    t = dt * np.arange(nt)
    out = np.zeros((nt, nx), dtype=complex)
    for i in range(1, nt):
        kermat = np.sin(om[None, :] * (t[i] - t[: i + 1, None])) / om[None, :]
        out[i] = np.trapezoid(kermat * fh[: i + 1], dx=dt, axis=0)
    return np.fft.ifft(out, axis=1).real


def test_massive_retarded_matches_mode_expansion():
    model, lat, ker = flat_setup(160, t_span=1.35, mass=1.0)
    f = bump(lat, t_center=0.4, x_center=1.3, t_half=0.2, x_half=0.3)
    u = ker.solve_retarded(f)
    uo = spectral_retarded(lat, f.values, mass=1.0)
    assert np.abs(u - uo).max() / np.abs(uo).max() < 2e-3  # measured 6e-4 at nx=200


# ------------------------------------------------- curved manufactured source

_MANUFACTURED = {}


def manufactured_error(nt, nx, mass=0.5):
    """March a sympy-derived source and compare with the exact solution."""
    key = (nt, nx)
    if key in _MANUFACTURED:
        return _MANUFACTURED[key]
    t, x = sp.symbols("t x", real=True)
    a = 1 + sp.Rational(3, 10) * sp.exp(-((t - sp.Rational(3, 2)) ** 2)) * (
        1 + sp.cos(x) / 5
    )
    b = sp.exp(sp.sin(x) / 10) * (1 + sp.exp(-((t - sp.Rational(6, 5)) ** 2)) / 10)
    z = (t - sp.Rational(3, 2)) / sp.Rational(55, 100)
    eta = sp.Piecewise(((1 - z ** 2) ** 6, abs(z) < 1), (0, True))
    u = eta * (sp.sin(x) + sp.cos(2 * x) / 2)
    vol = a * sp.sqrt(b)
    f = (
        sp.diff((a / sp.sqrt(b)) * sp.diff(u, t), t)
        - sp.diff((sp.sqrt(b) / a) * sp.diff(u, x), x)
    ) / vol + mass ** 2 * u
    fa = sp.lambdify((t, x), f, "numpy")
    ua = sp.lambdify((t, x), u, "numpy")
    model = generic_model(
        "manufactured",
        sp.lambdify((t, x), a, "numpy"),
        sp.lambdify((t, x), b, "numpy"),
        t_min=0.0,
        t_max=3.0,
        length=2 * np.pi,
    )
    lat = build_lattice(model, nt, nx, cfl_factor=0.95)
    tt, xx = lat.grids()
    fv = np.asarray(fa(tt, xx), dtype=float)
    fv[:2] = 0.0
    fv[-2:] = 0.0
    u_num = WaveKernel(model, lat, mass=mass).solve_retarded(fv)
    u_ref = np.asarray(ua(tt, xx), dtype=float)
    err = float(np.abs(u_num - u_ref).max() / np.abs(u_ref).max())
    _MANUFACTURED[key] = err
    return err


def test_curved_march_solves_the_continuum_equation():
    assert manufactured_error(201, 128) < 2e-3  # measured 7.9e-4


def test_curved_march_is_second_order():
    ratio = manufactured_error(201, 128) / manufactured_error(401, 256)
    assert 3.0 < ratio < 5.5  # measured 4.003


# ------------------------------------------------------------ scheme algebra


def test_operator_inverts_the_march(wave_kernel, lattice):
    f = bump(lattice, 0.45, 1.0, 0.25, 0.5)
    u = wave_kernel.solve_retarded(f)
    res = wave_kernel.apply_operator(u) - f.values
    assert np.abs(res[2:-2]).max() < 1e-11  # measured 1.4e-14
    u = wave_kernel.solve_advanced(f)
    res = wave_kernel.apply_operator(u) - f.values
    assert np.abs(res[2:-2]).max() < 1e-11


def test_frozen_probe_value(wave_kernel, lattice):
    f = bump(lattice, 0.45, 1.0, 0.25, 0.5)
    u = wave_kernel.solve_retarded(f)
    assert u[96, 71] == pytest.approx(FROZEN_PROBE, rel=1e-12)
    assert np.abs(u).max() == pytest.approx(FROZEN_MAX, rel=1e-12)


def test_advanced_is_adjoint_of_retarded(wave_kernel, lattice):
    f = bump(lattice, 2.2, 1.5, 0.3, 0.6)
    h = bump(lattice, 0.45, 1.0, 0.25, 0.5)
    lhs = wave_kernel.volume_pairing(f.values, wave_kernel.solve_retarded(h.values))
    rhs = wave_kernel.volume_pairing(wave_kernel.solve_advanced(f.values), h.values)
    assert lhs != 0.0
    assert abs(lhs - rhs) < 1e-12 * abs(lhs)


def test_retarded_support_stays_in_the_cone(wave_kernel, graph, lattice):
    f = bump(lattice, 0.45, 1.0, 0.25, 0.5)
    u = wave_kernel.solve_retarded(f)
    outside = ~future(graph, f.support()).mask
    assert np.all(u[outside] == 0.0)  # untouched sites stay exactly zero
    u = wave_kernel.solve_advanced(bump(lattice, 2.4, 1.0, 0.25, 0.5))
    assert np.all(u[lattice.row_of(2.7) :] == 0.0)


# ----------------------------------------------------------- pairing locality


def test_pairing_is_antisymmetric(wave_kernel, lattice, scalar_space):
    f = bump(lattice, 0.45, 1.0, 0.25, 0.5)
    assert symplectic_pairing(wave_kernel, f, f) == 0.0
    k = scalar_space.kappa
    assert np.array_equal(k, -k.T)
    assert scalar_space.pairing(0, 1) == k[0, 1]


def test_spacelike_pairing_vanishes_exactly(wave_kernel, graph, lattice):
    f = bump(lattice, 1.0, 1.0, 0.2, 0.4)
    h = bump(lattice, 1.0, 1.0 + np.pi, 0.2, 0.4)
    assert separation_margin(graph, f.support(), h.support()) >= 2
    assert symplectic_pairing(wave_kernel, f, h) == 0.0


def test_timelike_pairing_is_nonzero(wave_kernel, graph, lattice):
    f = bump(lattice, 0.45, 1.0, 0.25, 0.5)
    h = bump(lattice, 2.2, 1.5, 0.3, 0.6)
    assert separation_margin(graph, f.support(), h.support()) == 0
    assert abs(symplectic_pairing(wave_kernel, f, h)) > 1e-6


def test_space_rejects_bad_bases(wave_kernel, flat_lattice):
    with pytest.raises(ConfigurationError):
        SymplecticSpace(wave_kernel, [])
    with pytest.raises(ConfigurationError):
        SymplecticSpace(wave_kernel, [bump(flat_lattice, 0.5, 1.0, 0.2, 0.4)])


# ---------------------------------------------------------- strict causal law


def test_resourcing_into_the_past(wave_kernel, graph, lattice):
    f1 = bump(lattice, 2.4, 1.5, 0.2, 0.5)
    target = Region.time_band(lattice, lattice.row_of(1.0), lattice.row_of(1.6))
    f2 = strict_causal_law(wave_kernel, graph, f1, target)
    assert f2.support().issubset(target)
    e1 = wave_kernel.causal_propagator(f1.values)
    e2 = wave_kernel.causal_propagator(f2.values)
    below = slice(None, lattice.row_of(0.98))
    scale = np.abs(e1[below]).max()
    assert np.abs(e2[below] - e1[below]).max() < 5e-3 * scale  # measured 6.6e-11


def test_resourcing_into_the_future(wave_kernel, graph, lattice):
    f1 = bump(lattice, 0.5, 4.0, 0.2, 0.5)
    target = Region.time_band(lattice, lattice.row_of(1.6), lattice.row_of(2.2))
    f2 = strict_causal_law(wave_kernel, graph, f1, target)
    assert f2.support().issubset(target)
    e1 = wave_kernel.causal_propagator(f1.values)
    e2 = wave_kernel.causal_propagator(f2.values)
    above = slice(lattice.row_of(2.25), None)
    scale = np.abs(e1[above]).max()
    assert np.abs(e2[above] - e1[above]).max() < 5e-3 * scale


def test_resourcing_shortcut_when_already_inside(wave_kernel, graph, lattice):
    f1 = bump(lattice, 2.4, 1.5, 0.2, 0.5)
    target = Region.time_band(lattice, lattice.row_of(2.05), lattice.row_of(2.75))
    f2 = strict_causal_law(wave_kernel, graph, f1, target)
    assert np.array_equal(f2.values, f1.values)


def test_resourcing_rejects_bad_targets(wave_kernel, graph, lattice):
    f1 = bump(lattice, 2.4, 1.5, 0.2, 0.5)
    target = Region.time_band(lattice, lattice.row_of(1.0), lattice.row_of(1.6))
    zero = TestFunction(lattice, np.zeros((lattice.nt, lattice.nx)))
    with pytest.raises(DomainError, match="zero test function"):
        strict_causal_law(wave_kernel, graph, zero, target)
    patch = Region.rect(lattice, 1.0, 1.3, 0.5, 1.0)
    with pytest.raises(DomainError, match="not causally determined"):
        strict_causal_law(wave_kernel, graph, f1, patch)
    thin = Region.time_band(lattice, lattice.row_of(1.0), lattice.row_of(1.0) + 1)
    with pytest.raises(DomainError, match="thick enough"):
        strict_causal_law(wave_kernel, graph, f1, thin)
    # removing one target site inside supp f1 leaves the covered band
    # overlapping the support, so the step cannot be oriented
    band = Region.time_band(lattice, lattice.row_of(2.0), lattice.row_of(2.8))
    col = int(np.flatnonzero(f1.values[150] != 0)[2])
    with pytest.raises(DomainError, match="straddles"):
        strict_causal_law(wave_kernel, graph, f1, band - Region.single(lattice, 150, col))


# ------------------------------------------------------------ quasifree state


def test_state_pairing_part_is_exact(state):
    dev = np.abs(state.W - state.W.T - 1j * state.kappa).max()
    assert dev < 1e-14 * np.abs(state.W).max()  # measured 1.8e-16 relative
    sym = state.covariance_real - state.covariance_real.T
    assert np.abs(sym).max() < 1e-14 * np.abs(state.W).max()


def test_state_is_positive(state):
    assert state.psd_margin >= -1e-10
    assert state.clip_magnitude <= 1e-12
    evals = np.linalg.eigvalsh(state.covariance_real)
    assert evals.min() >= -1e-10 * max(evals.max(), 1e-30)


def test_state_rank_matches_coefficients(state, scalar_space):
    assert state.coefficients.shape == (state.rank, len(scalar_space.basis))
    assert state.rank <= len(scalar_space.basis)
    assert state.two_point(0, 1) == state.W[0, 1]


def test_flat_mode_energies_are_exact():
    model, lat, ker = flat_setup(48, t_span=1.2, mass=1.0, le=2 * np.pi)
    basis = [bump(lat, 0.5, 1.0, 0.2, 0.6), bump(lat, 0.5, 3.0, 0.2, 0.6)]
    st = QuasifreeState(SymplecticSpace(ker, basis))
    n = 2.0 * np.pi * np.fft.fftfreq(lat.nx, d=lat.dx)
    assert np.allclose(st.mode_energies(), np.sort(np.sqrt(n ** 2 + 1.0)), atol=1e-12)


def test_state_band_can_be_overridden(scalar_space, model, lattice):
    late = QuasifreeState(scalar_space, band=model.flat_bands[1])
    early = QuasifreeState(scalar_space, band=model.flat_bands[0])
    assert late.band == model.flat_bands[1]
    assert late.iref > lattice.row_of(model.flat_bands[1][0]) > early.iref
    assert late.psd_margin >= -1e-10


def test_state_rejects_bad_configurations(scalar_space, model, lattice, flat_lattice):
    massless = WaveKernel(model, lattice, mass=0.0)
    f = bump(lattice, 0.45, 1.0, 0.25, 0.5)
    with pytest.raises(ConfigurationError, match="m > 0"):
        QuasifreeState(SymplecticSpace(massless, [f]))
    with pytest.raises(ConfigurationError, match="too thin"):
        QuasifreeState(scalar_space, band=(0.0, 1.5 * lattice.dt, 1.0))
    bare = generic_model(
        "bare", lambda t, x: 1.0 + 0 * t, lambda t, x: 1.0 + 0 * t,
        t_min=0.0, t_max=2.0, length=2 * np.pi,
    )
    lat = build_lattice(bare, 49, 48, cfl_factor=0.98)
    ker = WaveKernel(bare, lat, mass=1.0)
    with pytest.raises(ConfigurationError, match="flat band"):
        QuasifreeState(SymplecticSpace(ker, [bump(lat, 0.5, 1.0, 0.2, 0.5)]))


# ------------------------------------------------------------- truncated Fock


def test_fock_commutators_hold_below_cutoff(fock):
    assert fock.commutator_defect() < 1e-8


def test_fock_rejects_rank_over_budget(state):
    with pytest.raises(ConfigurationError, match="mode budget"):
        FockRep(state, n_modes=1)


def test_vacuum_two_point_matches_state(fock, state):
    n = min(4, state.kappa.shape[0])
    for i in range(n):
        for j in range(n):
            dev = abs(fock.vacuum_two_point(i, j) - state.W[i, j])
            assert dev < 1e-8 * max(1.0, np.abs(state.W).max())


def test_vacuum_moments_are_gaussian(fock):
    assert fock.vacuum_moment([0]) == 0.0  # parity kills odd moments
    assert fock.vacuum_moment([0, 1, 2]) == 0.0
    w = {(i, j): fock.vacuum_two_point(i, j) for i in range(3) for j in range(3)}
    m4 = fock.vacuum_moment([0, 1, 2, 1])
    wick = w[0, 1] * w[2, 1] + w[0, 2] * w[1, 1] + w[0, 1] * w[1, 2]
    assert abs(m4 - wick) < 1e-12 * max(1.0, abs(m4))


# ------------------------------------------------------------------ local net


@pytest.fixture(scope="module")
def small_net():
    model = minkowski(length=2 * np.pi, t_min=0.0, t_max=2.0)
    lat = build_lattice(model, 65, 64, cfl_factor=0.98)
    ker = WaveKernel(model, lat, mass=1.0)
    basis = [
        bump(lat, 1.0, 1.0, 0.18, 0.35),
        bump(lat, 1.0, 1.0 + np.pi, 0.18, 0.35),
        bump(lat, 1.4, 1.1, 0.18, 0.35),
    ]
    space = SymplecticSpace(ker, basis)
    fock = FockRep(QuasifreeState(space), n_max=3)
    return lat, space, fock


def test_spacelike_generators_commute(small_net):
    lat, space, fock = small_net
    a0 = LocalAlgebra(fock, [0])
    a1 = LocalAlgebra(fock, [1])
    a2 = LocalAlgebra(fock, [2])
    assert a0.commutation_defect(a1) < 1e-12  # spacelike pair
    assert a0.commutation_defect(a2) > 1e-4  # timelike pair

def test_vacuum_is_cyclic(small_net):
    lat, space, fock = small_net
    full = LocalAlgebra(fock, [0, 1, 2])
    assert full.cyclic_rank() == fock.dim
    single = LocalAlgebra(fock, [0])
    assert single.span.rank == 2 * fock.n_max + 1  # polynomials in one field


def test_region_selects_generators(small_net):
    lat, space, fock = small_net
    reg = Region.rect(lat, 0.7, 1.3, 0.6, 1.4)
    alg = local_algebra(fock, space, reg)
    assert alg.indices == [0]
    both = local_algebra(fock, space, reg | Region.rect(lat, 1.1, 1.7, 0.7, 1.5))
    assert alg.indices == [0] and set(both.indices) == {0, 2}
    assert both.contains_algebra(alg) < 1e-8
    assert alg.contains_algebra(both) > 1e-3
    with pytest.raises(DomainError):
        local_algebra(fock, space, Region.single(lat, 5, 5))


def test_matrix_span_basics():
    span = MatrixSpan(2)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    assert span.add(sx) and span.add(sy)
    assert not span.add(sx + sy)
    assert span.rank == 2
    ok, res = span.contains(2 * sx - sy)
    assert ok and res < 1e-12
    ok, res = span.contains(np.eye(2))
    assert not ok and res > 0.5

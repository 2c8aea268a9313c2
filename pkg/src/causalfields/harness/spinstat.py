"""Staged end-to-end verification of the locality and statistics pipeline.

Eight stages, each a list of threshold checks:

  geometry     lattice admissibility, curvature sanity
  causal       order duality, complements, dependence domains
  deformation  flattening certificate (all clauses)
  scalar       propagator algebra, locality, strict causal re-sourcing
  ccr          quasifree state, Fock commutators, local commutativity
  car          spinor pairing, CAR representation, spacelike anticommutators
  covariance   functor laws, isometry transport, pocket/flat equivalence
  statistics   spin parity, covering homomorphism, pairing-law witnesses

The final verdict is the conjunction of every check. A check records its
value, threshold, and direction so a report can be re-audited offline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import __version__
from ..backend import active_backend
from ..causal import (
    Region,
    causal_complement,
    causal_graph,
    causally_determined,
    future,
    past,
)
from ..deformation import CLAUSE_MODES, build_atlas, build_deformation, certify
from ..diracfield import CAROperators, CARSpace, DiracKernel, spinor_bump
from ..errors import ConfigurationError
from ..geometry import Lattice, minkowski, ricci_scalar, sample_metric
from ..netfunctor import (
    LatticeIso,
    SpacetimeObject,
    functor_law_samples,
    pairing_transport_defect,
    representation_covariance_defect,
    transport_scalar_basis,
    transport_spinor_basis,
    verify_isometry,
)
from ..scalarfield import (
    FockRep,
    LocalAlgebra,
    QuasifreeState,
    SymplecticSpace,
    WaveKernel,
    bump,
    strict_causal_law,
)
from ..spin import (
    ETA,
    SpinRep,
    covering_map,
    rep_matrix,
    sample_group_elements,
    statistics_sign,
)


def check(name, value, threshold, mode="max", detail=""):
    value = float(value)
    threshold = float(threshold)
    if mode == "max":
        passed = value <= threshold
    elif mode == "min":
        passed = value >= threshold
    else:
        raise ValueError(f"unknown check mode {mode!r}")
    return {
        "name": name,
        "value": value,
        "threshold": threshold,
        "mode": mode,
        "passed": bool(passed),
        "detail": detail,
    }


# ---------------------------------------------------------------------------
# basis builders


def scalar_anchor_positions(cfg):
    """Two reference columns a half-circle apart (mutually spacelike)."""
    return 0.25 * cfg.length, 0.75 * cfg.length


def _flat_band_window(cfg):
    """Time window for test supports inside the early flat band.

    Supports must stay clear of the re-sourcing band used by the scalar
    stage (rows 0.45 nt and later), so the flat baseline also confines them
    to the first third of the time range.
    """
    if cfg.model_kind == "minkowski":
        lo, hi = cfg.t_min, cfg.t_min + 0.3 * (cfg.t_max - cfg.t_min)
    else:
        lo, hi = cfg.t_min, cfg.t_past
    span = hi - lo
    return lo + 0.45 * span, 0.31 * span


def scalar_basis(cfg, lattice):
    """Anchor bumps at the two reference columns plus seeded extras."""
    t0, t_half = _flat_band_window(cfg)
    x1, x2 = scalar_anchor_positions(cfg)
    w = cfg.basis_width
    funcs = [
        bump(lattice, t0, x1, t_half, w),
        bump(lattice, t0, x2, t_half, w),
    ]
    rng = np.random.default_rng(cfg.basis_seed)
    for _ in range(max(cfg.n_functions - 2, 0)):
        xc = float(rng.uniform(0.0, cfg.length))
        tc = t0 + float(rng.uniform(-0.2, 0.2)) * t_half
        th = t_half * float(rng.uniform(0.5, 0.9))
        xh = w * float(rng.uniform(0.7, 1.3))
        amp = float(rng.uniform(0.6, 1.4))
        funcs.append(bump(lattice, tc, xc, th, xh, amplitude=amp))
    return funcs


def spinor_basis(cfg, lattice):
    t0, t_half = _flat_band_window(cfg)
    x1, x2 = scalar_anchor_positions(cfg)
    w = cfg.basis_width
    funcs = [
        spinor_bump(lattice, t0, x1, t_half, w),
        spinor_bump(lattice, t0, x2, t_half, w),
    ]
    rng = np.random.default_rng(cfg.basis_seed + 1)
    for _ in range(max(cfg.dirac_n_basis - 2, 0)):
        xc = float(rng.uniform(0.0, cfg.length))
        tc = t0 + float(rng.uniform(-0.2, 0.2)) * t_half
        th = t_half * float(rng.uniform(0.5, 0.9))
        xh = w * float(rng.uniform(0.7, 1.3))
        amp = float(rng.uniform(0.6, 1.4))
        funcs.append(spinor_bump(lattice, tc, xc, th, xh, amplitude=amp))
    return funcs


def pocket_scalar_basis(cfg, dfm, lattice):
    """Bumps confined to the flattened pocket (rows well below i_sigma2)."""
    t_lo = dfm.t_sigma1
    t_hi = dfm.t_sigma2
    t0 = t_lo + 0.5 * (t_hi - t_lo)
    t_half = 0.22 * (t_hi - t_lo)
    xs = np.linspace(0.15, 0.85, 3) * cfg.length
    return [bump(lattice, t0, float(x), t_half, cfg.basis_width) for x in xs]


def pocket_spinor_basis(cfg, dfm, lattice):
    t_lo = dfm.t_sigma1
    t_hi = dfm.t_sigma2
    t0 = t_lo + 0.5 * (t_hi - t_lo)
    t_half = 0.22 * (t_hi - t_lo)
    xs = np.linspace(0.2, 0.8, 3) * cfg.length
    return [spinor_bump(lattice, t0, float(x), t_half, cfg.basis_width) for x in xs]


# ---------------------------------------------------------------------------
# Schlieder-type factor model


@dataclass
class FactorModel:
    """Commuting operator families on a tensor-product space.

    A1 acts as M x 1, A2 as 1 x N; the model exhibits the three factor
    properties probed by `schlieder_check`: elementwise commutation, spectral
    norm multiplicativity of products across the split, and factorization of
    product-vector expectations.
    """

    dim1: int = 4
    dim2: int = 4
    seed: int = 0

    def __post_init__(self):
        rng = np.random.default_rng(self.seed)
        self.M = rng.normal(size=(self.dim1, self.dim1)) + 1j * rng.normal(
            size=(self.dim1, self.dim1)
        )
        self.N = rng.normal(size=(self.dim2, self.dim2)) + 1j * rng.normal(
            size=(self.dim2, self.dim2)
        )
        v = rng.normal(size=self.dim1) + 1j * rng.normal(size=self.dim1)
        w = rng.normal(size=self.dim2) + 1j * rng.normal(size=self.dim2)
        self.v = v / np.linalg.norm(v)
        self.w = w / np.linalg.norm(w)

    def op1(self, mat=None):
        mat = self.M if mat is None else mat
        return np.kron(mat, np.eye(self.dim2))

    def op2(self, mat=None):
        mat = self.N if mat is None else mat
        return np.kron(np.eye(self.dim1), mat)


def schlieder_check(model):
    """Quantitative factor-independence report for a FactorModel."""
    a1 = model.op1()
    a2 = model.op2()
    comm = float(np.abs(a1 @ a2 - a2 @ a1).max())
    prod_norm = float(np.linalg.norm(a1 @ a2, 2))
    sep_norm = float(np.linalg.norm(model.M, 2) * np.linalg.norm(model.N, 2))
    norm_dev = abs(prod_norm - sep_norm) / sep_norm
    vw = np.kron(model.v, model.w)
    joint = complex(np.vdot(vw, (a1 @ a2) @ vw))
    split = complex(
        np.vdot(model.v, model.M @ model.v) * np.vdot(model.w, model.N @ model.w)
    )
    product_dev = abs(joint - split) / max(abs(split), 1e-300)
    return {
        "commutation": comm,
        "norm_multiplicativity": norm_dev,
        "product_state": product_dev,
    }


# ---------------------------------------------------------------------------
# stages


def _stage_geometry(cfg, ctx):
    model = cfg.model()
    lattice = cfg.lattice(model)
    graph = causal_graph(model, lattice)
    ctx["model"] = model
    ctx["lattice"] = lattice
    ctx["graph"] = graph

    a, b = sample_metric(model, lattice)
    ratio = float((np.sqrt(b) / a).max() * lattice.dt / lattice.dx)
    checks = [check("lightcone_step_ratio", ratio, 1.0)]

    ric = ricci_scalar(model, lattice)
    checks.append(check("curvature_bounded", np.abs(ric).max(), 100.0))
    if model.flat_bands:
        t_lo, t_hi, _ = model.flat_bands[0]
        i_lo = max(lattice.row_of(t_lo) + 2, 1)
        i_hi = min(
            int(np.floor((t_hi - lattice.t_min) / lattice.dt + 1e-9)) - 2,
            lattice.nt - 2,
        )
        flat_dev = float(np.abs(ric[i_lo : i_hi + 1]).max()) if i_hi >= i_lo else 0.0
        checks.append(check("flat_band_curvature", flat_dev, 1e-10))
    return checks


def _stage_causal(cfg, ctx):
    graph = ctx["graph"]
    lat = ctx["lattice"]
    rng = np.random.default_rng(cfg.seed)
    mism = 0
    for _ in range(12):
        pi = int(rng.integers(1, lat.nt - 1))
        qi = int(rng.integers(1, lat.nt - 1))
        pj = int(rng.integers(0, lat.nx))
        qj = int(rng.integers(0, lat.nx))
        p = Region.single(lat, pi, pj)
        q = Region.single(lat, qi, qj)
        fwd = future(graph, p).contains_site(qi, qj)
        bwd = past(graph, q).contains_site(pi, pj)
        if fwd != bwd:
            mism += 1
    checks = [check("order_duality_mismatches", mism, 0.0)]

    mid_t = lat.t_min + 0.5 * lat.dt * (lat.nt - 1)
    o = Region.rect(
        lat,
        mid_t - 3 * lat.dt,
        mid_t + 3 * lat.dt,
        0.2 * lat.length,
        0.3 * lat.length,
    )
    hull = future(graph, o) | past(graph, o) | o
    comp = causal_complement(graph, o)
    checks.append(check("complement_hull_overlap", (hull & comp).size, 0.0))

    band = Region.time_band(lat, lat.nt // 3, lat.nt // 3 + 20)
    probe = Region.single(lat, lat.nt // 3 + 24, lat.nx // 2)
    det = causally_determined(graph, probe, band)
    checks.append(check("band_determines_probe", float(det), 1.0, mode="min"))
    return checks


def _stage_deformation(cfg, ctx):
    dfm = build_deformation(ctx["model"], ctx["lattice"], **cfg.deformation_params())
    atlas = build_atlas(dfm, src_graph=ctx["graph"], **cfg.atlas_params())
    cert = certify(dfm, atlas)
    ctx["deformation"] = dfm
    ctx["atlas"] = atlas
    ctx["certificate"] = cert
    checks = []
    for c in cert.clauses:
        entry = check(
            f"clause_{c.name}",
            c.margin,
            c.threshold,
            mode=CLAUSE_MODES[c.name],
            detail=c.detail,
        )
        if entry["passed"] != c.passed:
            raise ConfigurationError(
                f"certificate clause {c.name} disagrees with its margin comparison"
            )
        checks.append(entry)
    return checks


def _stage_scalar(cfg, ctx):
    lat = ctx["lattice"]
    kernel = WaveKernel(ctx["model"], lat, cfg.mass)
    basis = scalar_basis(cfg, lat)
    space = SymplecticSpace(kernel, basis)
    ctx["wave_kernel"] = kernel
    ctx["scalar_space"] = space

    n = len(basis)
    raw = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            raw[i, j] = kernel.volume_pairing(basis[i].values, space.solutions[j])
    scale = max(float(np.abs(raw).max()), 1e-300)
    duality = float(np.abs(raw + raw.T).max()) / scale
    checks = [check("propagator_duality", duality, 1e-3 * cfg.tol_scale)]

    checks.append(check("spacelike_pairing", abs(space.kappa[0, 1]), 1e-14))

    f = basis[0]
    u = kernel.solve_retarded(f.values)
    resid = kernel.apply_operator(u)
    dev = float(np.abs(resid[2:-2] - f.values[2:-2]).max()) / float(
        np.abs(f.values).max()
    )
    checks.append(check("operator_inversion", dev, 1e-11))

    graph = ctx["graph"]
    lo = int(lat.nt * 0.45)
    hi = min(int(lat.nt * 0.85), lat.nt - 4)
    band = Region.time_band(lat, lo, hi)
    f2 = strict_causal_law(kernel, graph, f, band)
    e1 = kernel.causal_propagator(f.values)
    e2 = kernel.causal_propagator(f2.values)
    law_dev = float(np.abs(e2 - e1).max()) / float(np.abs(e1).max())
    checks.append(check("causal_law_solution_match", law_dev, 1e-6 * cfg.tol_scale))
    checks.append(
        check(
            "causal_law_support",
            float(f2.support().issubset(band)),
            1.0,
            mode="min",
        )
    )
    return checks


def _stage_ccr(cfg, ctx):
    space = ctx["scalar_space"]
    state = QuasifreeState(space)
    ctx["state"] = state
    checks = [
        check("state_psd_margin", state.psd_margin, -cfg.ccr_tol, mode="min"),
    ]
    wscale = max(float(np.abs(state.W).max()), 1e-300)
    pairing_dev = float(np.abs((state.W - state.W.T) - 1j * state.kappa).max()) / wscale
    checks.append(check("pairing_part_identity", pairing_dev, 1e-12))

    fock = FockRep(state, n_max=cfg.fock_cutoff)
    ctx["fock"] = fock
    checks.append(check("fock_commutators", fock.commutator_defect(), cfg.ccr_tol))

    n = len(space.basis)
    tp_dev = 0.0
    for i in range(n):
        for j in range(n):
            tp_dev = max(tp_dev, abs(fock.vacuum_two_point(i, j) - state.W[i, j]))
    checks.append(check("vacuum_two_point", tp_dev / wscale, 1e-10))

    alg0 = LocalAlgebra(fock, [0])
    alg1 = LocalAlgebra(fock, [1])
    checks.append(
        check("local_commutativity", alg0.commutation_defect(alg1), cfg.ccr_tol)
    )
    full = LocalAlgebra(fock, list(range(n)))
    checks.append(
        check("vacuum_cyclicity", full.cyclic_rank(), fock.dim, mode="min")
    )
    ctx["scalar_algebras"] = (alg0, alg1)
    return checks


def _stage_car(cfg, ctx):
    lat = ctx["lattice"]
    kernel = DiracKernel(ctx["model"], lat, cfg.dirac_mass)
    basis = spinor_basis(cfg, lat)
    space = CARSpace(kernel, basis)
    ops = CAROperators(space)
    ctx["dirac_kernel"] = kernel
    ctx["car_space"] = space
    ctx["car_ops"] = ops

    checks = [
        check("gram_imag_part", space.imag_defect, 1e-13),
        check("pairing_hermiticity", space.hermiticity_defect, 0.02 * cfg.tol_scale),
        check("car_anticommutators", ops.anticommutator_defect(), cfg.car_tol),
        check("adjoint_consistency", ops.adjoint_defect(), cfg.car_tol),
        check("spacelike_pairing", abs(space.gram[0, 1]), 1e-14),
    ]
    return checks


def _stage_covariance(cfg, ctx):
    lat = ctx["lattice"]
    model = ctx["model"]
    obj = SpacetimeObject(model, lat, ctx["graph"])
    passed, total = functor_law_samples(obj, n_triples=100, seed=cfg.seed)
    checks = [check("functor_laws", passed, total, mode="min")]

    a, _ = sample_metric(model, lat)
    x_independent = float(np.abs(a - a[:, :1]).max()) == 0.0
    shift = lat.nx // 3 if x_independent else 0
    iso = LatticeIso(obj, obj, 0, shift, Region.full(lat))
    checks.append(check("shift_isometry", verify_isometry(iso), 1e-12))
    moved = transport_scalar_basis(iso, ctx["scalar_space"].basis)
    space2 = SymplecticSpace(ctx["wave_kernel"], moved)
    checks.append(
        check(
            "shift_pairing_transport",
            pairing_transport_defect(ctx["scalar_space"], space2),
            cfg.pairing_tol * cfg.tol_scale,
        )
    )

    dfm = ctx["deformation"]
    dlat = dfm.lattice
    n_twin = dfm.i_sigma2 + 1
    root_g = float(np.sqrt(dfm.gamma))
    twin_lat = Lattice(
        nt=n_twin,
        nx=dlat.nx,
        dt=dlat.dt,
        dx=root_g * dlat.dx,
        t_min=dlat.t_min,
        length=root_g * dlat.length,
    )
    twin_model = minkowski(
        length=twin_lat.length, t_min=twin_lat.t_min, t_max=twin_lat.t_max
    )
    def_obj = SpacetimeObject(dfm.deformed, dlat, dfm.deformed_graph())
    twin_obj = SpacetimeObject(twin_model, twin_lat, causal_graph(twin_model, twin_lat))
    ell = Region.time_band(dlat, 0, dfm.i_sigma2)
    pocket_iso = LatticeIso(def_obj, twin_obj, 0, 0, ell)
    checks.append(check("pocket_isometry", verify_isometry(pocket_iso), 1e-12))

    pbasis = pocket_scalar_basis(cfg, dfm, dlat)
    ker_def = WaveKernel(dfm.deformed, dlat, cfg.mass)
    ker_twin = WaveKernel(twin_model, twin_lat, cfg.mass)
    space_def = SymplecticSpace(ker_def, pbasis)
    space_twin = SymplecticSpace(ker_twin, transport_scalar_basis(pocket_iso, pbasis))
    checks.append(
        check(
            "pocket_pairing_transport",
            pairing_transport_defect(space_def, space_twin),
            cfg.pairing_tol * cfg.tol_scale,
        )
    )

    sbasis = pocket_spinor_basis(cfg, dfm, dlat)
    dker_def = DiracKernel(dfm.deformed, dlat, cfg.dirac_mass)
    dker_twin = DiracKernel(twin_model, twin_lat, cfg.dirac_mass)
    car_def = CARSpace(dker_def, sbasis)
    car_twin = CARSpace(dker_twin, transport_spinor_basis(pocket_iso, sbasis))
    checks.append(
        check(
            "pocket_spinor_transport",
            pairing_transport_defect(car_def, car_twin),
            cfg.pairing_tol * cfg.tol_scale,
        )
    )

    st_def = QuasifreeState(space_def)
    st_twin = QuasifreeState(space_twin)
    wscale = max(float(np.abs(st_def.W).max()), 1e-300)
    w_dev = float(np.abs(st_def.W - st_twin.W).max()) / wscale
    checks.append(
        check("pocket_state_covariance", w_dev, cfg.pairing_tol * cfg.tol_scale)
    )
    fock_def = FockRep(st_def, n_max=cfg.fock_cutoff)
    fock_twin = FockRep(st_twin, n_max=cfg.fock_cutoff)
    checks.append(
        check(
            "pocket_representation_covariance",
            representation_covariance_defect(fock_def, fock_twin, seed=cfg.seed),
            cfg.pairing_tol * cfg.tol_scale,
        )
    )

    fac = schlieder_check(FactorModel(seed=cfg.seed))
    checks.append(check("factor_commutation", fac["commutation"], 1e-13))
    checks.append(
        check("factor_norm_multiplicativity", fac["norm_multiplicativity"], 1e-10)
    )
    checks.append(check("factor_product_state", fac["product_state"], 1e-12))
    return checks


def _stage_statistics(cfg, ctx):
    reps = [SpinRep(k, l) for k in range(4) for l in range(4)]
    reps.append(SpinRep(1, 0, real_double=True))
    mism = 0
    for rep in reps:
        expected = 1.0 if (rep.k + rep.l) % 2 == 0 else -1.0
        central = rep_matrix(rep, -np.eye(2, dtype=complex))
        central_dev = float(np.abs(central - expected * np.eye(rep.dim)).max())
        if statistics_sign(rep) != expected or central_dev > 1e-12:
            mism += 1
    checks = [check("spin_parity_rule", mism, 0.0)]

    elems = sample_group_elements(n_random=12, seed=cfg.seed)
    hom_dev = 0.0
    eta_dev = 0.0
    for s1 in elems[:6]:
        for s2 in elems[:6]:
            lam1 = covering_map(s1)
            lam2 = covering_map(s2)
            lam12 = covering_map(s1 @ s2)
            hom_dev = max(hom_dev, float(np.abs(lam12 - lam1 @ lam2).max()))
    for s in elems:
        lam = covering_map(s)
        eta_dev = max(eta_dev, float(np.abs(lam.T @ ETA @ lam - ETA).max()))
    checks.append(check("covering_homomorphism", hom_dev, 1e-10))
    checks.append(check("covering_preserves_form", eta_dev, 1e-10))

    kernel_dev = float(
        np.abs(covering_map(-np.eye(2, dtype=complex)) - covering_map(np.eye(2, dtype=complex))).max()
    )
    checks.append(check("covering_kernel", kernel_dev, 1e-14))

    rep_dev = 0.0
    for rep in (SpinRep(1), SpinRep(0, 1), SpinRep(1, 1), SpinRep(1, 0, real_double=True)):
        for s1 in elems[:4]:
            for s2 in elems[:4]:
                r12 = rep_matrix(rep, s1 @ s2)
                r1r2 = rep_matrix(rep, s1) @ rep_matrix(rep, s2)
                rep_dev = max(rep_dev, float(np.abs(r12 - r1r2).max()))
    checks.append(check("rep_multiplicativity", rep_dev, 1e-9))

    fock = ctx["fock"]
    phi0 = fock.field(0)
    phi1 = fock.field(1)
    # the truncated fields are exact only below the occupation cutoff
    proj = fock.below_cutoff
    comm = (phi0 @ phi1 - phi1 @ phi0) @ proj
    anti = (phi0 @ phi1 + phi1 @ phi0) @ proj
    c_max = float(np.abs(comm.data).max()) if comm.nnz else 0.0
    a_max = float(np.abs(anti.data).max()) if anti.nnz else 0.0
    checks.append(check("scalar_spacelike_commutator", c_max, cfg.ccr_tol))
    checks.append(
        check("scalar_wrong_law_witness", a_max / max(c_max, 1e-300), 1e4, mode="min")
    )

    ops = ctx["car_ops"]
    space = ctx["car_space"]
    anti_mag, comm_norm = ops.pair_report(0, 1)
    checks.append(check("dirac_spacelike_anticommutator", anti_mag, cfg.car_tol))
    checks.append(
        check(
            "dirac_wrong_law_witness",
            comm_norm / max(anti_mag, 1e-300),
            1e4,
            mode="min",
        )
    )
    g00 = space.gram[0, 0]
    g11 = space.gram[1, 1]
    checks.append(
        check(
            "dirac_commutator_scale",
            comm_norm / np.sqrt(max(g00 * g11, 1e-300)),
            0.5,
            mode="min",
        )
    )
    return checks


STAGE_ORDER = (
    "geometry",
    "causal",
    "deformation",
    "scalar",
    "ccr",
    "car",
    "covariance",
    "statistics",
)

_STAGE_FUNCS = {
    "geometry": _stage_geometry,
    "causal": _stage_causal,
    "deformation": _stage_deformation,
    "scalar": _stage_scalar,
    "ccr": _stage_ccr,
    "car": _stage_car,
    "covariance": _stage_covariance,
    "statistics": _stage_statistics,
}

_STAGE_DEPS = {
    "geometry": (),
    "causal": ("geometry",),
    "deformation": ("geometry",),
    "scalar": ("geometry",),
    "ccr": ("scalar",),
    "car": ("geometry",),
    "covariance": ("deformation", "scalar", "car"),
    "statistics": ("ccr", "car"),
}


def resolve_stages(requested=None):
    """Expand a stage subset to dependency-closed execution order."""
    if requested is None:
        return list(STAGE_ORDER)
    wanted = set()

    def add(name):
        if name not in _STAGE_FUNCS:
            raise ConfigurationError(f"unknown stage {name!r}")
        if name in wanted:
            return
        for dep in _STAGE_DEPS[name]:
            add(dep)
        wanted.add(name)

    for name in requested:
        add(name)
    return [s for s in STAGE_ORDER if s in wanted]


# stages and check-name prefixes that belong only to the other branch
_BRANCH_EXCLUDES = {
    "integer": ({"car"}, "dirac_"),
    "half-integer": ({"scalar", "ccr"}, "scalar_"),
}


def branch_verdict(stage_reports, branch):
    """'mechanism-confirmed' or 'failed[stage:check, ...]' for one branch.

    The integer branch ignores the Dirac-only stages/checks and vice versa;
    everything else (geometry, causal structure, deformation, covariance,
    spin layer) is shared by both statistics arguments.
    """
    skip_stages, skip_prefix = _BRANCH_EXCLUDES[branch]
    failures = []
    for stage in stage_reports:
        if stage["name"] in skip_stages:
            continue
        for c in stage["checks"]:
            if c["name"].startswith(skip_prefix):
                continue
            if not c["passed"]:
                failures.append(f"{stage['name']}:{c['name']}")
    if not failures:
        return "mechanism-confirmed"
    return "failed[" + ", ".join(failures) + "]"


def overall_verdict(stage_reports):
    """'mechanism-confirmed' iff every check in every stage passed."""
    failures = [
        f"{s['name']}:{c['name']}"
        for s in stage_reports
        for c in s["checks"]
        if not c["passed"]
    ]
    if not failures:
        return "mechanism-confirmed"
    return "failed[" + ", ".join(failures) + "]"


def run_spinstat(cfg, stages=None):
    """Run the requested stages (all by default); returns the report dict."""
    names = resolve_stages(stages)
    ctx = {}
    stage_reports = []
    for name in names:
        checks = _STAGE_FUNCS[name](cfg, ctx)
        stage_reports.append(
            {
                "name": name,
                "passed": all(c["passed"] for c in checks),
                "checks": checks,
                "n_checks": len(checks),
            }
        )
    report = {
        "tool": "causalfields-spinstat",
        "version": __version__,
        "backend": active_backend(),
        "seed": cfg.seed,
        "config": {k: getattr(cfg, k) for k in sorted(vars(cfg))},
        "stages": stage_reports,
        "verdict": overall_verdict(stage_reports),
        "branches": {
            b: branch_verdict(stage_reports, b) for b in sorted(_BRANCH_EXCLUDES)
        },
        "counts": {
            "stages": len(stage_reports),
            "checks": int(sum(s["n_checks"] for s in stage_reports)),
            "failed": int(
                sum(
                    sum(0 if c["passed"] else 1 for c in s["checks"])
                    for s in stage_reports
                )
            ),
        },
    }
    ctx["report"] = report
    return report, ctx

"""Metric deformations that flatten the past while fixing the future.

Given a source model with b == 1 and a lattice, the deformation picks three
time rows t_sigma1 < t_sigma2 < t_sigma and replaces a^2 below t_sigma by
the interpolation f(t)*gamma + (1 - f(t))*a^2, where f is a quintic step
equal to 1 below t_sigma2 and 0 above t_sigma, and gamma bounds a^2 over the
affected rows. The result is exactly flat (a = sqrt(gamma)) below t_sigma2,
bitwise equal to the source at and above t_sigma, and has nowhere-wider
lightcones, so the causal order and the stability bound are inherited.

The deformed lattice reuses the source rows from t_sigma1 upward, which
makes the overlap identification a plain row shift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .causal import (
    CausalGraph,
    Region,
    causal_graph,
    causal_hull,
    determination_depth,
    separation_margin,
    truncated_diamond,
)
from .errors import ConfigurationError, DomainError
from .geometry import Lattice, MetricModel, bump_profile, ricci_scalar, sample_metric, smoothstep


@dataclass(frozen=True, eq=False)
class Deformation:
    source: MetricModel
    deformed: MetricModel
    source_lattice: Lattice
    lattice: Lattice
    row_offset: int
    i_sigma1: int
    i_sigma2: int
    i_sigma: int
    t_sigma1: float
    t_sigma2: float
    t_sigma: float
    gamma: float
    params: dict = field(default_factory=dict)

    def source_graph(self):
        return causal_graph(self.source, self.source_lattice)

    def deformed_graph(self):
        return causal_graph(self.deformed, self.lattice)

    def to_source_row(self, i):
        return i + self.row_offset

    def to_deformed_row(self, i):
        return i - self.row_offset

    def lift_region(self, region):
        """Map a deformed-lattice region in the shared rows to the source lattice."""
        if region.lattice != self.lattice:
            raise ConfigurationError("region is not on the deformed lattice")
        m = np.zeros((self.source_lattice.nt, self.source_lattice.nx), dtype=bool)
        m[self.row_offset :] = region.mask
        return Region(self.source_lattice, m)

    def drop_region(self, region):
        """Map a source-lattice region at rows >= row_offset to the deformed lattice."""
        if region.lattice != self.source_lattice:
            raise ConfigurationError("region is not on the source lattice")
        if region.mask[: self.row_offset].any():
            raise DomainError("region extends below the deformed lattice")
        return Region(self.lattice, region.mask[self.row_offset :].copy())


def build_deformation(source, source_lattice, t_sigma1, t_sigma2, t_sigma,
                      gamma_margin=1.0, lapse_floor=1.0, tamper=0.0):
    """Construct the flattened-past deformation of `source`.

    gamma_margin >= 1 scales the flattening level above the pointwise bound;
    lapse_floor in (0, 1] dips b inside the transition zone (1 = no dip);
    tamper != 0 deliberately breaks the future identity (used by the
    failure-demonstration configs).
    """
    lat = source_lattice
    if gamma_margin < 1.0:
        raise ConfigurationError(f"gamma_margin must be >= 1, got {gamma_margin}")
    if not 0.0 < lapse_floor <= 1.0:
        raise ConfigurationError(f"lapse_floor must be in (0, 1], got {lapse_floor}")
    i1 = lat.row_of(t_sigma1)
    i2 = lat.row_of(t_sigma2)
    i3 = lat.row_of(t_sigma)
    if not (2 <= i1 and i1 + 2 <= i2 and i2 + 2 <= i3 and i3 + 4 <= lat.nt - 1):
        raise ConfigurationError(
            f"slice rows too close or too near the boundary: {i1}, {i2}, {i3} "
            f"on nt={lat.nt}"
        )
    ts1 = lat.t_of(i1)
    ts2 = lat.t_of(i2)
    ts3 = lat.t_of(i3)

    a_src, b_src = sample_metric(source, lat)
    if np.abs(b_src - 1.0).max() > 1e-12:
        raise ConfigurationError("deformation requires a source with b == 1")
    zone = slice(i1, i3 + 1)
    gamma = float(gamma_margin * np.max(a_src[zone] ** 2))

    dt = lat.dt
    src_a = source.a_fn
    src_b = source.b_fn

    def blend(t):
        return 1.0 - smoothstep((np.asarray(t, dtype=float) - ts2) / (ts3 - ts2))

    def a_def(t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        av = np.broadcast_arrays(np.asarray(src_a(t, x), dtype=float), t)[0]
        f = blend(t)
        mixed = np.sqrt(f * gamma + (1.0 - f) * av ** 2)
        out = np.where(t >= ts3 - 0.5 * dt, av, mixed)
        if tamper != 0.0:
            out = out + tamper * bump_profile((t - ts3) / (2.0 * (ts3 - ts2)))
        return out

    if lapse_floor == 1.0:
        b_def = src_b
    else:
        mid = 0.5 * (ts2 + ts3)
        half = 0.45 * (ts3 - ts2)

        def b_def(t, x):
            t = np.asarray(t, dtype=float)
            x = np.asarray(x, dtype=float)
            base = np.broadcast_arrays(np.asarray(src_b(t, x), dtype=float), t)[0]
            dip = (1.0 - lapse_floor) * bump_profile((t - (mid - half)) / (2.0 * half))
            return base - dip

    bands = [(ts1, ts2, float(np.sqrt(gamma)))]
    for lo, hi, aval in source.flat_bands:
        if lo >= ts3:
            bands.append((lo, hi, aval))

    deformed = MetricModel(
        name=f"deformed({source.name})",
        a_fn=a_def,
        b_fn=b_def,
        t_min=ts1,
        t_max=source.t_max,
        length=source.length,
        flat_bands=tuple(bands),
        params={
            "source": source.name,
            "gamma": gamma,
            "t_sigma1": ts1,
            "t_sigma2": ts2,
            "t_sigma": ts3,
            "lapse_floor": float(lapse_floor),
            "tamper": float(tamper),
        },
    )
    dlat = Lattice(nt=lat.nt - i1, nx=lat.nx, dt=lat.dt, dx=lat.dx,
                   t_min=ts1, length=lat.length)
    return Deformation(
        source=source,
        deformed=deformed,
        source_lattice=lat,
        lattice=dlat,
        row_offset=i1,
        i_sigma1=0,
        i_sigma2=i2 - i1,
        i_sigma=i3 - i1,
        t_sigma1=ts1,
        t_sigma2=ts2,
        t_sigma=ts3,
        gamma=gamma,
        params={"gamma_margin": float(gamma_margin), "lapse_floor": float(lapse_floor),
                "tamper": float(tamper)},
    )


@dataclass(frozen=True, eq=False)
class Atlas:
    """The region families used by the localization argument.

    U: two disjoint future regions (source lattice, above t_sigma);
    U_def: the same sets on the deformed lattice;
    Uhat: their flattened-zone counterparts; Utilde: small seeds inside the
    flattened zone, one below each U; G: a common localization region in the
    source future; Ghat: a common localization region in the flattened zone.
    """

    U: tuple
    U_def: tuple
    Uhat: tuple
    Utilde: tuple
    G: Region
    Ghat: Region
    p_sites: tuple
    ptilde_sites: tuple
    params: dict = field(default_factory=dict)


def build_atlas(deformation, src_graph=None, def_graph=None, p_t=None, p_xs=None,
                u_half=0.6, u_rows=3, w_pad=0.9, uhat_half=1.16, uhat_base_t=None,
                uhat_top_t=None, utilde_half_cells=4, utilde_base_t=None,
                utilde_rows=2, what_half=1.37, uhat_shrink=1.0):
    """Construct the default two-patch atlas around sites p_1, p_2.

    All widths are coordinate half-extents except utilde_half_cells.
    uhat_shrink < 1 shrinks the flattened-zone bases (used by the failure
    demonstration; the determination clause then fails).
    """
    dfm = deformation
    slat = dfm.source_lattice
    dlat = dfm.lattice
    sg = src_graph if src_graph is not None else dfm.source_graph()
    dg = def_graph if def_graph is not None else dfm.deformed_graph()

    if p_t is None:
        p_t = dfm.t_sigma + 4 * slat.dt
    if p_xs is None:
        p_xs = (0.25 * slat.length, 0.75 * slat.length)
    if uhat_base_t is None:
        uhat_base_t = dfm.t_sigma1 + 0.35 * (dfm.t_sigma2 - dfm.t_sigma1)
    if utilde_base_t is None:
        utilde_base_t = dfm.t_sigma2 - 4 * slat.dt
    if uhat_top_t is None:
        uhat_top_t = dfm.t_sigma2 - 2 * slat.dt

    ip = slat.row_of(p_t)
    if ip <= dfm.to_source_row(dfm.i_sigma):
        raise ConfigurationError(f"p sites (row {ip}) must lie above the t_sigma row")
    cols = [slat.col_of(x) for x in p_xs]
    if len(cols) != 2 or cols[0] == cols[1]:
        raise ConfigurationError(f"need two distinct site columns, got {cols}")
    p_sites = tuple((ip, c) for c in cols)

    dx = slat.dx
    U = []
    U_def = []
    for c in cols:
        x = slat.x_of(c)
        base = Region.slice_arc(slat, ip, x - u_half, x + u_half)
        piece = truncated_diamond(sg, base, ip - u_rows, ip + u_rows)
        U.append(piece)
        U_def.append(dfm.drop_region(piece))

    i_uhat = dlat.row_of(uhat_base_t)
    i_uhat_top = dlat.row_of(uhat_top_t)
    i_util = dlat.row_of(utilde_base_t)
    if not (1 <= i_uhat < i_uhat_top <= dfm.i_sigma2):
        raise ConfigurationError(
            f"flattened-zone rows out of order: base {i_uhat}, top {i_uhat_top}, "
            f"pocket top {dfm.i_sigma2}"
        )

    Uhat = []
    Utilde = []
    ptilde = []
    half = uhat_half * uhat_shrink
    for c in cols:
        x = dlat.x_of(c)
        base = Region.slice_arc(dlat, i_uhat, x - half, x + half)
        Uhat.append(truncated_diamond(dg, base, i_uhat, i_uhat_top))
        tb = Region.slice_arc(
            dlat, i_util, x - utilde_half_cells * dx, x + utilde_half_cells * dx
        )
        Utilde.append(
            truncated_diamond(dg, tb, max(i_util - utilde_rows, 1), i_util + utilde_rows)
        )
        ptilde.append((i_util, c))

    # G: common future localization region over an arc joining the two columns
    i_s = dfm.to_source_row(dfm.i_sigma)
    x1 = slat.x_of(cols[0])
    x2 = slat.x_of(cols[1])
    warc = Region.slice_arc(slat, i_s, x1 - w_pad, x2 + w_pad)
    G = truncated_diamond(sg, warc, i_s, slat.nt - 1)

    # Ghat: flattened-zone localization region over arcs around both columns
    row_w = 1
    m = (
        Region.slice_arc(dlat, row_w, dlat.x_of(cols[0]) - what_half,
                         dlat.x_of(cols[0]) + what_half)
        | Region.slice_arc(dlat, row_w, dlat.x_of(cols[1]) - what_half,
                           dlat.x_of(cols[1]) + what_half)
    )
    dom = domain_union_diamond(dg, m, row_w, dfm.i_sigma2)
    Ghat = dom

    return Atlas(
        U=tuple(U),
        U_def=tuple(U_def),
        Uhat=tuple(Uhat),
        Utilde=tuple(Utilde),
        G=G,
        Ghat=Ghat,
        p_sites=p_sites,
        ptilde_sites=tuple(ptilde),
        params={
            "p_t": float(p_t),
            "p_xs": tuple(float(x) for x in p_xs),
            "u_half": float(u_half),
            "u_rows": int(u_rows),
            "w_pad": float(w_pad),
            "uhat_half": float(uhat_half),
            "uhat_shrink": float(uhat_shrink),
            "what_half": float(what_half),
        },
    )


def domain_union_diamond(graph, base, i_lo, i_hi):
    """int(D(base) & rows[i_lo, i_hi]) for a (possibly multi-arc) single-row base."""
    from .causal import domain_of_dependence, interior

    band = Region.time_band(graph.lattice, i_lo, i_hi)
    out = interior(domain_of_dependence(graph, base) & band)
    if out.is_empty:
        raise DomainError("localization region is empty")
    return out


@dataclass
class ClauseResult:
    name: str
    passed: bool
    margin: float
    threshold: float
    detail: str

    def as_dict(self):
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "margin": float(self.margin),
            "threshold": float(self.threshold),
            "detail": self.detail,
        }


@dataclass
class Certificate:
    clauses: list

    @property
    def passed(self):
        return all(c.passed for c in self.clauses)

    def clause(self, name):
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self):
        return {
            "passed": self.passed,
            "clauses": [c.as_dict() for c in self.clauses],
        }


DEFAULT_CERT_TOLERANCES = {
    "future_identity": 0.0,
    "pocket_flatness": 1e-12,
    "pocket_curvature": 1e-12,
    "cone_narrowing": -1e-12,
    "future_agreement": 0.0,
    "lapse_bounds": 1e-12,
    "separation_margin": 1,
    "determination_depth": 1,
}

# direction of each clause's margin-vs-threshold comparison
CLAUSE_MODES = {
    "future_identity": "max",
    "pocket_flatness": "max",
    "pocket_curvature": "max",
    "cone_narrowing": "min",
    "future_agreement": "max",
    "lapse_bounds": "min",
    "separations": "min",
    "determination": "min",
}


def certify(deformation, atlas=None, tolerances=None):
    """Check the deformation clauses; returns a Certificate with margins.

    (a) future identity: deformed metric equals the source on the shared
        rows at and above t_sigma, exactly;
    (b) flattened zone: a == sqrt(gamma), b == 1, curvature == 0 below
        t_sigma2;
    (c) cone narrowing: deformed a >= source a pointwise (so deformed cones
        are contained in source cones), plus agreement of causal futures on
        the shared rows seeded from the t_sigma row;
    (d) lapse bounds: 0 < b <= 1 everywhere on the deformed lattice;
    (e) with an atlas: the two patch families are mutually spacelike with at
        least a one-cell closure margin;
    (f) with an atlas: the determination chain (each Utilde determined by
        its U and its Uhat; patches determined by their localization
        regions).
    """
    dfm = deformation
    tol = dict(DEFAULT_CERT_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    clauses = []

    slat = dfm.source_lattice
    dlat = dfm.lattice
    a_src, b_src = sample_metric(dfm.source, slat)
    a_def, b_def = sample_metric(dfm.deformed, dlat)

    shared = dfm.to_source_row(dfm.i_sigma)
    diff_a = float(np.abs(a_def[dfm.i_sigma :] - a_src[shared:]).max())
    diff_b = float(np.abs(b_def[dfm.i_sigma :] - b_src[shared:]).max())
    margin = max(diff_a, diff_b)
    clauses.append(
        ClauseResult(
            "future_identity",
            margin <= tol["future_identity"],
            margin,
            tol["future_identity"],
            "max |g_deformed - g_source| on rows at and above t_sigma",
        )
    )

    sq = float(np.sqrt(dfm.gamma))
    pocket = slice(0, dfm.i_sigma2 + 1)
    flat_dev = max(
        float(np.abs(a_def[pocket] - sq).max()) / sq,
        float(np.abs(b_def[pocket] - 1.0).max()),
    )
    clauses.append(
        ClauseResult(
            "pocket_flatness",
            flat_dev <= tol["pocket_flatness"],
            flat_dev,
            tol["pocket_flatness"],
            "relative deviation of (a, b) from (sqrt(gamma), 1) below t_sigma2",
        )
    )

    ric = ricci_scalar(dfm.deformed, dlat)
    curv = float(np.abs(ric[1 : max(dfm.i_sigma2 - 1, 2)]).max())
    clauses.append(
        ClauseResult(
            "pocket_curvature",
            curv <= tol["pocket_curvature"],
            curv,
            tol["pocket_curvature"],
            "max |R| on interior flattened-zone rows",
        )
    )

    zone = slice(0, dfm.i_sigma + 1)
    narrow = float((a_def[zone] - a_src[dfm.row_offset : shared + 1]).min())
    clauses.append(
        ClauseResult(
            "cone_narrowing",
            narrow >= tol["cone_narrowing"],
            narrow,
            tol["cone_narrowing"],
            "min(a_deformed - a_source) on affected rows",
        )
    )

    seed_dev = _future_agreement(dfm)
    clauses.append(
        ClauseResult(
            "future_agreement",
            seed_dev <= tol["future_agreement"],
            float(seed_dev),
            float(tol["future_agreement"]),
            "site mismatches between deformed and source futures seeded on the t_sigma row",
        )
    )

    bmin = float(b_def.min())
    bmax = float(b_def.max())
    lapse_margin = min(bmin, 1.0 + tol["lapse_bounds"] - bmax)
    clauses.append(
        ClauseResult(
            "lapse_bounds",
            lapse_margin >= 0.0,
            lapse_margin,
            0.0,
            f"b range [{bmin:.6g}, {bmax:.6g}] must lie in (0, 1]",
        )
    )

    if atlas is not None:
        sg = dfm.source_graph()
        dg = dfm.deformed_graph()
        sep_min, sep_detail = _separations(dfm, atlas, sg, dg)
        clauses.append(
            ClauseResult(
                "separations",
                sep_min >= tol["separation_margin"],
                float(sep_min),
                float(tol["separation_margin"]),
                sep_detail,
            )
        )
        det_min, det_detail = _determinations(dfm, atlas, sg, dg)
        clauses.append(
            ClauseResult(
                "determination",
                det_min >= tol["determination_depth"],
                float(det_min),
                float(tol["determination_depth"]),
                det_detail,
            )
        )

    return Certificate(clauses)


def _future_agreement(dfm):
    """Causal futures seeded on the t_sigma row must agree on shared rows."""
    from .causal import future

    sg = dfm.source_graph()
    dg = dfm.deformed_graph()
    dlat = dfm.lattice
    nx = dlat.nx
    seed_cols = [0, nx // 3, (2 * nx) // 3]
    seed_def = Region.from_sites(dlat, [(dfm.i_sigma, c) for c in seed_cols])
    seed_src = Region.from_sites(
        dfm.source_lattice, [(dfm.to_source_row(dfm.i_sigma), c) for c in seed_cols]
    )
    f_def = future(dg, seed_def).mask[dfm.i_sigma :]
    f_src = future(sg, seed_src).mask[dfm.to_source_row(dfm.i_sigma) :]
    return int(np.count_nonzero(f_def ^ f_src))


def _separations(dfm, atlas, sg, dg):
    """Minimum spacelike margin between the two patch families."""
    fam = []
    for side in (0, 1):
        fam.append(
            {
                "U": (atlas.U[side], sg),
                "U_def": (atlas.U_def[side], dg),
                "Uhat": (atlas.Uhat[side], dg),
                "Utilde": (atlas.Utilde[side], dg),
            }
        )
    worst = None
    detail = ""
    for name1, (r1, g1) in fam[0].items():
        for name2, (r2, g2) in fam[1].items():
            if g1 is not g2:
                continue
            m = separation_margin(g1, r1, r2)
            if worst is None or m < worst:
                worst = m
                detail = f"tightest pair {name1}(1) vs {name2}(2): margin {m}"
    m = separation_margin(sg, atlas.U[0], atlas.U[1])
    if m < worst:
        worst = m
        detail = f"tightest pair U(1) vs U(2) in source: margin {m}"
    return worst, detail


def _determinations(dfm, atlas, sg, dg):
    """Minimum determination depth over the clause-(f) chain."""
    checks = []
    for side in (0, 1):
        checks.append((f"Utilde{side+1} by U{side+1}", dg, atlas.Utilde[side], atlas.U_def[side]))
        checks.append((f"Utilde{side+1} by Uhat{side+1}", dg, atlas.Utilde[side], atlas.Uhat[side]))
        checks.append((f"U{side+1} by G", sg, atlas.U[side], atlas.G))
        checks.append((f"Uhat{side+1} by Ghat", dg, atlas.Uhat[side], atlas.Ghat))
        checks.append((f"Utilde{side+1} by Ghat", dg, atlas.Utilde[side], atlas.Ghat))
    worst = None
    detail = ""
    for name, g, probe, target in checks:
        d = determination_depth(g, probe, target)
        if worst is None or d < worst:
            worst = d
            detail = f"tightest link: {name} at depth {d}"
    return worst, detail

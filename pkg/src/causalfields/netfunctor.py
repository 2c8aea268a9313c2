"""Spacetime objects, lattice isometries, and the covariant net functor.

Morphisms between lattice spacetimes are either the absorbing trivial
morphism or affine index maps (row shift, column shift mod nx) carrying an
initial localization region. Lattices may differ in dx when the coordinate
convention differs (the flattened zone versus its unit-lapse twin); the
isometry check therefore compares the frame data (b, a*dx) per matched site
rather than raw coefficients. Composition is exact integer arithmetic, so
the functor laws hold exactly.

The identity morphism carries the full lattice as its localization (the
finite-lattice stand-in for an exhausting region).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .causal import CausalGraph, Region
from .errors import ConfigurationError, CovarianceError
from .geometry import Lattice, MetricModel, sample_metric


@dataclass(frozen=True, eq=False)
class SpacetimeObject:
    model: MetricModel
    lattice: Lattice
    graph: CausalGraph


class TrivialMorphism:
    """The absorbing zero morphism."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "TRIVIAL"


TRIVIAL = TrivialMorphism()


@dataclass(frozen=True, eq=False)
class LatticeIso:
    """theta: (i, j) -> (i + row_shift, (j + col_shift) mod nx)."""

    src: SpacetimeObject
    dst: SpacetimeObject
    row_shift: int
    col_shift: int
    ell_ini: Region

    def __post_init__(self):
        if self.ell_ini.lattice != self.src.lattice:
            raise ConfigurationError("localization must live on the source lattice")
        if self.src.lattice.nx != self.dst.lattice.nx:
            raise ConfigurationError("morphisms require equal column counts")
        if abs(self.src.lattice.dt - self.dst.lattice.dt) > 1e-15 * max(
            self.src.lattice.dt, self.dst.lattice.dt
        ):
            raise ConfigurationError("morphisms require equal time steps")
        if self.ell_ini.is_empty:
            raise ConfigurationError("empty localization; use TRIVIAL instead")
        rows = self.ell_ini.rows()
        lo = rows[0] + self.row_shift
        hi = rows[-1] + self.row_shift
        if lo < 0 or hi >= self.dst.lattice.nt:
            raise ConfigurationError(
                f"localization rows [{rows[0]}, {rows[-1]}] map outside the target lattice"
            )

    def map_site(self, site):
        i, j = site
        return (i + self.row_shift, (j + self.col_shift) % self.dst.lattice.nx)

    def map_region(self, region):
        if region.lattice != self.src.lattice:
            raise ConfigurationError("region is not on the source lattice")
        if not region.issubset(self.ell_ini):
            raise ConfigurationError("region escapes the morphism localization")
        src_rows = region.mask
        out = np.zeros((self.dst.lattice.nt, self.dst.lattice.nx), dtype=bool)
        rows = np.flatnonzero(src_rows.any(axis=1))
        for i in rows:
            out[i + self.row_shift] = np.roll(src_rows[i], self.col_shift)
        return Region(self.dst.lattice, out)

    @property
    def ell_fin(self):
        return self.map_region(self.ell_ini)

    def push_values(self, values):
        """Transport a grid function f -> f o theta^{-1} (zero off the image)."""
        values = np.asarray(values)
        out = np.zeros((self.dst.lattice.nt, self.dst.lattice.nx), dtype=values.dtype)
        nt = self.src.lattice.nt
        lo = max(0, -self.row_shift)
        hi = min(nt, self.dst.lattice.nt - self.row_shift)
        out[lo + self.row_shift : hi + self.row_shift] = np.roll(
            values[lo:hi], self.col_shift, axis=1
        )
        return out

    def inverse(self):
        return LatticeIso(
            src=self.dst,
            dst=self.src,
            row_shift=-self.row_shift,
            col_shift=-self.col_shift,
            ell_ini=self.ell_fin,
        )


def identity_morphism(obj):
    return LatticeIso(obj, obj, 0, 0, Region.full(obj.lattice))


def verify_isometry(iso, rtol=1e-12):
    """Check that the map preserves the frame data (b, a*dx) on ell_ini.

    Raises CovarianceError when the metrics disagree; returns the max
    relative deviation otherwise.
    """
    src = iso.src
    dst = iso.dst
    a1, b1 = sample_metric(src.model, src.lattice)
    a2, b2 = sample_metric(dst.model, dst.lattice)
    m = iso.ell_ini.mask
    rows = np.flatnonzero(m.any(axis=1))
    worst = 0.0
    for i in rows:
        cols = np.flatnonzero(m[i])
        ti = i + iso.row_shift
        tcols = (cols + iso.col_shift) % dst.lattice.nx
        da = np.abs(
            a1[i, cols] * src.lattice.dx - a2[ti, tcols] * dst.lattice.dx
        ) / (a1[i, cols] * src.lattice.dx)
        db = np.abs(b1[i, cols] - b2[ti, tcols]) / np.maximum(b1[i, cols], 1e-300)
        worst = max(worst, float(da.max(initial=0.0)), float(db.max(initial=0.0)))
    if worst > rtol:
        raise CovarianceError(f"map is not an isometry: frame deviation {worst}")
    return worst


def compose(m2, m1):
    """m2 after m1; TRIVIAL absorbs, empty overlap collapses to TRIVIAL."""
    if m1 is TRIVIAL or m2 is TRIVIAL:
        return TRIVIAL
    if m1.dst.lattice != m2.src.lattice:
        raise ConfigurationError("morphisms are not composable (lattice mismatch)")
    overlap = m2.ell_ini & m1.ell_fin
    if overlap.is_empty:
        return TRIVIAL
    ell = m1.inverse().map_region(overlap)
    return LatticeIso(
        src=m1.src,
        dst=m2.dst,
        row_shift=m1.row_shift + m2.row_shift,
        col_shift=(m1.col_shift + m2.col_shift) % m1.src.lattice.nx,
        ell_ini=ell,
    )


def morphisms_equal(m1, m2):
    if m1 is TRIVIAL or m2 is TRIVIAL:
        return m1 is m2
    return (
        m1.src is m2.src
        and m1.dst is m2.dst
        and m1.row_shift == m2.row_shift
        and m1.col_shift % m1.src.lattice.nx == m2.col_shift % m2.src.lattice.nx
        and m1.ell_ini.equals(m2.ell_ini)
    )


def transport_scalar_basis(iso, basis):
    """Push scalar test functions through the morphism."""
    from .scalarfield import TestFunction

    return [TestFunction(iso.dst.lattice, iso.push_values(f.values)) for f in basis]


def transport_spinor_basis(iso, basis):
    from .diracfield import SpinorTestFunction

    return [
        SpinorTestFunction(
            iso.dst.lattice, iso.push_values(f.upper), iso.push_values(f.lower)
        )
        for f in basis
    ]


def pairing_transport_defect(space_src, space_dst):
    """Max relative deviation between the source and transported Grams."""
    if hasattr(space_src, "kappa"):
        g1 = space_src.kappa
        g2 = space_dst.kappa
    else:
        g1 = space_src.gram
        g2 = space_dst.gram
    scale = max(float(np.abs(g1).max()), 1e-300)
    return float(np.abs(g1 - g2).max()) / scale


def check_invariant_pairings(iso, scalar_space=None, car_space=None, tol=1e-6):
    """Rebuild the transported spaces on the target and compare pairings.

    Returns {'scalar': dev, 'dirac': dev} for the provided spaces; raises
    CovarianceError when a deviation exceeds tol.
    """
    from .diracfield import CARSpace, DiracKernel
    from .scalarfield import SymplecticSpace, WaveKernel

    verify_isometry(iso)
    out = {}
    if scalar_space is not None:
        kernel2 = WaveKernel(iso.dst.model, iso.dst.lattice, scalar_space.kernel.mass)
        moved = transport_scalar_basis(iso, scalar_space.basis)
        space2 = SymplecticSpace(kernel2, moved)
        dev = pairing_transport_defect(scalar_space, space2)
        out["scalar"] = dev
        if dev > tol:
            raise CovarianceError(f"scalar pairing transport deviates by {dev}")
    if car_space is not None:
        kernel2 = DiracKernel(iso.dst.model, iso.dst.lattice, car_space.kernel.mass)
        moved = transport_spinor_basis(iso, car_space.basis)
        space2 = CARSpace(kernel2, moved)
        dev = pairing_transport_defect(car_space, space2)
        out["dirac"] = dev
        if dev > tol:
            raise CovarianceError(f"spinor pairing transport deviates by {dev}")
    return out


def representation_covariance_defect(fock1, fock2, n_samples=8, seed=0):
    """Max deviation between gauge-invariant vacuum moments of two reps.

    Individual generator matrices depend on the mode gauge (any unitary
    remixing of degenerate modes), so they cannot be compared entrywise.
    Vacuum moments are gauge invariant; two representations of the same net
    over isometric regions must agree on all of them.
    """
    n = fock1._coeff.shape[1]
    if fock2._coeff.shape[1] != n:
        raise ConfigurationError("representations smear different basis sizes")
    tuples = [(i, i, j, j) for i in range(n) for j in range(n)]
    tuples += [(i, j, j, i) for i in range(n) for j in range(i + 1, n)]
    rng = np.random.default_rng(seed)
    for _ in range(n_samples):
        tuples.append(tuple(int(k) for k in rng.integers(0, n, size=4)))
    worst = 0.0
    scale = 0.0
    for i in range(n):
        for j in range(n):
            m1 = fock1.vacuum_two_point(i, j)
            m2 = fock2.vacuum_two_point(i, j)
            worst = max(worst, abs(m1 - m2))
            scale = max(scale, abs(m1))
    for tup in tuples:
        m1 = fock1.vacuum_moment(tup)
        m2 = fock2.vacuum_moment(tup)
        worst = max(worst, abs(m1 - m2))
        scale = max(scale, abs(m1))
    return worst / max(scale, 1e-300)


def functor_law_samples(obj, n_triples=100, seed=0):
    """Seeded random morphism triples on one object; checks both laws.

    Returns (n_passed, n_triples). Covers trivial absorption, empty
    overlaps, identity composition, and associativity.
    """
    rng = np.random.default_rng(seed)
    lat = obj.lattice
    nt = lat.nt
    nx = lat.nx

    def random_morphism():
        if rng.random() < 0.12:
            return TRIVIAL
        r0 = int(rng.integers(0, nt - 2))
        r1 = int(rng.integers(r0, min(nt - 1, r0 + max(2, nt // 3))))
        c0 = int(rng.integers(0, nx))
        width = int(rng.integers(1, nx))
        mask = np.zeros((nt, nx), dtype=bool)
        cols = (np.arange(c0, c0 + width)) % nx
        mask[np.arange(r0, r1 + 1)[:, None], cols[None, :]] = True
        region = Region(lat, mask)
        max_up = nt - 1 - r1
        shift = int(rng.integers(-r0, max_up + 1))
        cshift = int(rng.integers(0, nx))
        return LatticeIso(obj, obj, shift, cshift, region)

    ident = identity_morphism(obj)
    passed = 0
    for _ in range(n_triples):
        m1 = random_morphism()
        m2 = random_morphism()
        m3 = random_morphism()
        lhs = compose(m3, compose(m2, m1))
        rhs = compose(compose(m3, m2), m1)
        ok = morphisms_equal(lhs, rhs)
        ok = ok and morphisms_equal(compose(m1, ident), m1)
        ok = ok and (compose(m1, TRIVIAL) is TRIVIAL)
        ok = ok and (compose(TRIVIAL, m1) is TRIVIAL)
        if ok:
            passed += 1
    return passed, n_triples

"""Causal structure on the lattice: regions, cones, domains of dependence.

The causal graph links each site (n, j) to the sites (n+1, j') with
|j' - j| <= k(n, j) (columns mod nx), where k = ceil(slope*dt/dx - 1e-9) and
slope is the larger lightcone slope sqrt(b)/a of the two rows. The small
guard keeps the exactly-null case (slope*dt == dx) at k = 1 instead of
letting FP noise bump it to 2. Under the stability bound k == 1 everywhere.

Finite-lattice conventions (documented once here, used consistently):
- a causal curve that reaches the first or last time row escapes the lattice;
  domains of dependence treat such curves as missing the region;
- "interior" and "closure" are one-cell box erosion/dilation (periodic in x,
  clipped in t), so boundary time rows are never interior.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .geometry import Lattice, sample_metric


@dataclass(frozen=True, eq=False)
class Region:
    """An immutable set of lattice sites stored as a boolean (nt, nx) mask."""

    lattice: Lattice
    mask: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.shape != (self.lattice.nt, self.lattice.nx):
            raise ConfigurationError(
                f"mask shape {m.shape} does not match lattice "
                f"({self.lattice.nt}, {self.lattice.nx})"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @classmethod
    def empty(cls, lattice):
        return cls(lattice, np.zeros((lattice.nt, lattice.nx), dtype=bool))

    @classmethod
    def full(cls, lattice):
        return cls(lattice, np.ones((lattice.nt, lattice.nx), dtype=bool))

    @classmethod
    def from_sites(cls, lattice, sites):
        m = np.zeros((lattice.nt, lattice.nx), dtype=bool)
        for i, j in sites:
            if not 0 <= i < lattice.nt:
                raise ConfigurationError(f"site row {i} outside lattice")
            m[i, j % lattice.nx] = True
        return cls(lattice, m)

    @classmethod
    def single(cls, lattice, i, j):
        return cls.from_sites(lattice, [(i, j)])

    @classmethod
    def time_band(cls, lattice, i_lo, i_hi):
        """All sites with row in [i_lo, i_hi]."""
        if not 0 <= i_lo <= i_hi < lattice.nt:
            raise ConfigurationError(f"bad time band [{i_lo}, {i_hi}]")
        m = np.zeros((lattice.nt, lattice.nx), dtype=bool)
        m[i_lo : i_hi + 1] = True
        return cls(lattice, m)

    @classmethod
    def slice_arc(cls, lattice, i, x_lo, x_hi):
        """Sites of row i with x in the (wrapped) closed arc [x_lo, x_hi]."""
        if not 0 <= i < lattice.nt:
            raise ConfigurationError(f"row {i} outside lattice")
        m = np.zeros((lattice.nt, lattice.nx), dtype=bool)
        m[i] = _arc_mask(lattice, x_lo, x_hi)
        return cls(lattice, m)

    @classmethod
    def rect(cls, lattice, t_lo, t_hi, x_lo, x_hi):
        """Sites with t in [t_lo, t_hi] and x in the wrapped arc [x_lo, x_hi]."""
        i_lo = max(0, int(np.ceil((t_lo - lattice.t_min) / lattice.dt - 1e-9)))
        i_hi = min(lattice.nt - 1, int(np.floor((t_hi - lattice.t_min) / lattice.dt + 1e-9)))
        if i_lo > i_hi:
            raise ConfigurationError(f"empty time range [{t_lo}, {t_hi}]")
        row = _arc_mask(lattice, x_lo, x_hi)
        m = np.zeros((lattice.nt, lattice.nx), dtype=bool)
        m[i_lo : i_hi + 1] = row
        return cls(lattice, m)

    @property
    def size(self):
        return int(self.mask.sum())

    @property
    def is_empty(self):
        return not bool(self.mask.any())

    def sites(self):
        """Sorted list of (row, col) pairs."""
        idx = np.argwhere(self.mask)
        return [tuple(map(int, p)) for p in idx]

    def site_indices(self):
        """Sorted flat indices row*nx + col (the serialization format)."""
        return [int(v) for v in np.flatnonzero(self.mask)]

    def contains_site(self, i, j):
        return bool(self.mask[i, j % self.lattice.nx])

    def issubset(self, other):
        self._check(other)
        return bool(np.all(~self.mask | other.mask))

    def isdisjoint(self, other):
        self._check(other)
        return not bool(np.any(self.mask & other.mask))

    def equals(self, other):
        self._check(other)
        return bool(np.array_equal(self.mask, other.mask))

    def __and__(self, other):
        self._check(other)
        return Region(self.lattice, self.mask & other.mask)

    def __or__(self, other):
        self._check(other)
        return Region(self.lattice, self.mask | other.mask)

    def __sub__(self, other):
        self._check(other)
        return Region(self.lattice, self.mask & ~other.mask)

    def complement(self):
        return Region(self.lattice, ~self.mask)

    def rows(self):
        """Indices of rows containing at least one site."""
        return [int(i) for i in np.flatnonzero(self.mask.any(axis=1))]

    def _check(self, other):
        if other.lattice != self.lattice:
            raise ConfigurationError("regions live on different lattices")


def _arc_mask(lattice, x_lo, x_hi):
    """Columns whose x lies in the closed arc from x_lo to x_hi (wrapping)."""
    le = lattice.length
    xs = lattice.xs()
    lo = x_lo % le
    span = x_hi - x_lo
    if span < 0:
        raise ConfigurationError(f"arc with negative span [{x_lo}, {x_hi}]")
    if span >= le - lattice.dx * 0.5:
        return np.ones(lattice.nx, dtype=bool)
    rel = (xs - lo) % le
    return rel <= span + 1e-9 * le


@dataclass(frozen=True, eq=False)
class CausalGraph:
    """Lattice plus per-site successor half-widths kup (nt-1, nx)."""

    lattice: Lattice
    kup: np.ndarray


def causal_graph(model, lattice):
    """Build the causal graph of `model` on `lattice`."""
    a, b = sample_metric(model, lattice)
    slope = np.sqrt(b) / a
    sl = np.maximum(slope[:-1], slope[1:])
    k = np.ceil(sl * lattice.dt / lattice.dx - 1e-9).astype(np.int64)
    k = np.maximum(k, 1)
    return CausalGraph(lattice=lattice, kup=k)


def _dilate_sources(row, krow):
    """Sites j spread to all j' with |j' - j| <= krow[j]."""
    out = row.copy()
    kmax = int(krow.max(initial=0)) if row.any() else 0
    for kk in range(1, kmax + 1):
        m = row & (krow >= kk)
        if m.any():
            out |= np.roll(m, kk) | np.roll(m, -kk)
    return out


def _dilate_targets(row, krow):
    """out[j] is set when some site j' with |j' - j| <= krow[j] is set."""
    out = row.copy()
    kmax = int(krow.max(initial=0))
    for kk in range(1, kmax + 1):
        cover = krow >= kk
        out |= cover & (np.roll(row, kk) | np.roll(row, -kk))
    return out


def _box_dilate(mask):
    m = mask | np.roll(mask, 1, axis=1) | np.roll(mask, -1, axis=1)
    out = m.copy()
    out[1:] |= m[:-1]
    out[:-1] |= m[1:]
    return out


def closure(region):
    """One-cell box dilation (periodic in x, clipped in t)."""
    return Region(region.lattice, _box_dilate(region.mask))


def interior(region):
    """One-cell box erosion; boundary time rows are never interior."""
    return Region(region.lattice, ~_box_dilate(~region.mask))


def future(graph, region):
    """Causal future J+(O), including O."""
    _check_region(graph, region)
    F = region.mask.copy()
    kup = graph.kup
    for n in range(graph.lattice.nt - 1):
        F[n + 1] |= _dilate_sources(F[n], kup[n])
    return Region(graph.lattice, F)


def past(graph, region):
    """Causal past J-(O), including O."""
    _check_region(graph, region)
    P = region.mask.copy()
    kup = graph.kup
    for n in range(graph.lattice.nt - 1, 0, -1):
        P[n - 1] |= _dilate_targets(P[n], kup[n - 1])
    return Region(graph.lattice, P)


def causal_hull(graph, region):
    """J(O) = J+(O) union J-(O)."""
    return future(graph, region) | past(graph, region)


def future_domain(graph, region):
    """D+(O): sites every past-directed causal path from which hits O.

    Paths that reach the first time row without meeting O escape.
    """
    _check_region(graph, region)
    mask = region.mask
    kup = graph.kup
    good = np.zeros_like(mask)
    good[0] = mask[0]
    for n in range(1, graph.lattice.nt):
        escapes = _dilate_sources(~good[n - 1], kup[n - 1])
        good[n] = mask[n] | ~escapes
    return Region(graph.lattice, good)


def past_domain(graph, region):
    """D-(O), mirror of future_domain toward the last time row."""
    _check_region(graph, region)
    mask = region.mask
    kup = graph.kup
    good = np.zeros_like(mask)
    good[-1] = mask[-1]
    for n in range(graph.lattice.nt - 2, -1, -1):
        escapes = _dilate_targets(~good[n + 1], kup[n])
        good[n] = mask[n] | ~escapes
    return Region(graph.lattice, good)


def domain_of_dependence(graph, region):
    """D(O) = D+(O) union D-(O)."""
    return future_domain(graph, region) | past_domain(graph, region)


def causal_complement(graph, region):
    """O-perp: the interior of the complement of J(O)."""
    J = causal_hull(graph, region)
    return Region(graph.lattice, ~_box_dilate(J.mask))


def causally_determined(graph, probe, region):
    """True when `probe` lies in the interior of D(`region`)."""
    return determination_depth(graph, probe, region, max_depth=1) >= 1


def determination_depth(graph, probe, region, max_depth=8):
    """How many box erosions of D(region) still contain `probe` (0 = not
    even inside D; 1 = interior; larger = more margin), capped at max_depth."""
    _check_region(graph, probe)
    _check_region(graph, region)
    if probe.is_empty:
        raise DomainError("empty probe region")
    dom = domain_of_dependence(graph, region).mask
    if not np.all(~probe.mask | dom):
        return 0
    depth = 0
    cur = dom
    while depth < max_depth:
        cur = ~_box_dilate(~cur)
        if not np.all(~probe.mask | cur):
            break
        depth += 1
    return depth


def separation_margin(graph, r1, r2, max_depth=8):
    """Spacelike margin: how many box dilations of J(r2) stay disjoint from r1.

    0 means r1 already meets J(r2) (not spacelike); 1 means disjoint from the
    one-cell closure (strictly spacelike); higher is more margin.
    """
    _check_region(graph, r1)
    _check_region(graph, r2)
    J = causal_hull(graph, r2).mask
    depth = 0
    cur = J
    while depth < max_depth:
        cur = _box_dilate(cur)
        if np.any(r1.mask & cur):
            break
        depth += 1
    return depth


def double_cone(graph, p, q):
    """Open double cone with past vertex p and future vertex q.

    p and q are (row, col) sites; q must lie in the causal future of p with
    at least two rows in between, else DomainError.
    """
    lat = graph.lattice
    pi, pj = int(p[0]), int(p[1]) % lat.nx
    qi, qj = int(q[0]), int(q[1]) % lat.nx
    if qi <= pi:
        raise DomainError(f"future vertex row {qi} not above past vertex row {pi}")
    up = future(graph, Region.single(lat, pi, pj))
    if not up.contains_site(qi, qj):
        raise DomainError(f"site {q} is not in the causal future of {p}")
    down = past(graph, Region.single(lat, qi, qj))
    cone = interior(up & down)
    if cone.is_empty:
        raise DomainError(f"double cone between {p} and {q} has empty interior")
    return cone


def truncated_diamond(graph, base, i_lo, i_hi):
    """int(D(base) & rows [i_lo, i_hi]) for a single-row base region."""
    lat = graph.lattice
    _check_region(graph, base)
    rows = base.rows()
    if len(rows) != 1:
        raise DomainError(f"base must occupy a single row, got rows {rows}")
    if not 0 <= i_lo <= i_hi < lat.nt:
        raise DomainError(f"bad row band [{i_lo}, {i_hi}]")
    dom = domain_of_dependence(graph, base)
    band = Region.time_band(lat, i_lo, i_hi)
    out = interior(dom & band)
    if out.is_empty:
        raise DomainError(
            f"truncated diamond over rows [{i_lo}, {i_hi}] is empty; "
            f"base too small or band too wide"
        )
    return out


def _check_region(graph, region):
    if region.lattice != graph.lattice:
        raise ConfigurationError("region lattice does not match graph lattice")

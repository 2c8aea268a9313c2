"""Real scalar field on a lattice spacetime: solvers, pairing, state, Fock.

The scheme is the time-symmetric leapfrog for (box + m^2)u = f written in
conservative form with weights w = a/sqrt(b) (half-step averaged in time),
flux coefficients c = sqrt(b)/a at x midpoints, and volume density
a*sqrt(b). Time symmetry makes the advanced solve the exact time reversal
of the retarded march, so the discrete operator inverts both ways to
rounding; everything downstream (pairing locality, re-sourcing, state
consistency) leans on that exactness.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import backend
from .causal import Region, causally_determined, future, past
from .errors import ConfigurationError, DomainError, SolverInconsistencyError
from .geometry import sample_metric, smoothstep

BOUNDARY_MARGIN = 2


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A real grid function vanishing within two rows of the time boundary."""

    lattice: object
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.lattice.nt, self.lattice.nx):
            raise ConfigurationError(
                f"values shape {v.shape} does not match lattice "
                f"({self.lattice.nt}, {self.lattice.nx})"
            )
        if not np.all(np.isfinite(v)):
            raise ConfigurationError("test function has non-finite entries")
        margin = np.concatenate([v[:BOUNDARY_MARGIN], v[-BOUNDARY_MARGIN:]])
        if np.any(margin != 0.0):
            raise DomainError(
                "test function support touches the lattice time boundary "
                f"(needs {BOUNDARY_MARGIN} zero rows at each end)"
            )
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def support(self):
        return Region(self.lattice, self.values != 0.0)

    @property
    def is_zero(self):
        return not bool(np.any(self.values != 0.0))


def q4_profile(z):
    """Compactly supported C^3 profile (1 - z^2)^4 on |z| < 1."""
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    inside = np.abs(z) < 1.0
    out[inside] = (1.0 - z[inside] ** 2) ** 4
    return out


def bump(lattice, t_center, x_center, t_half, x_half, amplitude=1.0):
    """Product bump test function centered at (t_center, x_center).

    The x profile wraps around the circle.
    """
    tt, xx = lattice.grids()
    le = lattice.length
    zt = (tt - t_center) / t_half
    rel = (xx - x_center + 0.5 * le) % le - 0.5 * le
    zx = rel / x_half
    return TestFunction(lattice, amplitude * q4_profile(zt) * q4_profile(zx))


class WaveKernel:
    """Discrete (box + m^2) solver bound to a model and lattice."""

    def __init__(self, model, lattice, mass):
        if mass < 0:
            raise ConfigurationError(f"mass must be >= 0, got {mass}")
        self.model = model
        self.lattice = lattice
        self.mass = float(mass)
        a, b = sample_metric(model, lattice)
        sb = np.sqrt(b)
        w = a / sb
        c = sb / a
        self.vol = a * sb
        self.wh = 0.5 * (w[1:] + w[:-1])
        self.cm = 0.5 * (c + np.roll(c, -1, axis=1))
        self.w = w
        self.dt2 = lattice.dt ** 2
        self.inv_dx2 = 1.0 / lattice.dx ** 2

    @cached_property
    def _reversed(self):
        rev = object.__new__(WaveKernel)
        rev.model = self.model
        rev.lattice = self.lattice
        rev.mass = self.mass
        rev.vol = np.ascontiguousarray(self.vol[::-1])
        rev.wh = np.ascontiguousarray(self.wh[::-1])
        rev.cm = np.ascontiguousarray(self.cm[::-1])
        rev.w = np.ascontiguousarray(self.w[::-1])
        rev.dt2 = self.dt2
        rev.inv_dx2 = self.inv_dx2
        return rev

    def _values(self, f):
        if isinstance(f, TestFunction):
            if f.lattice != self.lattice:
                raise ConfigurationError("test function lattice does not match kernel")
            return f.values
        v = np.asarray(f, dtype=float)
        TestFunction(self.lattice, v)  # validates shape and boundary margin
        return v

    def solve_retarded(self, f):
        """u with (box + m^2)u = f and u = 0 below the support of f."""
        fv = np.ascontiguousarray(self._values(f))
        u = np.zeros_like(fv)
        backend.wave_march(u, self.wh, self.cm, self.vol, fv, self.mass ** 2,
                           self.dt2, self.inv_dx2)
        return u

    def solve_advanced(self, f):
        """u with (box + m^2)u = f and u = 0 above the support of f.

        Implemented as the exact time reversal of the retarded march.
        """
        fv = self._values(f)
        rev = self._reversed
        fr = np.ascontiguousarray(fv[::-1])
        u = np.zeros_like(fr)
        backend.wave_march(u, rev.wh, rev.cm, rev.vol, fr, self.mass ** 2,
                           self.dt2, self.inv_dx2)
        return np.ascontiguousarray(u[::-1])

    def causal_propagator(self, f):
        """E f = retarded minus advanced solution."""
        return self.solve_retarded(f) - self.solve_advanced(f)

    def apply_operator(self, u):
        """The scheme's own (box + m^2): exact algebraic inverse of the march.

        Returns source values on interior rows (boundary rows are zero).
        """
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        flux = self.cm * (np.roll(u, -1, axis=1) - u) - np.roll(self.cm, 1, axis=1) * (
            u - np.roll(u, 1, axis=1)
        )
        out[1:-1] = (
            (self.wh[1:] * (u[2:] - u[1:-1]) - self.wh[:-1] * (u[1:-1] - u[:-2])) / self.dt2
            - flux[1:-1] * self.inv_dx2
            + self.vol[1:-1] * self.mass ** 2 * u[1:-1]
        ) / self.vol[1:-1]
        return out

    def volume_pairing(self, fvals, gvals):
        """Metric volume pairing sum a*sqrt(b)*f*g*dt*dx."""
        return float(np.sum(self.vol * fvals * gvals)) * self.lattice.dt * self.lattice.dx


def symplectic_pairing(kernel, f, h):
    """kappa(f, h) = ( <f, Eh> - <h, Ef> ) / 2 with the volume pairing.

    Antisymmetric by construction; exactly zero for spacelike-separated
    supports because solution supports stay inside the lattice cones.
    """
    fv = kernel._values(f)
    hv = kernel._values(h)
    return 0.5 * (
        kernel.volume_pairing(fv, kernel.causal_propagator(hv))
        - kernel.volume_pairing(hv, kernel.causal_propagator(fv))
    )


class SymplecticSpace:
    """A basis of test functions with cached propagator solutions."""

    def __init__(self, kernel, basis):
        if not basis:
            raise ConfigurationError("empty basis")
        self.kernel = kernel
        self.basis = list(basis)
        for f in self.basis:
            if f.lattice != kernel.lattice:
                raise ConfigurationError("basis function lattice does not match kernel")
        self.solutions = [kernel.causal_propagator(f.values) for f in self.basis]

    @cached_property
    def kappa(self):
        """Antisymmetrized pairing matrix kappa_ij."""
        n = len(self.basis)
        raw = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                raw[i, j] = self.kernel.volume_pairing(self.basis[i].values, self.solutions[j])
        return 0.5 * (raw - raw.T)

    def pairing(self, i, j):
        return float(self.kappa[i, j])


def strict_causal_law(kernel, graph, f1, target):
    """Re-source f1 inside `target`: returns f2 supported in target with
    E f2 = E f1 (to rounding).

    Requires supp f1 to be causally determined by target. The construction
    multiplies E f1 by a smooth step in time transitioning across rows of
    target that cover J(supp f1), then applies the exact scheme operator.
    Entries below 1e-9 of the max are FP dust from the march rearrangement
    and are zeroed.
    """
    if graph.lattice != kernel.lattice:
        raise ConfigurationError("graph lattice does not match kernel")
    if f1.lattice != kernel.lattice:
        raise ConfigurationError("test function lattice does not match kernel")
    if f1.is_zero:
        raise DomainError("cannot re-source the zero test function")
    supp = f1.support()
    if supp.issubset(target):
        return TestFunction(kernel.lattice, f1.values)
    if not causally_determined(graph, supp, target):
        raise DomainError("support of f1 is not causally determined by the target region")

    hull = (future(graph, supp) | past(graph, supp)).mask
    covered = ~np.any(hull & ~target.mask, axis=1) & np.any(hull, axis=1)
    nt = kernel.lattice.nt
    covered[: BOUNDARY_MARGIN + 1] = False
    covered[nt - BOUNDARY_MARGIN - 1 :] = False
    run = _longest_run(covered)
    if run is None or run[1] - run[0] < 2:
        raise DomainError(
            "target region does not cover a thick enough time band of J(supp f1)"
        )
    rs, re = run

    supp_rows = np.flatnonzero(supp.mask.any(axis=1))
    if supp_rows.max() < rs:
        ascending = True
    elif supp_rows.min() > re:
        ascending = False
    else:
        raise DomainError(
            "supp f1 straddles the transition band; cannot orient the re-sourcing"
        )

    u = kernel.causal_propagator(f1.values)
    rows = np.arange(nt)
    s = (rows - rs) / (re - rs)
    chi = smoothstep(s)
    if not ascending:
        chi = 1.0 - chi
    f2 = kernel.apply_operator(chi[:, None] * u)
    if not ascending:
        f2 = -f2
    peak = np.abs(f2).max()
    if peak == 0.0:
        raise SolverInconsistencyError("re-sourced function vanished identically")
    f2[np.abs(f2) < 1e-9 * peak] = 0.0
    out = TestFunction(kernel.lattice, f2)
    if not out.support().issubset(target):
        raise SolverInconsistencyError("re-sourced support escaped the target region")
    return out


def _longest_run(flags):
    best = None
    start = None
    for i, v in enumerate(flags):
        if v and start is None:
            start = i
        elif not v and start is not None:
            if best is None or i - start > best[1] - best[0] + 1:
                best = (start, i - 1)
            start = None
    if start is not None:
        i = len(flags)
        if best is None or i - start > best[1] - best[0] + 1:
            best = (start, i - 1)
    return best


class QuasifreeState:
    """Gaussian state from flat-band Cauchy data with exact pairing part.

    The two-point matrix is W = Re G + (i/2) kappa where G is the Gram matrix
    of the frequency-split Cauchy data map K and kappa is the volume-form
    symplectic matrix, so W - W^T = i*kappa holds exactly. Eigenvalues of W
    below psd_floor (relative) raise; tiny negative ones are clipped and
    reported.
    """

    def __init__(self, space, band=None, psd_floor=-1e-10, rank_tol=1e-9):
        kernel = space.kernel
        model = kernel.model
        lattice = kernel.lattice
        if kernel.mass <= 0:
            raise ConfigurationError(
                "quasifree state needs m > 0 on the circle (zero mode otherwise)"
            )
        if band is None:
            if not model.flat_bands:
                raise ConfigurationError(f"model {model.name} declares no flat band")
            band = model.flat_bands[0]
        t_lo, t_hi, a0 = band
        i_lo = max(1, lattice.row_of(t_lo + 1e-12 * max(1.0, abs(t_lo))))
        i_hi = min(lattice.nt - 2, int(np.floor((t_hi - lattice.t_min) / lattice.dt + 1e-9)))
        if i_hi - i_lo < 2:
            raise ConfigurationError(f"flat band {band} too thin on this lattice")
        iref = (i_lo + i_hi) // 2

        self.space = space
        self.a0 = float(a0)
        self.iref = iref
        self.band = (float(t_lo), float(t_hi), float(a0))

        le = lattice.length
        dt = lattice.dt
        dx = lattice.dx
        k_n = 2.0 * np.pi * np.fft.fftfreq(lattice.nx, d=dx)
        self.frequencies = np.sqrt((k_n / a0) ** 2 + kernel.mass ** 2)
        self.wavenumbers = k_n / a0

        kvecs = []
        w_row = kernel.w[iref]
        root_a0 = np.sqrt(a0)
        for sol in space.solutions:
            phi = sol[iref]
            pi = w_row * (sol[iref + 1] - sol[iref - 1]) / (2.0 * dt)
            phi_hat = np.fft.fft(phi) * dx
            pi_hat = np.fft.fft(pi) * dx
            # the sqrt(a0) / (1/a0) weights make K depend only on the
            # physical cylinder (radius a0 * length), not on the coordinate
            # split, while keeping Im Gram == kappa/2 exact
            kvecs.append(
                root_a0
                * (
                    np.sqrt(self.frequencies) * phi_hat
                    + 1j * pi_hat / (a0 * np.sqrt(self.frequencies))
                )
                / np.sqrt(2.0 * le)
            )
        K = np.array(kvecs)
        G = K.conj() @ K.T
        self.covariance_real = G.real
        self.kappa = space.kappa
        self.W = self.covariance_real + 0.5j * self.kappa

        lam, V = np.linalg.eigh(self.W)
        wscale = float(lam.max()) if lam.size else 1.0
        self.psd_margin = float(lam.min()) / wscale if wscale > 0 else float(lam.min())
        if self.psd_margin < psd_floor:
            raise SolverInconsistencyError(
                f"two-point matrix far from PSD: relative min eigenvalue {self.psd_margin}"
            )
        clipped = np.clip(lam, 0.0, None)
        self.clip_magnitude = float(np.max(lam - clipped).max() if lam.size else 0.0)
        keep = clipped > rank_tol * wscale
        self.rank = int(keep.sum())
        # rows = modes, columns = basis elements
        self.coefficients = (np.sqrt(clipped[keep])[:, None] * V[:, keep].conj().T)

    def two_point(self, i, j):
        return complex(self.W[i, j])

    def mode_energies(self):
        """Slice-mode frequencies sorted ascending (with multiplicity)."""
        return np.sort(self.frequencies)


def _occupation_basis(n_modes, n_max):
    states = []

    def rec(prefix, remaining):
        if len(prefix) == n_modes:
            states.append(tuple(prefix))
            return
        for n in range(remaining + 1):
            rec(prefix + [n], remaining - n)

    rec([], n_max)
    states.sort()
    return states


class FockRep:
    """Occupation-truncated bosonic representation of the field.

    States are occupation tuples over the state's modes with total occupation
    at most n_max. Field operators are exact on the subspace with total
    occupation <= n_max - 1 (the projector `below_cutoff`).
    """

    def __init__(self, state, n_modes=None, n_max=4):
        from scipy import sparse

        coeff = state.coefficients
        r = coeff.shape[0]
        if n_modes is None:
            n_modes = r
        if r > n_modes:
            raise ConfigurationError(
                f"state rank {r} exceeds the mode budget {n_modes}; "
                f"shrink the basis or raise n_modes"
            )
        self.state = state
        self.n_modes = int(n_modes)
        self.n_max = int(n_max)
        self.basis_states = _occupation_basis(self.n_modes, self.n_max)
        self.dim = len(self.basis_states)
        index = {s: i for i, s in enumerate(self.basis_states)}

        self.lower = []
        for k in range(self.n_modes):
            rows, cols, vals = [], [], []
            for s, i in index.items():
                if s[k] > 0:
                    t = list(s)
                    t[k] -= 1
                    rows.append(index[tuple(t)])
                    cols.append(i)
                    vals.append(np.sqrt(s[k]))
            self.lower.append(
                sparse.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))
            )
        self.raise_ = [op.T.tocsr() for op in self.lower]

        pad = np.zeros((self.n_modes, coeff.shape[1]), dtype=complex)
        pad[:r] = coeff
        self._coeff = pad

        totals = np.array([sum(s) for s in self.basis_states])
        self.below_cutoff = sparse.diags((totals <= self.n_max - 1).astype(float)).tocsr()
        self.vacuum = np.zeros(self.dim)
        self.vacuum[index[tuple([0] * self.n_modes)]] = 1.0

    def field(self, i):
        """Phi(f_i) as a sparse matrix."""
        from scipy import sparse

        c = self._coeff[:, i]
        op = sparse.csr_matrix((self.dim, self.dim), dtype=complex)
        for k in range(self.n_modes):
            if c[k] != 0:
                op = op + np.conj(c[k]) * self.lower[k] + c[k] * self.raise_[k]
        return op

    def field_for(self, coeffs):
        """Phi(sum_i coeffs_i f_i)."""
        from scipy import sparse

        c = self._coeff @ np.asarray(coeffs)
        op = sparse.csr_matrix((self.dim, self.dim), dtype=complex)
        for k in range(self.n_modes):
            if c[k] != 0:
                op = op + np.conj(c[k]) * self.lower[k] + c[k] * self.raise_[k]
        return op

    def commutator_defect(self):
        """max over pairs of max-entry of ([Phi_i, Phi_j] - i*kappa_ij) P."""
        n = self._coeff.shape[1]
        kappa = self.state.kappa
        P = self.below_cutoff
        fields = [self.field(i) for i in range(n)]
        worst = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                comm = fields[i] @ fields[j] - fields[j] @ fields[i]
                defect = (comm - 1j * kappa[i, j] * _sparse_eye(self.dim)) @ P
                if defect.nnz:
                    worst = max(worst, float(np.abs(defect.data).max()))
        return worst

    def vacuum_two_point(self, i, j):
        """<Omega, Phi_i Phi_j Omega> (equals the state's W below truncation)."""
        vi = self.field(j) @ self.vacuum
        return complex(np.vdot(self.field(i).conj().T @ self.vacuum, vi))

    def vacuum_moment(self, indices):
        """<Omega, Phi_{i1} ... Phi_{ik} Omega> in the truncated representation.

        Invariant under unitary remixing of the modes (the truncation cuts on
        total occupation), so it can be compared across representations built
        from transported bases.
        """
        v = self.vacuum.astype(complex)
        for i in reversed(list(indices)):
            v = self.field(i) @ v
        return complex(np.vdot(self.vacuum.astype(complex), v))


def _sparse_eye(n):
    from scipy import sparse

    return sparse.eye(n, format="csr", dtype=complex)


class MatrixSpan:
    """Orthonormal span of flattened matrices (for algebra closures)."""

    def __init__(self, dim, tol=1e-9):
        self.dim = dim
        self.tol = tol
        self.vectors = []

    def add(self, mat):
        v = np.asarray(mat, dtype=complex).ravel()
        norm = np.linalg.norm(v)
        if norm < self.tol:
            return False
        for b in self.vectors:
            v = v - np.vdot(b, v) * b
        res = np.linalg.norm(v)
        if res < self.tol * max(1.0, norm):
            return False
        self.vectors.append(v / res)
        return True

    def contains(self, mat):
        v = np.asarray(mat, dtype=complex).ravel()
        norm = np.linalg.norm(v)
        if norm == 0:
            return True, 0.0
        w = v.copy()
        for b in self.vectors:
            w = w - np.vdot(b, w) * b
        res = float(np.linalg.norm(w) / norm)
        return res < 1e-8, res

    @property
    def rank(self):
        return len(self.vectors)


class LocalAlgebra:
    """Field operators of one region, with a lazily closed product span.

    The span closure is exponential in the generator count on a truncated
    Fock space; it is only materialized when rank or containment questions
    are asked. Commutation and cyclicity need the generators alone.
    """

    def __init__(self, fock, indices, max_rounds=6):
        self.fock = fock
        self.indices = list(indices)
        self.max_rounds = max_rounds
        self.generators = [np.asarray(fock.field(i).todense()) for i in self.indices]

    @cached_property
    def span(self):
        dim = self.fock.dim
        span = MatrixSpan(dim)
        span.add(np.eye(dim, dtype=complex))
        frontier = []
        for g in self.generators:
            if span.add(g):
                frontier.append(g)
        for _ in range(self.max_rounds):
            new = []
            for g in self.generators:
                for h in frontier:
                    prod = g @ h
                    if span.add(prod):
                        new.append(prod)
            if not new:
                break
            frontier = new
        return span

    @property
    def rank(self):
        return self.span.rank

    def contains_algebra(self, other):
        """Max residual of the other algebra's span inside this span."""
        worst = 0.0
        for v in other.span.vectors:
            _, res = self.span.contains(v.reshape(self.fock.dim, self.fock.dim))
            worst = max(worst, res)
        return worst

    def commutation_defect(self, other):
        """Max entry of [A, B] P over the two generator sets.

        P projects below the occupation cutoff, where the truncated field
        operators are exact; on the top layer the cutoff itself leaves an
        O(|coeff|^2) remainder for any pair of fields.
        """
        keep = self.fock.below_cutoff.diagonal().astype(bool)
        worst = 0.0
        for g in self.generators:
            for h in other.generators:
                comm = g @ h - h @ g
                worst = max(worst, float(np.abs(comm[:, keep]).max()))
        return worst

    def cyclic_rank(self, max_factors=None):
        """Dimension of span{A1...Ak Omega} over generator products."""
        if max_factors is None:
            max_factors = self.fock.n_max + 1
        vecs = [self.fock.vacuum.astype(complex)]
        basis = []

        def orth_add(v):
            w = v.copy()
            for b in basis:
                w = w - np.vdot(b, w) * b
            n = np.linalg.norm(w)
            if n > 1e-9:
                basis.append(w / n)
                return True
            return False

        orth_add(vecs[0])
        frontier = vecs
        for _ in range(max_factors):
            new = []
            for g in self.generators:
                for v in frontier:
                    w = g @ v
                    if orth_add(w):
                        new.append(w)
            if not new:
                break
            frontier = new
        return len(basis)


def local_algebra(fock, space, region):
    """Algebra generated by Phi(f_i) for basis functions supported in region."""
    indices = [
        i for i, f in enumerate(space.basis) if f.support().issubset(region)
    ]
    if not indices:
        raise DomainError("no basis functions are supported in the region")
    return LocalAlgebra(fock, indices)

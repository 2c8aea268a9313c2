"""Two-component field with first-order (upwind) dynamics and CAR algebra.

Gamma matrices: g0 = [[0,1],[1,0]], g1 = [[0,1],[-1,0]] (g0 Hermitian, g1
anti-Hermitian, both real; g0^2 = 1, g1^2 = -1, anticommuting). The operator
is g^a nabla_a + i m with the metric-compatible connection; in components it
diagonalizes into a left mover (component 1) and a right mover (component 2),
which the solver marches with first-order upwind differences. The scheme is
deliberately first order: its error halves under refinement, which is the
advertised convergence contract.

The conjugation on solutions is the chirality twist C psi = g0 g1 conj(psi);
it anticommutes with the causal propagator while also flipping the sign of
the adjoint pairing, so the induced identity s(Cv, Cw) = conj(s(v, w)) holds.
Spinor bases whose upper component vanishes are C-fixed, which keeps the
Gram real and the conjugation coefficientwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import backend
from .errors import ConfigurationError, DomainError
from .geometry import sample_metric

GAMMA0 = np.array([[0.0, 1.0], [1.0, 0.0]])
GAMMA1 = np.array([[0.0, 1.0], [-1.0, 0.0]])

BOUNDARY_MARGIN = 2


@dataclass(frozen=True, eq=False)
class SpinorTestFunction:
    """Real two-component grid function vanishing near the time boundary."""

    lattice: object
    upper: np.ndarray
    lower: np.ndarray

    def __post_init__(self):
        shape = (self.lattice.nt, self.lattice.nx)
        arrays = []
        for name, arr in (("upper", self.upper), ("lower", self.lower)):
            v = np.asarray(arr, dtype=float)
            if v.shape != shape:
                raise ConfigurationError(f"{name} shape {v.shape} does not match lattice {shape}")
            if not np.all(np.isfinite(v)):
                raise ConfigurationError(f"{name} component has non-finite entries")
            margin = np.concatenate([v[:BOUNDARY_MARGIN], v[-BOUNDARY_MARGIN:]])
            if np.any(margin != 0.0):
                raise DomainError(
                    "spinor support touches the lattice time boundary "
                    f"(needs {BOUNDARY_MARGIN} zero rows at each end)"
                )
            v = v.copy()
            v.setflags(write=False)
            arrays.append(v)
        object.__setattr__(self, "upper", arrays[0])
        object.__setattr__(self, "lower", arrays[1])

    def support_mask(self):
        return (self.upper != 0.0) | (self.lower != 0.0)

    @property
    def is_chirality_fixed(self):
        """True when C f = f, i.e. the upper component vanishes."""
        return not bool(np.any(self.upper != 0.0))


def spinor_bump(lattice, t_center, x_center, t_half, x_half, amplitude=1.0):
    """C-fixed spinor bump: zero upper component, q4 product lower component."""
    from .scalarfield import bump

    scalar = bump(lattice, t_center, x_center, t_half, x_half, amplitude)
    zero = np.zeros((lattice.nt, lattice.nx))
    return SpinorTestFunction(lattice, zero, scalar.values)


class DiracKernel:
    """First-order solver for (g nabla + i m) psi = f on a model lattice."""

    def __init__(self, model, lattice, mass):
        self.model = model
        self.lattice = lattice
        self.mass = float(mass)
        a, b = sample_metric(model, lattice)
        sb = np.sqrt(b)
        self.sb = sb
        self.cs = sb / a
        dx = lattice.dx
        dt = lattice.dt
        sbx = (np.roll(sb, -1, axis=1) - np.roll(sb, 1, axis=1)) / (2.0 * dx)
        at = np.gradient(a, dt, axis=0)
        self.g1 = sbx / (2.0 * a) - at / (2.0 * a)
        self.g2 = -sbx / (2.0 * a) - at / (2.0 * a)
        self.a = a
        self.b = b

    @cached_property
    def _reversed(self):
        rev = object.__new__(DiracKernel)
        rev.model = self.model
        rev.lattice = self.lattice
        rev.mass = self.mass
        rev.sb = np.ascontiguousarray(self.sb[::-1])
        rev.cs = np.ascontiguousarray(self.cs[::-1])
        # time reversal flips the sign of the a_t part of the coefficients
        # and the chirality swap exchanges the x-derivative parts, which is
        # exactly g1 <-> -g2 on the reversed arrays
        rev.g1 = np.ascontiguousarray(-self.g2[::-1])
        rev.g2 = np.ascontiguousarray(-self.g1[::-1])
        rev.a = np.ascontiguousarray(self.a[::-1])
        rev.b = np.ascontiguousarray(self.b[::-1])
        return rev

    def _components(self, f):
        if isinstance(f, SpinorTestFunction):
            if f.lattice != self.lattice:
                raise ConfigurationError("spinor lattice does not match kernel")
            return f.upper, f.lower
        raise ConfigurationError("expected a SpinorTestFunction")

    def _march(self, f1, f2):
        lat = self.lattice
        p1 = np.zeros((lat.nt, lat.nx), dtype=complex)
        p2 = np.zeros((lat.nt, lat.nx), dtype=complex)
        backend.dirac_march(
            p1, p2, self.cs, self.g1, self.g2, self.sb,
            np.ascontiguousarray(f1), np.ascontiguousarray(f2),
            self.mass, lat.dt, 1.0 / lat.dx,
        )
        return p1, p2

    def solve_retarded(self, f):
        """(psi1, psi2) with support above the source."""
        f1, f2 = self._components(f)
        return self._march(f1, f2)

    def solve_advanced(self, f):
        """(psi1, psi2) with support below the source.

        Exact time reversal: psi'(tau) = g1 psi(-t) maps the advanced problem
        to a retarded march on reversed coefficient arrays; g1 swaps the two
        characteristics (and their upwind directions) so the arithmetic is
        bitwise the literal downward march.
        """
        f1, f2 = self._components(f)
        # source transforms by g1: (f1, f2) -> (f2, -f1), reversed in time
        rf1 = np.ascontiguousarray(f2[::-1])
        rf2 = np.ascontiguousarray(-f1[::-1])
        q1, q2 = self._reversed._march(rf1, rf2)
        # invert psi = g1^{-1} psi' = -g1 psi': (psi1, psi2) = (-q2, q1)
        return np.ascontiguousarray(-q2[::-1]), np.ascontiguousarray(q1[::-1])

    def causal_propagator(self, f):
        """S f = retarded minus advanced solution."""
        r1, r2 = self.solve_retarded(f)
        a1, a2 = self.solve_advanced(f)
        return r1 - a1, r2 - a2

    def apply_operator(self, psi1, psi2):
        """Independent centered-difference (g nabla + i m), for residual checks.

        Returns the two source components (f1, f2); boundary rows use
        one-sided time differences and are less accurate.
        """
        lat = self.lattice
        dt = lat.dt
        dx = lat.dx
        dt1 = np.gradient(psi1, dt, axis=0)
        dt2 = np.gradient(psi2, dt, axis=0)
        dx1 = (np.roll(psi1, -1, axis=1) - np.roll(psi1, 1, axis=1)) / (2.0 * dx)
        dx2 = (np.roll(psi2, -1, axis=1) - np.roll(psi2, 1, axis=1)) / (2.0 * dx)
        f2 = (dt1 - self.cs * dx1 - self.g1 * psi1 + 1j * self.mass * self.sb * psi2) / self.sb
        f1 = (dt2 + self.cs * dx2 - self.g2 * psi2 + 1j * self.mass * self.sb * psi1) / self.sb
        return f1, f2

    def adjoint_pairing(self, u, v):
        """< u, v > = sum a sqrt(b) (conj(u1) v2 + conj(u2) v1) dt dx.

        This is the Dirac-adjoint volume pairing (ubar = u^dagger g0).
        """
        u1, u2 = u
        v1, v2 = v
        vol = self.a * self.sb
        s = np.sum(vol * (np.conj(u1) * v2 + np.conj(u2) * v1))
        return complex(s * self.lattice.dt * self.lattice.dx)


def conjugate_spinor(arrs):
    """C psi = g0 g1 conj(psi) = (-conj(psi1), conj(psi2))."""
    u1, u2 = arrs
    return -np.conj(u1), np.conj(u2)


class CARSpace:
    """Basis of C-fixed spinor test functions with the solution pairing.

    s_raw(f, h) = <S f, h>; the official Gram is the Hermitian, real part
    (exact for C-fixed bases up to scheme dissipation, whose magnitude is
    recorded as `hermiticity_defect` / `asymmetry_defect`).
    """

    def __init__(self, kernel, basis):
        if not basis:
            raise ConfigurationError("empty basis")
        self.kernel = kernel
        self.basis = list(basis)
        for f in self.basis:
            if f.lattice != kernel.lattice:
                raise ConfigurationError("basis lattice does not match kernel")
            if not f.is_chirality_fixed:
                raise DomainError(
                    "CAR basis functions must be conjugation-fixed "
                    "(vanishing upper component)"
                )
        self.solutions = [kernel.causal_propagator(f) for f in self.basis]
        n = len(self.basis)
        raw = np.empty((n, n), dtype=complex)
        for i in range(n):
            si = self.solutions[i]
            for j in range(n):
                f = self.basis[j]
                raw[i, j] = kernel.adjoint_pairing(si, (f.upper, f.lower))
        self.raw = raw
        herm = 0.5 * (raw + raw.conj().T)
        scale = max(float(np.abs(raw).max()), 1e-300)
        self.hermiticity_defect = float(np.abs(raw - raw.conj().T).max()) / scale
        sym = 0.5 * (herm + herm.T)
        self.asymmetry_defect = float(np.abs(herm - herm.T).max()) / scale
        self.gram = sym.real
        self.imag_defect = float(np.abs(sym.imag).max()) / scale

    def pairing(self, i, j):
        return float(self.gram[i, j])


class CAROperators:
    """Self-dual CAR representation over a CARSpace Gram.

    One fermionic site per basis element (dim 2^n); B(f_i) are real symmetric
    combinations of single-site Majorana operators weighted by the Gram
    square root, so {B(v)*, B(w)} = s(v, w) and B(v)* = B(conj v) hold to
    rounding. Null directions of the Gram are quotiented by the rank cut.
    """

    def __init__(self, space, rank_tol=1e-12, max_sites=12):
        self.space = space
        g = space.gram
        n = g.shape[0]
        if n > max_sites:
            raise ConfigurationError(f"basis of {n} elements exceeds max_sites={max_sites}")
        lam, Q = np.linalg.eigh(g)
        scale = float(lam.max()) if lam.size else 1.0
        if lam.min() < -1e-10 * scale:
            raise DomainError(
                f"CAR Gram is not positive semidefinite (min eig {lam.min()})"
            )
        lam = np.clip(lam, 0.0, None)
        keep = lam > rank_tol * scale
        self.rank = int(keep.sum())
        self.mixing = Q[:, keep] * np.sqrt(lam[keep])[None, :]
        self.dim = 2 ** n

        eye = np.eye(2)
        sx = np.array([[0.0, 1.0], [1.0, 0.0]])
        sz = np.array([[1.0, 0.0], [0.0, -1.0]])
        self.majoranas = []
        for site in range(n):
            op = np.array([[1.0]])
            for k in range(n):
                if k < site:
                    step = sz
                elif k == site:
                    step = sx / np.sqrt(2.0)
                else:
                    step = eye
                op = np.kron(op, step)
            self.majoranas.append(op)
        # only the first `rank` Majoranas are used by the generators
        self.generators = [
            sum(self.mixing[i, al] * self.majoranas[al] for al in range(self.rank))
            if self.rank
            else np.zeros((self.dim, self.dim))
            for i in range(n)
        ]

    def smeared(self, coeffs):
        """B(sum_i coeffs_i f_i)."""
        coeffs = np.asarray(coeffs, dtype=complex)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i, c in enumerate(coeffs):
            if c != 0:
                out = out + c * self.generators[i]
        return out

    def anticommutator_defect(self):
        """max over pairs of max-entry |{B_i, B_j} - s_ij I|."""
        n = len(self.generators)
        worst = 0.0
        eye = np.eye(self.dim)
        for i in range(n):
            for j in range(i, n):
                anti = self.generators[i] @ self.generators[j] + self.generators[j] @ self.generators[i]
                defect = anti - self.space.gram[i, j] * eye
                worst = max(worst, float(np.abs(defect).max()))
        return worst

    def adjoint_defect(self, rng=None, n_samples=5):
        """max |B(v)^dagger - B(conj v)| over random complex coefficients."""
        rng = rng or np.random.default_rng(0)
        n = len(self.generators)
        worst = 0.0
        for _ in range(n_samples):
            v = rng.normal(size=n) + 1j * rng.normal(size=n)
            defect = self.smeared(v).conj().T - self.smeared(np.conj(v))
            worst = max(worst, float(np.abs(defect).max()))
        return worst

    def pair_report(self, i, j):
        """(anticommutator magnitude, commutator norm) for generators i, j."""
        anti = self.generators[i] @ self.generators[j] + self.generators[j] @ self.generators[i]
        comm = self.generators[i] @ self.generators[j] - self.generators[j] @ self.generators[i]
        return float(np.abs(anti).max()), float(np.linalg.norm(comm, 2))


def spacelike_anticommutator(space, ops, i, j):
    """Anticommutator and commutator data for a basis pair.

    For spacelike-separated supports the anticommutator vanishes exactly
    (the pairing is lattice-local) while the commutator norm stays of order
    of the generator norms: anticommutation is the only local pairing rule.
    """
    anti_mag, comm_norm = ops.pair_report(i, j)
    return {
        "pairing": float(space.gram[i, j]),
        "anticommutator": anti_mag,
        "commutator_norm": comm_norm,
    }

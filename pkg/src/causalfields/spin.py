"""The double cover of the proper orthochronous Lorentz group and its irreps.

Conventions: eta = diag(1, -1, -1, -1); sigma = (I, sigma_x, sigma_y,
sigma_z); X(v) = v^a sigma_a. An s in SL(2, C) acts by X -> s X s^dagger,
which defines the two-to-one covering map onto the restricted Lorentz group.
The irreducible representation of label k is the k-th symmetric power of the
defining representation (dimension k+1, spin k/2).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import ConfigurationError, DomainError

ETA = np.diag([1.0, -1.0, -1.0, -1.0])

_SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)
def covering_map(s):
    """Map s in SL(2, C) to the Lorentz matrix Lambda with
    s sigma_b s^dagger = Lambda^a_b sigma_a."""
    s = np.asarray(s, dtype=complex)
    if s.shape != (2, 2):
        raise ConfigurationError(f"expected a 2x2 matrix, got shape {s.shape}")
    det = np.linalg.det(s)
    if abs(det - 1.0) > 1e-8:
        raise ConfigurationError(f"matrix is not unimodular: det = {det}")
    lam = np.empty((4, 4), dtype=float)
    sh = s.conj().T
    for a in range(4):
        # the sigma_a are orthogonal under <A, B> = Tr(A B) / 2, so the
        # component along sigma_a is extracted with sigma_a itself
        for b in range(4):
            lam[a, b] = 0.5 * np.trace(_SIGMA[a] @ s @ _SIGMA[b] @ sh).real
    return lam


def boost(rapidity, axis=3):
    """SL(2, C) element covering a boost along the given spatial axis (1-3)."""
    if axis not in (1, 2, 3):
        raise ConfigurationError(f"axis must be 1, 2, or 3, got {axis}")
    from scipy.linalg import expm

    return expm(0.5 * rapidity * _SIGMA[axis])


def rotation(angle, axis=3):
    """SL(2, C) element covering a rotation about the given spatial axis."""
    if axis not in (1, 2, 3):
        raise ConfigurationError(f"axis must be 1, 2, or 3, got {axis}")
    from scipy.linalg import expm

    return expm(-0.5j * angle * _SIGMA[axis])


def random_unimodular(rng, scale=0.7):
    """A random element of SL(2, C) (Gaussian entries, det normalized)."""
    while True:
        m = rng.normal(size=(2, 2), scale=scale) + 1j * rng.normal(size=(2, 2), scale=scale)
        m += np.eye(2)
        d = np.linalg.det(m)
        if abs(d) > 1e-3:
            return m / np.sqrt(d)


@dataclass(frozen=True)
class SpinRep:
    """Label (k, l) of the irrep Sym^k(s) (x) Sym^l(conj(s)).

    With real_double=True (requires k != l) the representation is the real
    direct sum of the (k, l) and (l, k) irreps, e.g. the Majorana-Dirac
    representation (1, 0) + (0, 1).
    """

    k: int
    l: int = 0
    real_double: bool = False

    def __post_init__(self):
        if self.k < 0 or self.l < 0:
            raise ConfigurationError(f"labels must be >= 0, got ({self.k}, {self.l})")
        if self.real_double and self.k == self.l:
            raise ConfigurationError("the real doubled form needs k != l")

    @property
    def dim(self):
        d = (self.k + 1) * (self.l + 1)
        return 2 * d if self.real_double else d

    @property
    def spin(self):
        return (self.k + self.l) / 2.0


def _sym_power(s, k):
    """Matrix of s on the k-th symmetric power of C^2.

    Basis: monomials v1^(k-n) v2^n for n = 0..k. Column m is the coefficient
    list of (s11 v1 + s21 v2)^(k-m) (s12 v1 + s22 v2)^m.
    """
    if k == 0:
        return np.ones((1, 1), dtype=complex)
    col0 = np.array([s[0, 0], s[1, 0]], dtype=complex)
    col1 = np.array([s[0, 1], s[1, 1]], dtype=complex)
    out = np.empty((k + 1, k + 1), dtype=complex)
    for m in range(k + 1):
        poly = _binomial_power(col0, k - m)
        poly = np.convolve(poly, _binomial_power(col1, m))
        out[:, m] = poly
    return out


def _binomial_power(pair, n):
    """Coefficients of (pair[0] v1 + pair[1] v2)^n in powers of v2."""
    alpha, beta = pair
    return np.array(
        [comb(n, r) * alpha ** (n - r) * beta ** r for r in range(n + 1)], dtype=complex
    )


def rep_matrix(rep, s):
    """Matrix of s in the representation labelled by `rep`.

    The (k, l) block is Sym^k(s) (x) Sym^l(conj(s)); the real doubled form
    is the block-diagonal sum of the (k, l) and (l, k) blocks.
    """
    s = np.asarray(s, dtype=complex)
    sc = np.conj(s)

    def block(k, l):
        return np.kron(_sym_power(s, k), _sym_power(sc, l))

    if not rep.real_double:
        return block(rep.k, rep.l)
    from scipy.linalg import block_diag

    return block_diag(block(rep.k, rep.l), block(rep.l, rep.k))


def spin_type(rep):
    """'integer' for even k + l, 'half-integer' for odd k + l."""
    return "integer" if (rep.k + rep.l) % 2 == 0 else "half-integer"


def statistics_sign(rep):
    """Value of the central element -1 in the representation: +1 or -1."""
    return 1.0 if (rep.k + rep.l) % 2 == 0 else -1.0


def sample_group_elements(n_random=20, seed=0):
    """Canonical generators plus seeded random elements (used for checks)."""
    rng = np.random.default_rng(seed)
    samples = [np.eye(2, dtype=complex), -np.eye(2, dtype=complex)]
    for axis in (1, 2, 3):
        samples.append(boost(0.3, axis))
        samples.append(rotation(0.4, axis))
    samples.extend(random_unimodular(rng) for _ in range(n_random))
    return samples


def check_equivalence(rep1, rep2, T, n_samples=20, seed=0, tol=1e-9):
    """Does T intertwine rep1 and rep2 (T rho1(s) T^{-1} = rho2(s))?

    Returns (equivalent, max_deviation) over canonical generators, -+I, and
    seeded random unimodular samples.
    """
    if rep1.dim != rep2.dim:
        raise DomainError(
            f"cannot intertwine dimensions {rep1.dim} and {rep2.dim}"
        )
    T = np.asarray(T, dtype=complex)
    if T.shape != (rep1.dim, rep1.dim):
        raise ConfigurationError(
            f"intertwiner shape {T.shape} does not match dimension {rep1.dim}"
        )
    if abs(np.linalg.det(T)) < 1e-12:
        raise ConfigurationError("intertwiner is singular")
    Tinv = np.linalg.inv(T)
    dev = 0.0
    for s in sample_group_elements(n_samples, seed):
        lhs = T @ rep_matrix(rep1, s) @ Tinv
        rhs = rep_matrix(rep2, s)
        scale = max(1.0, float(np.abs(rhs).max()))
        dev = max(dev, float(np.abs(lhs - rhs).max()) / scale)
    return dev <= tol, dev

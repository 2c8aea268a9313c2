"""The double cover, its representations, and the parity classification."""

import numpy as np
import pytest

from causalfields import (
    ETA,
    ConfigurationError,
    DomainError,
    SpinRep,
    boost,
    check_equivalence,
    covering_map,
    random_unimodular,
    rep_matrix,
    rotation,
    sample_group_elements,
    spin_type,
    statistics_sign,
)

COSH1 = 1.5430806348152437
SINH1 = 1.1752011936438014


def test_covering_identity_exact():
    assert np.array_equal(covering_map(np.eye(2)), np.eye(4))


def test_covering_kernel_exact():
    assert np.array_equal(covering_map(-np.eye(2)), np.eye(4))


def test_covering_boost_frozen_entries():
    lam = covering_map(boost(1.0, axis=3))
    expect = np.eye(4)
    expect[0, 0] = expect[3, 3] = COSH1
    expect[0, 3] = expect[3, 0] = SINH1
    assert np.abs(lam - expect).max() < 1e-12


def test_covering_rotation_block():
    lam = covering_map(rotation(0.3, axis=3))
    expect = np.eye(4)
    expect[1, 1] = expect[2, 2] = np.cos(0.3)
    expect[1, 2] = -np.sin(0.3)
    expect[2, 1] = np.sin(0.3)
    assert np.abs(lam - expect).max() < 1e-12


def test_covering_axis_boosts_hit_generators():
    for axis in (1, 2, 3):
        lam = covering_map(boost(0.7, axis))
        assert lam[0, axis] == pytest.approx(np.sinh(0.7))
        assert lam[0, 0] == pytest.approx(np.cosh(0.7))


def test_covering_homomorphism_200_pairs():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(200):
        s1 = random_unimodular(rng)
        s2 = random_unimodular(rng)
        dev = np.abs(
            covering_map(s1 @ s2) - covering_map(s1) @ covering_map(s2)
        ).max()
        worst = max(worst, float(dev))
    assert worst < 1e-10


def test_covering_lands_in_restricted_group():
    for s in sample_group_elements(n_random=40, seed=2):
        lam = covering_map(s)
        assert np.abs(lam.T @ ETA @ lam - ETA).max() < 1e-10
        assert lam[0, 0] > 0.0
        assert np.linalg.det(lam) == pytest.approx(1.0, abs=1e-10)


def test_covering_rejects_non_unimodular():
    with pytest.raises(ConfigurationError):
        covering_map(2.0 * np.eye(2))
    with pytest.raises(ConfigurationError):
        covering_map(np.eye(3))


def test_random_unimodular_det():
    rng = np.random.default_rng(0)
    for _ in range(20):
        s = random_unimodular(rng)
        assert abs(np.linalg.det(s) - 1.0) < 1e-12


def test_rep_dimensions():
    assert SpinRep(0).dim == 1
    assert SpinRep(1).dim == 2
    assert SpinRep(2, 1).dim == 6
    assert SpinRep(1, 0, real_double=True).dim == 4
    assert SpinRep(3, 3).spin == 3.0


def test_rep_validation():
    with pytest.raises(ConfigurationError):
        SpinRep(-1)
    with pytest.raises(ConfigurationError):
        SpinRep(1, 1, real_double=True)


def test_rep_scalar_trivial():
    rng = np.random.default_rng(1)
    for _ in range(5):
        m = rep_matrix(SpinRep(0), random_unimodular(rng))
        assert m.shape == (1, 1)
        assert m[0, 0] == 1.0


def test_rep_defining_is_identity_construction():
    rng = np.random.default_rng(2)
    s = random_unimodular(rng)
    assert np.abs(rep_matrix(SpinRep(1), s) - s).max() < 1e-14


def test_rep_conjugate_block():
    rng = np.random.default_rng(3)
    s = random_unimodular(rng)
    assert np.abs(rep_matrix(SpinRep(0, 1), s) - np.conj(s)).max() < 1e-14


def test_rep_1_1_kronecker_oracle():
    rng = np.random.default_rng(4)
    s = random_unimodular(rng)
    m = rep_matrix(SpinRep(1, 1), s)
    assert m.shape == (4, 4)
    assert np.abs(m - np.kron(s, np.conj(s))).max() < 1e-14


def test_rep_symmetric_square_oracle():
    rng = np.random.default_rng(6)
    s = random_unimodular(rng)
    (a, b), (c, d) = s
    # action on the monomial basis v1^2, v1 v2, v2^2
    expect = np.array(
        [
            [a * a, a * b, b * b],
            [2 * a * c, a * d + b * c, 2 * b * d],
            [c * c, c * d, d * d],
        ]
    )
    assert np.abs(rep_matrix(SpinRep(2), s) - expect).max() < 1e-13


def test_rep_multiplicative():
    rng = np.random.default_rng(7)
    for rep in (SpinRep(2), SpinRep(1, 1), SpinRep(2, 1), SpinRep(1, 0, real_double=True)):
        for _ in range(5):
            s1 = random_unimodular(rng)
            s2 = random_unimodular(rng)
            lhs = rep_matrix(rep, s1 @ s2)
            rhs = rep_matrix(rep, s1) @ rep_matrix(rep, s2)
            assert np.abs(lhs - rhs).max() < 1e-10


def test_spin_type_parity_grid():
    for k in range(4):
        for l in range(4):
            rep = SpinRep(k, l)
            expect = "integer" if (k + l) % 2 == 0 else "half-integer"
            assert spin_type(rep) == expect
            assert statistics_sign(rep) == (1.0 if (k + l) % 2 == 0 else -1.0)


def test_statistics_sign_is_central_value():
    for rep in (SpinRep(0), SpinRep(1), SpinRep(2, 1), SpinRep(1, 0, real_double=True)):
        central = rep_matrix(rep, -np.eye(2))
        assert np.abs(central - statistics_sign(rep) * np.eye(rep.dim)).max() < 1e-14


def test_majorana_dirac_rep_half_integer():
    rep = SpinRep(1, 0, real_double=True)
    assert spin_type(rep) == "half-integer"
    assert rep.dim == 4


def test_equivalence_identity_and_scalars():
    rep = SpinRep(1, 1)
    ok, dev = check_equivalence(rep, rep, np.eye(4))
    assert ok and dev < 1e-12
    ok, _ = check_equivalence(rep, rep, 2.0 * np.eye(4))
    assert ok


def test_equivalence_conjugate_pair_inequivalent():
    rng = np.random.default_rng(8)
    for _ in range(5):
        T = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        if abs(np.linalg.det(T)) < 1e-6:
            continue
        ok, dev = check_equivalence(SpinRep(1, 0), SpinRep(0, 1), T)
        assert not ok and dev > 1e-3


def test_equivalence_errors():
    with pytest.raises(DomainError):
        check_equivalence(SpinRep(1), SpinRep(2), np.eye(2))
    with pytest.raises(ConfigurationError):
        check_equivalence(SpinRep(1), SpinRep(1), np.zeros((2, 2)))


def test_equivalence_preserves_spin_type():
    # only scalar intertwiners fix an irrep (Schur); equivalent reps in the
    # sampled family always carry the same parity label
    rep1, rep2 = SpinRep(1), SpinRep(1)
    ok, _ = check_equivalence(rep1, rep2, 3.0 * np.eye(2))
    assert ok
    assert spin_type(rep1) == spin_type(rep2)
    ok, _ = check_equivalence(SpinRep(1, 0), SpinRep(0, 1), np.eye(2))
    assert not ok

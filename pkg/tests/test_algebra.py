import itertools

import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given, settings

from pqc.algebra import (
    CYCLIC,
    EPS,
    ONE,
    R1,
    R2,
    R3,
    ParaQuaternion,
    StructureError,
    check_paraquaternionic,
    decompose_endomorphism,
    endo_inner,
    is_metric_skew,
    pq_mul,
    pq_norm,
    sp1_component,
    sp1_perp_project,
    spn_basis,
)
from pqc.exact import identity, inverse, is_zero, zeros
from pqc.structure import adapted_frame

from conftest import builtin
from strategies import paraquaternions, rational_matrices

UNITS = {1: R1, 2: R2, 3: R3}


def horizontal_data(name):
    af = adapted_frame(builtin(name))
    h = af.hdim
    return af.Gh, [af.J[s][:h, :h] for s in range(3)]


def test_epsilon_table():
    assert (EPS[1], EPS[2], EPS[3]) == (1, 1, -1)
    for i, j, k in CYCLIC:
        assert EPS[i] * EPS[j] == -EPS[k]


def test_unit_products():
    assert pq_mul(R1, R2) == R3
    assert pq_mul(R2, R1) == -R3
    assert pq_mul(R3, R1) == -R2
    for s, u in UNITS.items():
        assert pq_mul(u, u) == ONE * EPS[s]
    for i, j, k in CYCLIC:
        assert pq_mul(UNITS[i], UNITS[j]) == UNITS[k] * (-EPS[k])
        assert pq_mul(UNITS[j], UNITS[i]) == UNITS[k] * EPS[k]


def test_norm_values():
    assert pq_norm(ONE) == 1
    assert pq_norm(ONE + R1) == 0
    assert pq_norm(ParaQuaternion(1, 2, 3, 4)) == 1 + 4 - 9 - 16


@given(paraquaternions, paraquaternions)
@settings(max_examples=60, deadline=None)
def test_norm_multiplicative(p, q):
    assert pq_norm(pq_mul(p, q)) == pq_norm(p) * pq_norm(q)
    assert pq_mul(ONE, p) == p and pq_mul(p, ONE) == p


@given(paraquaternions, paraquaternions, paraquaternions)
@settings(max_examples=40, deadline=None)
def test_associative(p, q, r):
    assert pq_mul(pq_mul(p, q), r) == pq_mul(p, pq_mul(q, r))


@pytest.mark.parametrize("name", ["heisenberg-1", "l0-3", "heisenberg-2"])
def test_builtin_endomorphisms_are_paraquaternionic(name):
    _, Is = horizontal_data(name)
    check_paraquaternionic(*Is)


def test_paraquaternionic_rejects_swapped_roles():
    _, Is = horizontal_data("heisenberg-1")
    with pytest.raises(StructureError):
        check_paraquaternionic(Is[2], Is[1], Is[0])
    with pytest.raises(StructureError):
        decompose_endomorphism(identity(4), Is[0], -Is[1], Is[2])


def test_decomposition_examples():
    _, Is = horizontal_data("heisenberg-1")
    d = decompose_endomorphism(identity(4), *Is)
    assert is_zero(d.part3 - identity(4)) and is_zero(d.part_minus1)
    d = decompose_endomorphism(Is[0], *Is)
    assert is_zero(d.part3) and is_zero(d.part_minus1 - Is[0])


def _casimir_residues(psi, Is):
    I1, I2, I3 = Is
    a, b, c = I1 @ psi @ I1, I2 @ psi @ I2, I3 @ psi @ I3
    return 3 * psi - a - b + c, psi + a + b - c


@given(rational_matrices(4, 4))
@settings(max_examples=40, deadline=None)
def test_decomposition_random(psi):
    _, Is = horizontal_data("heisenberg-1")
    d = decompose_endomorphism(psi, *Is)
    assert is_zero(d.total() - psi)
    assert is_zero(d.part3 + d.part_minus1 - psi)
    assert is_zero(_casimir_residues(d.part3, Is)[0])
    assert is_zero(_casimir_residues(d.part_minus1, Is)[1])
    again = decompose_endomorphism(d.part3, *Is)
    assert is_zero(again.part3 - d.part3) and is_zero(again.part_minus1)
    again = decompose_endomorphism(d.part_minus1, *Is)
    assert is_zero(again.part_minus1 - d.part_minus1) and is_zero(again.part3)


def _skew(M, G):
    return (M - inverse(G) @ M.T @ G) * mpq(1, 2)


def test_sp1_perp_examples():
    G, Is = horizontal_data("heisenberg-1")
    for I in Is:
        assert is_metric_skew(I, G)
        assert is_zero(sp1_perp_project(I, G, Is))
    for A in spn_basis(G, Is):
        assert is_zero(sp1_perp_project(A, G, Is))
    with pytest.raises(StructureError):
        sp1_perp_project(identity(4), G, Is)


@pytest.mark.parametrize("name", ["heisenberg-1", "l0-3"])
def test_spn_dimension(name):
    G, Is = horizontal_data(name)
    # sp(1, R) has dimension 3 (n = 1)
    assert len(spn_basis(G, Is)) == 3


@given(rational_matrices(4, 4))
@settings(max_examples=30, deadline=None)
def test_sp1_perp_projection_orthogonal_and_idempotent(M):
    G, Is = horizontal_data("heisenberg-1")
    A = _skew(M, G)
    P = sp1_perp_project(A, G, Is)
    assert is_metric_skew(P, G)
    for B in list(Is) + spn_basis(G, Is):
        assert endo_inner(P, B, G) == 0
    assert is_zero(sp1_perp_project(P, G, Is) - P)
    assert is_zero(sp1_component(P, G, Is))
    # the remainder lies in sp(n) + sp(1)
    rest = A - P
    assert is_zero(sp1_perp_project(rest, G, Is))


def test_sp1_perp_projection_n2():
    G, Is = horizontal_data("heisenberg-2")
    rng = np.random.default_rng(7)
    M = zeros(8, 8)
    for a, b in itertools.product(range(8), repeat=2):
        M[a, b] = mpq(int(rng.integers(-3, 4)), int(rng.integers(1, 3)))
    A = _skew(M, G)
    P = sp1_perp_project(A, G, Is)
    basis = spn_basis(G, Is)
    assert len(basis) == 10  # dim sp(2, R)
    for B in list(Is) + basis:
        assert endo_inner(P, B, G) == 0
    assert is_zero(sp1_perp_project(P, G, Is) - P)

import itertools
import random

import numpy as np
import pytest
from gmpy2 import mpq

from pqc.algebra import CYCLIC, EPS, endo_to_bilinear, sp1_perp_project
from pqc.connection import (
    compute_alpha,
    horizontal_koszul,
    levi_civita,
    levi_civita_compare,
    projection_torsion,
    replace_gamma,
    skew_torsion_formula,
    torsion_components,
    verify_connection,
)
from pqc.curvature import (
    curvature_tensor,
    ricci_contractions,
    verify_bianchi,
    verify_curvature_symmetries,
    verify_ricci_identities,
    verify_vertical_curvature,
)
from pqc.exact import inverse, is_zero, zeros
from pqc.structure import adapted_frame

from conftest import BUILTINS, builtin, pipeline


def horizontal(name):
    af = adapted_frame(builtin(name))
    h = af.hdim
    return af, af.Gh, [af.J[s][:h, :h] for s in range(3)]


def random_matrix(h, seed):
    rng = random.Random(seed)
    A = zeros(h, h)
    for i, j in itertools.product(range(h), repeat=2):
        A[i, j] = mpq(rng.randint(-3, 3), rng.choice((1, 2)))
    return A


@pytest.mark.parametrize("name", BUILTINS)
def test_connection_ledger_passes(name):
    led = pipeline(name).conn.checks
    assert led.passed, led.failures()
    assert len(led.checks) >= 26


def test_heisenberg_connection_vanishes():
    for name in ("heisenberg-1", "heisenberg-2"):
        conn = pipeline(name).conn
        assert is_zero(conn.Gamma)
        assert is_zero(conn.alpha) and conn.lam == 0
        assert is_zero(horizontal_koszul(conn.frame))
        # torsion only on H x H
        h = conn.frame.hdim
        T = conn.torsion.full.copy()
        T[:h, :h] = 0
        assert is_zero(T)


@pytest.mark.parametrize("c", [1, 3])
def test_l0_alpha(c):
    conn = pipeline(f"l0-{c}").conn
    af = conn.frame
    gamma4 = np.array([mpq(int(a == af.labels.index("gamma4"))) for a in range(7)], dtype=object)
    assert is_zero(conn.alpha[0]) and is_zero(conn.alpha[2])
    assert is_zero(conn.alpha[1] + c * gamma4)
    assert conn.lam == 0


def test_l0_koszul_scales_with_c():
    k1 = horizontal_koszul(adapted_frame(builtin("l0-1")))
    k3 = horizontal_koszul(adapted_frame(builtin("l0-3")))
    assert not is_zero(k1)
    assert is_zero(k3 - 3 * k1)
    assert is_zero(horizontal_koszul(adapted_frame(builtin("l0-0"))))


def test_l0_frame_not_parallel():
    pairs = pipeline("l0-3").conn.nabla_frame_nonzero()
    assert ("gamma4", "gamma2") in pairs
    assert all(a == "gamma4" for a, _ in pairs)
    assert pipeline("heisenberg-1").conn.nabla_frame_nonzero() == []


@pytest.mark.parametrize("name", BUILTINS)
def test_lambda_cyclic_and_alpha_diag(name):
    ad = compute_alpha(adapted_frame(builtin(name)))
    assert len(set(ad.lam_by_choice.values())) == 1
    for i, j, k in CYCLIC:
        assert ad.alpha_diag_trace[i] == ad.alpha[i - 1, 4 * builtin(name).n + i - 1]


@pytest.mark.parametrize("name", BUILTINS)
def test_torsion_endomorphism_zero(name):
    t = torsion_components(adapted_frame(builtin(name)))
    assert t.endomorphism_zero
    assert is_zero(t.tau) and is_zero(t.mu)


@pytest.mark.parametrize("name", BUILTINS)
def test_levi_civita_relations(name):
    conn = pipeline(name).conn
    assert levi_civita_compare(conn).passed
    af = conn.frame
    h = af.hdim
    lowered = conn.lowered - levi_civita(af)
    # g(nabla_X xi_i, Y) - g(nabla^g_X xi_i, Y) = -omega_i(X, Y) when tau = 0
    for i in (1, 2, 3):
        assert is_zero(lowered[:h, af.v(i), :h] + af.omega[i - 1][:h, :h])


@pytest.mark.parametrize("seed", range(4))
def test_torsion_projection_random(seed):
    """For any ad-matrix A: pr(A) - A is perpendicular to sp(n)+sp(1), and its
    skew part is the bracket formula built from [A, I_s]."""
    _, G, Is = horizontal("heisenberg-2")
    A = random_matrix(8, seed)
    E = projection_torsion(A, G, Is)
    Gi = inverse(G)
    rest = E + A
    # the remainder is metric-skew and has no perpendicular part
    assert is_zero(rest.T @ G + G @ rest)
    assert is_zero(sp1_perp_project(rest, G, Is))
    sk = (E - Gi @ E.T @ G) * mpq(1, 2)
    assert is_zero(sp1_perp_project(sk, G, Is) - sk)
    B, plain = skew_torsion_formula(A, G, Is)
    assert plain == 0
    assert is_zero(endo_to_bilinear(sk, G) - B)
    assert not is_zero(B)


def test_torsion_projection_n1_has_no_skew_part():
    # so(2,2) = sp(1) + sp(1): the skew torsion vanishes identically for n = 1
    _, G, Is = horizontal("heisenberg-1")
    for seed in range(3):
        B, plain = skew_torsion_formula(random_matrix(4, seed), G, Is)
        assert is_zero(B) and plain == 0


def _curvature_failures(conn):
    cd = ricci_contractions(curvature_tensor(conn))
    leds = (verify_curvature_symmetries(cd), verify_ricci_identities(cd), verify_bianchi(cd), verify_vertical_curvature(cd))
    return [c.id for led in leds for c in led.failures()]


def test_single_entry_corruption_caught_by_curvature_suites():
    conn = pipeline("l0-3").conn
    af = conn.frame
    G = conn.Gamma.copy()
    # nabla_{xi_1} gamma_1 gains an extra gamma_2 component
    G[af.v(1), 1, 0] += 1
    bad = replace_gamma(conn, G)
    assert not verify_connection(bad).passed
    assert _curvature_failures(bad)


@pytest.mark.parametrize("name", ["heisenberg-1", "l0-3"])
def test_every_single_entry_corruption_detected(name):
    conn = pipeline(name).conn
    dim = conn.frame.dim
    missed = []
    for a, f, b in itertools.product(range(dim), repeat=3):
        G = conn.Gamma.copy()
        G[a, f, b] += 1
        bad = replace_gamma(conn, G)
        if verify_connection(bad).passed and not _curvature_failures(bad):
            missed.append((a, f, b))
    assert missed == []


def test_unchanged_gamma_passes_reverification():
    conn = pipeline("l0-3").conn
    assert verify_connection(replace_gamma(conn, conn.Gamma)).passed

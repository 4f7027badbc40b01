import itertools

import numpy as np
import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from pqc.calculus import (
    CoframeModel,
    Form,
    ModelError,
    PolyVectorField,
    exterior_derivative,
    interior_product,
    lie_bracket,
    lie_derivative,
    lie_derivative_endo,
    lie_derivative_form,
    poly_bracket_check,
)
from pqc.exact import identity, is_zero, qeinsum, zeros
from pqc.models import builtin_heisenberg, heisenberg_contact_forms, heisenberg_coordinate_fields
from pqc.forms import model_frame_form
from pqc.structure import adapted_frame

from conftest import builtin
from strategies import rationals

MODELS = ("heisenberg-1", "l0-1", "l0-3", "heisenberg-2")


def e(m, label):
    return m.basis_vector(m.labels.index(label))


def test_heisenberg_brackets():
    m = builtin("heisenberg-1").model
    assert list(lie_bracket(e(m, "I3T1"), e(m, "T1"), m)) == list(2 * e(m, "xi3"))
    assert list(lie_bracket(e(m, "I1T1"), e(m, "I2T1"), m)) == list(-2 * e(m, "xi3"))
    m2 = builtin("heisenberg-2").model
    assert is_zero(lie_bracket(e(m2, "T1"), e(m2, "T2"), m2))


def test_bracket_rejects_foreign_vectors():
    m = builtin("heisenberg-1").model
    with pytest.raises(IndexError):
        lie_bracket(zeros(3), zeros(7), m)


def test_l0_structure_equations():
    m = builtin("l0-3").model
    # d gamma^2 = -c gamma^34 and d gamma^5 = 2 gamma^12 + 2 gamma^34 + c gamma^46
    assert m.d_coframe(1) == Form(7, 2, {(2, 3): -3})
    assert m.d_coframe(4) == Form(7, 2, {(0, 1): 2, (2, 3): 2, (3, 5): 3})
    assert exterior_derivative(Form.scalar(7, 5), m).is_zero()


def test_l0_c0_is_heisenberg_up_to_relabeling():
    heis = builtin_heisenberg(1).model.C
    l0 = builtin("l0-0").model.C
    # (T, I1T, I2T, I3T, xi1, xi2, xi3) <-> (gamma1, gamma3, gamma4, gamma2, gamma6, gamma7, gamma5)
    perm = [0, 2, 3, 1, 5, 6, 4]
    assert np.all(l0[np.ix_(perm, perm, perm)] == heis)
    hits = [p for p in itertools.permutations(range(7)) if np.all(l0[np.ix_(p, p, p)] == heis)]
    assert hits == [tuple(perm)]


@pytest.mark.parametrize("name", MODELS)
def test_d_squared_zero(name):
    m = builtin(name).model
    for a in range(m.dim):
        assert exterior_derivative(m.d_coframe(a), m).is_zero()


@pytest.mark.parametrize("name", MODELS)
def test_d_of_one_form_is_minus_bracket(name):
    m = builtin(name).model
    rng = np.random.default_rng(3)
    vec = np.array([mpq(int(x)) for x in rng.integers(-3, 4, m.dim)], dtype=object)
    eta = Form.from_covector(vec)
    d = exterior_derivative(eta, m)
    for a, b in itertools.combinations(range(m.dim), 2):
        br = lie_bracket(m.basis_vector(a), m.basis_vector(b), m)
        assert d[(a, b)] == -sum(vec * br)


def test_wedge_convention():
    a, b = Form.basis(4, (0,)), Form.basis(4, (1,))
    X, Y = identity(4)[0], identity(4)[1]
    w = a ^ b
    assert w.evaluate(X, Y) == 1 and w.evaluate(Y, X) == -1
    assert (a ^ a).is_zero()


forms1 = st.lists(rationals, min_size=5, max_size=5).map(lambda v: Form.from_covector(np.array(v, dtype=object)))
vectors = st.lists(rationals, min_size=5, max_size=5).map(lambda v: np.array(v, dtype=object))


@given(forms1, forms1, forms1, vectors)
@settings(max_examples=40, deadline=None)
def test_interior_graded_leibniz(a, b, c, v):
    ab = a ^ b
    lhs = interior_product(v, ab)
    rhs = b * a.evaluate(v) - a * b.evaluate(v)
    assert lhs == rhs
    lhs3 = interior_product(v, ab ^ c)
    rhs3 = (interior_product(v, ab) ^ c) + (ab * c.evaluate(v))
    assert lhs3 == rhs3


def test_interior_examples():
    st_ = builtin("l0-3")
    m0 = st_.model
    for s in range(3):
        xi = adapted_frame(st_).reeb.xi[s]
        assert interior_product(xi, m0.coframe(st_.eta[s])).comps == {(): 1}
    m = builtin("heisenberg-1").model
    eta3 = m.coframe(6)
    assert interior_product(e(m, "xi3"), eta3).comps == {(): 1}
    deta3 = exterior_derivative(eta3, m)
    cut = interior_product(e(m, "xi3"), deta3)
    assert all(cut[(a,)] == 0 for a in range(4))


@pytest.mark.parametrize("name", MODELS)
def test_central_field_preserves_metric(name):
    af = adapted_frame(builtin(name))
    for s in range(3):
        xi = af.model.basis_vector(af.v(s + 1))
        central = is_zero(qeinsum("abc,b->ac", af.C, xi))
        if name.startswith("heisenberg"):
            assert central
        if central:
            assert is_zero(lie_derivative(xi, af.G, af.model))


def test_lie_derivative_identity_endo():
    m = builtin("l0-3").model
    for a in range(7):
        assert is_zero(lie_derivative_endo(m.basis_vector(a), identity(7), m))


@pytest.mark.parametrize("name", ["l0-3", "heisenberg-1"])
def test_cartan_formula_on_fundamental_forms(name):
    st_ = builtin(name)
    af = adapted_frame(st_)
    m = st_.model
    for s in (1, 2, 3):
        om = model_frame_form(af.omega_form(s), af)
        for a in range(m.dim):
            v = m.basis_vector(a)
            lhs = lie_derivative_form(v, om, m).matrix()
            rhs = lie_derivative(v, om.matrix(), m)
            assert is_zero(lhs - rhs)


def test_jacobi_and_antisymmetry_guards():
    C = zeros(7, 7, 7)
    C[0, 1, 2] = mpq(1)
    with pytest.raises(ModelError, match="antisymmetric"):
        CoframeModel(1, tuple("abcdefg"), C)
    base = builtin("l0-3").model
    C = base.C.copy()
    # flip the sign of d gamma^2
    C[1, 2, 3], C[1, 3, 2] = -C[1, 2, 3], -C[1, 3, 2]
    with pytest.raises(ModelError, match=r"\(a,b,c,d\)=\(5,1,3,4\)"):
        CoframeModel(1, base.labels, C)
    # brackets of a 2-step nilpotent algebra cannot break Jacobi
    heis = builtin("heisenberg-1").model
    C = heis.C.copy()
    C[6, 0, 3], C[6, 3, 0] = -C[6, 0, 3], -C[6, 3, 0]
    CoframeModel(1, heis.labels, C)
    with pytest.raises(ModelError):
        CoframeModel(2, base.labels, base.C)


@pytest.mark.parametrize("n, pairs", [(1, 21), (2, 55)])
def test_coordinate_fields_reproduce_brackets(n, pairs):
    report = poly_bracket_check(heisenberg_coordinate_fields(n), builtin_heisenberg(n).model)
    assert report.ok and report.checked == pairs


def test_corrupted_coordinate_field_is_located():
    fields = heisenberg_coordinate_fields(1)
    f = fields[1]
    coeffs = list(f.coeffs)
    coeffs[4] = coeffs[4] + f.coords[0]
    fields[1] = PolyVectorField(f.coords, tuple(coeffs))
    report = poly_bracket_check(fields, builtin_heisenberg(1).model)
    assert not report.ok
    assert all(1 in pair for pair in report.mismatches)


def test_non_polynomial_field_rejected():
    x, y = sympy.symbols("x y")
    with pytest.raises(ValueError):
        PolyVectorField((x, y), (1 / x, sympy.Integer(0)))


@pytest.mark.parametrize("n", [1, 2])
def test_contact_form_derivatives(n):
    coords, forms, d = heisenberg_contact_forms(n)
    names = [str(c) for c in coords]
    want = {3: [("t", "x", 2), ("y", "z", 2)], 1: [("t", "y", 2), ("x", "z", 2)], 2: [("t", "z", 2), ("x", "y", -2)]}
    for s, terms in want.items():
        expect = {}
        for a in range(1, n + 1):
            for u, v, val in terms:
                expect[(names.index(f"{u}{a}"), names.index(f"{v}{a}"))] = val
        assert d[s] == expect
    fields = heisenberg_coordinate_fields(n)
    m = builtin_heisenberg(n).model
    for s in (1, 2, 3):
        # Theta_s evaluates to eta_s on the coordinate fields
        vals = [sympy.expand(sum(c * w for c, w in zip(forms[s], F.coeffs))) for F in fields]
        assert vals == [1 if b == 4 * n + s - 1 else 0 for b in range(m.dim)]

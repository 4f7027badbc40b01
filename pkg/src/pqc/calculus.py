"""Exterior and tensor calculus on Lie-algebra frames with constant
structure constants, plus polynomial vector fields on a coordinate chart.

Conventions: ``[e_b, e_c] = sum_a C[a, b, c] e_a``; forms use the
determinant wedge convention, so ``(a ^ b)(X, Y) = a(X) b(Y) - a(Y) b(X)``
and ``d theta(A, B) = -theta([A, B])`` for constant 1-forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from gmpy2 import mpq
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np
import sympy

from .exact import qeinsum, Q, is_zero, qarray, zeros

__all__ = [
    "ModelError",
    "CoframeModel",
    "Form",
    "lie_bracket",
    "exterior_derivative",
    "interior_product",
    "lie_derivative",
    "lie_derivative_form",
    "lie_derivative_endo",
    "ad_matrix",
    "PolyVectorField",
    "BracketReport",
    "poly_bracket_check",
    "poly_exterior_derivative",
]


class ModelError(ValueError):
    """Malformed frame model (antisymmetry or Jacobi failure, bad shapes)."""


def _sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting idx, and the sorted tuple; sign 0 on repeats."""
    lst = list(idx)
    if len(set(lst)) != len(lst):
        return 0, ()
    sign = 1
    # insertion sort counting transpositions
    for i in range(1, len(lst)):
        j = i
        while j > 0 and lst[j - 1] > lst[j]:
            lst[j - 1], lst[j] = lst[j], lst[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(lst)


@dataclass(frozen=True, eq=False)
class CoframeModel:
    """Frame e_1..e_dim of a Lie algebra with exact structure constants.

    ``C`` is a dense ``(dim, dim, dim)`` object array.  Construction checks
    antisymmetry and the Jacobi identity.
    """

    n: int
    labels: tuple[str, ...]
    C: np.ndarray
    name: str = ""
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        dim = len(self.labels)
        if self.n < 1:
            raise ModelError("n must be at least 1")
        if dim != 4 * self.n + 3:
            raise ModelError(f"expected {4 * self.n + 3} frame labels, got {dim}")
        if self.C.shape != (dim, dim, dim):
            raise ModelError("structure constant array has the wrong shape")
        if self.check:
            bad = self.antisymmetry_witness()
            if bad is not None:
                a, b, c = bad
                raise ModelError(
                    f"structure constants not antisymmetric at (a,b,c)=({a + 1},{b + 1},{c + 1}): "
                    f"C^{a + 1}_{{{b + 1}{c + 1}}}={self.C[a, b, c]}, C^{a + 1}_{{{c + 1}{b + 1}}}={self.C[a, c, b]}"
                )
            bad4 = self.jacobi_witness()
            if bad4 is not None:
                a, b, c, d = bad4
                raise ModelError(
                    f"Jacobi identity fails: e_{a + 1} component of "
                    f"[[e_{b + 1},e_{c + 1}],e_{d + 1}] + cyclic is nonzero (a,b,c,d)=({a + 1},{b + 1},{c + 1},{d + 1})"
                )

    @property
    def dim(self) -> int:
        return len(self.labels)

    def antisymmetry_witness(self):
        dim = self.dim
        for a in range(dim):
            for b in range(dim):
                for c in range(b, dim):
                    if self.C[a, b, c] + self.C[a, c, b] != 0:
                        return a, b, c
        return None

    def jacobiator(self) -> np.ndarray:
        C = self.C
        # J[a,b,c,d] = e_a component of [[e_b,e_c],e_d] + [[e_c,e_d],e_b] + [[e_d,e_b],e_c]
        t = qeinsum("ebc,aed->abcd", C, C)
        return t + t.transpose(0, 2, 3, 1) + t.transpose(0, 3, 1, 2)

    def jacobi_witness(self):
        J = self.jacobiator()
        for idx in zip(*np.nonzero(J != 0)):
            return tuple(int(i) for i in idx)
        return None

    def bracket(self, v, w) -> np.ndarray:
        return lie_bracket(v, w, self)

    def basis_vector(self, a: int) -> np.ndarray:
        v = zeros(self.dim)
        v[a] = mpq(1)
        return v

    def coframe(self, a: int) -> "Form":
        return Form.basis(self.dim, (a,))

    def d_coframe(self, a: int) -> "Form":
        comps = {}
        for b, c in combinations(range(self.dim), 2):
            v = self.C[a, b, c]
            if v != 0:
                comps[(b, c)] = -v
        return Form(self.dim, 2, comps)

    def same_constants(self, other: "CoframeModel") -> bool:
        return self.dim == other.dim and bool(np.all(self.C == other.C))


def lie_bracket(v, w, m: CoframeModel) -> np.ndarray:
    v, w = qarray(v), qarray(w)
    if v.shape != (m.dim,) or w.shape != (m.dim,):
        raise IndexError("vector does not live on this frame")
    return qeinsum("abc,b,c->a", m.C, v, w)


def ad_matrix(v, m: CoframeModel) -> np.ndarray:
    """Matrix of X -> [v, X] acting on column vectors."""
    return qeinsum("acb,c->ab", m.C, qarray(v))


class Form:
    """Exterior k-form with components on increasing index tuples."""

    __slots__ = ("dim", "degree", "comps")

    def __init__(self, dim: int, degree: int, comps: Mapping[tuple[int, ...], object] | None = None):
        self.dim = dim
        self.degree = degree
        clean: dict[tuple[int, ...], mpq] = {}
        for key, val in (comps or {}).items():
            val = Q(val)
            if val == 0:
                continue
            if len(key) != degree:
                raise ValueError("component index has the wrong length")
            sign, skey = _sort_sign(key)
            if sign == 0:
                raise ValueError("repeated index in a form component")
            if any(i < 0 or i >= dim for i in skey):
                raise IndexError("form index out of range")
            clean[skey] = clean.get(skey, mpq(0)) + sign * val
        self.comps = {k: v for k, v in clean.items() if v != 0}

    @classmethod
    def zero(cls, dim: int, degree: int) -> "Form":
        return cls(dim, degree)

    @classmethod
    def scalar(cls, dim: int, value) -> "Form":
        return cls(dim, 0, {(): value})

    @classmethod
    def basis(cls, dim: int, idx: tuple[int, ...]) -> "Form":
        return cls(dim, len(idx), {idx: 1})

    @classmethod
    def from_covector(cls, vec) -> "Form":
        vec = qarray(vec)
        return cls(len(vec), 1, {(a,): vec[a] for a in range(len(vec))})

    @classmethod
    def from_matrix(cls, mat) -> "Form":
        """2-form with omega(e_a, e_b) = mat[a, b] (mat must be antisymmetric)."""
        mat = qarray(mat)
        if not is_zero(mat + mat.T):
            raise ValueError("matrix is not antisymmetric")
        dim = mat.shape[0]
        return cls(dim, 2, {(a, b): mat[a, b] for a, b in combinations(range(dim), 2)})

    def matrix(self) -> np.ndarray:
        if self.degree != 2:
            raise ValueError("matrix() needs a 2-form")
        out = zeros(self.dim, self.dim)
        for (a, b), v in self.comps.items():
            out[a, b] = v
            out[b, a] = -v
        return out

    def covector(self) -> np.ndarray:
        if self.degree != 1:
            raise ValueError("covector() needs a 1-form")
        out = zeros(self.dim)
        for (a,), v in self.comps.items():
            out[a] = v
        return out

    def __getitem__(self, idx: tuple[int, ...]) -> mpq:
        sign, key = _sort_sign(idx)
        if sign == 0:
            return mpq(0)
        return sign * self.comps.get(key, mpq(0))

    def _check(self, other: "Form") -> None:
        if self.dim != other.dim or self.degree != other.degree:
            raise ValueError("forms of different type")

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        out = dict(self.comps)
        for k, v in other.comps.items():
            out[k] = out.get(k, mpq(0)) + v
        return Form(self.dim, self.degree, out)

    def __neg__(self) -> "Form":
        return Form(self.dim, self.degree, {k: -v for k, v in self.comps.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __mul__(self, scalar) -> "Form":
        s = Q(scalar)
        return Form(self.dim, self.degree, {k: s * v for k, v in self.comps.items()})

    __rmul__ = __mul__

    def __xor__(self, other: "Form") -> "Form":
        return self.wedge(other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return self.dim == other.dim and self.degree == other.degree and self.comps == other.comps

    def __hash__(self):
        return hash((self.dim, self.degree, frozenset(self.comps.items())))

    def __repr__(self) -> str:
        if not self.comps:
            return f"Form(dim={self.dim}, degree={self.degree}, 0)"
        terms = " + ".join(f"{v}*e^{''.join(str(i + 1) for i in k)}" for k, v in sorted(self.comps.items()))
        return f"Form({terms})"

    def is_zero(self) -> bool:
        return not self.comps

    def wedge(self, other: "Form") -> "Form":
        if self.dim != other.dim:
            raise ValueError("forms on different frames")
        out: dict[tuple[int, ...], mpq] = {}
        for k1, v1 in self.comps.items():
            for k2, v2 in other.comps.items():
                sign, key = _sort_sign(k1 + k2)
                if sign == 0:
                    continue
                out[key] = out.get(key, mpq(0)) + sign * v1 * v2
        return Form(self.dim, self.degree + other.degree, out)

    def interior(self, v) -> "Form":
        v = qarray(v)
        if self.degree == 0:
            raise ValueError("interior product of a 0-form")
        out: dict[tuple[int, ...], mpq] = {}
        for key, val in self.comps.items():
            for j, a in enumerate(key):
                if v[a] == 0:
                    continue
                rest = key[:j] + key[j + 1:]
                out[rest] = out.get(rest, mpq(0)) + (-1) ** j * v[a] * val
        return Form(self.dim, self.degree - 1, out)

    def evaluate(self, *vectors) -> mpq:
        if len(vectors) != self.degree:
            raise ValueError("wrong number of arguments")
        f = self
        for v in vectors:
            f = f.interior(v)
        return f.comps.get((), mpq(0))

    def value_on_basis(self, *idx: int) -> mpq:
        return self[tuple(idx)]


def exterior_derivative(omega: Form, m: CoframeModel) -> Form:
    if omega.dim != m.dim:
        raise ValueError("form does not live on this frame")
    out = Form.zero(m.dim, omega.degree + 1)
    if omega.degree == 0:
        return out
    dtheta = [m.d_coframe(a) for a in range(m.dim)]
    for key, val in omega.comps.items():
        for j, a in enumerate(key):
            left = Form.scalar(m.dim, 1)
            for b in key[:j]:
                left = left ^ Form.basis(m.dim, (b,))
            right = Form.scalar(m.dim, 1)
            for b in key[j + 1:]:
                right = right ^ Form.basis(m.dim, (b,))
            out = out + (left ^ dtheta[a] ^ right) * ((-1) ** j * val)
    return out


def interior_product(v, omega: Form) -> Form:
    return omega.interior(v)


def lie_derivative(v, T, m: CoframeModel) -> np.ndarray:
    """Lie derivative of a constant (0,2) tensor given as a matrix:
    (L_v T)(X, Y) = -T([v, X], Y) - T(X, [v, Y])."""
    T = qarray(T)
    A = ad_matrix(v, m)
    return -(A.T @ T + T @ A)


def lie_derivative_endo(v, P, m: CoframeModel) -> np.ndarray:
    """(L_v P) X = [v, P X] - P [v, X] for a constant (1,1) tensor."""
    A = ad_matrix(v, m)
    P = qarray(P)
    return A @ P - P @ A


def lie_derivative_form(v, omega: Form, m: CoframeModel) -> Form:
    """L_v omega by the Cartan formula i_v d + d i_v."""
    out = exterior_derivative(omega, m).interior(v)
    if omega.degree > 0:
        out = out + exterior_derivative(omega.interior(v), m)
    return out


# ---------------------------------------------------------------------------
# polynomial vector fields


@dataclass(frozen=True)
class PolyVectorField:
    """Vector field sum_mu coeff[mu] d/dx^mu with polynomial coefficients."""

    coords: tuple[sympy.Symbol, ...]
    coeffs: tuple[sympy.Expr, ...]
    label: str = ""

    def __post_init__(self):
        if len(self.coords) != len(self.coeffs):
            raise ValueError("one coefficient per coordinate is required")
        for c in self.coeffs:
            if not sympy.sympify(c).is_polynomial(*self.coords):
                raise ValueError(f"coefficient {c} is not polynomial")

    def apply(self, f: sympy.Expr) -> sympy.Expr:
        return sympy.expand(sum(c * sympy.diff(f, x) for c, x in zip(self.coeffs, self.coords)))

    def bracket(self, other: "PolyVectorField") -> "PolyVectorField":
        if self.coords != other.coords:
            raise ValueError("fields on different charts")
        new = tuple(sympy.expand(self.apply(w) - other.apply(v)) for v, w in zip(self.coeffs, other.coeffs))
        return PolyVectorField(self.coords, new)

    @staticmethod
    def linear_combination(coords, terms) -> "PolyVectorField":
        acc = [sympy.Integer(0)] * len(coords)
        for w, f in terms:
            acc = [a + sympy.Rational(w.numerator, w.denominator) * c for a, c in zip(acc, f.coeffs)]
        return PolyVectorField(tuple(coords), tuple(sympy.expand(a) for a in acc))


@dataclass
class BracketReport:
    checked: int
    mismatches: list[tuple[int, int]]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def poly_bracket_check(fields: Sequence[PolyVectorField], m: CoframeModel) -> BracketReport:
    """Compare all brackets of coordinate fields with the frame constants."""
    if len(fields) != m.dim:
        raise ValueError("one polynomial field per frame vector is required")
    coords = fields[0].coords
    mismatches = []
    checked = 0
    for b, c in combinations(range(m.dim), 2):
        lhs = fields[b].bracket(fields[c])
        rhs = PolyVectorField.linear_combination(
            coords, [(m.C[a, b, c], fields[a]) for a in range(m.dim) if m.C[a, b, c] != 0]
        )
        checked += 1
        if any(sympy.expand(x - y) != 0 for x, y in zip(lhs.coeffs, rhs.coeffs)):
            mismatches.append((b, c))
    return BracketReport(checked, mismatches)


def poly_exterior_derivative(oneform: Sequence[sympy.Expr], coords: Sequence[sympy.Symbol]) -> dict[tuple[int, int], sympy.Expr]:
    """d of a polynomial 1-form sum_mu f_mu dx^mu, as {(mu, nu): coefficient of dx^mu ^ dx^nu}, mu < nu."""
    out = {}
    for mu, nu in combinations(range(len(coords)), 2):
        c = sympy.expand(sympy.diff(oneform[nu], coords[mu]) - sympy.diff(oneform[mu], coords[nu]))
        if c != 0:
            out[(mu, nu)] = c
    return out

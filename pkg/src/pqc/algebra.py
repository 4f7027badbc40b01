"""Split-quaternion arithmetic, the epsilon symbols and invariant splittings
of endomorphisms of the horizontal space.

Matrices act on column vectors: ``J[a, b]`` is the ``e_a`` component of
``I e_b``.  Bilinear forms are stored as ``B[a, b] = B(e_a, e_b)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from gmpy2 import mpq
from typing import Iterator

import numpy as np

from .exact import Q, inverse, is_zero, qarray, zeros

__all__ = [
    "EPS",
    "CYCLIC",
    "cyclic",
    "ParaQuaternion",
    "pq_mul",
    "pq_norm",
    "R1",
    "R2",
    "R3",
    "ONE",
    "StructureError",
    "check_paraquaternionic",
    "EndomorphismDecomposition",
    "decompose_endomorphism",
    "endo_inner",
    "is_metric_skew",
    "sp1_component",
    "sp1_perp_project",
    "spn_basis",
    "bilinear_to_endo",
    "endo_to_bilinear",
]

#: epsilon symbols, indexed by s = 1, 2, 3
EPS = {1: 1, 2: 1, 3: -1}

#: the cyclic permutations of (1, 2, 3)
CYCLIC: tuple[tuple[int, int, int], ...] = ((1, 2, 3), (2, 3, 1), (3, 1, 2))


def cyclic() -> Iterator[tuple[int, int, int]]:
    return iter(CYCLIC)


class StructureError(ValueError):
    """Raised when data violates the paraquaternionic relations."""


@dataclass(frozen=True)
class ParaQuaternion:
    """p = t + x r3 + y r1 + z r2.

    Components may be Fractions or any commutative ring elements that
    support ``+``, ``-`` and ``*`` (polynomials are used for the group law).
    """

    t: object = 0
    x: object = 0
    y: object = 0
    z: object = 0

    def coeffs(self) -> dict[int, object]:
        """Components keyed by basis index: 0 for 1, s for r_s."""
        return {0: self.t, 3: self.x, 1: self.y, 2: self.z}

    @classmethod
    def from_coeffs(cls, c: dict[int, object]) -> "ParaQuaternion":
        return cls(c.get(0, 0), c.get(3, 0), c.get(1, 0), c.get(2, 0))

    def __add__(self, other: "ParaQuaternion") -> "ParaQuaternion":
        return ParaQuaternion(self.t + other.t, self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "ParaQuaternion") -> "ParaQuaternion":
        return ParaQuaternion(self.t - other.t, self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "ParaQuaternion":
        return ParaQuaternion(-self.t, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, ParaQuaternion):
            return pq_mul(self, other)
        return ParaQuaternion(self.t * other, self.x * other, self.y * other, self.z * other)

    __rmul__ = __mul__

    def conjugate(self) -> "ParaQuaternion":
        return ParaQuaternion(self.t, -self.x, -self.y, -self.z)

    def real(self):
        return self.t

    def imag(self) -> "ParaQuaternion":
        return ParaQuaternion(0, self.x, self.y, self.z)


ONE = ParaQuaternion(1, 0, 0, 0)
R3 = ParaQuaternion(0, 1, 0, 0)
R1 = ParaQuaternion(0, 0, 1, 0)
R2 = ParaQuaternion(0, 0, 0, 1)


def _basis_product(s: int, u: int) -> tuple[int, int]:
    """Product of basis units r_s r_u as (sign, index); index 0 is the unit."""
    if s == 0:
        return 1, u
    if u == 0:
        return 1, s
    if s == u:
        return (1, 0) if EPS[s] == 1 else (-1, 0)
    for i, j, k in CYCLIC:
        if (s, u) == (i, j):
            return -EPS[k], k
        if (s, u) == (j, i):
            return EPS[k], k
    raise AssertionError("unreachable")


def pq_mul(p: ParaQuaternion, q: ParaQuaternion) -> ParaQuaternion:
    out: dict[int, object] = {0: 0, 1: 0, 2: 0, 3: 0}
    for s, a in p.coeffs().items():
        for u, b in q.coeffs().items():
            sign, idx = _basis_product(s, u)
            out[idx] = out[idx] + (a * b if sign == 1 else -(a * b))
    return ParaQuaternion.from_coeffs(out)


def pq_norm(p: ParaQuaternion):
    """Re(conj(p) p) = t^2 + x^2 - y^2 - z^2."""
    return pq_mul(p.conjugate(), p).t


# ---------------------------------------------------------------------------
# endomorphisms of H


def check_paraquaternionic(I1, I2, I3) -> None:
    """Raise StructureError unless I1^2 = I2^2 = 1, I3^2 = -1, I1 I2 = -I2 I1 = I3."""
    mats = {1: qarray(I1), 2: qarray(I2), 3: qarray(I3)}
    n = mats[1].shape[0]
    ident = np.identity(n, dtype=object)
    for s, m in mats.items():
        if not is_zero(m @ m - EPS[s] * ident):
            raise StructureError(f"I_{s}^2 != {EPS[s]} id")
    for i, j, k in CYCLIC:
        if not is_zero(mats[i] @ mats[j] + EPS[k] * mats[k]):
            raise StructureError(f"I_{i} I_{j} != -eps_{k} I_{k}")
        if not is_zero(mats[i] @ mats[j] + mats[j] @ mats[i]):
            raise StructureError(f"I_{i} and I_{j} do not anticommute")


@dataclass(frozen=True)
class EndomorphismDecomposition:
    ppp: np.ndarray
    pmm: np.ndarray
    mpm: np.ndarray
    mmp: np.ndarray

    @property
    def part3(self) -> np.ndarray:
        return self.ppp

    @property
    def part_minus1(self) -> np.ndarray:
        return self.pmm + self.mpm + self.mmp

    def total(self) -> np.ndarray:
        return self.ppp + self.pmm + self.mpm + self.mmp


def decompose_endomorphism(psi, I1, I2, I3) -> EndomorphismDecomposition:
    check_paraquaternionic(I1, I2, I3)
    psi = qarray(psi)
    I1, I2, I3 = qarray(I1), qarray(I2), qarray(I3)
    a = I1 @ psi @ I1
    b = I2 @ psi @ I2
    c = I3 @ psi @ I3
    q = mpq(1, 4)
    return EndomorphismDecomposition(
        ppp=(psi + a + b - c) * q,
        pmm=(psi + a - b + c) * q,
        mpm=(psi - a + b + c) * q,
        mmp=(psi - a - b - c) * q,
    )


def bilinear_to_endo(B, G) -> np.ndarray:
    """Endomorphism P with g(P X, Y) = B(X, Y)."""
    return inverse(G) @ qarray(B).T


def endo_to_bilinear(P, G) -> np.ndarray:
    return qarray(P).T @ qarray(G)


def endo_inner(A, B, G) -> mpq:
    """<A, B> = sum over a, b of g^{ab} g(A e_a, B e_b)."""
    G = qarray(G)
    Ginv = inverse(G)
    m = qarray(A).T @ G @ qarray(B)
    return Q(sum(Ginv[a, b] * m[a, b] for a in range(G.shape[0]) for b in range(G.shape[0])))


def is_metric_skew(A, G) -> bool:
    A, G = qarray(A), qarray(G)
    return is_zero(A.T @ G + G @ A)


def sp1_component(A, G, Is) -> np.ndarray:
    """Orthogonal projection of A onto span(I_1, I_2, I_3)."""
    out = zeros(*qarray(A).shape)
    for s in (1, 2, 3):
        Is_ = qarray(Is[s - 1])
        coeff = endo_inner(A, Is_, G) / endo_inner(Is_, Is_, G)
        out = out + coeff * Is_
    return out


def sp1_perp_project(A, G, Is) -> np.ndarray:
    """A_[-1] - A_sp(1): the component of a metric-skew A orthogonal to sp(n) + sp(1)."""
    if not is_metric_skew(A, G):
        raise StructureError("sp1_perp_project needs a metric-skew endomorphism")
    dec = decompose_endomorphism(A, *Is)
    return dec.part_minus1 - sp1_component(A, G, Is)


def spn_basis(G, Is) -> list[np.ndarray]:
    """A basis of the metric-skew endomorphisms commuting with every I_s."""
    from .exact import nullspace

    G = qarray(G)
    dim = G.shape[0]
    rows = []
    # unknown A, flattened row-major; conditions A^T G + G A = 0 and [A, I_s] = 0
    def lin(fn):
        mats = []
        for k in range(dim * dim):
            e = zeros(dim, dim)
            e[k // dim, k % dim] = mpq(1)
            mats.append(fn(e).reshape(-1))
        return np.array(mats, dtype=object).T

    rows.append(lin(lambda e: e.T @ G + G @ e))
    for I in Is:
        I = qarray(I)
        rows.append(lin(lambda e, I=I: e @ I - I @ e))
    sys = np.concatenate(rows, axis=0)
    return [v.reshape(dim, dim) for v in nullspace(sys)]

"""Paraquaternionic contact data on a frame model: axiom validation, the
Reeb conditions and the adapted frame (horizontal frame followed by the
Reeb fields xi_1, xi_2, xi_3).

The fundamental forms are written omega_s throughout (phi_s is an alias).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from gmpy2 import mpq
from functools import cached_property

import numpy as np

from .algebra import CYCLIC, EPS
from .calculus import CoframeModel, Form
from .exact import qeinsum, SingularMatrixError, inertia, inverse, is_zero, qarray, solve_unique, zeros
from .report import Ledger, mismatch

__all__ = [
    "PqcStructure",
    "NoReebSolution",
    "ReebFrame",
    "AdaptedFrame",
    "validate_pqc",
    "solve_reeb",
    "fundamental_forms",
    "adapted_frame",
]


class NoReebSolution(ValueError):
    """The Reeb conditions have no (unique) solution on this model."""


@dataclass(frozen=True, eq=False)
class PqcStructure:
    """Contact forms, horizontal metric and endomorphisms on a frame model.

    ``eta`` holds the 0-based coframe indices of eta_1, eta_2, eta_3.  The
    horizontal space H is spanned by the remaining frame vectors, taken in
    increasing order; ``g`` and ``I`` are 4n x 4n matrices in that basis.
    """

    model: CoframeModel
    eta: tuple[int, int, int]
    g: np.ndarray
    I: tuple[np.ndarray, np.ndarray, np.ndarray]
    name: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        dim = self.model.dim
        if len(set(self.eta)) != 3 or any(not 0 <= e < dim for e in self.eta):
            raise ValueError("eta indices must be three distinct frame indices")
        h = 4 * self.model.n
        if self.g.shape != (h, h) or any(m.shape != (h, h) for m in self.I):
            raise ValueError(f"metric and endomorphisms must be {h}x{h}")

    @property
    def n(self) -> int:
        return self.model.n

    @cached_property
    def horizontal(self) -> tuple[int, ...]:
        return tuple(a for a in range(self.model.dim) if a not in self.eta)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.model.labels

    def contact_matrix(self, s: int) -> np.ndarray:
        """Matrix of d eta_s restricted to H."""
        e = self.eta[s - 1]
        hh = list(self.horizontal)
        return -self.model.C[e][np.ix_(hh, hh)]

    def omega_matrix(self, s: int) -> np.ndarray:
        """omega_s(X, Y) = g(I_s X, Y) on H."""
        return self.I[s - 1].T @ self.g

    def with_metric(self, g) -> "PqcStructure":
        return PqcStructure(self.model, self.eta, qarray(g), self.I, self.name, dict(self.metadata))


def validate_pqc(st: PqcStructure) -> Ledger:
    """Check Jacobi, the paraquaternion relations, compatibility of g with
    the I_s, the contact condition and the neutral signature."""
    led = Ledger("validation")
    m = st.model
    led.record("jacobi", "[[A,B],C] + cyclic = 0", _jacobi_witness(m))

    I = {s: st.I[s - 1] for s in (1, 2, 3)}
    h = 4 * st.n
    ident = np.identity(h, dtype=object)
    w = None
    for s in (1, 2, 3):
        w = mismatch(I[s] @ I[s], EPS[s] * ident)
        if w:
            w = {"relation": f"I{s}^2 = {EPS[s]}", **w}
            break
    if w is None:
        for i, j, k in CYCLIC:
            w = mismatch(I[i] @ I[j], -EPS[k] * I[k])
            if w:
                w = {"relation": f"I{i}I{j} = -eps{k} I{k}", **w}
                break
            w = mismatch(I[i] @ I[j], -(I[j] @ I[i]))
            if w:
                w = {"relation": f"I{i}I{j} = -I{j}I{i}", **w}
                break
    led.record("paraquaternionic", "I1^2 = I2^2 = id, I3^2 = -id, I1I2 = -I2I1 = I3", w)

    labels = [st.labels[a] for a in st.horizontal]
    w = None
    for s in (1, 2, 3):
        lhs = I[s].T @ st.g @ I[s]
        rhs = -EPS[s] * st.g
        w = mismatch(lhs, rhs, tuple(labels))
        if w:
            w = {"s": s, **w}
            w["a"], w["b"] = w.pop("index")
            break
    led.record("compatibility", "g(I_s X, I_s Y) = -eps_s g(X, Y)", w)

    w = None
    if not is_zero(st.g - st.g.T):
        w = {"reason": "metric not symmetric"}
    led.record("metric-symmetric", "g(X, Y) = g(Y, X)", w)

    w = None
    for s in (1, 2, 3):
        lhs = st.contact_matrix(s)
        rhs = -2 * EPS[s] * st.omega_matrix(s)
        w = mismatch(lhs, rhs, tuple(labels))
        if w:
            w = {"s": s, **w}
            break
    led.record("contact", "d eta_s(X, Y) = -2 eps_s g(I_s X, Y)", w)

    w = None
    try:
        pos, neg, zero = inertia(st.g)
        if (pos, neg, zero) != (2 * st.n, 2 * st.n, 0):
            w = {"signature": [pos, neg, zero], "expected": [2 * st.n, 2 * st.n, 0]}
    except ValueError as exc:
        w = {"reason": str(exc)}
    led.record("neutral-signature", "signature of g on H is (2n, 2n)", w)
    return led


def _jacobi_witness(m: CoframeModel):
    bad = m.jacobi_witness()
    if bad is None:
        return None
    return {"a,b,c,d": [i + 1 for i in bad]}


@dataclass(frozen=True, eq=False)
class ReebFrame:
    """Reeb fields as rows of ``xi`` (components in the model frame)."""

    structure: PqcStructure
    xi: np.ndarray
    checks: Ledger

    @property
    def extended_metric_vertical(self) -> np.ndarray:
        out = zeros(3, 3)
        for s in (1, 2, 3):
            out[s - 1, s - 1] = mpq(-EPS[s])
        return out


def _d_eta(st: PqcStructure, s: int) -> np.ndarray:
    """Full matrix of d eta_s on the model frame."""
    return -st.model.C[st.eta[s - 1]]


def solve_reeb(st: PqcStructure) -> ReebFrame:
    """Solve eta_s(xi_t) = delta_st, (xi_s -| d eta_s)|H = 0 and
    (xi_j -| d eta_i)|H = eps_k (xi_i -| d eta_j)|H for xi_1, xi_2, xi_3."""
    dim = st.model.dim
    nunk = 3 * dim
    rows, rhs = [], []

    def unk(t: int, a: int) -> int:
        return (t - 1) * dim + a

    for s in (1, 2, 3):
        for t in (1, 2, 3):
            r = zeros(nunk)
            r[unk(t, st.eta[s - 1])] = mpq(1)
            rows.append(r)
            rhs.append(mpq(int(s == t)))
    D = {s: _d_eta(st, s) for s in (1, 2, 3)}
    for s in (1, 2, 3):
        for x in st.horizontal:
            r = zeros(nunk)
            for a in range(dim):
                r[unk(s, a)] = D[s][a, x]
            rows.append(r)
            rhs.append(mpq(0))
    for i, j, k in CYCLIC:
        for x in st.horizontal:
            r = zeros(nunk)
            for a in range(dim):
                r[unk(j, a)] += D[i][a, x]
                r[unk(i, a)] -= EPS[k] * D[j][a, x]
            rows.append(r)
            rhs.append(mpq(0))
    try:
        sol = solve_unique(np.array(rows, dtype=object), np.array(rhs, dtype=object))
    except SingularMatrixError as exc:
        raise NoReebSolution(
            f"Reeb conditions not solvable ({exc}); in dimension 7 these conditions are an "
            "additional assumption and may fail for a given contact structure"
        ) from exc
    xi = sol.reshape(3, dim)
    led = Ledger("reeb")
    w = None
    for s in (1, 2, 3):
        for t in (1, 2, 3):
            if xi[t - 1, st.eta[s - 1]] != int(s == t):
                w = {"s": s, "t": t}
    led.record("reeb-duality", "eta_s(xi_t) = delta_st", w)
    w = None
    for s in (1, 2, 3):
        v = xi[s - 1] @ D[s]
        for x in st.horizontal:
            if v[x] != 0:
                w = {"s": s, "X": st.labels[x], "value": v[x]}
    led.record("reeb-self", "(xi_s -| d eta_s)|H = 0", w)
    w = None
    for i, j, k in CYCLIC:
        lhs = xi[j - 1] @ D[i]
        rhs_ = EPS[k] * (xi[i - 1] @ D[j])
        for x in st.horizontal:
            if lhs[x] != rhs_[x]:
                w = {"ijk": [i, j, k], "X": st.labels[x], "lhs": lhs[x], "rhs": rhs_[x]}
    led.record("reeb-cross", "(xi_j -| d eta_i)|H = eps_k (xi_i -| d eta_j)|H", w)
    if not led.passed:
        raise NoReebSolution("solution of the Reeb system failed its own verification")
    return ReebFrame(st, xi, led)


@dataclass(frozen=True, eq=False)
class AdaptedFrame:
    """The model rewritten in the frame (horizontal frame, xi_1, xi_2, xi_3).

    Index conventions: horizontal indices 0..4n-1, xi_s at 4n+s-1.  ``J``
    holds the I_s extended by zero on V; ``G`` is the extended metric with
    g(xi_s, xi_t) = -eps_s delta_st.
    """

    structure: PqcStructure
    reeb: ReebFrame
    model: CoframeModel
    G: np.ndarray
    J: tuple[np.ndarray, np.ndarray, np.ndarray]
    basis_change: np.ndarray

    @property
    def n(self) -> int:
        return self.structure.n

    @property
    def dim(self) -> int:
        return self.model.dim

    @property
    def hdim(self) -> int:
        return 4 * self.n

    def v(self, s: int) -> int:
        return 4 * self.n + s - 1

    @property
    def labels(self) -> tuple[str, ...]:
        return self.model.labels

    @cached_property
    def C(self) -> np.ndarray:
        return self.model.C

    @cached_property
    def Gh(self) -> np.ndarray:
        h = self.hdim
        return self.G[:h, :h]

    @cached_property
    def Ghinv(self) -> np.ndarray:
        """Inverse metric on H, padded by zero on V (trace weights)."""
        out = zeros(self.dim, self.dim)
        h = self.hdim
        out[:h, :h] = inverse(self.Gh)
        return out

    @cached_property
    def Ginv(self) -> np.ndarray:
        return inverse(self.G)

    @cached_property
    def omega(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """omega_s as full antisymmetric matrices, zero on V."""
        return tuple(self.J[s].T @ self.G for s in range(3))

    def omega_form(self, s: int) -> Form:
        return Form.from_matrix(self.omega[s - 1])

    def eta_form(self, s: int) -> Form:
        return Form.basis(self.dim, (self.v(s),))

    def hproj(self) -> np.ndarray:
        out = zeros(self.dim, self.dim)
        for a in range(self.hdim):
            out[a, a] = mpq(1)
        return out


def adapted_frame(st: PqcStructure, reeb: ReebFrame | None = None) -> AdaptedFrame:
    if reeb is None:
        reeb = solve_reeb(st)
    m = st.model
    dim = m.dim
    h = 4 * st.n
    P = zeros(dim, dim)  # columns: new basis vectors in old components
    for new, old in enumerate(st.horizontal):
        P[old, new] = mpq(1)
    for s in (1, 2, 3):
        P[:, h + s - 1] = reeb.xi[s - 1]
    Pinv = inverse(P)
    C = qeinsum("ad,dbc->abc", Pinv, qeinsum("dbc,bi,cj->dij", m.C, P, P))
    labels = tuple(m.labels[a] for a in st.horizontal) + ("xi1", "xi2", "xi3")
    labels = tuple(labels)
    newm = CoframeModel(st.n, labels, C, name=m.name, check=False)
    G = zeros(dim, dim)
    G[:h, :h] = st.g
    for s in (1, 2, 3):
        G[h + s - 1, h + s - 1] = mpq(-EPS[s])
    Js = []
    for s in (1, 2, 3):
        J = zeros(dim, dim)
        J[:h, :h] = st.I[s - 1]
        Js.append(J)
    return AdaptedFrame(st, reeb, newm, G, tuple(Js), P)


def fundamental_forms(st: PqcStructure, reeb: ReebFrame | None = None) -> tuple[Form, Form, Form]:
    """omega_s as 2-forms on the model frame.

    With a Reeb frame the forms vanish on the xi_s; without one they vanish
    on the frame vectors dual to eta_s.  Raises ValueError if g(I_s., .) and
    d eta_s|H / (-2 eps_s) disagree.
    """
    dim = st.model.dim
    hh = list(st.horizontal)
    P = zeros(dim, dim)
    for new, old in enumerate(hh):
        P[old, new] = mpq(1)
    for s in (1, 2, 3):
        if reeb is None:
            P[st.eta[s - 1], 4 * st.n + s - 1] = mpq(1)
        else:
            P[:, 4 * st.n + s - 1] = reeb.xi[s - 1]
    Pinv = inverse(P)
    out = []
    for s in (1, 2, 3):
        via_metric = st.omega_matrix(s)
        via_contact = st.contact_matrix(s) / mpq(-2 * EPS[s])
        w = mismatch(via_metric, via_contact)
        if w:
            raise ValueError(f"omega_{s}: metric and contact routes disagree: {w}")
        adapted = zeros(dim, dim)
        adapted[: 4 * st.n, : 4 * st.n] = via_metric
        out.append(Form.from_matrix(Pinv.T @ adapted @ Pinv))
    return tuple(out)

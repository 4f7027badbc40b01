"""Curvature of the canonical connection, its Ricci-type contractions and the
identities relating them to torsion (first and second Bianchi identities,
Ricci formulas, vertical curvature).

Tensors are dense object arrays indexed in the adapted frame; R[a, b, c, d]
is g(R(e_a, e_b) e_c, e_d).  All traces are signed traces over H.
"""

from __future__ import annotations

from dataclasses import dataclass
from gmpy2 import mpq
from functools import cached_property

import numpy as np

from .algebra import CYCLIC, EPS
from .calculus import Form, exterior_derivative
from .connection import CanonicalConnection
from .exact import qeinsum, is_zero, zeros
from .report import Ledger, mismatch

__all__ = [
    "CurvatureData",
    "FlatInconsistency",
    "FlatVerdict",
    "curvature_tensor",
    "ricci_contractions",
    "covariant_derivative",
    "bianchi_projector",
    "verify_curvature_symmetries",
    "verify_ricci_identities",
    "verify_bianchi",
    "verify_vertical_curvature",
    "check_flat",
]


class FlatInconsistency(ValueError):
    """Horizontal curvature vanishes but an implied vanishing fails."""


def _nonzero_gamma(conn: CanonicalConnection) -> list[tuple[int, int, int, mpq]]:
    G = conn.Gamma
    idx = np.argwhere(G != 0)
    return [(int(a), int(f), int(c), G[a, f, c]) for a, f, c in idx]


def covariant_derivative(conn: CanonicalConnection, S: np.ndarray) -> np.ndarray:
    """nabla S for a covariant tensor with constant frame components.

    out[a, i1, ..., ir] = (nabla_{e_a} S)(e_i1, ..., e_ir)
                        = - sum_k S(..., nabla_{e_a} e_ik, ...).
    """
    S = np.asarray(S, dtype=object)
    dim = conn.frame.dim
    r = S.ndim
    out = zeros(dim, *S.shape)
    nz = _nonzero_gamma(conn)
    for k in range(r):
        Sk = np.moveaxis(S, k, 0)
        live = [not is_zero(Sk[f]) for f in range(dim)]
        for a, f, i, val in nz:
            if not live[f]:
                continue
            view = np.moveaxis(out[a], k, 0)
            view[i] = view[i] - val * Sk[f]
    return out


@dataclass(frozen=True, eq=False)
class CurvatureData:
    """Curvature and its contractions.

    ``rho[s-1]``, ``zeta[s-1]`` and ``varrho[s-1]`` are full dim x dim arrays;
    ``ric`` is the pqc-Ricci tensor on all of TM; ``scal`` is its H-trace.
    """

    conn: CanonicalConnection
    R: np.ndarray
    endo: np.ndarray
    ric: np.ndarray | None = None
    scal: mpq | None = None
    rho: tuple | None = None
    zeta: tuple | None = None
    varrho: tuple | None = None

    @property
    def frame(self):
        return self.conn.frame

    @cached_property
    def is_zero(self) -> bool:
        return is_zero(self.R)

    @cached_property
    def horizontal_zero(self) -> bool:
        h = self.frame.hdim
        return is_zero(self.R[:h, :h, :h, :h])

    def sp_n_part(self, b: int, c: int) -> np.ndarray:
        """R^0(e_b, e_c) on H: R(e_b, e_c)|H + sum eps_s rho_s(e_b, e_c) I_s."""
        h = self.frame.hdim
        out = self.endo[b, c][:h, :h].copy()
        for s in (1, 2, 3):
            out = out + EPS[s] * self.rho[s - 1][b, c] * self.frame.J[s - 1][:h, :h]
        return out

    def to_dict(self) -> dict:
        af = self.frame
        lab = af.labels
        nz = [[lab[a], lab[b], lab[c], lab[d], self.R[a, b, c, d]] for a, b, c, d in np.argwhere(self.R != 0)]
        h = af.hdim
        out = {"R_nonzero": nz}
        if self.ric is not None:
            out["Scal"] = self.scal
            out["Ric_H"] = self.ric[:h, :h]
        return out


def curvature_tensor(conn: CanonicalConnection) -> CurvatureData:
    """R(e_a,e_b)e_c = nabla_a nabla_b e_c - nabla_b nabla_a e_c - nabla_[e_a,e_b] e_c."""
    af = conn.frame
    M = conn.Gamma
    C = af.C
    MM = qeinsum("afg,bgc->abfc", M, M)
    endo = MM - MM.transpose(1, 0, 2, 3) - qeinsum("dab,dfc->abfc", C, M)
    R = qeinsum("abfc,fd->abcd", endo, af.G)
    return CurvatureData(conn, R, endo)


def ricci_contractions(cd: CurvatureData) -> CurvatureData:
    """Ric, Scal, rho_s, zeta_s, varrho_s by signed traces over H."""
    af = cd.frame
    W = af.Ghinv
    R = cd.R
    n = af.n
    q = mpq(1, 4 * n)
    ric = qeinsum("abcd,ad->bc", R, W)
    scal = mpq(qeinsum("ab,ab->", ric, W))
    rho, zeta, varrho = [], [], []
    for s in (1, 2, 3):
        JW = af.J[s - 1] @ W.T  # (I_s e_b) weighted: sum_b W[a,b] J[f,b]
        rho.append(qeinsum("bcaf,fa->bc", R, JW) * q)
        zeta.append(qeinsum("abcf,fa->bc", R, JW) * q)
        varrho.append(qeinsum("afbc,fa->bc", R, JW) * q)
    return CurvatureData(cd.conn, R, cd.endo, ric, scal, tuple(rho), tuple(zeta), tuple(varrho))


def _full(af, mat_h: np.ndarray) -> np.ndarray:
    out = zeros(af.dim, af.dim)
    h = af.hdim
    out[:h, :h] = mat_h
    return out


def _record_eq(led: Ledger, id: str, anchor: str, lhs, rhs, labels, note: str = "") -> None:
    led.record(id, anchor, mismatch(lhs, rhs, labels), note=note)


def verify_curvature_symmetries(cd: CurvatureData) -> Ledger:
    """Antisymmetries, the sp(n)+sp(1) decomposition and the action on I_s and xi_s."""
    af = cd.frame
    h, dim = af.hdim, af.dim
    R = cd.R
    lab = af.labels
    led = Ledger("curvature")
    _record_eq(led, "R-antisym-12", "R(A,B,C,D) = -R(B,A,C,D)", R, -R.transpose(1, 0, 2, 3), lab)
    _record_eq(led, "R-antisym-34", "R(A,B,C,D) = -R(A,B,D,C)", R, -R.transpose(0, 1, 3, 2), lab)
    w = None
    for b in range(dim):
        for c in range(dim):
            E = cd.endo[b, c]
            if not (is_zero(E[:h, h:]) and is_zero(E[h:, :h])):
                w = {"B": lab[b], "C": lab[c]}
                break
        if w:
            break
    led.record("R-splitting", "R(B,C) preserves H and V", w)
    w = None
    for b in range(dim):
        for c in range(dim):
            R0 = cd.sp_n_part(b, c)
            for s in (1, 2, 3):
                I = af.J[s - 1][:h, :h]
                if not is_zero(R0 @ I - I @ R0):
                    w = {"B": lab[b], "C": lab[c], "s": s}
                    break
            if w:
                break
        if w:
            break
    led.record("R-spn-part", "R(B,C)X = R^0(B,C)X - sum eps_s rho_s(B,C) I_s X with [R^0, I_s] = 0", w)
    w = None
    for b in range(dim):
        for c in range(dim):
            E = cd.endo[b, c][:h, :h]
            for i, j, k in CYCLIC:
                Ii, Ij, Ik = (af.J[t - 1][:h, :h] for t in (i, j, k))
                lhs = E @ Ii - Ii @ E
                rhs = 2 * EPS[i] * (cd.rho[j - 1][b, c] * Ik - cd.rho[k - 1][b, c] * Ij)
                ww = mismatch(lhs, rhs)
                if ww:
                    w = dict(ww, B=lab[b], C=lab[c], i=i)
                    break
            if w:
                break
        if w:
            break
    led.record("R-commutator-I", "R(B,C)I_i X - I_i R(B,C)X = 2 eps_i [rho_j(B,C) I_k X - rho_k(B,C) I_j X]", w)
    w = None
    for b in range(dim):
        for c in range(dim):
            E = cd.endo[b, c]
            for i, j, k in CYCLIC:
                lhs = E[:, af.v(i)]
                rhs = zeros(dim)
                rhs[af.v(j)] = -2 * EPS[i] * cd.rho[k - 1][b, c]
                rhs[af.v(k)] = 2 * EPS[i] * cd.rho[j - 1][b, c]
                ww = mismatch(lhs, rhs, lab)
                if ww:
                    w = dict(ww, B=lab[b], C=lab[c], i=i)
                    break
            if w:
                break
        if w:
            break
    led.record("R-on-xi", "R(B,C) xi_i = -2 eps_i rho_k(B,C) xi_j + 2 eps_i rho_j(B,C) xi_k", w)

    # rho_i = 1/2 [eps_k d alpha_i - eps_j alpha_j ^ alpha_k]
    conn = cd.conn
    alpha = [Form.from_covector(conn.alpha[s]) for s in range(3)]
    w = None
    for i, j, k in CYCLIC:
        da = exterior_derivative(alpha[i - 1], af.model)
        rhs = (da * EPS[k] - (alpha[j - 1] ^ alpha[k - 1]) * EPS[j]) * mpq(1, 2)
        ww = mismatch(cd.rho[i - 1], rhs.matrix(), lab)
        if ww and w is None:
            w = dict(ww, i=i)
    led.record("rho-from-alpha", "rho_i = 1/2 [eps_k d alpha_i - eps_j alpha_j ^ alpha_k]", w)

    # Ricci 2-forms on H from Lie derivatives of omega_j along xi_k
    w = None
    for i, j, k in CYCLIC:
        ad = af.C[:, af.v(k), :]  # [xi_k, e_b] = sum_f ad[f, b] e_f
        om = af.omega[j - 1]
        lie = -(ad.T @ om + om @ ad)
        deta_jkj = -af.C[af.v(j), af.v(k), af.v(j)]
        deta_jki = -af.C[af.v(j), af.v(k), af.v(i)]
        rhs = EPS[i] * lie - EPS[i] * deta_jkj * af.omega[j - 1] - EPS[j] * deta_jki * af.omega[i - 1]
        ww = mismatch(cd.rho[i - 1][:h, :h], rhs[:h, :h], lab)
        if ww and w is None:
            w = dict(ww, i=i)
    led.record(
        "rho-horizontal-lie",
        "rho_i(X,Y) = eps_i (L_{xi_k} omega_j)(X,Y) - eps_i d eta_j(xi_k,xi_j) omega_j(X,Y) - eps_j d eta_j(xi_k,xi_i) omega_i(X,Y)",
        w,
    )
    return led


def verify_ricci_identities(cd: CurvatureData) -> Ledger:
    """Ricci formulas in terms of Scal, tau and mu, plus the vertical torsion relations."""
    af = cd.frame
    conn = cd.conn
    n, h = af.n, af.hdim
    lab = af.labels
    led = Ledger("ricci")
    g = af.Gh
    tau = conn.torsion.tau
    mu = conn.torsion.mu
    scal = cd.scal
    N = 8 * n * (n + 2)
    Hs = slice(0, h)
    I = [af.J[s][:h, :h] for s in range(3)]
    ric = cd.ric[Hs, Hs]
    TL = conn.torsion.lowered
    T = conn.torsion.full
    note = "mu vanishes in dimension seven" if n == 1 else ""

    _record_eq(led, "ric-symmetric", "Ric(X,Y) = Ric(Y,X)", ric, ric.T, lab)
    w = None
    for s in (1, 2, 3):
        Z = cd.zeta[s - 1][Hs, Hs] @ I[s - 1]
        w = w or mismatch(Z, Z.T, lab)
    led.record("zeta-symmetric", "zeta_s(X, I_s Y) symmetric", w)
    w = None
    for s in (1, 2, 3):
        for name, B in (("rho", cd.rho[s - 1][Hs, Hs]), ("varrho", cd.varrho[s - 1][Hs, Hs])):
            ww = mismatch(B @ I[s - 1], -(I[s - 1].T @ B), lab)
            if ww and w is None:
                w = dict(ww, tensor=name, s=s)
    led.record("rho-type", "rho_s(X,I_sY) = -rho_s(I_sX,Y) and the same for varrho_s", w)

    rhs = mpq(scal, 4 * n) * g + (2 * n + 2) * tau + (4 * n + 10) * mu
    _record_eq(led, "ricci", "Ric(X,Y) = Scal/(4n) g + (2n+2) tau + (4n+10) mu", ric, rhs, lab, note)
    w = None
    for s in (1, 2, 3):
        J = I[s - 1]
        e = EPS[s]
        lhs = cd.rho[s - 1][Hs, Hs] @ J
        rhs = mpq(e * scal, N) * g + (e * tau - J.T @ tau @ J) * mpq(1, 2) + 2 * e * mu
        w = w or mismatch(lhs, rhs, lab)
    led.record("rho-formula", "rho_s(X,I_sY) = eps_s Scal/(8n(n+2)) g + 1/2 [eps_s tau - tau(I_s.,I_s.)] + 2 eps_s mu", w, note)
    w = None
    for s in (1, 2, 3):
        J = I[s - 1]
        e = EPS[s]
        lhs = cd.varrho[s - 1][Hs, Hs] @ J
        rhs = mpq(e * scal, N) * g + mpq(n + 2, 2 * n) * (e * tau - J.T @ tau @ J)
        w = w or mismatch(lhs, rhs, lab)
    led.record("varrho-formula", "varrho_s(X,I_sY) = eps_s Scal/(8n(n+2)) g + (n+2)/(2n) [eps_s tau - tau(I_s.,I_s.)]", w)
    w = None
    for s in (1, 2, 3):
        J = I[s - 1]
        e = EPS[s]
        lhs = -e * (cd.zeta[s - 1][Hs, Hs] @ J)
        rhs = (
            mpq(scal, 2 * N) * g
            + mpq(2 * n + 1, 4 * n) * tau
            - mpq(e, 4 * n) * (J.T @ tau @ J)
            + mpq(2 * n + 1, 2 * n) * mu
        )
        w = w or mismatch(lhs, rhs, lab)
    led.record(
        "zeta-formula",
        "-eps_s zeta_s(X,I_sY) = Scal/(16n(n+2)) g + (2n+1)/(4n) tau - eps_s/(4n) tau(I_s.,I_s.) + (2n+1)/(2n) mu",
        w,
        note,
    )
    v1, v2, v3 = af.v(1), af.v(2), af.v(3)
    w = None
    if scal != -N * TL[v1, v2, v3] or scal != N * conn.lam:
        w = {"Scal": scal, "-8n(n+2) g(T(xi1,xi2),xi3)": -N * TL[v1, v2, v3], "8n(n+2) lambda": N * conn.lam}
    led.record("scal-lambda", "Scal = -8n(n+2) g(T(xi_1,xi_2),xi_3) = 8n(n+2) lambda", w)
    w = None
    for i, j, k in CYCLIC:
        rhs = zeros(af.dim)
        rhs[af.v(k)] = mpq(EPS[k] * scal, N)
        rhs[:h] = -af.C[:h, af.v(i), af.v(j)]
        ww = mismatch(T[af.v(i), af.v(j)], rhs, lab)
        if ww and w is None:
            w = dict(ww, ijk=[i, j, k])
    led.record("torsion-xi-xi", "T(xi_i,xi_j) = eps_k Scal/(8n(n+2)) xi_k - [xi_i,xi_j]_H", w)
    w = None
    for i, j, k in CYCLIC:
        vi, vj = af.v(i), af.v(j)
        Ik, Ij, Ii = (af.J[t - 1] for t in (k, j, i))
        br = af.C[:, vi, vj]
        for x in range(h):
            a1 = np.dot(TL[vi, vj, :], Ik[:, x])
            a2 = np.dot(Ij[:, x], cd.rho[k - 1][:, vi])
            a3 = -np.dot(Ii[:, x], cd.rho[k - 1][:, vj])
            a4 = br @ af.omega[k - 1][:, x]
            if not (a1 == a2 == a3 == a4) and w is None:
                w = {"ijk": [i, j, k], "X": lab[x], "values": [a1, a2, a3, a4]}
    led.record("torsion-xi-xi-IX", "T(xi_i,xi_j,I_kX) = rho_k(I_jX,xi_i) = -rho_k(I_iX,xi_j) = omega_k([xi_i,xi_j],X)", w)
    w = None
    rho = cd.rho
    for i, j, k in CYCLIC:
        vi, vj, vk = af.v(i), af.v(j), af.v(k)
        Ii, Ij, Ik = (af.J[t - 1] for t in (i, j, k))
        for x in range(h):
            lhs = -EPS[i] * rho[i - 1][x, vi]
            rhs = (-(rho[i - 1][vj, :] @ Ik[:, x]) + rho[j - 1][vk, :] @ Ii[:, x] + rho[k - 1][vi, :] @ Ij[:, x]) * mpq(1, 2)
            # X(Scal) vanishes on constant models
            if lhs != rhs and w is None:
                w = {"ijk": [i, j, k], "X": lab[x], "lhs": lhs, "rhs": rhs}
    led.record(
        "rho-xi-X",
        "-eps_i rho_i(X,xi_i) = -X(Scal)/(32n(n+2)) + 1/2 (-rho_i(xi_j,I_kX) + rho_j(xi_k,I_iX) + rho_k(xi_i,I_jX))",
        w,
    )
    w = None
    for i, j, k in CYCLIC:
        vi, vj, vk = af.v(i), af.v(j), af.v(k)
        lhs = -EPS[i] * rho[i - 1][vi, vj] - EPS[k] * rho[k - 1][vk, vj]
        if lhs != 0 and w is None:
            w = {"ijk": [i, j, k], "lhs": lhs}
    led.record("rho-xi-xi", "-eps_i rho_i(xi_i,xi_j) - eps_k rho_k(xi_k,xi_j) = xi_j(Scal)/(16n(n+2))", w)

    # Scal from the structure and from the traces of the Ricci forms
    from .connection import lie_I, signed_trace

    w = None
    for i, j, k in CYCLIC:
        L = lie_I(af, j, i)
        B = (L @ I[k - 1]).T @ g
        d = lambda s, a, b: -af.C[af.v(s), af.v(a), af.v(b)]
        val = N * (
            -mpq(1, 2 * n) * signed_trace(B, af)
            - EPS[j] * d(j, k, i)
            + EPS[k] * d(k, i, j)
            + EPS[i] * d(i, j, k)
        )
        if val != scal and w is None:
            w = {"ijk": [i, j, k], "structure": val, "Scal": scal}
    led.record("scal-structure", "Scal from Lie derivatives of I_s and d eta_s on the Reeb fields", w)
    w = None
    for s in (1, 2, 3):
        J = I[s - 1]
        tr_rho = signed_trace(J.T @ cd.rho[s - 1][Hs, Hs], af)
        tr_varrho = signed_trace(J.T @ cd.varrho[s - 1][Hs, Hs], af)
        tr_zeta = signed_trace(J.T @ cd.zeta[s - 1][Hs, Hs], af)
        vals = [2 * (n + 2) * tr_rho, 2 * (n + 2) * tr_varrho, -4 * (n + 2) * tr_zeta]
        if any(v != scal for v in vals) and w is None:
            w = {"s": s, "Scal": scal, "values": vals}
    led.record("scal-traces", "Scal = 2(n+2) rho_s(I_se_a,e_a) = 2(n+2) varrho_s(I_se_a,e_a) = -4(n+2) zeta_s(I_se_a,e_a)", w)

    # tau and mu from the Ricci tensor
    ric_I = [J.T @ ric @ J for J in I]
    ric3 = (ric - ric_I[0] - ric_I[1] + ric_I[2]) * mpq(1, 4)
    ric_m1 = ric - ric3
    ric30 = ric3 - mpq(signed_trace(ric3, af), 4 * n) * g
    _record_eq(led, "tau-from-ricci", "tau = Ric_[-1] / (2n+2)", tau, ric_m1 * mpq(1, 2 * n + 2), lab)
    _record_eq(led, "mu-from-ricci", "mu = Ric_[3][0] / (4n+10)", mu, ric30 * mpq(1, 4 * n + 10), lab, note)
    return led


def bianchi_projector(conn: CanonicalConnection) -> np.ndarray:
    """b(A,B,C,D) = g(cyclic sum of (nabla_A T)(B,C) + T(T(A,B),C), D)."""
    TL = conn.torsion.lowered
    T = conn.torsion.full
    DT = covariant_derivative(conn, TL)  # (nabla_A T)(B,C,D); g is parallel
    TT = qeinsum("abf,fcd->abcd", T, TL)
    term = DT + TT
    return term + term.transpose(1, 2, 0, 3) + term.transpose(2, 0, 1, 3)


def verify_bianchi(cd: CurvatureData, b: np.ndarray | None = None) -> Ledger:
    """First Bianchi identity, its pair-exchange consequence, the horizontal
    Bianchi projector, the (1,1) traces and the raw second Bianchi identity."""
    conn = cd.conn
    af = conn.frame
    lab = af.labels
    h = af.hdim
    led = Ledger("bianchi")
    if b is None:
        b = bianchi_projector(conn)
    R = cd.R
    cyc = R + R.transpose(1, 2, 0, 3) + R.transpose(2, 0, 1, 3)
    _record_eq(led, "bianchi-first", "sum_cyc(A,B,C) R(A,B,C,D) = b(A,B,C,D)", cyc, b, lab)
    lhs = 2 * R - 2 * R.transpose(2, 3, 0, 1)
    rhs = b + b.transpose(3, 0, 1, 2) - b.transpose(0, 3, 1, 2) - b.transpose(0, 1, 3, 2)
    _record_eq(led, "bianchi-pair", "2R(A,B,C,D) - 2R(C,D,A,B) = b(A,B,C,D) + b(B,C,D,A) - b(A,C,D,B) - b(A,B,D,C)", lhs, rhs, lab)

    tau, mu = conn.torsion.tau, conn.torsion.mu
    Hs = slice(0, h)
    P = zeros(h, h, h, h)  # P[x,y,z,v] = sum_s eps_s omega_s(x,y) [mu(I_s z, v) - 1/4(tau(I_s z,v) + tau(z,I_s v))]
    for s in (1, 2, 3):
        J = af.J[s - 1][Hs, Hs]
        om = af.omega[s - 1][Hs, Hs]
        K = J.T @ mu - (J.T @ tau + tau @ J) * mpq(1, 4)
        P = P + EPS[s] * qeinsum("xy,zv->xyzv", om, K)
    rhs = -2 * (P + P.transpose(1, 2, 0, 3) + P.transpose(2, 0, 1, 3))
    _record_eq(led, "bianchi-horizontal", "b(X,Y,Z,V) = -2 sum_cyc sum_s eps_s omega_s(X,Y) T(xi_s,Z,V)", b[Hs, Hs, Hs, Hs], rhs, lab)

    # traces of the first Bianchi identity
    W = af.Ghinv
    n = af.n
    w = None
    for s in (1, 2, 3):
        JW = af.J[s - 1] @ W.T
        b_aI = qeinsum("afxy,fa->xy", b, JW)  # b(e_a, I_s e_a, X, Y)
        b_XI = qeinsum("axyf,fa->xy", b, JW)  # b(e_a, X, Y, I_s e_a)
        rho, zeta, varrho = cd.rho[s - 1], cd.zeta[s - 1], cd.varrho[s - 1]
        checks = [
            (4 * n * varrho + 8 * n * zeta, b_aI, "4n varrho_s + 8n zeta_s = b(e_a,I_se_a,.,.)"),
            (8 * n * varrho - 8 * n * rho, b_aI - b_aI.T - 2 * b_XI, "8n varrho_s - 8n rho_s = b(e_a,I_se_a,X,Y) - b(e_a,I_se_a,Y,X) - 2b(e_a,X,Y,I_se_a)"),
        ]
        for lhs_, rhs_, what in checks:
            ww = mismatch(lhs_[Hs, Hs], rhs_[Hs, Hs], lab)
            if ww and w is None:
                w = dict(ww, s=s, relation=what)
    led.record("bianchi-traces", "trace identities of the first Bianchi identity", w)

    # raw second Bianchi identity
    DR = covariant_derivative(conn, R)
    T = conn.torsion.full
    RT = qeinsum("abf,fcde->abcde", T, R)
    term = DR + RT
    total = term + term.transpose(1, 2, 0, 3, 4) + term.transpose(2, 0, 1, 3, 4)
    w = mismatch(total, zeros(*total.shape), lab)
    led.record("bianchi-second", "sum_cyc(A,B,C) (nabla_A R)(B,C,D,E) + R(T(A,B),C,D,E) = 0", w)
    return led


def verify_vertical_curvature(cd: CurvatureData) -> Ledger:
    """Vertical curvature in terms of nabla tau, nabla mu and the Ricci 2-forms;
    contracted second Bianchi identity.  X(Scal) = 0 on constant models, but the
    derivative terms are carried through the formulas."""
    conn = cd.conn
    af = conn.frame
    n, h, dim = af.n, af.hdim, af.dim
    lab = af.labels
    led = Ledger("vertical-curvature")
    R = cd.R
    W = af.Ghinv
    N = 8 * n * (n + 2)
    scal = cd.scal
    dscal = zeros(dim)  # frame derivatives of a constant function
    tau = _full(af, conn.torsion.tau)
    mu = _full(af, conn.torsion.mu)
    Dtau = covariant_derivative(conn, tau)  # Dtau[a, x, y] = (nabla_a tau)(x, y)
    Dmu = covariant_derivative(conn, mu)
    Drho = [covariant_derivative(conn, r) for r in cd.rho]
    J = af.J
    om = af.omega
    rho = cd.rho
    TL = conn.torsion.lowered

    # vert1
    w = None
    for i, j, k in CYCLIC:
        Ii = J[i - 1]
        vi = af.v(i)
        # tensors with I_i inserted
        Dmu_I = qeinsum("afy,fx->axy", Dmu, Ii)  # (nabla_a mu)(I_i x, y)
        Dtau_I1 = qeinsum("afy,fx->axy", Dtau, Ii)  # (nabla_a tau)(I_i x, y)
        Dtau_I2 = qeinsum("axf,fy->axy", Dtau, Ii)  # (nabla_a tau)(x, I_i y)
        rk = Ii.T @ rho[k - 1][:, vi]  # rho_k(I_i Z, xi_i) as covector in Z
        rj = Ii.T @ rho[j - 1][:, vi]
        for x in range(h):
            for y in range(h):
                for z in range(h):
                    rhs = (
                        -Dmu_I[x, y, z]
                        - (Dtau_I1[y, z, x] + Dtau_I2[y, z, x]) * mpq(1, 4)
                        + (Dtau_I1[z, y, x] + Dtau_I2[z, y, x]) * mpq(1, 4)
                        + om[j - 1][x, y] * rk[z] - om[k - 1][x, y] * rj[z]
                        - om[j - 1][x, z] * rk[y] + om[k - 1][x, z] * rj[y]
                        - om[j - 1][y, z] * rk[x] + om[k - 1][y, z] * rj[x]
                    )
                    if R[vi, x, y, z] != rhs and w is None:
                        w = {"i": i, "X": lab[x], "Y": lab[y], "Z": lab[z], "lhs": R[vi, x, y, z], "rhs": rhs}
    led.record("R-xi-horizontal", "R(xi_i,X,Y,Z) in terms of nabla mu, nabla tau and rho_s(., xi_i)", w)

    # vert2
    w = None
    for i, j, k in CYCLIC:
        vi, vj, vk = af.v(i), af.v(j), af.v(k)
        Ii, Ij = J[i - 1], J[j - 1]
        Dmu_Ij = qeinsum("afy,fx->axy", Dmu, Ij)
        Dmu_Ii = qeinsum("afy,fx->axy", Dmu, Ii)
        Dtau_Ij = qeinsum("afy,fx->axy", Dtau, Ij) + qeinsum("axf,fy->axy", Dtau, Ij)
        Dtau_Ii = qeinsum("afy,fx->axy", Dtau, Ii) + qeinsum("axf,fy->axy", Dtau, Ii)
        Drk = qeinsum("afc,fy->ayc", Drho[k - 1], Ii)[:, :, vi]  # (nabla_a rho_k)(I_i y, xi_i)
        Ti, Tj = TL[vi], TL[vj]
        quad = Tj @ W @ Ti  # sum g^{ab} T(xi_j,X,e_a) T(xi_i,e_b,Y)
        quad2 = Ti @ W @ Tj  # sum g^{ab} T(xi_j,e_a,Y) T(xi_i,X,e_b)
        for x in range(h):
            for y in range(h):
                rhs = (
                    Dmu_Ij[vi, x, y] - Dmu_Ii[vj, x, y]
                    + EPS[j] * Drk[x, y]
                    - Dtau_Ij[vi, x, y] * mpq(1, 4)
                    + Dtau_Ii[vj, x, y] * mpq(1, 4)
                    + mpq(EPS[k] * scal, N) * TL[vk, x, y]
                    - quad[x, y]
                    + quad2[x, y]
                )
                if R[vi, vj, x, y] != rhs and w is None:
                    w = {"ij": [i, j], "X": lab[x], "Y": lab[y], "lhs": R[vi, vj, x, y], "rhs": rhs}
    led.record("R-xi-xi-horizontal", "R(xi_i,xi_j,X,Y) in terms of nabla mu, nabla tau, nabla rho_k and torsion", w)

    # traces of nabla tau and nabla mu
    div_tau = qeinsum("abx,ab->x", Dtau, W)  # (nabla_{e_a} tau)(e_a, X)
    div_mu = qeinsum("abx,ab->x", Dmu, W)  # (nabla_{e_a} mu)(e_a, X)
    div_mu_r = qeinsum("axb,ab->x", Dmu, W)  # (nabla_{e_a} mu)(X, e_a)
    w3 = None
    w4 = None
    for i, j, k in CYCLIC:
        Ii = J[i - 1]
        # (nabla_{e_a} tau)(I_i e_a, I_i X)
        tII = qeinsum("afg,fb,ab,gx->x", Dtau, Ii, W, Ii)
        vi, vj, vk = af.v(i), af.v(j), af.v(k)
        for x in range(h):
            lhs3 = 3 * (2 * n + 1) * rho[i - 1][vi, x]
            rhs3 = (
                -mpq(EPS[i], 4) * div_tau[x]
                - mpq(3, 4) * tII[x]
                + EPS[i] * div_mu_r[x]
                - mpq(EPS[i] * (2 * n + 1), 2 * N) * dscal[x]
            )
            if lhs3 != rhs3 and w3 is None:
                w3 = {"i": i, "X": lab[x], "lhs": lhs3, "rhs": rhs3}
            a = 3 * (2 * n + 1) * (J[k - 1][:, x] @ rho[i - 1][:, vj])
            b_ = -3 * (2 * n + 1) * (J[j - 1][:, x] @ rho[i - 1][:, vk])
            c = (
                -mpq((2 * n + 1) * (2 * n - 1), 2 * N) * dscal[x]
                + 2 * (n + 1) * div_mu_r[x]
                + mpq(4 * n + 1, 4) * div_tau[x]
                - mpq(3 * EPS[i], 4) * tII[x]
            )
            if not (a == b_ == c) and w4 is None:
                w4 = {"i": i, "X": lab[x], "values": [a, b_, c]}
    led.record("rho-xi-i", "3(2n+1) rho_i(xi_i,X) in terms of traces of nabla tau, nabla mu and X(Scal)", w3)
    led.record("rho-xi-j", "3(2n+1) rho_i(I_kX,xi_j) = -3(2n+1) rho_i(I_jX,xi_k) in terms of traces of nabla tau, nabla mu", w4)
    w = None
    for x in range(h):
        val = (n - 1) * div_tau[x] + 2 * (n + 2) * div_mu[x] - mpq((n - 1) * (2 * n + 1), N) * dscal[x]
        if val != 0 and w is None:
            w = {"X": lab[x], "value": val}
    led.record("bianchi-contracted", "(n-1)(nabla_{e_a} tau)(e_a,X) + 2(n+2)(nabla_{e_a} mu)(e_a,X) - (n-1)(2n+1)/(8n(n+2)) dScal(X) = 0", w)
    return led


@dataclass(frozen=True)
class FlatVerdict:
    flat: bool
    label: str
    details: dict


def check_flat(cd: CurvatureData) -> FlatVerdict:
    """Vanishing horizontal curvature forces the full flat picture.

    Raises FlatInconsistency if R|H = 0 while an implied vanishing fails.
    """
    if cd.ric is None:
        cd = ricci_contractions(cd)
    if not cd.horizontal_zero:
        return FlatVerdict(False, "not flat", {})
    conn = cd.conn
    af = conn.frame
    problems = []
    if not cd.is_zero:
        problems.append("R does not vanish on all arguments")
    if not conn.torsion.endomorphism_zero:
        problems.append("torsion endomorphism T(xi_s, .) does not vanish")
    for s in (1, 2, 3):
        for t in (1, 2, 3):
            if not is_zero(conn.torsion.full[af.v(s), af.v(t)]):
                problems.append(f"T(xi_{s}, xi_{t}) does not vanish")
    if cd.scal != 0:
        problems.append("Scal does not vanish")
    if problems:
        raise FlatInconsistency("; ".join(problems))
    return FlatVerdict(True, "locally isomorphic to the paraquaternionic Heisenberg group", {"Scal": cd.scal})

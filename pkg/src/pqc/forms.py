"""The fundamental 4-form, the local structure equations of a pqc structure,
and the recovery of tau and mu from d Omega.

Forms live on the adapted frame (horizontal frame, xi_1, xi_2, xi_3) with the
determinant wedge convention of the calculus module.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np
from gmpy2 import mpq

from .algebra import CYCLIC, EPS
from .calculus import Form, exterior_derivative
from .connection import CanonicalConnection, build_connection
from .curvature import CurvatureData
from .exact import inverse, qarray, qeinsum, zeros
from .report import Ledger, mismatch
from .structure import AdaptedFrame, PqcStructure

__all__ = [
    "RejectedForN1",
    "FourFormData",
    "TorsionRecovery",
    "four_form",
    "four_form_value",
    "trace_free_ricci_forms",
    "fundamental_four_form",
    "form_tensor",
    "pullback",
    "model_frame_form",
    "strom_rhs",
    "verify_structure_equations",
    "recover_torsion_from_dOmega",
    "verify_four_form",
]

OMEGA_SIGNS = {1: -1, 2: -1, 3: 1}


class RejectedForN1(ValueError):
    """The recovery of tau and mu from d Omega needs n >= 2."""


def four_form(af: AdaptedFrame) -> Form:
    """Omega = -omega_1^omega_1 - omega_2^omega_2 + omega_3^omega_3."""
    out = Form.zero(af.dim, 4)
    for s in (1, 2, 3):
        om = af.omega_form(s)
        out = out + (om ^ om) * OMEGA_SIGNS[s]
    return out


def four_form_value(af: AdaptedFrame, X, Y, Z, V) -> mpq:
    """Omega(X,Y,Z,V) from the components of the omega_s, without wedging.

    (w ^ w)(X,Y,Z,V) = 2 [w(X,Y) w(Z,V) - w(X,Z) w(Y,V) + w(X,V) w(Y,Z)].
    """
    X, Y, Z, V = (qarray(v) for v in (X, Y, Z, V))
    total = mpq(0)
    for s in (1, 2, 3):
        om = af.omega[s - 1]

        def w(a, b):
            return a @ om @ b

        total += OMEGA_SIGNS[s] * 2 * (w(X, Y) * w(Z, V) - w(X, Z) * w(Y, V) + w(X, V) * w(Y, Z))
    return mpq(total)


def trace_free_ricci_forms(tau, mu, Is) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """rho0_s(X,Y) = 1/2 [tau(X, I_s Y) - tau(I_s X, Y)] + 2 mu(X, I_s Y) on H."""
    tau, mu = qarray(tau), qarray(mu)
    out = []
    for s in (1, 2, 3):
        I = qarray(Is[s - 1])
        out.append((tau @ I - I.T @ tau) * mpq(1, 2) + 2 * (mu @ I))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class FourFormData:
    """Omega, d Omega and the trace-free Ricci 2-forms (h x h matrices)."""

    frame: AdaptedFrame
    Omega: Form
    dOmega: Form
    rho0: tuple


def fundamental_four_form(obj) -> FourFormData:
    """Assemble Omega and d Omega; rho0 comes from the torsion of the canonical connection."""
    if isinstance(obj, PqcStructure):
        obj = build_connection(obj)
    if isinstance(obj, CurvatureData):
        obj = obj.conn
    if not isinstance(obj, CanonicalConnection):
        raise TypeError("expected a structure, a connection or curvature data")
    af = obj.frame
    h = af.hdim
    Om = four_form(af)
    dOm = exterior_derivative(Om, af.model)
    Is = [af.J[s - 1][:h, :h] for s in (1, 2, 3)]
    rho0 = trace_free_ricci_forms(obj.torsion.tau, obj.torsion.mu, Is)
    return FourFormData(af, Om, dOm, rho0)


def form_tensor(form: Form) -> np.ndarray:
    """Dense antisymmetric array of a form's values on frame vectors."""
    k = form.degree
    out = zeros(*([form.dim] * k))
    perms = []
    for p in permutations(range(k)):
        inv = sum(1 for a in range(k) for b in range(a + 1, k) if p[a] > p[b])
        perms.append((p, -1 if inv % 2 else 1))
    for key, val in form.comps.items():
        for p, sign in perms:
            out[tuple(key[i] for i in p)] = sign * val
    return out


def pullback(form: Form, M) -> Form:
    """(M^* form)(e_a, ...) = form(M e_a, ...), M given by its columns."""
    M = qarray(M)
    k = form.degree
    T = form_tensor(form)
    letters = "abcdefgh"[:k]
    ops = [T] + [M] * k
    subs = "".join(letters) + "," + ",".join(f"{c}{c.upper()}" for c in letters) + "->" + "".join(c.upper() for c in letters)
    dense = qeinsum(subs, *ops) if k else T
    comps = {}
    for key in combinations(range(M.shape[1]), k):
        v = dense[key]
        if v != 0:
            comps[key] = v
    return Form(M.shape[1], k, comps)


def model_frame_form(form: Form, af: AdaptedFrame) -> Form:
    """An adapted-frame form rewritten on the model's own frame."""
    return pullback(form, inverse(af.basis_change))


def _eta(af: AdaptedFrame, s: int) -> Form:
    return af.eta_form(s)


def strom_rhs(af: AdaptedFrame, rho0, dlam: Form | None = None) -> Form:
    """sum_cyc -eps_i [2 eta_i ^ (rho0_k ^ omega_j - rho0_j ^ omega_k) + d lambda ^ omega_i ^ eta_j ^ eta_k]."""
    h, dim = af.hdim, af.dim
    r0 = []
    for s in (1, 2, 3):
        full = zeros(dim, dim)
        full[:h, :h] = rho0[s - 1]
        r0.append(Form.from_matrix(full))
    out = Form.zero(dim, 5)
    for i, j, k in CYCLIC:
        om_i, om_j, om_k = (af.omega_form(t) for t in (i, j, k))
        term = (_eta(af, i) ^ ((r0[k - 1] ^ om_j) - (r0[j - 1] ^ om_k))) * 2
        if dlam is not None:
            term = term + (dlam ^ om_i ^ _eta(af, j) ^ _eta(af, k))
        out = out - term * EPS[i]
    return out


def verify_structure_equations(cd: CurvatureData, data: FourFormData | None = None) -> Ledger:
    """d eta_i, d omega_i and d Omega against their expressions in alpha, lambda and the Ricci 2-forms.

    The models have constant lambda, so d lambda = 0 throughout.
    """
    conn = cd.conn
    af = conn.frame
    m = af.model
    h, dim = af.hdim, af.dim
    lab = af.labels
    lam = conn.lam
    if data is None:
        data = fundamental_four_form(conn)
    led = Ledger("structure-equations")
    alpha = [Form.from_covector(conn.alpha[s]) for s in range(3)]
    eta = [_eta(af, s) for s in (1, 2, 3)]
    om = [af.omega_form(s) for s in (1, 2, 3)]
    rho = [Form.from_matrix(cd.rho[s]) for s in range(3)]

    w = None
    for i, j, k in CYCLIC:
        lhs = exterior_derivative(eta[i - 1], m)
        rhs = (
            om[i - 1] * (-2 * EPS[i])
            + (eta[j - 1] ^ alpha[k - 1])
            + (eta[k - 1] ^ alpha[j - 1]) * EPS[j]
            + (eta[j - 1] ^ eta[k - 1]) * (EPS[i] * lam)
        )
        ww = mismatch(lhs.matrix(), rhs.matrix(), lab)
        if ww and w is None:
            w = dict(ww, i=i)
    led.record("streq", "d eta_i = -2 eps_i omega_i + eta_j ^ alpha_k + eps_j eta_k ^ alpha_j + eps_i lambda eta_j ^ eta_k", w)

    w = None
    for i, j, k in CYCLIC:
        lhs = exterior_derivative(om[i - 1], m) * EPS[i]
        rhs = (
            (om[j - 1] ^ (alpha[k - 1] * (-EPS[j]) + eta[k - 1] * (EPS[k] * lam)))
            + (om[k - 1] ^ (alpha[j - 1] * EPS[i] - eta[j - 1] * (EPS[j] * lam)))
            - (rho[k - 1] ^ eta[j - 1]) * EPS[j]
            + (rho[j - 1] ^ eta[k - 1]) * EPS[k]
        )
        if lhs != rhs and w is None:
            w = {"i": i, "residue": _residue(lhs - rhs, lab)}
    led.record(
        "str2",
        "eps_i d omega_i = omega_j ^ [-eps_j alpha_k + eps_k lambda eta_k] + omega_k ^ [eps_i alpha_j - eps_j lambda eta_j] - eps_j rho_k ^ eta_j + eps_k rho_j ^ eta_k + 1/2 eps_i d lambda ^ eta_j ^ eta_k",
        w,
    )

    # rho_s on H splits as rho0_s - lambda omega_s
    w = None
    for s in (1, 2, 3):
        ww = mismatch(cd.rho[s - 1][:h, :h], data.rho0[s - 1] - lam * af.omega[s - 1][:h, :h], lab)
        if ww and w is None:
            w = dict(ww, s=s)
    led.record("rho0-split", "rho_s(X,Y) = rho0_s(X,Y) - lambda omega_s(X,Y)", w)

    dfour = Form.zero(dim, 5)
    for i, j, k in CYCLIC:
        dfour = dfour - (eta[i - 1] ^ ((rho[k - 1] ^ om[j - 1]) - (rho[j - 1] ^ om[k - 1]))) * (2 * EPS[i])
    w = None if data.dOmega == dfour else {"residue": _residue(data.dOmega - dfour, lab)}
    led.record("dfour", "d Omega = sum_cyc -eps_i [2 eta_i ^ (rho_k ^ omega_j - rho_j ^ omega_k) + d lambda ^ omega_i ^ eta_j ^ eta_k]", w)

    rhs = strom_rhs(af, data.rho0)
    w = None if data.dOmega == rhs else {"residue": _residue(data.dOmega - rhs, lab)}
    led.record("strom", "d Omega = sum_cyc -eps_i [2 eta_i ^ (rho0_k ^ omega_j - rho0_j ^ omega_k) + d lambda ^ omega_i ^ eta_j ^ eta_k]", w)
    return led


def _residue(form: Form, labels) -> list:
    """A few nonzero components of a form, for witnesses."""
    out = []
    for key, val in sorted(form.comps.items())[:4]:
        out.append({"at": [labels[i] for i in key], "value": val})
    return out


@dataclass(frozen=True, eq=False)
class TorsionRecovery:
    tau: np.ndarray
    mu: np.ndarray
    mu_by_cycle: tuple


def recover_torsion_from_dOmega(af: AdaptedFrame, dOmega: Form) -> TorsionRecovery:
    """tau and mu from the traces d Omega(xi_i, X, I_k Y, e_a, I_j e_a).

    mu = -1/(32n) [D_i(X, I_k Y) - eps_k D_i(I_i X, I_j Y)] for each cyclic (i,j,k),
    tau = 1/(16(1-n)) sum_cyc [D_i(X, I_k Y) + eps_k D_i(I_i X, I_j Y)].
    Raises RejectedForN1 when n = 1.
    """
    n = af.n
    if n < 2:
        raise RejectedForN1("tau and mu are not determined by d Omega when n = 1")
    h = af.hdim
    D = form_tensor(dOmega)
    W = af.Ghinv
    Hs = slice(0, h)
    Js = [af.J[s - 1] for s in (1, 2, 3)]
    mus = []
    tau = zeros(h, h)
    for i, j, k in CYCLIC:
        vi = af.v(i)
        JW = Js[j - 1] @ W.T
        # E[x, y] = sum W[a,b] dOmega(xi_i, e_x, e_y, e_a, I_j e_b)
        E = qeinsum("xyaf,fa->xy", D[vi], JW)
        first = (E @ Js[k - 1])[Hs, Hs]  # D_i(X, I_k Y)
        second = (Js[i - 1].T @ E @ Js[j - 1])[Hs, Hs]  # D_i(I_i X, I_j Y)
        mus.append((first - EPS[k] * second) * mpq(-1, 32 * n))
        tau = tau + first + EPS[k] * second
    tau = tau * mpq(1, 16 * (1 - n))
    return TorsionRecovery(tau, mus[0], tuple(mus))


def verify_four_form(conn: CanonicalConnection, data: FourFormData | None = None) -> Ledger:
    """Omega's two definitions, closedness for pqc-Einstein models and the torsion recovery."""
    af = conn.frame
    lab = af.labels
    if data is None:
        data = fundamental_four_form(conn)
    led = Ledger("forms")
    w = None
    for x in range(af.hdim):
        X = af.model.basis_vector(x)
        vecs = [X] + [af.J[s - 1] @ X for s in (1, 2, 3)]
        lhs = data.Omega.evaluate(*vecs)
        rhs = four_form_value(af, *vecs)
        if lhs != rhs and w is None:
            w = {"X": lab[x], "wedge": lhs, "components": rhs}
    led.record("omega-definition", "Omega(X, I_1X, I_2X, I_3X) from the wedge and from the components: Omega = -omega_1^omega_1 - omega_2^omega_2 + omega_3^omega_3", w)

    w = None
    for a in range(af.hdim, af.dim):
        if not data.Omega.interior(af.model.basis_vector(a)).is_zero() and w is None:
            w = {"xi": lab[a]}
    led.record("omega-horizontal", "xi_s -| Omega = 0", w)

    if conn.torsion.endomorphism_zero:
        w = None if data.dOmega.is_zero() else {"residue": _residue(data.dOmega, lab)}
        led.record("closed-if-einstein", "tau = mu = 0 and constant Scal imply d Omega = 0", w)

    if af.n >= 2:
        rec = recover_torsion_from_dOmega(af, data.dOmega)
        w = None
        for cyc, m in zip(CYCLIC, rec.mu_by_cycle):
            ww = mismatch(m, conn.torsion.mu, lab)
            if ww and w is None:
                w = dict(ww, cycle=list(cyc))
        led.record("domu", "mu(X,Y) = -1/(32n) [dOmega(xi_i,X,I_kY,e_a,I_je_a) - eps_k dOmega(xi_i,I_iX,I_jY,e_a,I_je_a)]", w)
        led.record(
            "domt",
            "tau(X,Y) = 1/(16(1-n)) sum_cyc [dOmega(xi_i,X,I_kY,e_a,I_je_a) + eps_k dOmega(xi_i,I_iX,I_jY,e_a,I_je_a)]",
            mismatch(rec.tau, conn.torsion.tau, lab),
        )
    return led


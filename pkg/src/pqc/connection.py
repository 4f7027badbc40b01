"""The canonical connection of a pqc structure on a frame model and the
decomposition of its torsion.

Everything lives in the adapted frame (horizontal frame, xi_1, xi_2, xi_3).
``Gamma[a, f, c]`` is the e_f component of nabla_{e_a} e_c.  Lowered tensors
use ``[a, b, c] = g(. (e_a, e_b), e_c)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from gmpy2 import mpq
from functools import cached_property

import numpy as np

from .algebra import (
    CYCLIC,
    EPS,
    bilinear_to_endo,
    decompose_endomorphism,
    endo_to_bilinear,
    sp1_component,
    sp1_perp_project,
)
from .exact import qeinsum, inverse, is_zero, zeros
from .report import Ledger, mismatch
from .structure import AdaptedFrame, PqcStructure, ReebFrame, adapted_frame

__all__ = [
    "ConnectionError_",
    "CanonicalConnection",
    "TorsionData",
    "AlphaData",
    "horizontal_koszul",
    "compute_alpha",
    "torsion_components",
    "build_connection",
    "levi_civita",
    "levi_civita_compare",
    "replace_gamma",
    "verify_connection",
    "signed_trace",
    "projection_torsion",
    "skew_torsion_formula",
    "ad_horizontal",
    "lie_I",
]

class ConnectionError_(ValueError):
    """A defining property of the canonical connection failed."""


def _frame(obj) -> AdaptedFrame:
    if isinstance(obj, AdaptedFrame):
        return obj
    if isinstance(obj, PqcStructure):
        return adapted_frame(obj)
    raise TypeError(f"expected PqcStructure or AdaptedFrame, got {type(obj).__name__}")


def signed_trace(B, af: AdaptedFrame) -> mpq:
    """sum g^{ab} B(e_a, e_b) over the horizontal frame."""
    h = af.hdim
    Gi = af.Ghinv[:h, :h]
    B = np.asarray(B, dtype=object)[:h, :h]
    return mpq(sum(Gi[a, b] * B[a, b] for a in range(h) for b in range(h) if Gi[a, b]))


def _Ih(af: AdaptedFrame, s: int) -> np.ndarray:
    h = af.hdim
    return af.J[s - 1][:h, :h]


def _d_eta(af: AdaptedFrame, s: int, a: int, b: int) -> mpq:
    return -af.C[af.v(s), a, b]


def ad_horizontal(af: AdaptedFrame, t: int) -> np.ndarray:
    """X -> [xi_t, X]_H on H, as an h x h matrix."""
    h = af.hdim
    return af.C[:h, af.v(t), :h].copy()


def lie_I(af: AdaptedFrame, t: int, s: int) -> np.ndarray:
    """(L_{xi_t} I_s) restricted to H and projected to H."""
    A = ad_horizontal(af, t)
    I = _Ih(af, s)
    return A @ I - I @ A


def horizontal_koszul(obj) -> np.ndarray:
    """Lowered Koszul table K[x, y, z] = g(nabla_X Y, Z) on H x H x H.

    For constant models 2 g(nabla_X Y, Z) = g([X,Y]_H, Z) - g([X,Z]_H, Y) - g([Y,Z]_H, X).
    """
    af = _frame(obj)
    h = af.hdim
    L = qeinsum("wxy,wz->xyz", af.C[:h, :h, :h], af.Gh)
    return (L - L.transpose(0, 2, 1) - L.transpose(2, 0, 1)) * mpq(1, 2)


@dataclass(frozen=True, eq=False)
class AlphaData:
    """alpha[s-1] is the covector of alpha_s in the adapted frame."""

    alpha: np.ndarray
    lam: mpq
    lam_by_choice: dict
    alpha_diag_trace: dict
    checks: Ledger


def compute_alpha(obj) -> AlphaData:
    """Connection 1-forms and the normalized scalar lambda.

    Raises ConnectionError_ if lambda depends on the cyclic choice.
    """
    af = _frame(obj)
    h, n, dim = af.hdim, af.n, af.dim
    led = Ledger("alpha")
    alpha = zeros(3, dim)
    # horizontal values: alpha_k(X) = d eta_i(xi_j, X)
    for i, j, k in CYCLIC:
        for x in range(h):
            alpha[k - 1, x] = _d_eta(af, i, af.v(j), x)
    w = None
    for i, j, k in CYCLIC:
        for x in range(h):
            other = EPS[k] * _d_eta(af, j, af.v(i), x)
            if alpha[k - 1, x] != other and w is None:
                w = {"ijk": [i, j, k], "X": af.labels[x], "lhs": alpha[k - 1, x], "rhs": other}
    led.record("alpha-horizontal", "alpha_k(X) = d eta_i(xi_j, X) = eps_k d eta_j(xi_i, X)", w)

    lams = {}
    for i, j, k in CYCLIC:
        L = lie_I(af, i, k)
        B = L.T @ af.Gh @ _Ih(af, j)  # g((L I_k) X, I_j Y)
        lam = signed_trace(B, af) / (2 * n)
        lam += -EPS[i] * _d_eta(af, i, af.v(j), af.v(k))
        lam += EPS[j] * _d_eta(af, j, af.v(k), af.v(i))
        lam += EPS[k] * _d_eta(af, k, af.v(i), af.v(j))
        lams[(i, j, k)] = lam
    vals = set(lams.values())
    w = None if len(vals) == 1 else {"values": {"".join(map(str, key)): v for key, v in lams.items()}}
    led.record("lambda-cyclic", "lambda independent of the cyclic choice (i,j,k)", w)
    if w is not None:
        raise ConnectionError_(f"lambda depends on the cyclic choice: {w['values']}")
    lam = lams[(1, 2, 3)]

    diag = {}
    w = None
    for i, j, k in CYCLIC:
        vi, vj, vk = af.v(i), af.v(j), af.v(k)
        alpha[j - 1, vi] = -EPS[j] * _d_eta(af, i, vi, vk)
        alpha[k - 1, vi] = -_d_eta(af, i, vi, vj)
        a_ii = (
            EPS[k] * _d_eta(af, i, vj, vk)
            + _d_eta(af, j, vk, vi)
            - EPS[i] * _d_eta(af, k, vi, vj)
            - EPS[j] * lam
        ) * mpq(1, 2)
        alpha[i - 1, vi] = a_ii
        L = lie_I(af, i, k)
        B = (L @ _Ih(af, j)).T @ af.Gh  # g((L I_k) I_j X, Y)
        via_trace = mpq(EPS[j], 4 * n) * signed_trace(B, af)
        diag[i] = via_trace
        if via_trace != a_ii and w is None:
            w = {"i": i, "direct": a_ii, "trace": via_trace}
    led.record("alpha-diagonal", "alpha_i(xi_i): structure-function value = (eps_j/4n) g((L_{xi_i} I_k) I_j e_a, e_a)", w)
    return AlphaData(alpha, lam, lams, diag, led)


@dataclass(frozen=True, eq=False)
class TorsionData:
    """Torsion of the canonical connection.

    ``full[a, b, f]`` is the e_f component of T(e_a, e_b); ``lowered[a, b, c]``
    is g(T(e_a, e_b), e_c).  ``sym[t-1]`` and ``skew[t-1]`` are the h x h
    matrices of T(xi_t, X, Y) split into symmetric and skew parts.
    """

    full: np.ndarray
    lowered: np.ndarray
    sym: tuple
    skew: tuple
    endo: tuple
    tau: np.ndarray
    mu: np.ndarray
    mu_parts: tuple
    checks: Ledger

    @cached_property
    def endomorphism_zero(self) -> bool:
        return all(is_zero(e) for e in self.endo)


def projection_torsion(A, G, Is) -> np.ndarray:
    """pr(A) - A with pr the orthogonal projection of gl(H) onto sp(n) + sp(1).

    For A = ad(xi_t)|H this is the torsion endomorphism T(xi_t, .)|H.
    """
    Gi = inverse(G)
    skew = (A - Gi @ A.T @ G) * mpq(1, 2)
    pr = decompose_endomorphism(skew, *Is).part3 + sp1_component(skew, G, Is)
    return pr - A


def skew_torsion_formula(A, G, Is) -> tuple[np.ndarray, mpq]:
    """Skew torsion bilinear form from the Lie derivatives L I_s = [A, I_s].

    The bracket sum is the skew [-1]-component of -A; its sp(1) component is
    then removed by orthogonal projection.  Also returns the plain trace
    sum_s eps_s g((L I_s) e_a, e_a), which always vanishes.
    """
    h = G.shape[0]
    Gi = inverse(G)
    out = zeros(h, h)
    plain = mpq(0)
    for s in (1, 2, 3):
        I = Is[s - 1]
        L = A @ I - I @ A
        B = L.T @ G @ I  # g((L I_s) X, I_s Y)
        plain += EPS[s] * sum((Gi * (L.T @ G)).ravel())
        out = out + EPS[s] * (B - B.T)
    out = out * mpq(-1, 8)
    E = bilinear_to_endo(out, G)
    E = E - sp1_component(E, G, Is)
    return endo_to_bilinear(E, G), mpq(plain)


def torsion_components(obj) -> TorsionData:
    """T^0 from L_xi g, T^a from the Lie derivatives of I_s, then tau and mu.

    The assembled endomorphism is compared with the projection of ad(xi)|H;
    raises ConnectionError_ on mu_s disagreement or reconstruction failure.
    """
    af = _frame(obj)
    h, n = af.hdim, af.n
    G = af.Gh
    Gi = inverse(G)
    led = Ledger("torsion")
    Is = [_Ih(af, s) for s in (1, 2, 3)]
    sym, skew, endo = [], [], []
    w_proj = None
    w_plain = None
    for t in (1, 2, 3):
        A = ad_horizontal(af, t)
        T0 = -(A.T @ G + G @ A) * mpq(1, 2)
        Ta, plain = skew_torsion_formula(A, G, Is)
        if plain != 0 and w_plain is None:
            w_plain = {"t": t, "value": plain}
        sym.append(T0)
        skew.append(Ta)
        E = Gi @ (T0 + Ta).T  # g(E X, Y) = T(xi_t, X, Y)
        endo.append(E)
        proj = projection_torsion(A, G, Is)
        if w_proj is None:
            w = mismatch(E, proj, af.labels)
            if w:
                w_proj = dict(w, t=t)
    led.record("torsion-projection", "T(xi_t, .)|H = pr_{sp(n)+sp(1)}(ad xi_t|H) - ad xi_t|H", w_proj)
    led.record("lie-I-traceless", "sum_s eps_s g((L_{xi_t} I_s) e_a, e_a) = 0", w_plain)

    tau = zeros(h, h)
    for s in (1, 2, 3):
        tau = tau - EPS[s] * (Is[s - 1].T @ sym[s - 1])
    mus = tuple(EPS[s] * (Is[s - 1].T @ skew[s - 1]) for s in (1, 2, 3))
    mu = mus[0]
    w = None
    for s in (2, 3):
        w = w or mismatch(mus[s - 1], mu, af.labels)
    led.record("mu-equal", "mu_1 = mu_2 = mu_3 with mu_s(X,Y) = eps_s T^a(xi_s, I_s X, Y)", w)
    w = None
    for s in (1, 2, 3):
        I = Is[s - 1]
        rec = -(I.T @ tau + tau @ I) * mpq(1, 4)
        w = w or mismatch(sym[s - 1], rec, af.labels)
    led.record("tau-reconstruct", "T^0(xi_s,X,Y) = -1/4 [tau(I_s X, Y) + tau(X, I_s Y)]", w)
    w = None
    for s in (1, 2, 3):
        w = w or mismatch(skew[s - 1], Is[s - 1].T @ mu, af.labels)
    led.record("mu-reconstruct", "T^a(xi_s,X,Y) = mu(I_s X, Y)", w)

    led.record("tau-symmetric", "tau(X,Y) = tau(Y,X)", mismatch(tau, tau.T, af.labels))
    w = None
    for B, name in [(tau, "tau(e_a,e_a)")] + [(Is[s - 1].T @ tau, f"tau(I_{s}e_a,e_a)") for s in (1, 2, 3)]:
        tr = signed_trace(B, af)
        if tr != 0 and w is None:
            w = {"trace": name, "value": tr}
    led.record("tau-trace-free", "tau(e_a,e_a) = tau(I_s e_a, e_a) = 0", w)
    lhs = tau - Is[0].T @ tau @ Is[0] - Is[1].T @ tau @ Is[1] + Is[2].T @ tau @ Is[2]
    led.record("tau-minus1", "tau - tau(I_1.,I_1.) - tau(I_2.,I_2.) + tau(I_3.,I_3.) = 0", mismatch(lhs, zeros(h, h), af.labels))
    led.record("mu-symmetric", "mu(X,Y) = mu(Y,X)", mismatch(mu, mu.T, af.labels))
    w = None
    for s in (1, 2, 3):
        I = Is[s - 1]
        w = w or mismatch(I.T @ mu @ I, -EPS[s] * mu, af.labels)
    led.record("mu-type", "mu(I_s X, I_s Y) = -eps_s mu(X,Y)", w)
    w = None
    for B, name in [(mu, "mu(e_a,e_a)")] + [(Is[s - 1].T @ mu, f"mu(I_{s}e_a,e_a)") for s in (1, 2, 3)]:
        tr = signed_trace(B, af)
        if tr != 0 and w is None:
            w = {"trace": name, "value": tr}
    led.record("mu-trace-free", "mu(e_a,e_a) = mu(I_s e_a, e_a) = 0", w)
    if n == 1:
        led.record("mu-dim7", "mu = 0 in dimension seven", mismatch(mu, zeros(h, h), af.labels))

    # sp1-perp membership of the endomorphism (clause iii)
    w = None
    for t in (1, 2, 3):
        E = endo[t - 1]
        Esk = (E - Gi @ E.T @ G) * mpq(1, 2)
        if not is_zero(sp1_perp_project(Esk, G, Is) - Esk) and w is None:
            w = {"t": t}
    led.record("torsion-perp", "T(xi_t,.)|H lies in (sp(n)+sp(1))^perp", w)

    # torh1 and complete trace-freeness
    w = None
    for s in (1, 2, 3):
        T = sym[s - 1] + skew[s - 1]
        I = Is[s - 1]
        w = w or mismatch(I.T @ T @ I, EPS[s] * T.T, af.labels)
    led.record("torsion-type", "T(xi_s, I_s X, I_s Y) = eps_s T(xi_s, Y, X)", w)
    w = None
    for t in (1, 2, 3):
        T = sym[t - 1] + skew[t - 1]
        for B, name in [(T, "T(xi,e_a,e_a)")] + [(Is[s - 1].T @ T, f"T(xi,I_{s}e_a,e_a)") for s in (1, 2, 3)]:
            tr = signed_trace(B, af)
            if tr != 0 and w is None:
                w = {"t": t, "trace": name, "value": tr}
    led.record("torsion-trace-free", "T(xi_t,e_a,e_a) = T(xi_t,I_s e_a,e_a) = 0", w)

    for c in led.checks:
        if not c.passed and c.id in ("mu-equal", "tau-reconstruct", "mu-reconstruct"):
            raise ConnectionError_(f"{c.id} failed: {c.witness}")
    return TorsionData(None, None, tuple(sym), tuple(skew), tuple(endo), tau, mu, mus, led)


@dataclass(frozen=True, eq=False)
class CanonicalConnection:
    frame: AdaptedFrame
    Gamma: np.ndarray
    alpha: np.ndarray
    lam: mpq
    torsion: TorsionData
    checks: Ledger

    @property
    def n(self) -> int:
        return self.frame.n

    @property
    def labels(self) -> tuple[str, ...]:
        return self.frame.labels

    def nabla(self, a: int) -> np.ndarray:
        """Matrix of nabla_{e_a}: column c holds nabla_{e_a} e_c."""
        return self.Gamma[a]

    @cached_property
    def lowered(self) -> np.ndarray:
        """L[a, b, c] = g(nabla_{e_a} e_b, e_c)."""
        return qeinsum("afb,fc->abc", self.Gamma, self.frame.G)

    def nabla_frame_nonzero(self) -> list[tuple[str, str]]:
        """Pairs (e_a, e_b) with nabla_{e_a} e_b != 0, in the model frame."""
        af = self.frame
        P = af.basis_change
        Pinv = inverse(P)
        out = []
        dim = af.dim
        # nabla_{u} w for model frame vectors u = P^{-1} columns
        for a in range(dim):
            u = Pinv[:, a]
            for b in range(dim):
                w = Pinv[:, b]
                val = qeinsum("a,afc,c->f", u, self.Gamma, w)
                if not is_zero(val):
                    out.append((af.structure.model.labels[a], af.structure.model.labels[b]))
        return out

    def to_dict(self) -> dict:
        af = self.frame
        entries = []
        dim = af.dim
        for a in range(dim):
            for b in range(dim):
                for f in range(dim):
                    v = self.Gamma[a, f, b]
                    if v != 0:
                        entries.append([af.labels[a], af.labels[b], af.labels[f], v])
        return {
            "frame": list(af.labels),
            "Gamma": entries,
            "alpha": {f"alpha{s}": {af.labels[a]: self.alpha[s - 1, a] for a in range(dim) if self.alpha[s - 1, a] != 0} for s in (1, 2, 3)},
            "lambda": self.lam,
        }


def build_connection(obj, reeb: ReebFrame | None = None) -> CanonicalConnection:
    """Assemble nabla in every slot and verify the defining properties.

    Raises ConnectionError_ naming the first failed property.
    """
    if isinstance(obj, PqcStructure):
        af = adapted_frame(obj, reeb)
    else:
        af = _frame(obj)
    h, dim = af.hdim, af.dim
    ad = compute_alpha(af)
    tors = torsion_components(af)
    alpha = ad.alpha
    Gamma = zeros(dim, dim, dim)
    K = horizontal_koszul(af)
    Ghi = inverse(af.Gh)
    for x in range(h):
        Gamma[x, :h, :h] = Ghi @ K[x].T  # column y: nabla_X Y
    # nabla_A xi_i = alpha_j(A) xi_k + eps_k alpha_k(A) xi_j
    for i, j, k in CYCLIC:
        for a in range(dim):
            Gamma[a, af.v(k), af.v(i)] += alpha[j - 1, a]
            Gamma[a, af.v(j), af.v(i)] += EPS[k] * alpha[k - 1, a]
    for t in (1, 2, 3):
        Gamma[af.v(t), :h, :h] = ad_horizontal(af, t) + tors.endo[t - 1]

    full, lowered = _torsion_tensor(Gamma, af)
    tors = TorsionData(full, lowered, tors.sym, tors.skew, tors.endo, tors.tau, tors.mu, tors.mu_parts, tors.checks)
    conn = CanonicalConnection(af, Gamma, alpha, ad.lam, tors, Ledger("connection"))
    led = conn.checks
    led.extend(ad.checks.checks)
    led.extend(tors.checks.checks)
    _verify_connection(conn, led)
    bad = led.failures()
    if bad:
        raise ConnectionError_(f"{bad[0].id} failed: {bad[0].witness}")
    return conn


def _torsion_tensor(Gamma: np.ndarray, af: AdaptedFrame) -> tuple[np.ndarray, np.ndarray]:
    """T(e_a, e_b) = nabla_a e_b - nabla_b e_a - [e_a, e_b], raw and lowered."""
    full = qeinsum("afb->abf", Gamma) - qeinsum("bfa->abf", Gamma) - qeinsum("fab->abf", af.C)
    return full, qeinsum("abf,fc->abc", full, af.G)


def replace_gamma(conn: CanonicalConnection, Gamma) -> CanonicalConnection:
    """The same data with other connection coefficients, unverified.

    The torsion tensor is recomputed from the new coefficients; tau, mu and
    alpha keep their values.  Meant for negative controls.
    """
    Gamma = np.array(Gamma, dtype=object, copy=True)
    full, lowered = _torsion_tensor(Gamma, conn.frame)
    t = conn.torsion
    tors = TorsionData(full, lowered, t.sym, t.skew, t.endo, t.tau, t.mu, t.mu_parts, t.checks)
    return CanonicalConnection(conn.frame, Gamma, conn.alpha, conn.lam, tors, Ledger("connection"))


def verify_connection(conn: CanonicalConnection) -> Ledger:
    """Re-run the defining properties (metric, splitting, nabla I, torsion) on ``conn``."""
    led = Ledger("connection")
    _verify_connection(conn, led)
    return led


def _verify_connection(conn: CanonicalConnection, led: Ledger) -> None:
    af = conn.frame
    h, dim, G = af.hdim, af.dim, af.G
    Gm = conn.Gamma
    labels = af.labels
    V = [af.v(s) for s in (1, 2, 3)]
    T = conn.torsion.full
    TL = conn.torsion.lowered
    lam = conn.lam
    alpha = conn.alpha

    w = None
    for a in range(dim):
        M = Gm[a]
        w = w or mismatch(M.T @ G + G @ M, zeros(dim, dim), labels)
        if w:
            w = dict(w, direction=labels[a])
            break
    led.record("metric", "nabla g = 0 (extended metric)", w)

    w = None
    for a in range(dim):
        if not (is_zero(Gm[a][h:, :h]) and is_zero(Gm[a][:h, h:])):
            w = {"direction": labels[a]}
            break
    led.record("splitting", "nabla preserves H and V", w)

    w = None
    for a in range(dim):
        for i, j, k in CYCLIC:
            J = af.J
            lhs = Gm[a] @ J[i - 1] - J[i - 1] @ Gm[a]
            rhs = alpha[j - 1, a] * J[k - 1] + EPS[k] * alpha[k - 1, a] * J[j - 1]
            w = mismatch(lhs, rhs, labels)
            if w:
                w = dict(w, direction=labels[a], i=i)
                break
        if w:
            break
    led.record("nabla-I", "nabla I_i = alpha_j I_k + eps_k alpha_k I_j", w)

    w = None
    for x in range(h):
        for y in range(h):
            rhs = zeros(dim)
            rhs[h:] = -af.C[h:, x, y]
            if not is_zero(T[x, y] - rhs):
                w = {"X": labels[x], "Y": labels[y]}
                break
        if w:
            break
    led.record("torsion-horizontal", "T(X,Y) = -[X,Y]_V", w)

    w = None
    for s in V:
        for x in range(h):
            for t in V:
                if TL[s, x, t] != 0 and w is None:
                    w = {"xi": labels[s], "X": labels[x], "xi'": labels[t], "value": TL[s, x, t]}
    led.record("torsion-mixed", "T(xi_s, X, xi_t) = 0", w)

    w = None
    for i, j, k in CYCLIC:
        vi, vj, vk = af.v(i), af.v(j), af.v(k)
        for val, what in ((TL[vi, vj, vi], "T(xi_i,xi_j,xi_i)"), (TL[vi, vk, vi], "T(xi_i,xi_k,xi_i)")):
            if val != 0 and w is None:
                w = {"ijk": [i, j, k], "term": what, "value": val}
    led.record("torsion-vertical-zero", "T(xi_i,xi_j,xi_i) = T(xi_i,xi_k,xi_i) = 0", w)
    w = None
    for i, j, k in CYCLIC:
        val = TL[af.v(i), af.v(j), af.v(k)]
        if val != -lam and w is None:
            w = {"ijk": [i, j, k], "value": val, "lambda": lam}
    led.record("torsion-vertical-lambda", "T(xi_i,xi_j,xi_k) = -lambda", w)

    # T(xi_t, xi_s, X) = -eps_i (L_{xi_t} omega_i)(xi_s, I_i X), any i
    w = None
    for t in range(1, 4):
        for s in range(1, 4):
            vt, vs = af.v(t), af.v(s)
            for i in (1, 2, 3):
                om = af.omega[i - 1]
                for x in range(h):
                    IX = af.J[i - 1][:, x]
                    # (L_xi omega)(A,B) = -omega([xi,A],B) - omega(A,[xi,B])
                    brA = af.C[:, vt, vs]
                    brB = qeinsum("fc,c->f", af.C[:, vt, :], IX)
                    val = -(brA @ om @ IX) - (af.model.basis_vector(vs) @ om @ brB)
                    lhs = TL[vt, vs, x]
                    if lhs != -EPS[i] * val and w is None:
                        w = {"t": t, "s": s, "i": i, "X": labels[x], "lhs": lhs, "rhs": -EPS[i] * val}
    led.record("torsion-vertical-horizontal", "T(xi_t,xi_s,X) = -eps_i (L_{xi_t} omega_i)(xi_s, I_i X)", w)

    # T restricted to H x H is parallel: (nabla_A T)(X,Y) = 0
    w = None
    for a in range(dim):
        M = Gm[a]
        for x in range(h):
            for y in range(h):
                val = M @ T[x, y] - qeinsum("f,fc->c", M[:, x], T[:, y]) - qeinsum("f,fc->c", M[:, y], T[x, :])
                if not is_zero(val):
                    w = {"direction": labels[a], "X": labels[x], "Y": labels[y]}
                    break
            if w:
                break
        if w:
            break
    led.record("torsion-parallel", "(nabla_A T)(X,Y) = 0 for horizontal X,Y", w)


def levi_civita(af: AdaptedFrame) -> np.ndarray:
    """Lowered Levi-Civita table L[a,b,c] = g(nabla^g_{e_a} e_b, e_c) of the extended metric."""
    Lw = qeinsum("wab,wc->abc", af.C, af.G)
    return (Lw - Lw.transpose(0, 2, 1) - Lw.transpose(2, 0, 1)) * mpq(1, 2)


def levi_civita_compare(conn: CanonicalConnection) -> Ledger:
    """The displayed relations between nabla and the Levi-Civita connection."""
    af = conn.frame
    h = af.hdim
    led = Ledger("levi-civita")
    LC = levi_civita(af)
    N = conn.lowered
    TL = conn.torsion.lowered
    tau, mu = conn.torsion.tau, conn.torsion.mu
    lab = af.labels
    Hs = slice(0, h)

    diff = N - LC
    w = None
    for i in (1, 2, 3):
        I = _Ih(af, i)
        om = af.omega[i - 1][:h, :h]
        rhs = (I.T @ tau + tau @ I) * mpq(1, 4) - om
        w = w or mismatch(diff[Hs, af.v(i), Hs], rhs, lab)
    led.record("lc-x-xi-y", "g(nabla_X xi_i, Y) = g(nabla^g_X xi_i, Y) + 1/4[tau(I_i X,Y) + tau(X,I_i Y)] - omega_i(X,Y)", w)
    led.record("lc-x-y-z", "g(nabla_X Y, Z) = g(nabla^g_X Y, Z)", mismatch(diff[Hs, Hs, Hs], zeros(h, h, h), lab))
    w = None
    for i in (1, 2, 3):
        I = _Ih(af, i)
        om = af.omega[i - 1][:h, :h]
        w = w or mismatch(diff[af.v(i), Hs, Hs], I.T @ mu - om, lab)
    led.record("lc-xi-x-y", "g(nabla_{xi_i} X, Y) = g(nabla^g_{xi_i} X, Y) + mu(I_i X, Y) - omega_i(X,Y)", w)
    w = None
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            vi, vj = af.v(i), af.v(j)
            w = w or mismatch(diff[vi, Hs, vj], TL[vi, vj, Hs] * mpq(1, 2), lab)
    led.record("lc-xi-x-xi", "g(nabla_{xi_i} X, xi_j) = g(nabla^g_{xi_i} X, xi_j) + 1/2 T(xi_i, xi_j, X)", w)
    w = None
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            vi, vj = af.v(i), af.v(j)
            w = w or mismatch(diff[Hs, vi, vj], -TL[vi, vj, Hs] * mpq(1, 2), lab)
    led.record("lc-x-xi-xi", "g(nabla_X xi_i, xi_j) = g(nabla^g_X xi_i, xi_j) - 1/2 T(xi_i, xi_j, X)", w)
    w = None
    for i, j, k in CYCLIC:
        val = diff[af.v(k), af.v(i), af.v(j)]
        if val != -conn.lam / 2 and w is None:
            w = {"ijk": [i, j, k], "value": val, "lambda": conn.lam}
    led.record("lc-xik-xii-xij", "g(nabla_{xi_k} xi_i, xi_j) = g(nabla^g_{xi_k} xi_i, xi_j) - lambda/2", w)
    w = None
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            if i == j:
                continue
            vi, vj = af.v(i), af.v(j)
            for val, term in ((diff[vi, vi, vj], "nabla_{xi_i} xi_i"), (diff[vj, vi, vj], "nabla_{xi_j} xi_i")):
                if val != 0 and w is None:
                    w = {"i": i, "j": j, "term": term, "value": val}
    led.record("lc-vertical-rest", "g(nabla_{xi_i} xi_i, xi_j) and g(nabla_{xi_j} xi_i, xi_j) agree with nabla^g", w)
    return led

"""Formal graded algebra for the para 3-Sasakian structure equations and the
cone 2-forms, plus the Einstein / para 3-Sasakian / flat classifier.

The formal algebra is the free graded-commutative algebra on
dt < eta_1 < eta_2 < eta_3 (degree 1) < phi_1 < phi_2 < phi_3 (degree 2)
with coefficients in Q[t].  A monomial is (sorted odd generators, exponents
of the phi_s); no relation beyond graded commutativity is ever applied.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import sympy
from gmpy2 import mpq

from .algebra import CYCLIC, EPS
from .calculus import Form, exterior_derivative
from .connection import CanonicalConnection, build_connection
from .curvature import CurvatureData, check_flat, curvature_tensor, ricci_contractions
from .exact import is_zero
from .report import Ledger
from .structure import PqcStructure

__all__ = [
    "T",
    "FormalElement",
    "DT",
    "ETA",
    "PHI",
    "formal_d",
    "CO_RULES",
    "cone_forms",
    "cone_four_form",
    "formal_dga_verify",
    "EinsteinInconsistency",
    "EinsteinVerdict",
    "einstein_check",
    "scal_requirement",
    "SasakianVerdict",
    "sasakian_check",
    "ClassificationVerdict",
    "classify",
]

T = sympy.Symbol("t")
ODD_NAMES = ("dt", "eta1", "eta2", "eta3")
EVEN_NAMES = ("phi1", "phi2", "phi3")

Monomial = tuple[tuple[int, ...], tuple[int, int, int]]


def _poly(value) -> sympy.Poly:
    if isinstance(value, sympy.Poly):
        return value
    if isinstance(value, mpq):
        value = sympy.Rational(int(value.numerator), int(value.denominator))
    return sympy.Poly(value, T, domain=sympy.QQ)


def _odd_merge(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Sign and sorted product of two wedge words in odd generators (0 if a repeat)."""
    if set(a) & set(b):
        return 0, ()
    seq = list(a + b)
    sign = 1
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                sign = -sign
    return sign, tuple(seq)


class FormalElement:
    """Element of the free graded-commutative algebra in normal form."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        clean: dict[Monomial, sympy.Poly] = {}
        for mono, coeff in (terms or {}).items():
            p = _poly(coeff)
            if mono in clean:
                p = clean[mono] + p
            clean[mono] = p
        self.terms = {m: p for m, p in clean.items() if not p.is_zero}

    @classmethod
    def scalar(cls, value) -> "FormalElement":
        return cls({((), (0, 0, 0)): value})

    @classmethod
    def odd(cls, index: int) -> "FormalElement":
        return cls({((index,), (0, 0, 0)): 1})

    @classmethod
    def even(cls, index: int) -> "FormalElement":
        exps = [0, 0, 0]
        exps[index] = 1
        return cls({((), tuple(exps)): 1})

    def degrees(self) -> set[int]:
        return {len(o) + 2 * sum(e) for o, e in self.terms}

    @property
    def degree(self) -> int:
        degs = self.degrees()
        if len(degs) > 1:
            raise ValueError("inhomogeneous element")
        return degs.pop() if degs else 0

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other) -> "FormalElement":
        other = _coerce(other)
        out = dict(self.terms)
        for m, p in other.terms.items():
            out[m] = out[m] + p if m in out else p
        return FormalElement(out)

    __radd__ = __add__

    def __neg__(self) -> "FormalElement":
        return FormalElement({m: -p for m, p in self.terms.items()})

    def __sub__(self, other) -> "FormalElement":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "FormalElement":
        return _coerce(other) - self

    def __mul__(self, other) -> "FormalElement":
        other = _coerce(other)
        out: dict[Monomial, sympy.Poly] = {}
        for (o1, e1), p1 in self.terms.items():
            for (o2, e2), p2 in other.terms.items():
                sign, o = _odd_merge(o1, o2)
                if sign == 0:
                    continue
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                val = p1 * p2 * sign
                out[(o, e)] = out[(o, e)] + val if (o, e) in out else val
        return FormalElement(out)

    def __rmul__(self, other) -> "FormalElement":
        return _coerce(other) * self

    __xor__ = __mul__

    def __eq__(self, other) -> bool:
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash(frozenset((m, tuple(p.all_coeffs())) for m, p in self.terms.items()))

    def __repr__(self) -> str:
        return f"FormalElement({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (o, e), p in sorted(self.terms.items()):
            word = [ODD_NAMES[i] for i in o]
            for s, k in enumerate(e):
                word += [EVEN_NAMES[s]] * k
            coeff = str(p.as_expr())
            parts.append(f"({coeff})" + ("*" + "^".join(word) if word else ""))
        return " + ".join(parts)

    def residue(self) -> list[dict]:
        """The normal form as a list of {monomial, coefficient} records."""
        out = []
        for (o, e), p in sorted(self.terms.items()):
            word = [ODD_NAMES[i] for i in o] + [EVEN_NAMES[s] for s, k in enumerate(e) for _ in range(k)]
            out.append({"monomial": "^".join(word) or "1", "coefficient": str(p.as_expr())})
        return out


def _coerce(value) -> FormalElement:
    if isinstance(value, FormalElement):
        return value
    if isinstance(value, (int, mpq, sympy.Expr, sympy.Poly)):
        return FormalElement.scalar(value)
    raise TypeError(f"cannot use {value!r} as a formal element")


DT = FormalElement.odd(0)
ETA = {s: FormalElement.odd(s) for s in (1, 2, 3)}
PHI = {s: FormalElement.even(s - 1) for s in (1, 2, 3)}


def _co_rules() -> dict[str, FormalElement]:
    """d eta_i = -2 eps_i phi_i - 2 eps_i eta_j ^ eta_k, d phi_i = 2 eps_j phi_j ^ eta_k - 2 eps_k phi_k ^ eta_j."""
    rules = {"dt": FormalElement()}
    for i, j, k in CYCLIC:
        rules[f"eta{i}"] = -2 * EPS[i] * PHI[i] - 2 * EPS[i] * (ETA[j] * ETA[k])
        rules[f"phi{i}"] = 2 * EPS[j] * (PHI[j] * ETA[k]) - 2 * EPS[k] * (PHI[k] * ETA[j])
    return rules


CO_RULES = _co_rules()


def _word(odd: tuple[int, ...], exps: tuple[int, int, int]) -> list[FormalElement]:
    gens = [FormalElement.odd(i) for i in odd]
    for s, k in enumerate(exps):
        gens += [FormalElement.even(s)] * k
    return gens


def _gen_name(g: FormalElement) -> str:
    ((o, e),) = g.terms.keys()
    if o:
        return ODD_NAMES[o[0]]
    return EVEN_NAMES[e.index(1)]


def formal_d(x: FormalElement, rules: Mapping[str, FormalElement] = CO_RULES) -> FormalElement:
    """Degree +1 derivation: d(p(t) m) = p'(t) dt ^ m + p(t) d m, Leibniz with Koszul signs on m."""
    out = FormalElement()
    for (odd, exps), p in x.terms.items():
        gens = _word(odd, exps)
        mono = FormalElement({(odd, exps): 1})
        dp = p.diff(T)
        if not dp.is_zero:
            out = out + FormalElement.scalar(dp) * (DT * mono)
        for pos, g in enumerate(gens):
            left = FormalElement.scalar(1)
            for h in gens[:pos]:
                left = left * h
            right = FormalElement.scalar(1)
            for h in gens[pos + 1:]:
                right = right * h
            sign = -1 if left.degree % 2 else 1
            out = out + FormalElement.scalar(p) * (left * rules[_gen_name(g)] * right) * sign
    return out


def cone_forms() -> dict[int, FormalElement]:
    """F_i = t^2 (phi_i + eta_j ^ eta_k) + eps_i t eta_i ^ dt."""
    t = FormalElement.scalar(T)
    t2 = FormalElement.scalar(T**2)
    return {i: t2 * (PHI[i] + ETA[j] * ETA[k]) + EPS[i] * (t * (ETA[i] * DT)) for i, j, k in CYCLIC}


def cone_four_form(F: Mapping[int, FormalElement] | None = None) -> FormalElement:
    """F = -sum_s eps_s F_s ^ F_s."""
    F = F or cone_forms()
    out = FormalElement()
    for s in (1, 2, 3):
        out = out - EPS[s] * (F[s] * F[s])
    return out


def formal_dga_verify(rules: Mapping[str, FormalElement] = CO_RULES) -> Ledger:
    """Symbolic checks in the free graded-commutative algebra; failures carry the residue.

    ``rules`` gives d on the generators; anything other than the para 3-Sasakian
    rule set is only useful as a negative control.
    """
    led = Ledger("formal-sasakian")

    def rec(id: str, anchor: str, residue: FormalElement) -> None:
        led.record(id, anchor, None if residue.is_zero() else {"residue": residue.residue()})

    for i in (1, 2, 3):
        rec(f"d2-eta{i}", "d(d eta_i) = 0 under the para 3-Sasakian structure equations", formal_d(formal_d(ETA[i], rules), rules))
    for i in (1, 2, 3):
        rec(f"d2-phi{i}", "d(d phi_i) = 0 under the para 3-Sasakian structure equations", formal_d(formal_d(PHI[i], rules), rules))
    F = cone_forms()
    for i in (1, 2, 3):
        rec(f"dF{i}", "F_i = t^2(phi_i + eta_j^eta_k) + eps_i t eta_i^dt is closed", formal_d(F[i], rules))
    rec("dF", "F = -sum_s eps_s F_s^F_s is closed", formal_d(cone_four_form(F), rules))
    Om = -(PHI[1] * PHI[1]) - PHI[2] * PHI[2] + PHI[3] * PHI[3]
    rec("dOmega", "Omega = -phi_1^phi_1 - phi_2^phi_2 + phi_3^phi_3 is closed", formal_d(Om, rules))

    lam = 2
    alpha = {i: -2 * EPS[j] * ETA[i] for i, j, k in CYCLIC}
    for i, j, k in CYCLIC:
        streq = -2 * EPS[i] * PHI[i] + ETA[j] * alpha[k] + EPS[j] * (ETA[k] * alpha[j]) + EPS[i] * lam * (ETA[j] * ETA[k])
        rec(f"streq-co-{i}", "alpha_i = -2 eps_j eta_i and lambda = 2 turn the structure equation for d eta_i into the para 3-Sasakian one", streq - rules[f"eta{i}"])
    rho = {s: -lam * PHI[s] for s in (1, 2, 3)}
    for i, j, k in CYCLIC:
        rhs = (
            PHI[j] * (-EPS[j] * alpha[k] + EPS[k] * lam * ETA[k])
            + PHI[k] * (EPS[i] * alpha[j] - EPS[j] * lam * ETA[j])
            - EPS[j] * (rho[k] * ETA[j])
            + EPS[k] * (rho[j] * ETA[k])
        )
        rec(f"str2-co-{i}", "with rho_s = -lambda phi_s the structure equation for d phi_i agrees with the para 3-Sasakian one", EPS[i] * rules[f"phi{i}"] - rhs)
    return led


class EinsteinInconsistency(ValueError):
    """Trace-free Ricci and vanishing torsion endomorphism disagree."""


@dataclass(frozen=True)
class EinsteinVerdict:
    einstein: bool
    evidence: dict


def einstein_check(cd: CurvatureData, tau=None, mu=None) -> EinsteinVerdict:
    """Ric - Scal/(4n) g = 0 on H, cross-checked against tau = mu = 0.

    ``tau`` and ``mu`` default to the connection's; passing others lets a
    caller feed altered torsion, which must then be flagged.
    """
    if cd.ric is None:
        cd = ricci_contractions(cd)
    conn = cd.conn
    af = conn.frame
    h, n = af.hdim, af.n
    tau = conn.torsion.tau if tau is None else tau
    mu = conn.torsion.mu if mu is None else mu
    trace_free = is_zero(cd.ric[:h, :h] - mpq(cd.scal, 4 * n) * af.Gh)
    torsion_zero = is_zero(tau) and is_zero(mu)
    evidence = {"ricci_trace_free": trace_free, "tau_zero": is_zero(tau), "mu_zero": is_zero(mu), "Scal": cd.scal}
    if trace_free != torsion_zero:
        raise EinsteinInconsistency(f"trace-free Ricci is {trace_free} but tau = mu = 0 is {torsion_zero}")
    if trace_free and n > 1:
        # constant models: d Scal = 0 automatically; check integrability of V
        vert = all(is_zero(af.C[:h, af.v(s), af.v(t)]) for s in (1, 2, 3) for t in (1, 2, 3))
        evidence["vertical_integrable"] = vert
        if not vert:
            raise EinsteinInconsistency("pqc-Einstein with n > 1 but [xi_s, xi_t] has a horizontal part")
    return EinsteinVerdict(trace_free, evidence)


def scal_requirement(n: int) -> int:
    """Scal of a para 3-Sasakian structure: 16n(n+2), equal to 8n(n+2) lambda at lambda = 2."""
    a = 16 * n * (n + 2)
    b = 8 * n * (n + 2) * 2
    if a != b:
        raise ArithmeticError("scalar curvature formulas disagree")
    return a


@dataclass(frozen=True)
class SasakianVerdict:
    sasakian: bool
    criteria: dict


def sasakian_check(cd: CurvatureData) -> SasakianVerdict:
    """All para 3-Sasakian structure equations, lambda = 2, alpha_i = -2 eps_j eta_i and tau = mu = 0."""
    if cd.ric is None:
        cd = ricci_contractions(cd)
    conn = cd.conn
    af = conn.frame
    m = af.model
    eta = {s: af.eta_form(s) for s in (1, 2, 3)}
    om = {s: af.omega_form(s) for s in (1, 2, 3)}
    crit = {}
    crit["d_eta"] = all(
        exterior_derivative(eta[i], m) == om[i] * (-2 * EPS[i]) - (eta[j] ^ eta[k]) * (2 * EPS[i]) for i, j, k in CYCLIC
    )
    crit["d_omega"] = all(
        exterior_derivative(om[i], m) == (om[j] ^ eta[k]) * (2 * EPS[j]) - (om[k] ^ eta[j]) * (2 * EPS[k]) for i, j, k in CYCLIC
    )
    crit["lambda_2"] = conn.lam == 2
    crit["scal"] = cd.scal == scal_requirement(af.n)
    crit["alpha"] = all(
        Form.from_covector(conn.alpha[i - 1]) == eta[i] * (-2 * EPS[j]) for i, j, k in CYCLIC
    )
    crit["torsion_zero"] = conn.torsion.endomorphism_zero
    return SasakianVerdict(all(crit.values()), crit)


LABELS = ("FlatHeisenberg", "PqcEinstein", "Para3SasakianCandidate", "Generic")


@dataclass(frozen=True)
class ClassificationVerdict:
    label: str
    evidence: list = field(default_factory=list)
    invariants: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"label": self.label, "evidence": list(self.evidence), "invariants": dict(self.invariants)}


def classify(obj) -> ClassificationVerdict:
    """Flat first, then para 3-Sasakian candidate, then pqc-Einstein, else generic."""
    if isinstance(obj, PqcStructure):
        obj = build_connection(obj)
    if isinstance(obj, CanonicalConnection):
        obj = curvature_tensor(obj)
    cd = obj if obj.ric is not None else ricci_contractions(obj)
    conn = cd.conn
    inv = {
        "tau_zero": is_zero(conn.torsion.tau),
        "mu_zero": is_zero(conn.torsion.mu),
        "lambda": conn.lam,
        "Scal": cd.scal,
    }
    evidence = []
    ein = einstein_check(cd)
    if ein.einstein:
        evidence.append("pqc-Einstein: trace-free Ricci and tau = mu = 0")
    flat = check_flat(cd)
    if flat.flat:
        evidence.append("flat: horizontal curvature vanishes, hence R = 0, T(xi_s, .) = 0, Scal = 0")
        return ClassificationVerdict("FlatHeisenberg", evidence, inv)
    sas = sasakian_check(cd)
    if sas.sasakian:
        evidence.append("para 3-Sasakian structure equations, lambda = 2, alpha_i = -2 eps_j eta_i")
        return ClassificationVerdict("Para3SasakianCandidate", evidence, inv)
    if ein.einstein:
        return ClassificationVerdict("PqcEinstein", evidence, inv)
    return ClassificationVerdict("Generic", evidence, inv)

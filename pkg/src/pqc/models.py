"""Built-in models, model files, recovery of (g, I_s) from contact data and
gauge transformations."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from gmpy2 import mpq
from pathlib import Path

import numpy as np
import sympy

from .algebra import CYCLIC, EPS, ONE, R1, R2, R3, ParaQuaternion, _basis_product, decompose_endomorphism
from .calculus import CoframeModel, ModelError, PolyVectorField, poly_exterior_derivative
from .exact import qeinsum, Q, SingularMatrixError, format_rational, identity, inverse, is_zero, qarray, zeros
from .report import mismatch
from .structure import PqcStructure

__all__ = [
    "FORMAT_VERSION",
    "ContactDataError",
    "ModelFileError",
    "builtin_heisenberg",
    "builtin_l0",
    "derive_structure_from_contact",
    "structure_from_contact",
    "heisenberg_coordinate_fields",
    "heisenberg_contact_forms",
    "model_to_dict",
    "model_from_dict",
    "dumps_model",
    "save_model",
    "load_model",
    "GaugeTransform",
    "GaugeError",
    "gauge_transform",
    "random_gauge",
    "so12_cayley",
]

FORMAT_VERSION = 1


class ContactDataError(ValueError):
    """Contact matrices do not come from a paraquaternionic contact structure."""


class ModelFileError(ValueError):
    """A model file could not be parsed or is inconsistent."""


class GaugeError(ValueError):
    """A gauge transformation is not in the structure group."""


# ---------------------------------------------------------------------------
# built-in models


def _heisenberg_brackets(n: int) -> np.ndarray:
    dim = 4 * n + 3
    C = zeros(dim, dim, dim)
    xi = {s: 4 * n + s - 1 for s in (1, 2, 3)}

    def put(a, b, c, val):
        C[a, b, c] = mpq(val)
        C[a, c, b] = mpq(-val)

    for a in range(n):
        T = 4 * a
        for s in (1, 2, 3):
            put(xi[s], T + s, T, 2)  # [I_s T, T] = 2 xi_s
        for i, j, k in CYCLIC:
            put(xi[k], T + i, T + j, 2 * EPS[k])  # [I_i T, I_j T] = 2 eps_k xi_k
    return C


def _heisenberg_endomorphisms(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """I_s acting on the blocks (T, I1T, I2T, I3T) by the unit products."""
    mats = []
    for s in (1, 2, 3):
        J = zeros(4 * n, 4 * n)
        for a in range(n):
            for u in range(4):
                sign, idx = _basis_product(s, u)
                J[4 * a + idx, 4 * a + u] = mpq(sign)
        mats.append(J)
    return tuple(mats)


def builtin_heisenberg(n: int) -> PqcStructure:
    """Paraquaternionic Heisenberg algebra with its flat structure.

    Frame: T_a, I1T_a, I2T_a, I3T_a for a = 1..n, then xi_1, xi_2, xi_3.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    labels = []
    for a in range(1, n + 1):
        labels += [f"T{a}", f"I1T{a}", f"I2T{a}", f"I3T{a}"]
    labels += ["xi1", "xi2", "xi3"]
    model = CoframeModel(n, tuple(labels), _heisenberg_brackets(n), name=f"heisenberg-n{n}")
    g = zeros(4 * n, 4 * n)
    for a in range(n):
        for u, val in enumerate((1, -1, -1, 1)):
            g[4 * a + u, 4 * a + u] = mpq(val)
    eta = (4 * n, 4 * n + 1, 4 * n + 2)
    return PqcStructure(model, eta, g, _heisenberg_endomorphisms(n), name=f"heisenberg-n{n}",
                        metadata={"family": "heisenberg", "n": n})


def _l0_brackets(c: mpq) -> np.ndarray:
    # d gamma^a = sum coeff gamma^{bc}  <=>  C[a, b, c] = -coeff
    dgamma = {
        2: [((3, 4), -c)],
        3: [((2, 4), -c)],
        5: [((1, 2), 2), ((3, 4), 2), ((4, 6), c)],
        6: [((1, 3), 2), ((2, 4), 2), ((4, 5), c)],
        7: [((1, 4), 2), ((2, 3), -2)],
    }
    C = zeros(7, 7, 7)
    for a, terms in dgamma.items():
        for (b, cc), coeff in terms:
            C[a - 1, b - 1, cc - 1] -= mpq(coeff)
            C[a - 1, cc - 1, b - 1] += mpq(coeff)
    return C


def builtin_l0(c) -> PqcStructure:
    """Seven-dimensional solvable algebra with (eta_3, eta_1, eta_2) = (gamma^5, gamma^6, gamma^7).

    The metric and endomorphisms are recovered from the contact forms.
    """
    c = Q(c)
    labels = tuple(f"gamma{i}" for i in range(1, 8))
    model = CoframeModel(1, labels, _l0_brackets(c), name=f"l0-c{format_rational(c)}")
    eta = (5, 6, 4)
    st = structure_from_contact(model, eta, name=f"l0-c{format_rational(c)}",
                                metadata={"family": "l0", "c": format_rational(c)})
    return st


# ---------------------------------------------------------------------------
# recovering g and I_s


def derive_structure_from_contact(R1m, R2m, R3m) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Recover (g, I_1, I_2, I_3) from the matrices R_s of d eta_s on H.

    I_k = eps_i R_i^{-1} R_j for cyclic (i, j, k) and g = R_s I_s / 2 (any s),
    with R_s[a, b] = d eta_s(e_a, e_b) and I_s acting on column vectors.
    The output is checked against the paraquaternion relations, the metric
    compatibility and the contact condition.
    """
    R = {1: qarray(R1m), 2: qarray(R2m), 3: qarray(R3m)}
    try:
        Rinv = {s: inverse(R[s]) for s in (1, 2, 3)}
    except SingularMatrixError as exc:
        raise ContactDataError("contact matrix is degenerate on H") from exc
    I = {}
    for i, j, k in CYCLIC:
        I[k] = EPS[i] * (Rinv[i] @ R[j])
    gs = {s: (R[s] @ I[s]) / 2 for s in (1, 2, 3)}
    g = gs[3]
    for s in (1, 2):
        if not is_zero(gs[s] - g):
            raise ContactDataError(f"metric recovered from R_{s} differs from the one recovered from R_3")
    if not is_zero(g - g.T):
        raise ContactDataError("recovered metric is not symmetric")
    h = g.shape[0]
    ident = identity(h)
    for s in (1, 2, 3):
        if not is_zero(I[s] @ I[s] - EPS[s] * ident):
            raise ContactDataError(f"recovered I_{s} does not square to {EPS[s]}")
    for i, j, k in CYCLIC:
        if not is_zero(I[i] @ I[j] + EPS[k] * I[k]):
            raise ContactDataError(f"recovered I_{i} I_{j} != -eps_{k} I_{k}")
    for s in (1, 2, 3):
        if not is_zero(I[s].T @ g @ I[s] + EPS[s] * g):
            raise ContactDataError(f"recovered metric is not compatible with I_{s}")
        if not is_zero(R[s] + 2 * EPS[s] * (I[s].T @ g)):
            raise ContactDataError(f"contact condition fails for s={s}")
    return g, I[1], I[2], I[3]


def structure_from_contact(model: CoframeModel, eta: tuple[int, int, int], name: str = "",
                           metadata: dict | None = None) -> PqcStructure:
    h = 4 * model.n
    placeholder = zeros(h, h)
    probe = PqcStructure(model, tuple(eta), placeholder, (placeholder,) * 3)
    g, I1, I2, I3 = derive_structure_from_contact(*(probe.contact_matrix(s) for s in (1, 2, 3)))
    return PqcStructure(model, tuple(eta), g, (I1, I2, I3), name=name or model.name, metadata=dict(metadata or {}))


# ---------------------------------------------------------------------------
# coordinate realization of the Heisenberg group


def _heisenberg_chart(n: int):
    horiz = []
    for a in range(1, n + 1):
        horiz += list(sympy.symbols(f"t{a} x{a} y{a} z{a}"))
    vert = list(sympy.symbols("w3 w1 w2"))  # Im part w3 r3 + w1 r1 + w2 r2
    return tuple(horiz + vert)


def heisenberg_coordinate_fields(n: int) -> list[PolyVectorField]:
    """Left-invariant fields of (q0, w0)(q, w) = (q0 + q, w0 + w + 2 Im(q0 conj(q))),
    listed in the frame order of :func:`builtin_heisenberg`.

    The field for a unit u in slot a is d/du + 2 Im(q_a conj(u)) . d/dw.
    """
    coords = _heisenberg_chart(n)
    dim = len(coords)
    units = (ONE, R1, R2, R3)
    fields = []
    for a in range(n):
        t, x, y, z = coords[4 * a: 4 * a + 4]
        qa = ParaQuaternion(t, x, y, z)
        for u in units:
            coeff = [sympy.Integer(0)] * dim
            # d/du in the (t, x, y, z) = (1, r3, r1, r2) coordinates of slot a
            slot = {0: 0, 3: 1, 1: 2, 2: 3}
            for basis_idx, val in u.coeffs().items():
                if val:
                    coeff[4 * a + slot[basis_idx]] = sympy.Integer(val)
            im = (qa * u.conjugate()).imag()
            coeff[4 * n + 0] += 2 * im.x
            coeff[4 * n + 1] += 2 * im.y
            coeff[4 * n + 2] += 2 * im.z
            fields.append(PolyVectorField(coords, tuple(sympy.expand(c) for c in coeff)))
    for s in (1, 2, 3):
        coeff = [sympy.Integer(0)] * dim
        coeff[4 * n + {3: 0, 1: 1, 2: 2}[s]] = sympy.Integer(2)
        fields.append(PolyVectorField(coords, tuple(coeff)))
    return fields


def heisenberg_contact_forms(n: int):
    """Theta = (1/2)(dw - q dq^ + dq q^) as polynomial 1-forms.

    Returns (coords, {s: coefficient list}, {s: d Theta_s}).
    """
    coords = _heisenberg_chart(n)
    dim = len(coords)
    forms = {s: [sympy.Integer(0)] * dim for s in (1, 2, 3)}
    for mu in range(dim):
        val = ParaQuaternion(0, 0, 0, 0)
        if mu >= 4 * n:
            w = [ParaQuaternion(0, 1, 0, 0), ParaQuaternion(0, 0, 1, 0), ParaQuaternion(0, 0, 0, 1)][mu - 4 * n]
            val = val + w
        for a in range(n):
            t, x, y, z = coords[4 * a: 4 * a + 4]
            qa = ParaQuaternion(t, x, y, z)
            dq = ParaQuaternion(*[sympy.Integer(int(mu == 4 * a + i)) for i in range(4)])
            val = val - qa * dq.conjugate() + dq * qa.conjugate()
        half = sympy.Rational(1, 2)
        forms[3][mu] = sympy.expand(half * val.x)
        forms[1][mu] = sympy.expand(half * val.y)
        forms[2][mu] = sympy.expand(half * val.z)
    dforms = {s: poly_exterior_derivative(forms[s], coords) for s in (1, 2, 3)}
    return coords, forms, dforms


# ---------------------------------------------------------------------------
# model files


def _matrix_strings(m) -> list[list[str]]:
    return [[format_rational(v) for v in row] for row in m]


def model_to_dict(st: PqcStructure) -> dict:
    m = st.model
    consts = []
    for a in range(m.dim):
        for b in range(m.dim):
            for c in range(b + 1, m.dim):
                if m.C[a, b, c] != 0:
                    consts.append([a + 1, b + 1, c + 1, format_rational(m.C[a, b, c])])
    consts.sort(key=lambda q: (q[1], q[2], q[0]))
    return {
        "format": "pqc-model",
        "version": FORMAT_VERSION,
        "name": st.name,
        "n": st.n,
        "basis": list(m.labels),
        "structure_constants": consts,
        "eta": [e + 1 for e in st.eta],
        "metric": _matrix_strings(st.g),
        "I": [_matrix_strings(Is) for Is in st.I],
        "metadata": st.metadata,
    }


def dumps_model(st: PqcStructure) -> str:
    return json.dumps(model_to_dict(st), indent=2, ensure_ascii=False) + "\n"


def save_model(st: PqcStructure, path) -> None:
    Path(path).write_text(dumps_model(st), encoding="utf-8")


def _parse_matrix(data, size: int, where: str) -> np.ndarray:
    if not isinstance(data, list) or len(data) != size or any(not isinstance(r, list) or len(r) != size for r in data):
        raise ModelFileError(f"{where}: expected a {size}x{size} matrix")
    out = zeros(size, size)
    for i, row in enumerate(data):
        for j, v in enumerate(row):
            out[i, j] = _parse_q(v, f"{where}[{i + 1}][{j + 1}]")
    return out


def _parse_q(v, where: str) -> mpq:
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise ModelFileError(f"{where}: rationals must be \"p/q\" strings or integers")
    try:
        return Q(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise ModelFileError(f"{where}: {exc}") from exc


def model_from_dict(data: dict, check_jacobi: bool = True) -> PqcStructure:
    """Parse a model document. With ``check_jacobi=False`` a Jacobi failure is
    left for validate_pqc to report instead of raising here."""
    if not isinstance(data, dict):
        raise ModelFileError("top level must be a JSON object")
    if "version" not in data:
        raise ModelFileError("missing required field 'version'")
    if data["version"] != FORMAT_VERSION:
        raise ModelFileError(f"unsupported version {data['version']!r}")
    for key in ("n", "basis", "structure_constants", "eta", "metric", "I"):
        if key not in data:
            raise ModelFileError(f"missing required field {key!r}")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ModelFileError("n must be a positive integer")
    dim = 4 * n + 3
    labels = data["basis"]
    if not isinstance(labels, list) or len(labels) != dim or not all(isinstance(x, str) for x in labels):
        raise ModelFileError(f"basis must list {dim} names")
    if len(set(labels)) != dim:
        raise ModelFileError("basis names must be distinct")
    C = zeros(dim, dim, dim)
    seen: dict[tuple[int, int, int], mpq] = {}
    for pos, entry in enumerate(data["structure_constants"]):
        where = f"structure_constants[{pos}]"
        if not isinstance(entry, list) or len(entry) != 4:
            raise ModelFileError(f"{where}: expected [a, b, c, \"p/q\"]")
        a, b, c = entry[:3]
        if not all(isinstance(i, int) and not isinstance(i, bool) and 1 <= i <= dim for i in (a, b, c)):
            raise ModelFileError(f"{where}: indices must be integers in 1..{dim}")
        val = _parse_q(entry[3], where)
        if b == c:
            if val != 0:
                raise ModelFileError(f"structure constants not antisymmetric at (a,b,c)=({a},{b},{c}): [e_{b},e_{b}] must vanish")
            continue
        if (a, b, c) in seen and seen[(a, b, c)] != val:
            raise ModelFileError(f"{where}: conflicting duplicate entry for (a,b,c)=({a},{b},{c})")
        if (a, c, b) in seen and seen[(a, c, b)] != -val:
            raise ModelFileError(
                f"structure constants not antisymmetric at (a,b,c)=({a},{b},{c}): "
                f"C^{a}_{{{b}{c}}}={format_rational(val)} but C^{a}_{{{c}{b}}}={format_rational(seen[(a, c, b)])}"
            )
        seen[(a, b, c)] = val
        C[a - 1, b - 1, c - 1] = val
        C[a - 1, c - 1, b - 1] = -val
    try:
        model = CoframeModel(n, tuple(labels), C, name=str(data.get("name", "")), check=check_jacobi)
    except ModelError as exc:
        raise ModelFileError(str(exc)) from exc
    eta = data["eta"]
    if not isinstance(eta, list) or len(eta) != 3 or len(set(eta)) != 3 or not all(
        isinstance(e, int) and not isinstance(e, bool) and 1 <= e <= dim for e in eta
    ):
        raise ModelFileError(f"eta must list three distinct indices in 1..{dim}")
    h = 4 * n
    g = _parse_matrix(data["metric"], h, "metric")
    Is = data["I"]
    if not isinstance(Is, list) or len(Is) != 3:
        raise ModelFileError("I must hold three matrices")
    I = tuple(_parse_matrix(Is[s], h, f"I[{s + 1}]") for s in range(3))
    meta = data.get("metadata", {})
    if not isinstance(meta, dict):
        raise ModelFileError("metadata must be an object")
    return PqcStructure(model, tuple(e - 1 for e in eta), g, I, name=str(data.get("name", "")), metadata=meta)


def load_model(path, check_jacobi: bool = True) -> PqcStructure:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFileError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return model_from_dict(data, check_jacobi)


# ---------------------------------------------------------------------------
# gauge transformations

_ETA_FORM = np.diag(np.array([mpq(-1), mpq(-1), mpq(1)], dtype=object))


@dataclass(frozen=True)
class GaugeTransform:
    """New horizontal frame f_b = sum_a P[a, b] e_a (P commutes with I_s and
    preserves g), eta' = rescale * Phi eta with Phi in SO(1,2)."""

    P: np.ndarray
    Phi: np.ndarray
    rescale: mpq = mpq(1)
    seed: int | None = None
    notes: dict = field(default_factory=dict)

    @classmethod
    def identity(cls, n: int) -> "GaugeTransform":
        return cls(identity(4 * n), identity(3))


def so12_cayley(a, b, c) -> np.ndarray:
    """Cayley transform (1 - A)^{-1}(1 + A) of an so(1,2) element.

    ``a`` rotates (eta_1, eta_2); ``b`` and ``c`` boost eta_3 against eta_1 and eta_2.
    """
    a, b, c = Q(a), Q(b), Q(c)
    A = qarray([[0, -a, b], [a, 0, c], [b, c, 0]])
    one = identity(3)
    return inverse(one - A) @ (one + A)


def _check_gauge(st: PqcStructure, G: GaugeTransform) -> None:
    P, Phi = qarray(G.P), qarray(G.Phi)
    h = 4 * st.n
    if P.shape != (h, h) or Phi.shape != (3, 3):
        raise GaugeError("gauge matrices have the wrong size")
    if G.rescale == 0:
        raise GaugeError("rescale factor must be nonzero")
    if not is_zero(Phi @ _ETA_FORM @ Phi.T - _ETA_FORM):
        raise GaugeError("Phi does not preserve diag(-1,-1,1)")
    det = Phi[0, 0] * (Phi[1, 1] * Phi[2, 2] - Phi[1, 2] * Phi[2, 1]) - Phi[0, 1] * (
        Phi[1, 0] * Phi[2, 2] - Phi[1, 2] * Phi[2, 0]) + Phi[0, 2] * (Phi[1, 0] * Phi[2, 1] - Phi[1, 1] * Phi[2, 0])
    if det != 1:
        raise GaugeError("Phi must have determinant 1")
    try:
        inverse(P)
    except SingularMatrixError as exc:
        raise GaugeError("horizontal frame change is singular") from exc
    if not is_zero(P.T @ st.g @ P - st.g):
        raise GaugeError("horizontal frame change does not preserve g")
    for s in range(3):
        if not is_zero(P @ st.I[s] - st.I[s] @ P):
            raise GaugeError(f"horizontal frame change does not commute with I_{s + 1}")


def gauge_transform(st: PqcStructure, G: GaugeTransform) -> PqcStructure:
    """Transport the structure to the new frame and recover (g, I) from the
    transformed contact forms; the result is checked against the expected
    tensorial transforms g' = c P^T g P and I'_s = P^{-1}(sum_t eps_s eps_t Phi_st I_t) P."""
    _check_gauge(st, G)
    m = st.model
    dim, h = m.dim, 4 * st.n
    c = Q(G.rescale)
    P, Phi = qarray(G.P), qarray(G.Phi)
    # coframe change: theta' = S theta with S block diagonal
    S = zeros(dim, dim)
    Pinv = inverse(P)
    hh = list(st.horizontal)
    for i, a in enumerate(hh):
        for j, b in enumerate(hh):
            S[a, b] = Pinv[i, j]
    for s in range(3):
        for t in range(3):
            S[st.eta[s], st.eta[t]] = c * Phi[s, t]
    B = inverse(S)  # columns: new frame vectors
    C = qeinsum("ad,dbc->abc", S, qeinsum("dbc,bi,cj->dij", m.C, B, B))
    newm = CoframeModel(st.n, m.labels, C, name=m.name)
    name = st.name + "-gauge" if st.name else "gauge"
    meta = dict(st.metadata)
    meta["gauge"] = {"seed": G.seed, "rescale": format_rational(c), **G.notes}
    out = structure_from_contact(newm, st.eta, name=name, metadata=meta)
    exp_g = c * (P.T @ st.g @ P)
    w = mismatch(out.g, exp_g)
    if w:
        raise GaugeError(f"transported metric differs from c P^T g P: {w}")
    for s in (1, 2, 3):
        comb = zeros(h, h)
        for t in (1, 2, 3):
            comb = comb + EPS[s] * EPS[t] * Phi[s - 1, t - 1] * st.I[t - 1]
        w = mismatch(out.I[s - 1], Pinv @ comb @ P)
        if w:
            raise GaugeError(f"transported I_{s} differs from the rotated combination: {w}")
    return out


def _random_spn(st: PqcStructure, rng: random.Random) -> np.ndarray:
    """Cayley transform of a random element of sp(n, R) (g-skew, commuting with I_s)."""
    h = 4 * st.n
    Ginv = inverse(st.g)
    one = identity(h)
    for _ in range(50):
        S = zeros(h, h)
        for i in range(h):
            for j in range(i + 1, h):
                v = mpq(rng.randint(-2, 2), rng.choice((1, 2)))
                S[i, j], S[j, i] = v, -v
        A = Ginv @ S
        A3 = decompose_endomorphism(A, *st.I).part3
        try:
            return inverse(one - A3) @ (one + A3)
        except SingularMatrixError:
            continue
    raise GaugeError("could not draw an invertible Cayley transform")


def random_gauge(st: PqcStructure, seed: int, rescale=1, rotate: bool = True, frame: bool = True) -> GaugeTransform:
    """Seeded random element of the structure group (plus optional rescale)."""
    rng = random.Random(seed)
    if rotate:
        for _ in range(50):
            a, b, c = (mpq(rng.randint(-3, 3), rng.choice((1, 2, 3))) for _ in range(3))
            try:
                Phi = so12_cayley(a, b, c)
                break
            except SingularMatrixError:
                continue
        else:
            raise GaugeError("could not draw an SO(1,2) element")
    else:
        Phi = identity(3)
    P = _random_spn(st, rng) if frame else identity(4 * st.n)
    return GaugeTransform(P, Phi, Q(rescale), seed=seed)

"""The nine acceptance criteria, each exact.

Run ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``
to see one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import numpy as np
import pytest
import sympy
from gmpy2 import mpq

sys.path.insert(0, str(Path(__file__).parent))

from pqc.calculus import poly_bracket_check  # noqa: E402
from pqc.connection import build_connection, replace_gamma  # noqa: E402
from pqc.curvature import (  # noqa: E402
    check_flat,
    curvature_tensor,
    ricci_contractions,
    verify_bianchi,
    verify_curvature_symmetries,
    verify_ricci_identities,
    verify_vertical_curvature,
)
from pqc.exact import inertia, is_zero, qeinsum  # noqa: E402
from pqc.forms import RejectedForN1, fundamental_four_form, recover_torsion_from_dOmega  # noqa: E402
from pqc.models import (  # noqa: E402
    ContactDataError,
    builtin_heisenberg,
    builtin_l0,
    derive_structure_from_contact,
    gauge_transform,
    heisenberg_contact_forms,
    heisenberg_coordinate_fields,
    random_gauge,
)
from pqc.sasakian import classify, formal_dga_verify, scal_requirement  # noqa: E402
from pqc.structure import validate_pqc  # noqa: E402

GAUGE_SEEDS = range(20)
RESCALES = (1, 2, mpq(1, 3), mpq(-3, 2))


def _pipeline(st):
    conn = build_connection(st)
    return conn, ricci_contractions(curvature_tensor(conn))


def _require(cond, msg):
    if not cond:
        raise AssertionError(msg)


def criterion_1() -> str:
    limits = {1: 1.0, 2: 30.0}
    times = {}
    for n, limit in limits.items():
        start = time.perf_counter()
        st = builtin_heisenberg(n)
        conn, cd = _pipeline(st)
        label = classify(cd).label
        times[n] = time.perf_counter() - start
        af = conn.frame
        h = af.hdim
        _require(is_zero(cd.R), f"n={n}: R has nonzero components")
        _require(cd.R.size == af.dim**4, f"n={n}: R is not dim^4")
        for s in (1, 2, 3):
            _require(is_zero(conn.torsion.full[af.v(s), :h]), f"n={n}: T(xi_{s}, X) != 0")
        _require(is_zero(conn.torsion.tau) and is_zero(conn.torsion.mu), f"n={n}: tau or mu nonzero")
        _require(conn.lam == 0 and cd.scal == 0, f"n={n}: lambda={conn.lam} Scal={cd.scal}")
        _require(label == "FlatHeisenberg", f"n={n}: classified {label}")
        _require(times[n] < limit, f"n={n}: {times[n]:.2f}s exceeds {limit}s")
    return ", ".join(f"n={n} {t:.2f}s" for n, t in times.items())


def criterion_2() -> str:
    for c in (1, 3):
        st = builtin_l0(c)
        conn, cd = _pipeline(st)
        af = conn.frame
        gamma4 = np.array([mpq(int(lab == "gamma4")) for lab in af.labels], dtype=object)
        _require(is_zero(conn.alpha[0]) and is_zero(conn.alpha[2]), f"c={c}: alpha_1 or alpha_3 nonzero")
        _require(is_zero(conn.alpha[1] + c * gamma4), f"c={c}: alpha_2 != -c gamma^4")
        _require(is_zero(cd.R), f"c={c}: R != 0")
        _require(conn.torsion.endomorphism_zero, f"c={c}: torsion endomorphism nonzero")
        nz = conn.nabla_frame_nonzero()
        _require(len(nz) > 0, f"c={c}: gamma frame is parallel")
    return f"alpha_2 = -c gamma^4 for c in {{1, 3}}, nonzero nabla gamma: {nz[0]}"


def _identity_suites(cd):
    return [verify_curvature_symmetries(cd), verify_ricci_identities(cd), verify_vertical_curvature(cd)]


def _scal_cross_checks(conn, cd):
    af, n = conn.frame, conn.frame.n
    _require(cd.scal == 8 * n * (n + 2) * conn.lam, "Scal != 8n(n+2) lambda")
    for s in range(3):
        signed = qeinsum("ab,ab->", af.Ghinv, af.J[s].T @ cd.rho[s])
        _require(cd.scal == 2 * (n + 2) * signed, f"Scal != 2(n+2) rho_{s + 1}(I e_a, e_a)")


def criterion_3() -> str:
    count = 0
    for base in (builtin_heisenberg(1), builtin_l0(3)):
        models = [base] + [
            gauge_transform(base, random_gauge(base, seed, rescale=RESCALES[seed % len(RESCALES)])) for seed in GAUGE_SEEDS
        ]
        for st in models:
            _require(validate_pqc(st).passed, f"{st.name}: gauge output does not validate")
            conn, cd = _pipeline(st)
            for led in _identity_suites(cd):
                _require(led.passed, f"{st.name}: {[c.id for c in led.failures()]}")
            _scal_cross_checks(conn, cd)
            count += 1
    return f"{count} models (2 built-ins + {len(GAUGE_SEEDS)} gauges each)"


def criterion_4() -> str:
    models = [builtin_heisenberg(1), builtin_heisenberg(2), builtin_l0(1), builtin_l0(3)]
    models += [gauge_transform(m, random_gauge(m, 100 + i)) for i, m in enumerate(models)]
    for st in models:
        _, cd = _pipeline(st)
        led = verify_bianchi(cd)
        _require(led.passed, f"{st.name}: {[c.id for c in led.failures()]}")
        ids = {c.id for c in led.checks} | {c.id for c in verify_vertical_curvature(cd).checks}
        _require({"bianchi-first", "bianchi-pair", "bianchi-second", "bianchi-contracted"} <= ids, "missing identity")
    conn = build_connection(builtin_heisenberg(1))
    G = conn.Gamma.copy()
    G[conn.frame.v(1), 1, 0] += 1
    bad = ricci_contractions(curvature_tensor(replace_gamma(conn, G)))
    failed = [c.id for c in verify_bianchi(bad).failures()]
    _require(failed, "single-entry Gamma corruption not detected")
    return f"{len(models)} models; corruption caught by {', '.join(failed)}"


def criterion_5() -> str:
    conn = build_connection(builtin_heisenberg(2))
    data = fundamental_four_form(conn)
    _require(data.dOmega.is_zero(), "d Omega != 0")
    rec = recover_torsion_from_dOmega(conn.frame, data.dOmega)
    _require(is_zero(rec.tau) and is_zero(rec.tau - conn.torsion.tau), "recovered tau differs")
    _require(all(is_zero(m) and is_zero(m - conn.torsion.mu) for m in rec.mu_by_cycle), "recovered mu differs")
    one = fundamental_four_form(build_connection(builtin_heisenberg(1)))
    try:
        recover_torsion_from_dOmega(one.frame, one.dOmega)
    except RejectedForN1:
        return "n=2 recovered tau = mu = 0; n=1 rejected"
    raise AssertionError("n=1 input was not rejected")


def criterion_6() -> str:
    start = time.perf_counter()
    led = formal_dga_verify()
    elapsed = time.perf_counter() - start
    _require(led.passed, f"residues in {[c.id for c in led.failures()]}")
    _require(elapsed < 5.0, f"{elapsed:.2f}s exceeds 5s")
    return f"{len(led.checks)} symbolic checks in {elapsed:.2f}s"


def criterion_7() -> str:
    got = [scal_requirement(n) for n in (1, 2, 3)]
    _require(got == [48, 128, 240], f"got {got}")
    _require(all(16 * n * (n + 2) == 8 * n * (n + 2) * 2 == v for n, v in zip((1, 2, 3), got)), "formulas disagree")
    return "48, 128, 240"


def criterion_8() -> str:
    for n in (1, 2):
        report = poly_bracket_check(heisenberg_coordinate_fields(n), builtin_heisenberg(n).model)
        _require(report.ok, f"n={n}: mismatches {report.mismatches}")
        coords, forms, d = heisenberg_contact_forms(n)
        names = [str(c) for c in coords]
        want = {3: [("t", "x", 2), ("y", "z", 2)], 1: [("t", "y", 2), ("x", "z", 2)], 2: [("t", "z", 2), ("x", "y", -2)]}
        for s, terms in want.items():
            expect = {
                (names.index(f"{u}{a}"), names.index(f"{v}{a}")): val for a in range(1, n + 1) for u, v, val in terms
            }
            _require(d[s] == expect, f"n={n}: d Theta_{s} mismatch")
        fields = heisenberg_coordinate_fields(n)
        for s in (1, 2, 3):
            vals = [sympy.expand(sum(c * w for c, w in zip(forms[s], F.coeffs))) for F in fields]
            _require(vals == [int(b == 4 * n + s - 1) for b in range(len(fields))], f"n={n}: Theta_{s} is not dual")
    return "brackets and d Theta_s agree for n = 1, 2"


def criterion_9() -> str:
    st = builtin_heisenberg(1)
    R = [st.contact_matrix(s) for s in (1, 2, 3)]
    g, *Is = derive_structure_from_contact(*R)
    _require(is_zero(g - st.g) and all(is_zero(a - b) for a, b in zip(Is, st.I)), "Heisenberg data not recovered")
    for c in (1, 3):
        l0 = builtin_l0(c)
        g, *Is = derive_structure_from_contact(*(l0.contact_matrix(s) for s in (1, 2, 3)))
        _require(validate_pqc(l0.with_metric(g)).passed and inertia(g) == (2, 2, 0), f"l0(c={c}) not validated")
    flipped = [r.copy() for r in R]
    a, b = np.argwhere(flipped[1] != 0)[0]
    flipped[1][a, b], flipped[1][b, a] = -flipped[1][a, b], -flipped[1][b, a]
    try:
        derive_structure_from_contact(*flipped)
    except ContactDataError as exc:
        return f"recovered and validated; sign flip rejected ({exc})"
    raise AssertionError("sign-flipped input accepted")


CRITERIA = [
    (1, "flat Heisenberg pipeline", criterion_1),
    (2, "l0 golden values", criterion_2),
    (3, "Ricci identities under gauges", criterion_3),
    (4, "Bianchi identities and corruption control", criterion_4),
    (5, "torsion from d Omega", criterion_5),
    (6, "formal cone computation", criterion_6),
    (7, "para 3-Sasakian scalar curvature", criterion_7),
    (8, "coordinate realization", criterion_8),
    (9, "structure from contact forms", criterion_9),
]


def run_criterion(number, title, fn) -> tuple[bool, str]:
    try:
        detail = fn()
        ok = True
    except Exception as exc:  # report every failure as a FAIL line
        detail = f"{type(exc).__name__}: {exc}"
        ok = False
    return ok, f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}"


@pytest.mark.parametrize("number, title, fn", CRITERIA, ids=[f"criterion-{c[0]}" for c in CRITERIA])
def test_criterion(number, title, fn, capsys):
    ok, line = run_criterion(number, title, fn)
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, line


def main() -> int:
    results = [run_criterion(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    return 0 if all(ok for ok, _ in results) else 1


if __name__ == "__main__":
    sys.exit(main())

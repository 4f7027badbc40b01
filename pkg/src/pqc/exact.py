"""Exact rational linear algebra on numpy object arrays of gmpy2 rationals."""

from __future__ import annotations

import math

import numpy as np
from gmpy2 import mpq

__all__ = [
    "Q",
    "parse_rational",
    "format_rational",
    "qarray",
    "zeros",
    "identity",
    "is_zero",
    "inverse",
    "solve_unique",
    "rank",
    "nullspace",
    "SingularMatrixError",
    "inertia",
    "qeinsum",
]


class SingularMatrixError(ArithmeticError):
    pass


def Q(value) -> mpq:
    """Coerce ints, mpqs, mpq and "p/q" strings to mpq. Floats are refused."""
    if isinstance(value, mpq):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return mpq(value)
    if isinstance(value, str):
        return parse_rational(value)
    if hasattr(value, "numerator") and hasattr(value, "denominator") and not isinstance(value, float):
        return mpq(int(value.numerator), int(value.denominator))
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def parse_rational(text: str) -> mpq:
    s = text.strip()
    if not s:
        raise ValueError("empty rational")
    if "/" in s:
        num, den = s.split("/", 1)
        if not _is_int(num) or not _is_int(den):
            raise ValueError(f"malformed rational {text!r}")
        if int(den) == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return mpq(int(num), int(den))
    if not _is_int(s):
        raise ValueError(f"malformed rational {text!r}")
    return mpq(int(s))


def _is_int(s: str) -> bool:
    s = s.strip()
    if s[:1] in "+-":
        s = s[1:]
    return s.isdigit()


def format_rational(q: mpq) -> str:
    q = Q(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def qarray(data) -> np.ndarray:
    arr = np.array(data, dtype=object)
    flat = arr.reshape(-1)
    for i, v in enumerate(flat):
        flat[i] = Q(v)
    return flat.reshape(arr.shape)


def zeros(*shape: int) -> np.ndarray:
    arr = np.empty(shape, dtype=object)
    arr.fill(mpq(0))
    return arr


def identity(n: int) -> np.ndarray:
    arr = zeros(n, n)
    for i in range(n):
        arr[i, i] = mpq(1)
    return arr


def is_zero(arr) -> bool:
    return all(v == 0 for v in np.asarray(arr, dtype=object).reshape(-1))


def _rref(mat: np.ndarray) -> tuple[np.ndarray, list[int]]:
    m = np.array(mat, dtype=object, copy=True)
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = next((i for i in range(r, rows) if m[i, c] != 0), None)
        if p is None:
            continue
        if p != r:
            m[[r, p]] = m[[p, r]]
        piv = m[r, c]
        m[r] = [v / piv for v in m[r]]
        for i in range(rows):
            if i != r and m[i, c] != 0:
                f = m[i, c]
                m[i] = m[i] - f * m[r]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(mat) -> int:
    return len(_rref(qarray(mat))[1])


def inverse(mat) -> np.ndarray:
    a = qarray(mat)
    n, m = a.shape
    if n != m:
        raise ValueError("inverse of a non-square matrix")
    red, piv = _rref(np.concatenate([a, identity(n)], axis=1))
    if piv[:n] != list(range(n)):
        raise SingularMatrixError("matrix is singular")
    return red[:, n:]


def solve_unique(a, b) -> np.ndarray:
    """Solve a x = b, requiring a consistent system with a unique solution.

    Raises SingularMatrixError for an inconsistent or underdetermined system;
    the message says which.
    """
    a = qarray(a)
    b = qarray(b).reshape(-1, 1)
    rows, cols = a.shape
    red, piv = _rref(np.concatenate([a, b], axis=1))
    if cols in piv:
        raise SingularMatrixError("inconsistent linear system")
    if len(piv) < cols:
        raise SingularMatrixError("linear system has no unique solution")
    x = zeros(cols)
    for r, c in enumerate(piv):
        x[c] = red[r, cols]
    return x


def nullspace(mat) -> list[np.ndarray]:
    a = qarray(mat)
    rows, cols = a.shape
    red, piv = _rref(a)
    free = [c for c in range(cols) if c not in piv]
    basis = []
    for f in free:
        v = zeros(cols)
        v[f] = mpq(1)
        for r, c in enumerate(piv):
            v[c] = -red[r, f]
        basis.append(v)
    return basis


def inertia(sym) -> tuple[int, int, int]:
    """(positive, negative, zero) counts of a symmetric matrix, by congruence."""
    m = np.array(qarray(sym), dtype=object, copy=True)
    n = m.shape[0]
    if not is_zero(m - m.T):
        raise ValueError("matrix is not symmetric")
    pos = neg = 0
    active = list(range(n))
    while active:
        p = next((i for i in active if m[i, i] != 0), None)
        if p is None:
            # all diagonal entries vanish: pair up an off-diagonal entry
            pair = next(((i, j) for i in active for j in active if i < j and m[i, j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # e_i -> e_i + e_j makes the (i, i) entry 2 m[i, j]
            m[i, :] = m[i, :] + m[j, :]
            m[:, i] = m[:, i] + m[:, j]
            p = i
        piv = m[p, p]
        if piv > 0:
            pos += 1
        else:
            neg += 1
        active.remove(p)
        for r in active:
            if m[r, p] != 0:
                f = m[r, p] / piv
                m[r, :] = m[r, :] - f * m[p, :]
                m[:, r] = m[:, r] - f * m[:, p]
    return pos, neg, n - pos - neg


_INT64_BOUND = 2**62
_num = np.frompyfunc(lambda q: q.numerator, 1, 1)
_den = np.frompyfunc(lambda q: q.denominator, 1, 1)


def _scaled(arr: np.ndarray) -> tuple[np.ndarray, int, int]:
    """Integer numerators over one common denominator, plus the largest |numerator|."""
    arr = np.asarray(arr, dtype=object)
    if arr.size == 0:
        return np.zeros(arr.shape, dtype=np.int64), 1, 0
    dens = {int(v) for v in _den(arr).reshape(-1).tolist()}
    d = math.lcm(*dens)
    nums = _num(arr * d) if d != 1 else _num(arr)
    flat = [int(v) for v in nums.reshape(-1).tolist()]
    big = max(abs(v) for v in flat)
    return np.array(flat, dtype=object).reshape(arr.shape), d, big


def _from_scaled(nums: np.ndarray, d: int) -> np.ndarray:
    out = np.empty(nums.shape, dtype=object)
    flat = nums.reshape(-1)
    cache: dict[int, mpq] = {}
    res = out.reshape(-1)
    for i, v in enumerate(flat.tolist()):
        q = cache.get(v)
        if q is None:
            q = cache[v] = mpq(v, d)
        res[i] = q
    return out


def qeinsum(subscripts: str, *operands) -> np.ndarray | mpq:
    """Exact einsum over rational object arrays.

    Operands are scaled to integers; the contraction runs in int64 whenever the
    worst-case magnitude fits, else on Python ints.
    """
    parts = [_scaled(op) for op in operands]
    lhs, _, out = subscripts.replace(" ", "").partition("->")
    sizes: dict[str, int] = {}
    for term, op in zip(lhs.split(","), operands):
        for ch, dim in zip(term, np.shape(op)):
            sizes[ch] = dim
    summed = 1
    for ch, dim in sizes.items():
        if ch not in out:
            summed *= dim
    bound = summed
    for _, _, big in parts:
        bound *= max(big, 1)
    if bound < _INT64_BOUND:
        nums = [p[0].astype(np.int64) for p in parts]
        res = np.einsum(subscripts, *nums).astype(object)
    else:
        res = np.einsum(subscripts, *[p[0] for p in parts])
    d = 1
    for _, di, _ in parts:
        d *= di
    if np.ndim(res) == 0:
        return mpq(int(res), d)
    return _from_scaled(np.asarray(res, dtype=object), d)

"""Exact linear algebra over Q with ``fractions.Fraction``.

Matrices are tuples of row tuples and act on column vectors.  A subspace is
stored as its reduced row echelon basis (a tuple of row vectors), which is a
canonical form: two subspaces are equal exactly when these tuples are equal.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Vec = tuple
Mat = tuple
Subspace = tuple


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def as_matrix(rows) -> Mat:
    return tuple(tuple(frac(x) for x in r) for r in rows)


def as_vector(v) -> Vec:
    return tuple(frac(x) for x in v)


def identity(n: int) -> Mat:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def zeros(r: int, c: int | None = None) -> Mat:
    c = r if c is None else c
    return tuple((Fraction(0),) * c for _ in range(r))


def diag(entries) -> Mat:
    n = len(entries)
    return tuple(tuple(frac(entries[i]) if i == j else Fraction(0) for j in range(n)) for i in range(n))


def transpose(A: Mat) -> Mat:
    return tuple(zip(*A)) if A else ()


def matmul(A: Mat, B: Mat) -> Mat:
    Bt = transpose(B)
    return tuple(tuple(sum((a * b for a, b in zip(row, col) if a and b), Fraction(0)) for col in Bt) for row in A)


def apply(A: Mat, v: Sequence) -> Vec:
    return tuple(sum((a * x for a, x in zip(row, v) if a and x), Fraction(0)) for row in A)


def add(A: Mat, B: Mat) -> Mat:
    return tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(A, B))


def sub(A: Mat, B: Mat) -> Mat:
    return tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(A, B))


def scale(c, A: Mat) -> Mat:
    c = frac(c)
    return tuple(tuple(c * a for a in r) for r in A)


def power(A: Mat, k: int) -> Mat:
    out = identity(len(A))
    for _ in range(k):
        out = matmul(out, A)
    return out


def is_zero(A) -> bool:
    return all(not x for r in A for x in r)


def block_diag(A: Mat, B: Mat) -> Mat:
    n, m = len(A), len(B)
    top = tuple(tuple(r) + (Fraction(0),) * m for r in A)
    bot = tuple((Fraction(0),) * n + tuple(r) for r in B)
    return top + bot


def kron(A: Mat, B: Mat) -> Mat:
    return tuple(tuple(a * b for a in ra for b in rb) for ra in A for rb in B)


def kron_vec(u: Sequence, w: Sequence) -> Vec:
    return tuple(a * b for a in u for b in w)


def rref(rows) -> tuple:
    """Reduced row echelon form; returns ``(nonzero_rows, pivot_columns)``."""
    M = [list(r) for r in rows]
    if not M:
        return (), ()
    ncols = len(M[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        prow = M[r]
        inv = Fraction(1) / prow[c]
        # entries left of c in the pivot row are already zero
        nz = [k for k in range(c, ncols) if prow[k]]
        for k in nz:
            prow[k] = prow[k] * inv
        for i in range(len(M)):
            row = M[i]
            if i != r and row[c]:
                f = row[c]
                for k in nz:
                    row[k] = row[k] - f * prow[k]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return tuple(tuple(x) for x in M[:r]), tuple(pivots)


def span(vectors, dim: int | None = None) -> Subspace:
    """Canonical basis of the span of ``vectors``."""
    vecs = [as_vector(v) for v in vectors]
    if not vecs:
        return ()
    return rref(vecs)[0]


def full_space(n: int) -> Subspace:
    return identity(n)


def rank(A) -> int:
    return len(rref(A)[0]) if A else 0


def contains(S: Subspace, v) -> bool:
    v = as_vector(v)
    if not any(v):
        return True
    return rank(tuple(S) + (v,)) == len(S)


def is_subspace(U: Subspace, W: Subspace) -> bool:
    return all(contains(W, u) for u in U)


def coordinates(S: Subspace, v) -> Vec:
    """Coordinates of ``v`` in the canonical basis ``S`` (``v`` must lie in ``S``)."""
    _, piv = rref(S)
    return tuple(v[c] for c in piv)


def nullspace(A: Mat, ncols: int | None = None) -> tuple:
    """Basis of ``{x : A x = 0}``."""
    n = ncols if ncols is not None else (len(A[0]) if A else 0)
    if not A:
        return identity(n)
    R, piv = rref(A)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for row, c in zip(R, piv):
            x[c] = -row[f]
        basis.append(tuple(x))
    return tuple(basis)


def annihilator(S: Subspace, n: int) -> tuple:
    """Rows ``a`` with ``a . s = 0`` for every ``s`` in ``S``."""
    return nullspace(S, n) if S else identity(n)


def intersect(U: Subspace, W: Subspace, n: int) -> Subspace:
    eqs = annihilator(U, n) + annihilator(W, n)
    return span(nullspace(eqs, n))


def sum_spaces(U: Subspace, W: Subspace) -> Subspace:
    return span(tuple(U) + tuple(W))


def image(A: Mat, S: Subspace) -> Subspace:
    return span([apply(A, s) for s in S])


def preimage(A: Mat, W: Subspace, n: int) -> Subspace:
    """``{x : A x in W}``."""
    ann = annihilator(W, len(A))
    if not ann:
        return full_space(n)
    return span(nullspace(matmul(ann, A), n))


def det(A: Mat) -> Fraction:
    M = [list(r) for r in A]
    n = len(M)
    d = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            d = -d
        d *= M[c][c]
        inv = 1 / M[c][c]
        for i in range(c + 1, n):
            if M[i][c]:
                f = M[i][c] * inv
                M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return d


def inverse(A: Mat) -> Mat:
    n = len(A)
    aug = [tuple(r) + identity(n)[i] for i, r in enumerate(A)]
    R, piv = rref(aug)
    if tuple(piv[:n]) != tuple(range(n)) or len(R) < n:
        raise ZeroDivisionError("matrix is singular")
    return tuple(tuple(r[n:]) for r in R)


def is_nilpotent(A: Mat) -> bool:
    return is_zero(power(A, len(A))) if A else True


def nilpotence_index(A: Mat) -> int:
    """Smallest k >= 0 with A^k = 0 (assumes A nilpotent)."""
    n = len(A)
    P = identity(n)
    for k in range(n + 1):
        if is_zero(P):
            return k
        P = matmul(P, A)
    raise ValueError("matrix is not nilpotent")


def charpoly(A: Mat) -> tuple:
    """Coefficients ``(1, c1, ..., cn)`` of det(x I - A), by Faddeev-LeVerrier."""
    n = len(A)
    coeffs = [Fraction(1)]
    M = zeros(n)
    I = identity(n)
    for k in range(1, n + 1):
        M = add(matmul(A, M), scale(coeffs[-1], I))
        AM = matmul(A, M)
        c = -sum(AM[i][i] for i in range(n)) / k
        coeffs.append(c)
    return tuple(coeffs)


def restrict(A: Mat, S: Subspace) -> Mat:
    """Matrix of ``A`` on an A-stable subspace in the canonical basis of ``S``."""
    _, piv = rref(S)
    cols = [tuple(apply(A, s)[c] for c in piv) for s in S]
    return transpose(cols)


def vp(x, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    x = frac(x)
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v

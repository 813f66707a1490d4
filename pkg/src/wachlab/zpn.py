"""Linear algebra over the chain ring Z/p^N.

Every ideal of Z/p^N is p^v Z/p^N, so Gaussian elimination with full pivoting
on the entry of least p-adic valuation never needs a division that is not
exact.  After elimination each pivot row is p^v times a row with a unit in the
pivot column, which is what makes both back-substitution and kernel
extraction complete (not merely sound).

Vectors and matrices are plain lists of ints in ``[0, p^N)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache


def vp_int(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@lru_cache(maxsize=64)
def _valuation_table(p: int, N: int):
    mod = p ** N
    if mod > 1 << 20:
        return None
    table = [N] * mod
    for v in range(N):
        step = p ** v
        for r in range(step, mod, step):
            table[r] = v
    return table


class ChainRing:
    """Z/p^N with cached residue valuations."""

    __slots__ = ("p", "N", "mod", "_table")

    def __init__(self, p: int, N: int):
        self.p = p
        self.N = N
        self.mod = p ** N
        self._table = _valuation_table(p, N)

    def val(self, r: int) -> int:
        """Valuation of a residue; ``N`` for zero."""
        r %= self.mod
        if self._table is not None:
            return self._table[r]
        if r == 0:
            return self.N
        return vp_int(r, self.p)

    def split(self, r: int):
        """Write a nonzero residue as ``p^v * u`` and return ``(v, u^-1 mod p^N)``."""
        v = self.val(r)
        u = (r % self.mod) // self.p ** v
        return v, pow(u, -1, self.mod)

    def __eq__(self, other):
        return isinstance(other, ChainRing) and (self.p, self.N) == (other.p, other.N)

    def __hash__(self):
        return hash((self.p, self.N))


@dataclass
class Echelon:
    """Result of :func:`echelon`.

    ``rows`` are the transformed rows in pivot order; row ``k < rank`` has its
    pivot at column ``pivots[k]`` with valuation ``vals[k]`` and every other
    entry of that row not yet eliminated has valuation ``>= vals[k]``.
    ``aug`` carries the same row operations applied to the augmented columns.
    """

    rows: list
    aug: list
    pivots: list
    vals: list

    @property
    def rank(self) -> int:
        return len(self.pivots)


def echelon(ring: ChainRing, rows, aug=None, col_order=None) -> Echelon:
    """Row-reduce ``rows`` with full minimal-valuation pivoting.

    Only row operations are performed; columns are never permuted, pivots are
    just chosen out of order.  Ties in valuation are broken by ``col_order``
    (default: left to right) and then by lowest row index.
    """
    mod, p = ring.mod, ring.p
    rows = [[x % mod for x in r] for r in rows]
    ncols = len(rows[0]) if rows else 0
    aug = [list(a) for a in aug] if aug is not None else [[] for _ in rows]
    order = list(col_order) if col_order is not None else list(range(ncols))
    free = order[:]
    pivots, vals = [], []
    k = 0
    nrows = len(rows)
    while k < nrows and free:
        best = None
        for c in free:
            for r in range(k, nrows):
                x = rows[r][c]
                if x:
                    v = ring.val(x)
                    if best is None or v < best[0]:
                        best = (v, r, c)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        v, r, c = best
        if r != k:
            rows[k], rows[r] = rows[r], rows[k]
            aug[k], aug[r] = aug[r], aug[k]
        prow, paug = rows[k], aug[k]
        _, uinv = ring.split(prow[c])
        pv = p ** v
        for r2 in range(k + 1, nrows):
            x = rows[r2][c]
            if x:
                f = (x // pv) * uinv % mod
                rows[r2] = [(a - f * b) % mod for a, b in zip(rows[r2], prow)]
                if paug:
                    aug[r2] = [(a - f * b) % mod for a, b in zip(aug[r2], paug)]
        pivots.append(c)
        vals.append(v)
        free.remove(c)
        k += 1
    return Echelon(rows, aug, pivots, vals)


class Factored:
    """An echelon form of ``A`` together with the row operations that produced it.

    Built once per matrix; :meth:`solve` then handles any right-hand side with
    one matrix-vector product and a back-substitution.
    """

    def __init__(self, ring: ChainRing, A, col_order=None):
        self.ring = ring
        self.A = [[x % ring.mod for x in r] for r in A]
        m = len(A)
        self.ncols = len(A[0]) if m else 0
        ident = [[int(i == j) for j in range(m)] for i in range(m)]
        self.ech = echelon(ring, self.A, ident, col_order)
        self._sparse = [[(i, e) for i, e in enumerate(erow) if e] for erow in self.ech.aug]
        p = ring.p
        self._pinv = [(p ** v, ring.split(row[c])[1], p ** (ring.N - v))
                      for row, c, v in zip(self.ech.rows, self.ech.pivots, self.ech.vals)]
        self._rank = self.ech.rank
        # off-pivot entries of each echelon row that meet later pivot columns
        self._tail = [[(c2, row[c2]) for c2 in self.ech.pivots[k + 1:] if row[c2]]
                      for k, row in enumerate(self.ech.rows[:self._rank])]

    def _transform(self, b):
        mod = self.ring.mod
        out = []
        for erow in self._sparse:
            acc = 0
            for i, e in erow:
                acc += e * b[i]
            out.append(acc % mod)
        return out

    def _back(self, rhs, exact: bool):
        mod = self.ring.mod
        pivots = self.ech.pivots
        x = [0] * self.ncols
        for k in range(self._rank - 1, -1, -1):
            s = rhs[k]
            for c2, a in self._tail[k]:
                s -= a * x[c2]
            s %= mod
            pv, uinv, top = self._pinv[k]
            if exact:
                if s % pv:
                    return None, k
                x[pivots[k]] = (s // pv) * uinv % top
            else:
                x[pivots[k]] = (s // pv) * uinv % mod
        return x, None

    def solve(self, b):
        """``(x, None)`` with ``A x = b``, or ``(None, index)`` when ``b`` is not in the span."""
        rhs = self._transform(b)
        for r in range(self._rank, len(rhs)):
            if rhs[r]:
                return None, r
        return self._back(rhs, True)

    def partial(self, b, rhs=None):
        """Best-effort solution; ``A x - b`` vanishes exactly when ``b`` is in the span."""
        return self._back(self._transform(b) if rhs is None else rhs, False)[0]

    def solve_or_obstruct(self, b):
        """``(x, None)`` on success, else ``(None, (index, value))`` for the first
        nonzero entry of the residual left by :meth:`partial`."""
        rhs = self._transform(b)
        ok = not any(rhs[self._rank:])
        if ok:
            x, _ = self._back(rhs, True)
            if x is not None:
                return x, None
        res = self.residual(self._back(rhs, False)[0], b)
        idx = next(i for i, v in enumerate(res) if v)
        return None, (idx, res[idx])

    def residual(self, x, b):
        mod = self.ring.mod
        return [(bi - sum(a * xi for a, xi in zip(row, x) if a and xi)) % mod for row, bi in zip(self.A, b)]


def solve(ring: ChainRing, A, b, col_order=None):
    """Return ``x`` with ``A x = b`` over Z/p^N, or ``None`` when no solution exists.

    ``A`` is a list of rows.  The second return value is the residual row
    index in the echelon system where solvability failed (``None`` on
    success); callers use it only for diagnostics.
    """
    return Factored(ring, A, col_order).solve(b)


def partial_solve(ring: ChainRing, A, b, col_order=None):
    """Best-effort solution: solves the unit part of each pivot equation.

    Always returns a vector; ``A x - b`` is zero exactly when ``b`` is in the
    column span.  Used to produce a deterministic obstruction.
    """
    return Factored(ring, A, col_order).partial(b)


def kernel(ring: ChainRing, A, ncols=None):
    """Generators of ``{x : A x = 0}`` as a Z/p^N-module.

    Computed from an echelon form of ``A^T`` augmented with the identity: rows
    whose A-part vanished are kernel vectors outright, and a pivot row of
    valuation ``v`` contributes ``p^(N-v)`` times its transform.
    """
    mod, p, N = ring.mod, ring.p, ring.N
    n = ncols if ncols is not None else (len(A[0]) if A else 0)
    m = len(A)
    if m == 0:
        return [[int(i == j) for j in range(n)] for i in range(n)]
    At = [[A[i][j] for i in range(m)] for j in range(n)]
    ident = [[int(i == j) for j in range(n)] for i in range(n)]
    ech = echelon(ring, At, ident)
    gens = []
    for k in range(ech.rank):
        v = ech.vals[k]
        if v > 0:
            f = p ** (N - v)
            g = [(f * a) % mod for a in ech.aug[k]]
            if any(g):
                gens.append(g)
    for r in range(ech.rank, n):
        gens.append(ech.aug[r])
    return gens


def module_basis(ring: ChainRing, vectors, col_order=None):
    """Echelon generators of the Z/p^N-span of ``vectors``.

    Returns ``(rows, pivots, vals)``; the rows generate the same module and
    row ``k`` equals ``p^vals[k]`` times a vector with a unit at ``pivots[k]``.
    """
    if not vectors:
        return [], [], []
    ech = echelon(ring, vectors, None, col_order)
    r = ech.rank
    return ech.rows[:r], ech.pivots, ech.vals


def in_span(ring: ChainRing, vectors, target) -> bool:
    if not any(x % ring.mod for x in target):
        return True
    if not vectors:
        return False
    n = len(target)
    A = [[vec[i] for vec in vectors] for i in range(n)]
    x, _ = solve(ring, A, target)
    return x is not None

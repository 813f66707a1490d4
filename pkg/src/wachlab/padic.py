"""Truncated power series over Z/p^N and matrices of them.

The ring is R = (Z/p^Np)[[X]]/(X^Mx), the finite avatar of Z_p[[X]].  It
carries two substitution endomorphisms, X -> (1+X)^p - 1 (Frobenius) and
X -> (1+X)^a - 1 (a cyclotomic character value).  Both send X to X times a
unit-free series of valuation 1, so they preserve (X^Mx) and are well defined
on R.

Series are immutable tuples of residues.  Matrices of series are stored as an
``(rows, cols, Mx)`` numpy array so that products and substitutions run
vectorised.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidCharacterValue, NotAUnit, NotInSpan, ParameterError
from .zpn import ChainRing, Factored, kernel


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def binom(a: int, k: int) -> int:
    """Generalised binomial coefficient C(a, k) for any integer ``a``."""
    if k < 0:
        return 0
    num = 1
    for i in range(k):
        num *= a - i
    den = 1
    for i in range(2, k + 1):
        den *= i
    return num // den


@dataclass(frozen=True)
class RingParams:
    p: int
    Np: int
    Mx: int

    def __post_init__(self):
        if not (isinstance(self.p, int) and _is_prime(self.p) and self.p >= 3):
            raise ParameterError(f"p must be an odd prime, got {self.p}")
        if self.Np < 1:
            raise ParameterError("Np must be >= 1")
        if self.Mx < 2:
            raise ParameterError("Mx must be >= 2")

    @property
    def modulus(self) -> int:
        return self.p ** self.Np

    @property
    def guard(self) -> int:
        """p-adic digits a character value must carry so that all binomials
        C(a, k), k < Mx, are correct modulo p^Np."""
        return self.Np + self.Mx // (self.p - 1)

    @property
    def chain(self) -> ChainRing:
        return _chain(self.p, self.Np)

    def with_precision(self, Np: int) -> "RingParams":
        return RingParams(self.p, Np, self.Mx)


@lru_cache(maxsize=None)
def _chain(p, N):
    return ChainRing(p, N)


def _check(a: "TruncSeries", b: "TruncSeries"):
    if a.params != b.params:
        raise ParameterError(f"mismatched ring parameters {a.params} vs {b.params}")


@dataclass(frozen=True)
class TruncSeries:
    """An element of (Z/p^Np)[[X]]/(X^Mx); ``coeffs[k]`` is the X^k coefficient."""

    params: RingParams
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.params.Mx:
            raise ParameterError(f"expected {self.params.Mx} coefficients, got {len(self.coeffs)}")

    @classmethod
    def of(cls, params: RingParams, coeffs: Iterable[int] = ()) -> "TruncSeries":
        """Build from any coefficient list: reduced mod p^Np, padded or truncated to Mx."""
        mod, M = params.modulus, params.Mx
        c = [int(x) % mod for x in list(coeffs)[:M]]
        c += [0] * (M - len(c))
        return cls(params, tuple(c))

    @classmethod
    def zero(cls, params):
        return cls(params, (0,) * params.Mx)

    @classmethod
    def one(cls, params):
        return cls.of(params, [1])

    @classmethod
    def x(cls, params):
        return cls.of(params, [0, 1])

    @classmethod
    def monomial(cls, params, k: int, c: int = 1):
        if k >= params.Mx:
            return cls.zero(params)
        return cls.of(params, [0] * k + [c])

    def _coerce(self, other):
        if isinstance(other, TruncSeries):
            _check(self, other)
            return other
        if isinstance(other, int):
            return TruncSeries.of(self.params, [other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        mod = self.params.modulus
        return TruncSeries(self.params, tuple((a + b) % mod for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        mod = self.params.modulus
        return TruncSeries(self.params, tuple((-a) % mod for a in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return TruncSeries(self.params, _mul(self.coeffs, other.coeffs, self.params.modulus))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return invert(self) ** (-n)
        result = TruncSeries.one(self.params)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    @property
    def constant_term(self) -> int:
        return self.coeffs[0]

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_unit(self) -> bool:
        return self.coeffs[0] % self.params.p != 0

    def reduce(self, params: RingParams) -> "TruncSeries":
        """Image under the reduction map to a coarser ring (same p)."""
        if params.p != self.params.p or params.Np > self.params.Np or params.Mx > self.params.Mx:
            raise ParameterError(f"cannot reduce {self.params} to {params}")
        return TruncSeries.of(params, self.coeffs[: params.Mx])

    def __str__(self):
        return "[" + ",".join(str(c) for c in self.coeffs) + "]"

    def __repr__(self):
        return f"TruncSeries({self})"


def _mul(a: Sequence[int], b: Sequence[int], mod: int) -> tuple:
    M = len(a)
    out = [0] * M
    for i, ai in enumerate(a):
        if ai:
            for j in range(M - i):
                bj = b[j]
                if bj:
                    out[i + j] += ai * bj
    return tuple(x % mod for x in out)


def invert(a: TruncSeries) -> TruncSeries:
    """Multiplicative inverse; the constant term must be prime to p."""
    params = a.params
    mod, M = params.modulus, params.Mx
    c = a.coeffs
    if c[0] % params.p == 0:
        raise NotAUnit(f"constant term {c[0]} is divisible by p={params.p}")
    inv0 = pow(c[0], -1, mod)
    b = [inv0] + [0] * (M - 1)
    for n in range(1, M):
        s = 0
        for k in range(1, n + 1):
            if c[k]:
                s += c[k] * b[n - k]
        b[n] = (-s * inv0) % mod
    return TruncSeries(params, tuple(b))


def x_valuation(a: TruncSeries) -> Optional[int]:
    """Smallest k with a nonzero X^k coefficient; ``None`` for zero."""
    for k, c in enumerate(a.coeffs):
        if c:
            return k
    return None


def p_valuation(a: TruncSeries) -> int:
    """Least p-adic valuation of a coefficient; ``Np`` for zero."""
    ch = a.params.chain
    return min((ch.val(c) for c in a.coeffs), default=a.params.Np)


def _power_minus_one(params: RingParams, exponent: int) -> tuple:
    """Coefficients of (1+X)^exponent - 1 from exact integer binomials."""
    mod = params.modulus
    return tuple([0] + [binom(exponent, k) % mod for k in range(1, params.Mx)])


@lru_cache(maxsize=256)
def _subst_table(params: RingParams, s: tuple) -> np.ndarray:
    """Row k holds the coefficients of s^k, for a series s with zero constant term."""
    M, mod = params.Mx, params.modulus
    rows = [tuple([1] + [0] * (M - 1))]
    for _ in range(1, M):
        rows.append(_mul(rows[-1], s, mod))
    dtype = np.int64 if (mod - 1) ** 2 * M < 2 ** 62 else object
    table = np.array(rows, dtype=dtype)
    table.flags.writeable = False
    return table


def _compose(a: TruncSeries, s: tuple) -> TruncSeries:
    params = a.params
    table = _subst_table(params, s)
    mod, M = params.modulus, params.Mx
    out = [0] * M
    for k, ak in enumerate(a.coeffs):
        if ak:
            row = table[k]
            for n in range(k, M):
                out[n] += ak * int(row[n])
    return TruncSeries(params, tuple(x % mod for x in out))


def phi_x(params: RingParams) -> tuple:
    return _power_minus_one(params, params.p)


def gamma_x(params: RingParams, exponent: int) -> tuple:
    if exponent % params.p == 0:
        raise InvalidCharacterValue(f"character value {exponent} is divisible by p={params.p}")
    return _power_minus_one(params, exponent)


def subst_phi(a: TruncSeries) -> TruncSeries:
    """a(X) -> a((1+X)^p - 1)."""
    return _compose(a, phi_x(a.params))


def subst_gamma(a: TruncSeries, exponent: int) -> TruncSeries:
    """a(X) -> a((1+X)^exponent - 1) for an integer character value prime to p.

    The binomials are computed as exact integers, so a representative carrying
    ``params.guard`` digits gives the answer to full precision.
    """
    return _compose(a, gamma_x(a.params, exponent))


def q_series(params: RingParams) -> TruncSeries:
    """q = phi(X)/X = ((1+X)^p - 1)/X, computed before truncation."""
    return TruncSeries.of(params, [binom(params.p, k + 1) for k in range(params.Mx)])


def gamma_quotient(params: RingParams, exponent: int) -> TruncSeries:
    """((1+X)^exponent - 1)/X, computed before truncation."""
    if exponent % params.p == 0:
        raise InvalidCharacterValue(f"character value {exponent} is divisible by p={params.p}")
    return TruncSeries.of(params, [binom(exponent, k + 1) for k in range(params.Mx)])


# --------------------------------------------------------------------------
# matrices


def _dtype(params: RingParams, inner: int):
    if (params.modulus - 1) ** 2 * max(inner, 1) * params.Mx < 2 ** 62:
        return np.int64
    return object


@dataclass(frozen=True, eq=False)
class SeriesMatrix:
    """rows x cols matrix over R, backed by an ``(rows, cols, Mx)`` residue array."""

    params: RingParams
    arr: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = self.arr
        if a.ndim != 3 or a.shape[2] != self.params.Mx or a.shape[0] < 1 or a.shape[1] < 1:
            raise ParameterError(f"bad series matrix shape {a.shape}")
        a = np.array(a % self.params.modulus, dtype=_dtype(self.params, 1) if self.params.modulus < 2 ** 31 else object)
        a.flags.writeable = False
        object.__setattr__(self, "arr", a)

    # construction ---------------------------------------------------------
    @classmethod
    def from_entries(cls, params: RingParams, entries) -> "SeriesMatrix":
        """``entries`` is a nested list of TruncSeries, ints, or coefficient lists."""
        rows = len(entries)
        cols = len(entries[0])
        arr = np.zeros((rows, cols, params.Mx), dtype=object)
        for i, row in enumerate(entries):
            if len(row) != cols:
                raise ParameterError("ragged matrix")
            for j, e in enumerate(row):
                arr[i, j, :] = _as_series(params, e).coeffs
        return cls(params, arr)

    @classmethod
    def zeros(cls, params, rows, cols):
        return cls(params, np.zeros((rows, cols, params.Mx), dtype=np.int64))

    @classmethod
    def identity(cls, params, n):
        arr = np.zeros((n, n, params.Mx), dtype=np.int64)
        for i in range(n):
            arr[i, i, 0] = 1
        return cls(params, arr)

    @classmethod
    def diag(cls, params, entries):
        n = len(entries)
        arr = np.zeros((n, n, params.Mx), dtype=object)
        for i, e in enumerate(entries):
            arr[i, i, :] = _as_series(params, e).coeffs
        return cls(params, arr)

    @classmethod
    def from_constants(cls, params, rows):
        """Matrix of constant series from a nested list of integers."""
        arr = np.zeros((len(rows), len(rows[0]), params.Mx), dtype=object)
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                arr[i, j, 0] = int(x)
        return cls(params, arr)

    @classmethod
    def hstack(cls, mats):
        params = mats[0].params
        for m in mats:
            if m.params != params:
                raise ParameterError("mismatched ring parameters")
        return cls(params, np.concatenate([m.arr for m in mats], axis=1))

    @classmethod
    def block_diag(cls, a: "SeriesMatrix", b: "SeriesMatrix"):
        if a.params != b.params:
            raise ParameterError("mismatched ring parameters")
        r1, c1, M = a.arr.shape
        r2, c2, _ = b.arr.shape
        arr = np.zeros((r1 + r2, c1 + c2, M), dtype=object)
        arr[:r1, :c1] = a.arr
        arr[r1:, c1:] = b.arr
        return cls(a.params, arr)

    # access ---------------------------------------------------------------
    @property
    def shape(self):
        return self.arr.shape[:2]

    @property
    def rows(self) -> int:
        return self.arr.shape[0]

    @property
    def cols(self) -> int:
        return self.arr.shape[1]

    def entry(self, i, j) -> TruncSeries:
        return TruncSeries(self.params, tuple(int(x) for x in self.arr[i, j]))

    def entries(self):
        return [[self.entry(i, j) for j in range(self.cols)] for i in range(self.rows)]

    def column(self, j) -> "SeriesMatrix":
        return SeriesMatrix(self.params, self.arr[:, j:j + 1, :])

    def columns(self):
        return [self.column(j) for j in range(self.cols)]

    def mod_x(self):
        """Constant terms as a nested list of residues."""
        return [[int(x) for x in row] for row in self.arr[:, :, 0]]

    # arithmetic -----------------------------------------------------------
    def _same(self, other):
        if not isinstance(other, SeriesMatrix):
            raise TypeError(f"expected SeriesMatrix, got {type(other).__name__}")
        if other.params != self.params:
            raise ParameterError(f"mismatched ring parameters {self.params} vs {other.params}")

    def __add__(self, other):
        self._same(other)
        if self.shape != other.shape:
            raise ParameterError("shape mismatch")
        return SeriesMatrix(self.params, _wide(self.arr) + _wide(other.arr))

    def __sub__(self, other):
        self._same(other)
        if self.shape != other.shape:
            raise ParameterError("shape mismatch")
        return SeriesMatrix(self.params, _wide(self.arr) - _wide(other.arr))

    def __neg__(self):
        return SeriesMatrix(self.params, -_wide(self.arr))

    def __matmul__(self, other):
        self._same(other)
        if self.cols != other.rows:
            raise ParameterError(f"cannot multiply {self.shape} by {other.shape}")
        return SeriesMatrix(self.params, _conv_matmul(self.arr, other.arr, self.params))

    def scale(self, s) -> "SeriesMatrix":
        """Multiply every entry by a series or integer."""
        s = _as_series(self.params, s)
        d = SeriesMatrix.diag(self.params, [s] * self.rows)
        return d @ self

    def __eq__(self, other):
        return (isinstance(other, SeriesMatrix) and self.params == other.params
                and self.shape == other.shape and bool(np.array_equal(self.arr, other.arr)))

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.arr.any()

    def power(self, n: int) -> "SeriesMatrix":
        result = SeriesMatrix.identity(self.params, self.rows)
        base = self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def subst_phi(self) -> "SeriesMatrix":
        return self._subst(phi_x(self.params))

    def subst_gamma(self, exponent: int) -> "SeriesMatrix":
        return self._subst(gamma_x(self.params, exponent))

    def _subst(self, s):
        table = _subst_table(self.params, s)
        a = self.arr
        if table.dtype == object or a.dtype == object:
            out = np.tensordot(a.astype(object), table.astype(object), axes=([2], [0]))
        else:
            out = np.tensordot(a, table, axes=([2], [0]))
        return SeriesMatrix(self.params, out)

    def reduce(self, params: RingParams) -> "SeriesMatrix":
        if params.p != self.params.p or params.Np > self.params.Np or params.Mx > self.params.Mx:
            raise ParameterError(f"cannot reduce {self.params} to {params}")
        return SeriesMatrix(params, _wide(self.arr[:, :, : params.Mx]))

    def x_valuation(self) -> Optional[int]:
        nz = np.nonzero(self.arr.any(axis=(0, 1)))[0]
        return int(nz[0]) if len(nz) else None

    def p_valuation(self) -> int:
        ch = self.params.chain
        return min((ch.val(int(x)) for x in self.arr.flat if x), default=self.params.Np)

    def divide_by_x(self) -> "SeriesMatrix":
        """Exact division by X, for matrices with entries in (X).

        The top coefficient of the quotient is unknown after truncation and is
        set to zero; multiplying back by X recovers the input exactly.
        """
        if self.arr[:, :, 0].any():
            raise ParameterError("entries are not divisible by X")
        arr = np.zeros_like(self.arr)
        arr[:, :, :-1] = self.arr[:, :, 1:]
        return SeriesMatrix(self.params, arr)

    def times_x(self, k: int = 1) -> "SeriesMatrix":
        arr = np.zeros_like(self.arr)
        M = self.params.Mx
        if k < M:
            arr[:, :, k:] = self.arr[:, :, : M - k]
        return SeriesMatrix(self.params, arr)

    def flatten(self):
        """Column-major list of coefficient vectors (one per column), degree-major inside."""
        return [[int(x) for x in self.arr[:, j, :].T.reshape(-1)] for j in range(self.cols)]

    def __str__(self):
        return "\n".join(" ".join(str(self.entry(i, j)) for j in range(self.cols)) for i in range(self.rows))


def _wide(a):
    return a.astype(object) if a.dtype == object else a.astype(np.int64)


def _as_series(params, e) -> TruncSeries:
    if isinstance(e, TruncSeries):
        if e.params != params:
            raise ParameterError("mismatched ring parameters")
        return e
    if isinstance(e, (int, np.integer)):
        return TruncSeries.of(params, [int(e)])
    return TruncSeries.of(params, e)


def _conv_matmul(A, B, params: RingParams):
    r, c, M = A.shape
    s = B.shape[1]
    dtype = _dtype(params, c)
    A = A.astype(dtype)
    B = B.astype(dtype)
    out = np.zeros((r, s, M), dtype=dtype)
    mod = params.modulus
    for m in range(M):
        Am = A[:, :, m]
        if not Am.any():
            continue
        out[:, :, m:] += np.tensordot(Am, B[:, :, : M - m], axes=([1], [0]))
        if dtype is np.int64 and m % 8 == 7:
            out %= mod
    return out % mod


def vector(params: RingParams, entries) -> SeriesMatrix:
    """Column vector from a list of series-like entries."""
    return SeriesMatrix.from_entries(params, [[e] for e in entries])


def berkowitz_det(A: SeriesMatrix) -> TruncSeries:
    """Division-free determinant (Berkowitz), valid over the non-domain R."""
    params = A.params
    n = A.rows
    if n != A.cols:
        raise ParameterError("determinant of a non-square matrix")
    one = SeriesMatrix.identity(params, 1)
    # characteristic-polynomial coefficient vector for the leading 1x1 block
    poly = [one, -SeriesMatrix(params, A.arr[0:1, 0:1, :])]
    for k in range(1, n):
        a_kk = SeriesMatrix(params, A.arr[k:k + 1, k:k + 1, :])
        R = SeriesMatrix(params, A.arr[k:k + 1, :k, :])
        C = SeriesMatrix(params, A.arr[:k, k:k + 1, :])
        Ak = SeriesMatrix(params, A.arr[:k, :k, :])
        # Toeplitz column: 1, -a_kk, -R C, -R A C, -R A^2 C, ...
        col = [one, -a_kk]
        v = C
        for _ in range(k):
            col.append(-(R @ v))
            v = Ak @ v
        new = []
        for i in range(k + 2):
            acc = SeriesMatrix.zeros(params, 1, 1)
            for j in range(min(i, k) + 1):
                if i - j < len(col):
                    acc = acc + col[i - j] @ poly[j]
            new.append(acc)
        poly = new
    det = poly[n] if n % 2 == 0 else -poly[n]
    return det.entry(0, 0)


# --------------------------------------------------------------------------
# membership


def _flatten_system(cols: SeriesMatrix):
    """Z/p^N matrix of c -> cols . c on coefficient vectors.

    Unknown ``(j, m)`` (coefficient X^m of c_j) sits at column ``m*ncols + j``;
    equation ``(i, n)`` at row ``n*rows + i``, so low X-degrees come first.
    """
    r, c, M = cols.arr.shape
    A = np.zeros((M, r, M, c), dtype=object)
    arr = cols.arr.astype(object)
    for m in range(M):
        A[m:, :, m, :] = arr[:, :, : M - m].transpose(2, 0, 1)
    return [[int(x) for x in row] for row in A.reshape(M * r, M * c)]


def _flatten_target(target: SeriesMatrix):
    return [int(x) for x in target.arr[:, 0, :].T.reshape(-1)]


class MembershipSolver:
    """Decides ``cols . c = target`` in R for a fixed ``cols`` and many targets.

    The R-linear system is flattened to a Z/p^Np system on coefficient
    vectors and eliminated once with least-valuation pivots; ties go to the
    lower X degree and then to the lower row, so answers are deterministic.
    """

    def __init__(self, cols: SeriesMatrix):
        self.cols = cols
        params = cols.params
        M, n = params.Mx, cols.cols
        # unknown (j, m) sits at m*n + j: scanning columns in index order prefers low degree
        self._fac = Factored(params.chain, _flatten_system(cols), list(range(M * n)))

    def solve(self, target) -> tuple:
        cols = self.cols
        params = cols.params
        if not isinstance(target, SeriesMatrix):
            target = vector(params, list(target))
        if target.params != params:
            raise ParameterError("mismatched ring parameters")
        if target.rows != cols.rows or target.cols != 1:
            raise ParameterError(f"target shape {target.shape} does not match {cols.shape}")
        return self.solve_flat(_flatten_target(target))

    def solve_flat(self, b) -> tuple:
        """Same as :meth:`solve` on a target already flattened degree-major."""
        x, obstruction = self._fac.solve_or_obstruct(b)
        cols = self.cols
        if x is None:
            idx, val = obstruction
            n, i = divmod(idx, cols.rows)
            raise NotInSpan((i, n), val)
        ncols, params = cols.cols, cols.params
        return tuple([TruncSeries(params, tuple(x[j::ncols])) for j in range(ncols)])


def solve_membership(cols: SeriesMatrix, target) -> tuple:
    """Coefficients ``c`` (a tuple of series) with ``cols . c = target`` exactly in R.

    ``target`` is a column SeriesMatrix or a sequence of series.  Raises
    :class:`NotInSpan` with the first nonzero coefficient (row, degree) of the
    residual left by the best partial solution when no exact solution exists.
    """
    return MembershipSolver(cols).solve(target)


def module_kernel(A: SeriesMatrix) -> list:
    """Generators of ``{c in R^cols : A c = 0}`` as column SeriesMatrices."""
    params = A.params
    M, ncols = params.Mx, A.cols
    gens = kernel(params.chain, _flatten_system(A), M * ncols)
    out = []
    for g in gens:
        arr = np.zeros((ncols, 1, M), dtype=object)
        for m in range(M):
            for j in range(ncols):
                arr[j, 0, m] = g[m * ncols + j]
        col = SeriesMatrix(params, arr)
        if not col.is_zero():
            out.append(col)
    return out


def in_module(gens, target: SeriesMatrix) -> bool:
    """Whether ``target`` lies in the R-span of the column list ``gens``."""
    if target.is_zero():
        return True
    if not gens:
        return False
    try:
        solve_membership(SeriesMatrix.hstack(list(gens)), target)
        return True
    except NotInSpan:
        return False


def lift_symmetric(r: int, modulus: int) -> int:
    """Representative of ``r mod modulus`` in (-modulus/2, modulus/2]."""
    r %= modulus
    return r - modulus if r > modulus // 2 else r

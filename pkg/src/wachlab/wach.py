"""Wach modules over R = (Z/p^Np)[[X]]/(X^Mx).

A Wach module of rank d is recorded by three d x d matrices over R, each
column holding the coordinates of the image of a basis vector:

* ``P`` for Frobenius (semilinear over phi),
* ``T`` for tau, which fixes X and therefore acts linearly,
* ``G`` for the generator gamma0 of Gamma with character value ``chi0``.

With these conventions the three commutation rules read

    T P = P phi(T),    G gamma(P) = P phi(G),    G gamma(T) = T^chi0 G.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import linalg as la
from .errors import (InvariantError, NotInSpan, NotUnipotent, NotUnipotentModX, ParameterError,
                     PrecisionError)
from .filtered import Flag, FilPhiNModule, isomorphic
from .padic import (RingParams, SeriesMatrix, TruncSeries, berkowitz_det, binom, gamma_quotient,
                    in_module, lift_symmetric, module_kernel, q_series, solve_membership)
from .zpn import kernel, module_basis


@dataclass(frozen=True, eq=False)
class WachModule:
    params: RingParams
    rank: int
    P: SeriesMatrix
    T: SeriesMatrix
    G: SeriesMatrix
    chi0: int

    def __post_init__(self):
        for name, M in (("P", self.P), ("T", self.T), ("G", self.G)):
            if M.params != self.params:
                raise ParameterError(f"{name} lives over {M.params}, module over {self.params}")
            if M.shape != (self.rank, self.rank):
                raise InvariantError(f"{name}-shape", f"{name} must be {self.rank}x{self.rank}")
        if self.chi0 % self.params.p == 0:
            raise InvariantError("chi0-unit", f"chi0={self.chi0} is divisible by p")

    def __eq__(self, other):
        return (isinstance(other, WachModule) and self.params == other.params and self.rank == other.rank
                and self.chi0 == other.chi0 and self.P == other.P and self.T == other.T and self.G == other.G)

    __hash__ = None


def default_chi0(p: int) -> int:
    return 1 + p


# --------------------------------------------------------------------------
# builders


def build_standard_wach(i: int, j: int, params: RingParams, chi0: Optional[int] = None) -> WachModule:
    """The Wach lattice of V_i(-j) on the basis f_k = X^(k+j) (x) e^k."""
    if i < 1 or j < 0:
        raise ParameterError(f"standard Wach module needs i >= 1 and j >= 0, got ({i},{j})")
    chi0 = default_chi0(params.p) if chi0 is None else chi0
    q = q_series(params)
    gq = gamma_quotient(params, chi0)
    chi_inv = pow(chi0, -1, params.modulus)
    P = SeriesMatrix.diag(params, [q ** (k + j) for k in range(i)])
    G = SeriesMatrix.diag(params, [(gq ** (k + j)) * pow(chi_inv, k + j, params.modulus) for k in range(i)])
    T = SeriesMatrix.from_entries(params, [[TruncSeries.monomial(params, k - m, binom(k, m)) if m <= k else 0
                                            for k in range(i)] for m in range(i)])
    return WachModule(params, i, P, T, G, chi0)


def trivial_wach(params: RingParams) -> WachModule:
    return build_standard_wach(1, 0, params)


def direct_sum_wach(W1: WachModule, W2: WachModule) -> WachModule:
    if W1.params != W2.params or W1.chi0 != W2.chi0:
        raise ParameterError("direct sum of Wach modules over different rings")
    return WachModule(W1.params, W1.rank + W2.rank, SeriesMatrix.block_diag(W1.P, W2.P),
                      SeriesMatrix.block_diag(W1.T, W2.T), SeriesMatrix.block_diag(W1.G, W2.G), W1.chi0)


# --------------------------------------------------------------------------
# relations


def _ident(W):
    return SeriesMatrix.identity(W.params, W.rank)


def tau_power(T: SeriesMatrix, a: int) -> SeriesMatrix:
    """T^a = sum_k C(a, k) (T - 1)^k, for T congruent to 1 mod X."""
    params = T.params
    I = SeriesMatrix.identity(params, T.rows)
    L = T - I
    if L.arr[:, :, 0].any():
        raise NotUnipotentModX("tau matrix is not congruent to the identity mod X")
    out = I
    Lk = I
    for k in range(1, params.Mx):
        Lk = Lk @ L
        if Lk.is_zero():
            break
        out = out + Lk.scale(binom(a, k))
    return out


@dataclass(frozen=True)
class Residual:
    """Outcome of one matrix identity: zero, or the (p, X)-valuations of the difference."""

    name: str
    passed: bool
    p_val: int
    x_val: int

    @classmethod
    def of(cls, name, diff: SeriesMatrix):
        if diff.is_zero():
            return cls(name, True, diff.params.Np, diff.params.Mx)
        return cls(name, False, diff.p_valuation(), diff.x_valuation())


@dataclass(frozen=True)
class Positivity:
    """``status`` is "pass", "fail" or "undecided" (s not determined at this precision)."""

    s: Optional[int]
    status: str
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass(frozen=True)
class WachReport:
    residuals: tuple
    positivity: Positivity
    unipotence_index: Optional[int]
    monodromy_index: Optional[int]

    @property
    def relations_passed(self) -> bool:
        return all(r.passed for r in self.residuals)

    @property
    def passed(self) -> bool:
        return self.relations_passed and self.positivity.status != "fail"

    def residual(self, name) -> Residual:
        return next(r for r in self.residuals if r.name == name)


def positivity(W: WachModule) -> Positivity:
    """det P = unit * q^s.

    s is read from the p-adic valuation of the constant term of det P, or,
    when that term vanishes at the working precision, from the X-adic
    valuation of det P mod p (q is X^(p-1) mod p).  Divisibility by q^s with a
    unit quotient is then checked exactly.
    """
    params = W.params
    p = params.p
    d = berkowitz_det(W.P)
    c0 = d.constant_term
    if c0:
        s = params.chain.val(c0)
    else:
        xv = next((k for k, c in enumerate(d.coeffs) if c % p), None)
        if xv is None:
            return Positivity(None, "undecided", "det P vanishes mod (p, X^Mx); s exceeds the precision")
        if xv % (p - 1):
            return Positivity(None, "fail", f"det P mod p has X-valuation {xv}, not a multiple of {p - 1}")
        s = xv // (p - 1)
    qs = q_series(params) ** s
    try:
        (u,) = solve_membership(SeriesMatrix.from_entries(params, [[qs]]), [d])
    except NotInSpan:
        return Positivity(s, "fail", f"det P is not divisible by q^{s}")
    if not u.is_unit():
        return Positivity(s, "fail", f"det P / q^{s} is not a unit")
    return Positivity(s, "pass")


def _unipotence_index(W) -> Optional[int]:
    L = W.T - _ident(W)
    Lk = _ident(W)
    for k in range(W.params.Mx + 1):
        if Lk.is_zero():
            return k
        Lk = Lk @ L
    return None


def check_relations(W: WachModule) -> WachReport:
    I = _ident(W)
    res = [Residual.of("tau-trivial-mod-X", _modx_pad(W.T - I)),
           Residual.of("gamma-trivial-mod-X", _modx_pad(W.G - I)),
           Residual.of("phi-tau", W.T @ W.P - W.P @ W.T.subst_phi()),
           Residual.of("gamma-phi", W.G @ W.P.subst_gamma(W.chi0) - W.P @ W.G.subst_phi())]
    try:
        Tchi = tau_power(W.T, W.chi0)
        res.append(Residual.of("gamma-tau", W.G @ W.T.subst_gamma(W.chi0) - Tchi @ W.G))
    except NotUnipotentModX:
        res.append(Residual("gamma-tau", False, 0, 0))
    try:
        mono = monodromy(W)
        mindex = mono.index
    except (NotUnipotentModX, PrecisionError):
        mindex = None
    return WachReport(tuple(res), positivity(W), _unipotence_index(W), mindex)


def _modx_pad(A: SeriesMatrix) -> SeriesMatrix:
    """The constant-term part of ``A`` as a matrix over R."""
    arr = np.zeros_like(A.arr)
    arr[:, :, 0] = A.arr[:, :, 0]
    return SeriesMatrix(A.params, arr)


# --------------------------------------------------------------------------
# logarithm and monodromy


def _divide(A: SeriesMatrix, k: int) -> SeriesMatrix:
    """A / k with the p-part of k costing digits: the result lives mod p^(Np - v_p(k))."""
    params = A.params
    p = params.p
    v, k0 = 0, k
    while k0 % p == 0:
        k0 //= p
        v += 1
    if v >= params.Np:
        raise PrecisionError(f"division by {k} exhausts the {params.Np} digits of precision")
    pv = p ** v
    if any(int(x) % pv for x in A.arr.flat):
        raise PrecisionError(f"term divided by {k} is not integral")
    target = params.with_precision(params.Np - v)
    inv = pow(k0, -1, target.modulus)
    arr = (A.arr.astype(object) // pv) * inv
    return SeriesMatrix(target, arr[:, :, :])


def _reduce_all(terms):
    Np = min(t.params.Np for t in terms)
    params = terms[0].params.with_precision(Np)
    out = SeriesMatrix.zeros(params, *terms[0].shape)
    for t in terms:
        out = out + t.reduce(params)
    return out


def _modx_nilpotent(L: SeriesMatrix) -> bool:
    """Whether the constant term of L is nilpotent over Z/p^Np."""
    A = SeriesMatrix.from_constants(L.params, [[int(x) for x in row] for row in L.mod_x()])
    return A.power(L.rows).is_zero()


def log_unipotent(T: SeriesMatrix) -> SeriesMatrix:
    """log T = sum_{k>=1} (-1)^(k+1) (T - 1)^k / k, at the precision the divisions allow.

    The sum is finite because either T - 1 is nilpotent or its entries lie in
    (X), so its powers vanish past Mx.  Any term that is not divisible by its
    denominator raises PrecisionError, since the logarithm is then not integral.
    """
    params = T.params
    I = SeriesMatrix.identity(params, T.rows)
    L = T - I
    if not _modx_nilpotent(L):
        raise NotUnipotent("tau mod X is not unipotent")
    terms = [SeriesMatrix.zeros(params, T.rows, T.cols)]
    Lk = I
    for k in range(1, params.Mx * T.rows + 1):
        Lk = Lk @ L
        if Lk.is_zero():
            break
        term = _divide(Lk, k)
        terms.append(term if k % 2 else -term)
    else:
        raise NotUnipotent("tau - 1 is not nilpotent")
    return _reduce_all(terms)


@dataclass(frozen=True, eq=False)
class Monodromy:
    nmat: SeriesMatrix       # N over R at the attained precision
    log_tau: SeriesMatrix
    precision: int           # attained p-adic digits
    nilpotent: bool          # N mod X nilpotent
    index: Optional[int]     # nilpotence index of N mod X

    def mod_x(self) -> list:
        return self.nmat.mod_x()


def monodromy(W: WachModule) -> Monodromy:
    """N = (1/X) log tau."""
    I = _ident(W)
    if (W.T - I).arr[:, :, 0].any():
        raise NotUnipotentModX("tau matrix is not congruent to the identity mod X")
    lt = log_unipotent(W.T)
    N = lt.divide_by_x()
    N0 = _modx_pad(N)
    index = None
    Nk = SeriesMatrix.identity(N.params, W.rank)
    for k in range(W.rank + 1):
        if Nk.is_zero():
            index = k
            break
        Nk = Nk @ N0
    return Monodromy(N, lt, N.params.Np, index is not None, index)


@dataclass(frozen=True)
class ExpCheck:
    passed: bool
    precision: int
    detail: str = ""


def exp_check(W: WachModule) -> ExpCheck:
    """Check tau = exp(X N) at the attainable precision.

    With K the last power of X N that is nonzero, the identity is tested in
    the form K! T = sum_k (K!/k!) (X N)^k, which needs no divisions and holds
    to v_p(K!) fewer digits than N carries.
    """
    try:
        mono = monodromy(W)
    except NotUnipotentModX as exc:
        return ExpCheck(False, 0, str(exc))
    except PrecisionError as exc:
        return ExpCheck(False, 0, f"log tau is not integral: {exc}")
    params = mono.nmat.params
    XN = mono.nmat.times_x()
    powers = [SeriesMatrix.identity(params, W.rank)]
    while True:
        nxt = powers[-1] @ XN
        if nxt.is_zero() or len(powers) > params.Mx * W.rank:
            break
        powers.append(nxt)
    K = len(powers) - 1
    fact = [1]
    for k in range(1, K + 1):
        fact.append(fact[-1] * k)
    lhs = W.T.reduce(params).scale(fact[K])
    rhs = SeriesMatrix.zeros(params, W.rank, W.rank)
    for k, Pk in enumerate(powers):
        rhs = rhs + Pk.scale(fact[K] // fact[k])
    v = 0
    n = fact[K]
    while n % params.p == 0:
        n //= params.p
        v += 1
    prec = params.Np - v
    if prec <= 0:
        return ExpCheck(False, 0, "no digits left after the factorial scaling")
    diff = (lhs - rhs)
    ok = all(int(x) % params.p ** params.Np == 0 for x in diff.arr.flat)
    return ExpCheck(ok, prec, "" if ok else "T differs from exp(X N)")


# --------------------------------------------------------------------------
# filtration recipe and reduction


@dataclass(frozen=True)
class QFiltration:
    level: int
    basis: tuple         # rational basis of Fil^level modulo X (canonical)
    ambiguous: int       # generators dropped as possible truncation torsion


def q_filtration(W: WachModule, i: int) -> QFiltration:
    """Fil^i mod X, where Fil^i = {x : phi(x) in q^i N}.

    The solutions (a, b) of P phi(a) = q^i b are found as the kernel of one
    linear system over Z/p^Np.  Their constant terms a(0) span a lattice whose
    saturation is the answer; generators of valuation at least Np/2 are
    treated as artefacts of truncation and dropped (counted in ``ambiguous``).
    """
    if i < 0:
        raise ParameterError("filtration level must be >= 0")
    params, d = W.params, W.rank
    if i == 0:
        return QFiltration(0, la.full_space(d), 0)
    M = params.Mx
    # a -> P phi(a): phi(a) = S a coefficientwise, so build the matrix column by column
    # from the images of the monomial vectors X^m e_c.
    cols = []
    for m in range(M):
        for c in range(d):
            arr = np.zeros((d, 1, M), dtype=object)
            arr[c, 0, m] = 1
            e = SeriesMatrix(params, arr)
            cols.append(W.P @ e.subst_phi())
    qi = q_series(params) ** i
    for m in range(M):
        for c in range(d):
            arr = np.zeros((d, 1, M), dtype=object)
            arr[c, 0, m] = 1
            e = SeriesMatrix(params, arr)
            cols.append(-e.scale(qi))
    # equation (row r, degree n) at index n*d + r; unknown index = position in cols
    A = [[0] * len(cols) for _ in range(d * M)]
    for u, col in enumerate(cols):
        for r in range(d):
            for n in range(M):
                x = int(col.arr[r, 0, n])
                if x:
                    A[n * d + r][u] = x
    gens = kernel(params.chain, A, len(cols))
    # constant terms of the a-part: unknowns 0..d-1 are (m=0, c)
    consts = [[g[c] for c in range(d)] for g in gens]
    consts = [v for v in consts if any(v)]
    rows, pivots, vals = module_basis(params.chain, consts) if consts else ([], [], [])
    cutoff = max(1, params.Np // 2)
    keep, dropped = [], 0
    for row, v in zip(rows, vals):
        if v >= cutoff:
            dropped += 1
            continue
        pv = params.p ** v
        keep.append([lift_symmetric(x // pv, params.p ** (params.Np - v)) for x in row])
    return QFiltration(i, la.span(keep), dropped)


def _lift_matrix(rows, modulus):
    return tuple(tuple(Fraction(lift_symmetric(x, modulus)) for x in r) for r in rows)


def reduce_mod_X(W: WachModule) -> FilPhiNModule:
    """The filtered (phi, N)-module N/XN."""
    pos = positivity(W)
    mono = monodromy(W)
    phi = _lift_matrix(W.P.mod_x(), W.params.modulus)
    N = _lift_matrix(mono.mod_x(), mono.nmat.params.modulus)
    top = pos.s if pos.s is not None else W.params.Np
    steps = [(0, la.full_space(W.rank))]
    for i in range(1, top + 2):
        F = q_filtration(W, i)
        if not F.basis:
            break
        steps.append((i, F.basis))
    return FilPhiNModule(W.params.p, W.rank, phi, N, Flag(W.rank, tuple(steps)))


# --------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class Verdict:
    items: tuple  # (name, status, detail) with status in {"pass", "fail", "not-checked"}

    @property
    def passed(self) -> bool:
        return all(s != "fail" for _, s, _ in self.items)

    @property
    def status(self) -> str:
        if not self.passed:
            return "fail"
        return "undecided" if any(s == "undecided" for _, s, _ in self.items) else "pass"


def verify_wach(W: WachModule, D: FilPhiNModule) -> Verdict:
    items = []
    if W.rank != D.dim or W.params.p != D.p:
        return Verdict((("shape", "fail", f"rank {W.rank} / p={W.params.p} vs dim {D.dim} / p={D.p}"),))
    rep = check_relations(W)
    for r in rep.residuals:
        items.append((r.name, "pass" if r.passed else "fail",
                      "" if r.passed else f"residual p-val {r.p_val}, X-val {r.x_val}"))
    tn = D.t_N()
    pos = rep.positivity
    if pos.status == "undecided":
        status = "undecided"
    else:
        status = "pass" if pos.passed and pos.s == tn else "fail"
    items.append(("positivity", status, f"s={pos.s} t_N={tn}" + (f" {pos.detail}" if pos.detail else "")))
    try:
        mono = monodromy(W)
        items.append(("monodromy-nilpotent", "pass" if mono.nilpotent else "fail", f"index={mono.index}"))
        R = reduce_mod_X(W)
        U = isomorphic(R, D)
        items.append(("isomorphic-reduction", "pass" if U is not None else "fail",
                      "" if U is not None else "N/XN is not isomorphic to the given module"))
    except (PrecisionError, NotUnipotentModX, InvariantError) as exc:
        items.append(("isomorphic-reduction", "fail", str(exc)))
    items.append(("envelope-comparison", "not-checked", "certified only by the envelope workflow"))
    return Verdict(tuple(items))


# --------------------------------------------------------------------------
# naive envelope


@dataclass(frozen=True, eq=False)
class LogAmbient:
    """tau and gamma0 on the free module with basis u_0..u_(i-1) of constant vectors."""

    params: RingParams
    T: SeriesMatrix
    G: SeriesMatrix
    chi0: int
    M: SeriesMatrix   # columns spanning the tau-fixed submodule X^j u_0


def build_log_ambient(i: int, j: int, params: RingParams, chi0: Optional[int] = None) -> LogAmbient:
    """Constant-coefficient model of V_i(-j) with tau(u_k) = sum_m C(k,m) u_m."""
    if i < 1 or j < 0:
        raise ParameterError("log ambient needs i >= 1 and j >= 0")
    chi0 = default_chi0(params.p) if chi0 is None else chi0
    T = SeriesMatrix.from_constants(params, [[binom(k, m) for k in range(i)] for m in range(i)])
    G = SeriesMatrix.diag(params, [pow(chi0, -(k + j), params.modulus) for k in range(i)])
    arr = np.zeros((i, 1, params.Mx), dtype=object)
    if j < params.Mx:
        arr[0, 0, j] = 1
    return LogAmbient(params, T, G, chi0, SeriesMatrix(params, arr))


@dataclass(frozen=True, eq=False)
class Envelope:
    basis: tuple            # columns (SeriesMatrix, D x 1)
    rank: int
    tau_stable: bool        # (T - 1)(NN) in X NN
    gamma_trivial: Optional[bool]   # (G gamma - 1)(NN) in X NN, when G is given
    r: Optional[int]        # least r with X^r (log tau)^(-n)(M) in NN
    precision: int


def _preimage(A: SeriesMatrix, gens) -> list:
    """Generators of {v : A v in span(gens)}."""
    D = A.rows
    if gens:
        big = SeriesMatrix.hstack([A, -SeriesMatrix.hstack(list(gens))])
    else:
        big = A
    ker = module_kernel(big)
    return [SeriesMatrix(A.params, k.arr[:A.cols]) for k in ker if k.arr[:A.cols].any()]


def _with_shifts(gens):
    """R-module generators -> Z/p^N generators of their span (all X-shifts)."""
    out = []
    for g in gens:
        for t in range(g.params.Mx):
            s = g.times_x(t)
            if s.is_zero():
                break
            out.append(s)
    return out


def _minimal_generators(gens) -> list:
    """Drop generators lying in the span of the kept ones plus m * span(all)."""
    if not gens:
        return []
    params = gens[0].params
    mgens = [g.scale(params.p) for g in gens] + [g.times_x() for g in gens]
    mgens = [g for g in mgens if not g.is_zero()]
    kept = []
    for g in gens:
        if not in_module(kept + mgens, g):
            kept.append(g)
    return kept


def naive_envelope(T_amb: SeriesMatrix, M_basis: SeriesMatrix, n: int,
                   G_amb: Optional[SeriesMatrix] = None, chi0: Optional[int] = None) -> Envelope:
    """The module generated by X^s (log tau)^(-s)(M) for s = 0..n."""
    if n < 0:
        raise ParameterError("envelope index must be >= 0")
    lt = log_unipotent(T_amb)      # raises NotUnipotent
    params = lt.params
    Mcols = [c.reduce(params) for c in M_basis.columns()]
    T = T_amb.reduce(params)
    gens = list(Mcols)
    pre_n = list(Mcols)
    Lpow = SeriesMatrix.identity(params, T.rows)
    for s in range(1, n + 1):
        Lpow = Lpow @ lt
        pre = _preimage(Lpow, Mcols)
        pre_n = pre
        gens.extend(v.times_x(s) for v in pre)
    gens = [g for g in gens if not g.is_zero()]
    basis = _minimal_generators(gens)
    I = SeriesMatrix.identity(params, T.rows)
    xgens = [b.times_x() for b in basis]
    tau_ok = all(in_module(xgens, (T - I) @ b) for b in basis)
    gam_ok = None
    if G_amb is not None:
        G = G_amb.reduce(params)
        c = chi0 if chi0 is not None else default_chi0(params.p)
        gam_ok = all(in_module(xgens, G @ b.subst_gamma(c) - b) for b in basis)
    r = None
    for rr in range(params.Mx + 1):
        if all(in_module(basis, v.times_x(rr)) for v in pre_n):
            r = rr
            break
    return Envelope(tuple(basis), len(basis), tau_ok, gam_ok, r, params.Np)

"""Filtered (phi, N)-modules over Q_p, modelled over exact rationals.

Conventions used throughout:

* matrices act on column vectors; a subspace is a canonical row-echelon basis
  of coordinate vectors (see :mod:`wachlab.linalg`);
* a flag stores only its jump levels.  ``Fil^i`` is the span attached to the
  smallest stored level ``>= i``; it is the whole space below the first stored
  level and zero above the last;
* twisting by ``j`` multiplies phi by ``p^-j`` and lowers every filtration level
  by ``j``, so the cyclotomic character ``Q_p(1)`` has ``t_H = t_N = -1``.
"""
from __future__ import annotations

import itertools
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import sympy

from . import linalg as la
from .errors import InvariantError, ParameterError, UnsupportedEigenstructure


# --------------------------------------------------------------------------
# flags


@dataclass(frozen=True)
class Flag:
    dim: int
    steps: tuple  # ((level, canonical basis), ...) with strictly decreasing spans

    def __post_init__(self):
        object.__setattr__(self, "steps", _normalize_steps(self.dim, self.steps))

    @classmethod
    def trivial(cls, dim: int, level: int = 0) -> "Flag":
        """Everything in degree ``level``: Fil^level = all, Fil^(level+1) = 0."""
        return cls(dim, ((level, la.full_space(dim)),))

    @classmethod
    def from_spans(cls, dim: int, items) -> "Flag":
        """``items`` is an iterable of ``(level, vectors)``; vectors may be any rationals."""
        return cls(dim, tuple((int(lvl), la.span(vecs)) for lvl, vecs in items))

    def fil(self, i: int):
        for lvl, S in self.steps:
            if lvl >= i:
                return S
        return ()

    def __call__(self, i: int):
        return self.fil(i)

    @property
    def levels(self) -> tuple:
        return tuple(lvl for lvl, _ in self.steps)

    @property
    def lo(self) -> int:
        return self.steps[0][0]

    @property
    def hi(self) -> int:
        return self.steps[-1][0]

    def jumps(self) -> Counter:
        """Multiset of jump levels: level -> dim Fil^level / Fil^(level+1)."""
        out = Counter()
        for a, (lvl, S) in enumerate(self.steps):
            nxt = len(self.steps[a + 1][1]) if a + 1 < len(self.steps) else 0
            out[lvl] = len(S) - nxt
        return out

    def t_H(self) -> int:
        return sum(lvl * m for lvl, m in self.jumps().items())

    def induced_t_H(self, U) -> int:
        """t_H of the subspace U with the induced filtration Fil^i cap U."""
        dims = [len(la.intersect(S, U, self.dim)) for _, S in self.steps] + [0]
        return sum(lvl * (dims[a] - dims[a + 1]) for a, (lvl, _) in enumerate(self.steps))

    def contained_in(self, other: "Flag") -> bool:
        """Pointwise inclusion Fil^i(self) in Fil^i(other) for all i."""
        levels = sorted(set(self.levels) | set(other.levels))
        return all(la.is_subspace(self.fil(i), other.fil(i)) for i in levels)

    def shift(self, j: int) -> "Flag":
        return Flag(self.dim, tuple((lvl + j, S) for lvl, S in self.steps))


def _normalize_steps(dim: int, steps) -> tuple:
    items = sorted(((int(l), tuple(S)) for l, S in steps), key=lambda t: t[0])
    for a in range(len(items) - 1):
        if items[a][0] == items[a + 1][0]:
            raise InvariantError("flag-levels-distinct", f"level {items[a][0]} listed twice")
    canon = []
    for lvl, S in items:
        if S and len(S[0]) != dim:
            raise InvariantError("flag-dimension", f"vector of length {len(S[0])} in a flag of dimension {dim}")
        canon.append((lvl, la.span(S) if S else ()))
    for a in range(len(canon) - 1):
        if not la.is_subspace(canon[a + 1][1], canon[a][1]):
            raise InvariantError("flag-decreasing", f"Fil^{canon[a + 1][0]} is not inside Fil^{canon[a][0]}")
    # keep a level only when its span differs from the next one, drop zero spans
    out = []
    for a, (lvl, S) in enumerate(canon):
        if not S:
            continue
        if a + 1 < len(canon) and canon[a + 1][1] == S:
            continue
        out.append((lvl, S))
    if dim == 0:
        return ()
    if not out:
        raise InvariantError("flag-exhaustive", "a flag needs at least one nonzero step")
    if len(out[0][1]) != dim:
        out.insert(0, (out[0][0] - 1, la.full_space(dim)))
    return tuple(out)


# --------------------------------------------------------------------------
# modules


@dataclass(frozen=True)
class FilPhiNModule:
    p: int
    dim: int
    phi: tuple
    nmat: tuple
    fil: Flag

    def __post_init__(self):
        object.__setattr__(self, "phi", la.as_matrix(self.phi))
        object.__setattr__(self, "nmat", la.as_matrix(self.nmat))
        d = self.dim
        if d < 1:
            raise InvariantError("dimension-positive")
        for name, M in (("phi", self.phi), ("N", self.nmat)):
            if len(M) != d or any(len(r) != d for r in M):
                raise InvariantError(f"{name}-shape", f"{name} must be {d}x{d}")
        if self.fil.dim != d:
            raise InvariantError("flag-dimension", f"flag of dimension {self.fil.dim} on a {d}-dimensional module")
        if la.det(self.phi) == 0:
            raise InvariantError("phi-invertible", "phi is not invertible")
        if not la.is_nilpotent(self.nmat):
            raise InvariantError("N-nilpotent", "N is not nilpotent")
        if la.matmul(self.nmat, self.phi) != la.scale(self.p, la.matmul(self.phi, self.nmat)):
            raise InvariantError("N-phi-relation", "N phi != p phi N")

    def t_N(self) -> int:
        return la.vp(la.det(self.phi), self.p)

    def t_H(self) -> int:
        return self.fil.t_H()

    def sub_t_N(self, U) -> int:
        return la.vp(la.det(la.restrict(self.phi, U)), self.p)

    def sub_t_H(self, U) -> int:
        return self.fil.induced_t_H(U) if U else 0

    def is_stable(self, U) -> bool:
        return all(la.contains(U, la.apply(A, u)) for A in (self.phi, self.nmat) for u in U)

    def with_fil(self, fil: Flag) -> "FilPhiNModule":
        return FilPhiNModule(self.p, self.dim, self.phi, self.nmat, fil)


def t_N(D: FilPhiNModule) -> int:
    return D.t_N()


def t_H(D: FilPhiNModule) -> int:
    return D.t_H()


def unit_object(p: int) -> FilPhiNModule:
    return standard_block(1, 0, p)


def standard_block(i: int, j: int, p: int = 3) -> FilPhiNModule:
    """V_i(j): phi(e_k) = p^(k-j) e_k, N(e_k) = k e_(k-1), Fil^m = <e_k : k - j >= m>."""
    if i < 1:
        raise ParameterError("block rank must be >= 1")
    phi = la.diag([Fraction(p) ** (k - j) for k in range(i)])
    N = [[Fraction(0)] * i for _ in range(i)]
    for k in range(1, i):
        N[k - 1][k] = Fraction(k)
    basis = la.identity(i)
    steps = tuple((m, basis[m + j:]) for m in range(-j, i - j))
    return FilPhiNModule(p, i, phi, N, Flag(i, steps))


# --------------------------------------------------------------------------
# hat filtration and naivety


def hat_filtration(D: FilPhiNModule) -> Flag:
    d, fil = D.dim, D.fil
    k_max = la.nilpotence_index(D.nmat)
    powers = [la.power(D.nmat, k) for k in range(k_max)]
    steps = [(fil.lo, la.full_space(d))]
    for i in range(fil.lo + 1, fil.hi + 1):
        S = la.full_space(d)
        for k, Nk in enumerate(powers):
            S = la.intersect(S, la.preimage(Nk, fil.fil(i - k), d), d)
        steps.append((i, S))
    return Flag(d, tuple(steps))


def griffiths_check(D: FilPhiNModule) -> bool:
    return all(la.is_subspace(la.image(D.nmat, S), D.fil.fil(lvl - 1)) for lvl, S in D.fil.steps)


def is_naive(D: FilPhiNModule) -> bool:
    return hat_filtration(D) == D.fil


def crystalline_companion(D: FilPhiNModule) -> FilPhiNModule:
    return FilPhiNModule(D.p, D.dim, D.phi, la.zeros(D.dim), hat_filtration(D))


# --------------------------------------------------------------------------
# constructors


def _same_p(D1, D2):
    if D1.p != D2.p:
        raise ParameterError(f"modules over different primes {D1.p} and {D2.p}")


def direct_sum(D1: FilPhiNModule, D2: FilPhiNModule) -> FilPhiNModule:
    _same_p(D1, D2)
    d1, d2 = D1.dim, D2.dim
    levels = sorted(set(D1.fil.levels) | set(D2.fil.levels))
    steps = []
    for lvl in levels:
        vecs = [tuple(v) + (Fraction(0),) * d2 for v in D1.fil.fil(lvl)]
        vecs += [(Fraction(0),) * d1 + tuple(v) for v in D2.fil.fil(lvl)]
        steps.append((lvl, la.span(vecs)))
    return FilPhiNModule(D1.p, d1 + d2, la.block_diag(D1.phi, D2.phi), la.block_diag(D1.nmat, D2.nmat),
                         Flag(d1 + d2, tuple(steps)))


def tensor(D1: FilPhiNModule, D2: FilPhiNModule) -> FilPhiNModule:
    """D1 (x) D2 with Fil^i = sum_a Fil^a D1 (x) Fil^(i-a) D2."""
    _same_p(D1, D2)
    d = D1.dim * D2.dim
    phi = la.kron(D1.phi, D2.phi)
    N = la.add(la.kron(D1.nmat, la.identity(D2.dim)), la.kron(la.identity(D1.dim), D2.nmat))
    f1, f2 = D1.fil, D2.fil
    steps = []
    for i in range(f1.lo + f2.lo, f1.hi + f2.hi + 1):
        vecs = [la.kron_vec(u, w) for a in range(f1.lo, f1.hi + 1)
                for u in f1.fil(a) for w in f2.fil(i - a)]
        steps.append((i, la.span(vecs)))
    return FilPhiNModule(D1.p, d, phi, N, Flag(d, tuple(steps)))


def sym_power(D: FilPhiNModule, n: int) -> FilPhiNModule:
    """Sym^n D, realised as the symmetric tensors inside the n-th tensor power."""
    if n < 1:
        raise ParameterError("symmetric power needs n >= 1")
    T = D
    for _ in range(n - 1):
        T = tensor(T, D)
    d = D.dim
    monos = list(itertools.combinations_with_replacement(range(d), n))
    index = {idx: a for a, idx in enumerate(itertools.product(range(d), repeat=n))}
    basis = []
    for m in monos:
        v = [Fraction(0)] * (d ** n)
        for perm in set(itertools.permutations(m)):
            v[index[perm]] = Fraction(1)
        basis.append(tuple(v))
    first = [index[m] for m in monos]  # each symmetric basis vector is read off here

    def coords(w):
        return tuple(w[c] for c in first)

    def restrict(A):
        return la.transpose([coords(la.apply(A, b)) for b in basis])

    S = la.span(basis)
    steps = [(lvl, la.span([coords(v) for v in la.intersect(W, S, d ** n)])) for lvl, W in T.fil.steps]
    return FilPhiNModule(D.p, len(monos), restrict(T.phi), restrict(T.nmat), Flag(len(monos), tuple(steps)))


def twist(D: FilPhiNModule, j: int) -> FilPhiNModule:
    """D(j): phi scaled by p^-j, filtration levels lowered by j."""
    return FilPhiNModule(D.p, D.dim, la.scale(Fraction(D.p) ** (-j), D.phi), D.nmat, D.fil.shift(-j))


# --------------------------------------------------------------------------
# eigenvalues


def rational_eigenvalues(A) -> Counter:
    """Eigenvalues of ``A`` with algebraic multiplicity; all must be rational."""
    x = sympy.Symbol("x")
    coeffs = [sympy.Rational(c.numerator, c.denominator) for c in la.charpoly(A)]
    _, factors = sympy.factor_list(sympy.Poly(coeffs, x, domain="QQ"))
    out = Counter()
    for f, m in factors:
        if f.degree() != 1:
            raise UnsupportedEigenstructure(f"phi has an irreducible factor {f.as_expr()} of degree {f.degree()}")
        a, b = f.all_coeffs()
        r = -sympy.Rational(b) / sympy.Rational(a)
        out[Fraction(int(r.p), int(r.q))] += m
    return out


def eigenspace(A, lam) -> tuple:
    n = len(A)
    return la.span(la.nullspace(la.sub(A, la.scale(lam, la.identity(n))), n))


# --------------------------------------------------------------------------
# admissibility


ADMISSIBLE = "Admissible"
NOT_ADMISSIBLE = "NotAdmissible"
VERIFIED_ON_ENUMERATED = "VerifiedOnEnumerated"


@dataclass(frozen=True)
class AdmissibilityVerdict:
    status: str
    witness: Optional[tuple] = None
    enumerated_count: int = 0
    exhaustive: bool = False
    reason: str = ""

    @property
    def admissible(self) -> bool:
        return self.status == ADMISSIBLE


def stable_closure(D: FilPhiNModule, vectors) -> tuple:
    S = la.span(vectors)
    while True:
        T = la.span(tuple(S) + tuple(la.apply(A, s) for A in (D.phi, D.nmat) for s in S))
        if T == S:
            return S
        S = T


def _violates(D, U) -> bool:
    return bool(U) and D.sub_t_H(U) > D.sub_t_N(U)


def is_admissible(D: FilPhiNModule, samples: int = 64, seed: int = 0) -> AdmissibilityVerdict:
    """Weak admissibility of ``D``.

    Exact when phi has pairwise distinct eigenvalues (the stable subspaces are
    then the N-closed sums of eigenlines) or when phi is scalar (then N = 0 and
    every subspace is stable).  Otherwise stable closures of structured and
    random vectors are tested and a pass is reported as VerifiedOnEnumerated.
    """
    d = D.dim
    everything = la.full_space(d)
    if D.t_H() != D.t_N():
        return AdmissibilityVerdict(NOT_ADMISSIBLE, everything, 1, True,
                                    f"t_H = {D.t_H()} differs from t_N = {D.t_N()}")
    eig = rational_eigenvalues(D.phi)

    if len(eig) == d:
        lines = [eigenspace(D.phi, lam)[0] for lam in sorted(eig)]
        count = 0
        for r in range(1, d):
            for subset in itertools.combinations(lines, r):
                U = la.span(subset)
                if not D.is_stable(U):
                    continue
                count += 1
                if _violates(D, U):
                    return AdmissibilityVerdict(NOT_ADMISSIBLE, U, count, True,
                                                f"t_H = {D.sub_t_H(U)} > t_N = {D.sub_t_N(U)} on a stable subspace")
        return AdmissibilityVerdict(ADMISSIBLE, None, count, True)

    if len(eig) == 1:
        (lam,) = eig
        if D.phi == la.scale(lam, la.identity(d)):
            v = la.vp(lam, D.p)
            # best r-dimensional subspace: the top r vectors of a basis adapted to the flag
            adapted, levels = [], []
            for lvl, S in reversed(D.fil.steps):
                for s in S:
                    if not la.contains(la.span(adapted), s):
                        adapted.append(s)
                        levels.append(lvl)
            for r in range(1, d):
                if sum(levels[:r]) > r * v:
                    U = la.span(adapted[:r])
                    return AdmissibilityVerdict(NOT_ADMISSIBLE, U, r, True,
                                                f"t_H = {sum(levels[:r])} > t_N = {r * v} on a stable subspace")
            return AdmissibilityVerdict(ADMISSIBLE, None, d - 1, True)

    candidates = []
    for lam in sorted(eig):
        E = eigenspace(D.phi, lam)
        candidates.extend([v] for v in E)
        candidates.append(list(E))
        for _, S in D.fil.steps:
            candidates.append(list(la.intersect(S, E, d)))
    for _, S in D.fil.steps:
        candidates.append(list(S))
    rng = random.Random(seed)
    for _ in range(samples):
        candidates.append([tuple(Fraction(rng.randint(-5, 5)) for _ in range(d))])
    seen = set()
    closures = []
    for c in candidates:
        if not any(any(v) for v in c):
            continue
        U = stable_closure(D, c)
        if U and len(U) < d and U not in seen:
            seen.add(U)
            closures.append(U)
    # sums of pairs, capped so that the sampled tier stays cheap
    for a, b in itertools.islice(itertools.combinations(list(closures), 2), 300):
        U = la.sum_spaces(a, b)
        if len(U) < d and U not in seen:
            seen.add(U)
            closures.append(U)
    for U in closures:
        if _violates(D, U):
            return AdmissibilityVerdict(NOT_ADMISSIBLE, U, len(seen), False,
                                        f"t_H = {D.sub_t_H(U)} > t_N = {D.sub_t_N(U)} on a stable subspace")
    return AdmissibilityVerdict(VERIFIED_ON_ENUMERATED, None, len(seen), False,
                                "stable-subspace family is infinite; only enumerated subspaces were checked")


# --------------------------------------------------------------------------
# isomorphism and decomposition


def _level_set(D1, D2):
    return sorted(set(D1.fil.levels) | set(D2.fil.levels))


def isomorphic(D1: FilPhiNModule, D2: FilPhiNModule, tries: int = 8) -> Optional[tuple]:
    """An isomorphism U : D1 -> D2 of filtered (phi, N)-modules, or ``None``.

    Solves the linear conditions U phi1 = phi2 U, U N1 = N2 U and
    U(Fil1^i) in Fil2^i, then looks for an invertible member of the solution
    space on seeded random integer combinations.  Equal graded dimensions make
    the inclusion of filtrations an equality for invertible U.
    """
    if D1.p != D2.p or D1.dim != D2.dim:
        return None
    d = D1.dim
    levels = _level_set(D1, D2)
    if any(len(D1.fil.fil(i)) != len(D2.fil.fil(i)) for i in levels):
        return None
    if D1.t_N() != D2.t_N():
        return None

    def var(r, c):
        return r * d + c

    eqs = []
    for A1, A2 in ((D1.phi, D2.phi), (D1.nmat, D2.nmat)):
        # (U A1 - A2 U)[r][c] = sum_k U[r][k] A1[k][c] - sum_k A2[r][k] U[k][c]
        for r in range(d):
            for c in range(d):
                row = [Fraction(0)] * (d * d)
                for k in range(d):
                    row[var(r, k)] += A1[k][c]
                    row[var(k, c)] -= A2[r][k]
                if any(row):
                    eqs.append(tuple(row))
    for i in levels:
        ann = la.annihilator(D2.fil.fil(i), d)
        for u in D1.fil.fil(i):
            for a in ann:
                # a . U u = sum_{r,c} a[r] U[r][c] u[c]
                row = [Fraction(0)] * (d * d)
                for r in range(d):
                    if a[r]:
                        for c in range(d):
                            if u[c]:
                                row[var(r, c)] += a[r] * u[c]
                if any(row):
                    eqs.append(tuple(row))
    sols = la.nullspace(tuple(eqs), d * d) if eqs else la.identity(d * d)
    if not sols:
        return None

    def as_mat(v):
        return tuple(tuple(v[var(r, c)] for c in range(d)) for r in range(d))

    mats = [as_mat(v) for v in sols]
    for M in mats:
        if la.det(M) != 0:
            return M
    rng = random.Random(0)
    for _ in range(tries):
        coeffs = [rng.randint(-97, 97) for _ in mats]
        M = tuple(tuple(sum(c * m[r][k] for c, m in zip(coeffs, mats)) for k in range(d)) for r in range(d))
        if la.det(M) != 0:
            return M
    return None


@dataclass(frozen=True, order=True)
class BlockSpec:
    i: int
    j: int
    mult: int = 1

    def __post_init__(self):
        if self.i < 1 or self.mult < 1:
            raise InvariantError("block-spec", f"invalid block ({self.i},{self.j},{self.mult})")


@dataclass(frozen=True)
class Decomposition:
    blocks: tuple = ()
    failure: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.failure is None


def blocks_module(blocks, p: int = 3) -> FilPhiNModule:
    mods = [standard_block(b.i, b.j, p) for b in blocks for _ in range(b.mult)]
    out = mods[0]
    for m in mods[1:]:
        out = direct_sum(out, m)
    return out


def normalize_blocks(blocks) -> tuple:
    c = Counter()
    for b in blocks:
        c[(b.i, b.j)] += b.mult
    return tuple(BlockSpec(i, j, m) for (i, j), m in sorted(c.items()))


def jordan_strings(N) -> Counter:
    """String length -> number of Jordan strings of the nilpotent ``N``."""
    d = len(N)
    ranks = [la.rank(la.power(N, k)) for k in range(d + 2)]
    ge = [ranks[k - 1] - ranks[k] for k in range(1, d + 2)]  # strings of length >= k
    out = Counter()
    for k in range(1, d + 1):
        n = ge[k - 1] - ge[k]
        if n:
            out[k] = n
    return out


def decompose_standard(D: FilPhiNModule) -> Decomposition:
    """Write ``D`` as a sum of standard blocks V_i(j), or explain why not."""
    d, p = D.dim, D.p
    strings = jordan_strings(D.nmat)
    kerN = la.span(la.nullspace(D.nmat, d))
    blocks = []
    for L in sorted(strings):
        # columns of N^k span its image; take rows of the transpose
        img_L1 = la.span(la.transpose(la.power(D.nmat, L - 1)))
        img_L = la.span(la.transpose(la.power(D.nmat, L)))
        B = la.intersect(kerN, img_L1, d)
        B_next = la.intersect(kerN, img_L, d) if img_L else ()
        try:
            ev = rational_eigenvalues(la.restrict(D.phi, B))
            if B_next:
                ev = ev - rational_eigenvalues(la.restrict(D.phi, B_next))
        except UnsupportedEigenstructure as exc:
            return Decomposition((), f"string bottoms of length {L}: {exc}")
        for lam, m in sorted(ev.items()):
            if lam <= 0:
                return Decomposition((), f"string bottoms of length {L}: eigenvalue {lam} is not a power of p")
            try:
                e = la.vp(lam, p)
            except ValueError:
                e = None
            if e is None or lam != Fraction(p) ** e:
                return Decomposition((), f"string bottoms of length {L}: eigenvalue {lam} is not a power of p")
            blocks.append(BlockSpec(L, -e, m))
    blocks = normalize_blocks(blocks)
    if sum(b.i * b.mult for b in blocks) != d:
        return Decomposition((), "Jordan strings do not account for the whole space")
    candidate = blocks_module(blocks, p)
    if isomorphic(D, candidate) is None:
        return Decomposition((), "no filtered (phi,N)-isomorphism onto " +
                             " + ".join(f"V_{b.i}({b.j})^{b.mult}" for b in blocks))
    return Decomposition(blocks, None)

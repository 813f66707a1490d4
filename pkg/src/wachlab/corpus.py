"""Seeded random generators of filtered (phi, N)-modules and block sums."""
from __future__ import annotations

import random
from fractions import Fraction

from . import linalg as la
from .filtered import BlockSpec, Flag, FilPhiNModule, blocks_module, normalize_blocks


def _random_invertible(rng: random.Random, d: int, lo=-2, hi=2):
    while True:
        C = la.as_matrix([[rng.randint(lo, hi) for _ in range(d)] for _ in range(d)])
        if la.det(C) != 0:
            return C


def conjugate(D: FilPhiNModule, C) -> FilPhiNModule:
    """Transport D along the base change x -> C x."""
    Ci = la.inverse(C)
    phi = la.matmul(la.matmul(C, D.phi), Ci)
    N = la.matmul(la.matmul(C, D.nmat), Ci)
    steps = tuple((lvl, la.span([la.apply(C, v) for v in S])) for lvl, S in D.fil.steps)
    return FilPhiNModule(D.p, D.dim, phi, N, Flag(D.dim, steps))


def _strings(rng, d):
    """Random partition of d into Jordan string lengths."""
    out = []
    left = d
    while left:
        L = rng.randint(1, left)
        out.append(L)
        left -= L
    return out


def random_module(rng: random.Random, p: int = 3, max_dim: int = 4, jump_range=(-3, 3),
                  balanced: bool | None = None) -> FilPhiNModule:
    """A random module: phi and N from Jordan strings, conjugated; a random flag.

    With ``balanced`` the jumps are nudged so that t_H = t_N when the range
    allows it, which makes admissible examples common.
    """
    d = rng.randint(1, max_dim)
    if balanced is None:
        balanced = rng.random() < 0.5
    lam_vals, N0 = [], [[Fraction(0)] * d for _ in range(d)]
    pos = 0
    for L in _strings(rng, d):
        top = Fraction(rng.choice([1, -1, 2])) * Fraction(p) ** rng.randint(-1, 2)
        chain = rng.random() < 0.75
        for k in range(L):
            lam_vals.append(top / Fraction(p) ** (L - 1 - k))
            if k and chain:
                N0[pos + k - 1][pos + k] = Fraction(rng.choice([1, 2, -1]))
        pos += L
    phi0 = la.diag(lam_vals)
    C = _random_invertible(rng, d)
    Ci = la.inverse(C)
    phi = la.matmul(la.matmul(C, phi0), Ci)
    N = la.matmul(la.matmul(C, la.as_matrix(N0)), Ci)
    # jumps and an adapted basis
    lo, hi = jump_range
    jumps = sorted((rng.randint(lo, hi) for _ in range(d)), reverse=True)
    tN = la.vp(la.det(phi), p)
    if balanced:
        for _ in range(64):
            diff = tN - sum(jumps)
            if diff == 0:
                break
            k = rng.randrange(d)
            step = 1 if diff > 0 else -1
            if lo <= jumps[k] + step <= hi:
                jumps[k] += step
        jumps.sort(reverse=True)
    basis = []
    structured = [la.apply(C, e) for e in la.identity(d)]
    while len(basis) < d:
        if rng.random() < 0.4:
            v = rng.choice(structured)
        else:
            v = tuple(Fraction(rng.randint(-3, 3)) for _ in range(d))
        if any(v) and (not basis or not la.contains(la.span(basis), v)):
            basis.append(v)
    levels = sorted(set(jumps))
    steps = [(i, [basis[k] for k in range(d) if jumps[k] >= i]) for i in levels]
    return FilPhiNModule(p, d, phi, N, Flag.from_spans(d, steps))


def random_block_sum(rng: random.Random, p: int = 3, max_dim: int = 8, max_i: int = 4, max_j: int = 3,
                     scramble: bool = True):
    """A random multiset of standard blocks and (optionally conjugated) direct sum."""
    blocks = []
    left = rng.randint(1, max_dim)
    while left:
        i = rng.randint(1, min(max_i, left))
        blocks.append(BlockSpec(i, rng.randint(-max_j, max_j)))
        left -= i
    blocks = normalize_blocks(blocks)
    D = blocks_module(blocks, p)
    if scramble:
        D = conjugate(D, _random_invertible(rng, D.dim, -1, 1))
    return blocks, D

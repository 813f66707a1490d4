"""Command-line front end: ``wachlab <verb> ...`` (also ``python -m wachlab``).

Builders and transformers write module text on stdout so they can be piped;
checkers write a report and signal the outcome through the exit status
(0 pass, 1 fail, 2 undecided, 3 input error).
"""
from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import filtered as fl
from . import linalg as la
from . import wach as wa
from .errors import FormatError, WachlabError
from .formats import parse_filmod, parse_wach, serialize_filmod, serialize_wach
from .padic import RingParams, SeriesMatrix, TruncSeries, lift_symmetric
from .report import EXIT_INPUT, FAIL, INFO, PASS, UNDECIDED, Report

DEFAULT_P, DEFAULT_NP, DEFAULT_MX = 3, 8, 16


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _pair(text: str, what: str):
    try:
        parts = [int(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"{what} expects comma-separated integers, got '{text}'") from None
    return parts


def _block(text: str):
    parts = _pair(text, "--block")
    if len(parts) == 2:
        return parts[0], parts[1], 1
    if len(parts) == 3:
        return tuple(parts)
    raise InputError(f"--block expects i,j or i,j,mult, got '{text}'")


def _params(args) -> RingParams:
    prec = args.prec or os.environ.get("WACHLAB_PREC")
    Np, Mx = DEFAULT_NP, DEFAULT_MX
    if prec:
        parts = _pair(prec, "--prec")
        if len(parts) != 2:
            raise InputError(f"--prec expects Np,Mx, got '{prec}'")
        Np, Mx = parts
    return RingParams(args.p, Np, Mx)


def _read(path) -> str:
    if path in (None, "-"):
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _fmt_space(S) -> str:
    if not S:
        return "0"
    return ";".join(",".join(str(x) for x in v) for v in S)


def _fmt_flag(F: fl.Flag) -> str:
    return " ".join(f"Fil^{lvl}=<{_fmt_space(S)}>" for lvl, S in F.steps)


def _fmt_mat(M) -> str:
    return "[" + ";".join(",".join(str(x) for x in r) for r in M) + "]"


# --------------------------------------------------------------------------
# verbs producing module text


def cmd_fpn_build(args, out):
    if not args.block:
        raise InputError("fpn-build needs at least one --block i,j")
    blocks = [fl.BlockSpec(*_block(b)) for b in args.block]
    out.write(serialize_filmod(fl.blocks_module(blocks, args.p)))
    return 0


def cmd_fpn_hat(args, out):
    D = parse_filmod(_read(args.file))
    out.write(serialize_filmod(D.with_fil(fl.hat_filtration(D))))
    return 0


def cmd_fpn_tensor(args, out):
    D1 = parse_filmod(_read(args.file1))
    D2 = parse_filmod(_read(args.file2))
    out.write(serialize_filmod(fl.tensor(D1, D2)))
    return 0


def cmd_fpn_sym(args, out):
    D = parse_filmod(_read(args.file))
    out.write(serialize_filmod(fl.sym_power(D, args.n)))
    return 0


def cmd_fpn_twist(args, out):
    D = parse_filmod(_read(args.file))
    out.write(serialize_filmod(fl.twist(D, args.j)))
    return 0


def cmd_wach_build(args, out):
    if not args.block:
        raise InputError("wach-build needs at least one --block i,j")
    params = _params(args)
    W = None
    for b in args.block:
        i, j, m = _block(b)
        for _ in range(m):
            B = wa.build_standard_wach(i, j, params)
            W = B if W is None else wa.direct_sum_wach(W, B)
    out.write(serialize_wach(W))
    return 0


def cmd_wach_reduce(args, out):
    W = parse_wach(_read(args.file))
    out.write(serialize_filmod(wa.reduce_mod_X(W)))
    return 0


# --------------------------------------------------------------------------
# verbs producing reports


def cmd_fpn_check(args, out):
    D = parse_filmod(_read(args.file))
    rep = Report(f"fpn-check p={D.p} dim={D.dim}")
    th, tn = D.t_H(), D.t_N()
    rep.add("t_H", INFO, th)
    rep.add("t_N", INFO, tn)
    rep.add("t_H=t_N", PASS if th == tn else FAIL, f"{th} vs {tn}")
    rep.add("N-phi-relation", PASS, "N phi = p phi N")
    hat = fl.hat_filtration(D)
    g = fl.griffiths_check(D)
    rep.add("griffiths", PASS if g else FAIL, g, witness="-" if g else _fmt_flag(hat))
    naive = hat == D.fil
    rep.add("naive", PASS if naive else FAIL, naive, witness="-" if naive else _fmt_flag(hat))
    try:
        v = fl.is_admissible(D)
    except WachlabError as exc:
        rep.add("admissible", UNDECIDED, type(exc).__name__, witness=str(exc))
    else:
        status = {fl.ADMISSIBLE: PASS, fl.NOT_ADMISSIBLE: FAIL, fl.VERIFIED_ON_ENUMERATED: UNDECIDED}[v.status]
        rep.add("admissible", status, f"{v.status} enumerated={v.enumerated_count}",
                witness=_fmt_space(v.witness) if v.witness is not None else "-")
    out.write(rep.render(args.format == "machine"))
    return rep.exit_code


def cmd_fpn_decompose(args, out):
    D = parse_filmod(_read(args.file))
    rep = Report(f"fpn-decompose p={D.p} dim={D.dim}")
    dec = fl.decompose_standard(D)
    if dec.ok:
        for b in dec.blocks:
            rep.add(f"V_{b.i}({b.j})", PASS, f"mult={b.mult}")
    else:
        rep.add("decomposition", FAIL, "Failure", witness=dec.failure)
    out.write(rep.render(args.format == "machine"))
    return rep.exit_code


def _relation_items(rep: Report, W):
    r = wa.check_relations(W)
    for res in r.residuals:
        prec = "exact" if res.passed else f"p^{res.p_val},X^{res.x_val}"
        rep.add(res.name, PASS if res.passed else FAIL, "zero" if res.passed else "nonzero", precision=prec)
    pos = r.positivity
    rep.add("positivity", {"pass": PASS, "fail": FAIL, "undecided": UNDECIDED}[pos.status],
            f"s={pos.s}", witness=pos.detail or "-")
    rep.add("unipotence-index", INFO, r.unipotence_index)
    return r


def cmd_wach_check(args, out):
    W = parse_wach(_read(args.file))
    p = W.params
    rep = Report(f"wach-check p={p.p} Np={p.Np} Mx={p.Mx} rank={W.rank}")
    _relation_items(rep, W)
    _monodromy_items(rep, W, with_matrix=False)
    out.write(rep.render(args.format == "machine"))
    return rep.exit_code


def _monodromy_items(rep: Report, W, with_matrix=True):
    try:
        mono = wa.monodromy(W)
    except WachlabError as exc:
        rep.add("monodromy", FAIL, type(exc).__name__, witness=str(exc))
        return
    prec = f"p^{mono.precision}"
    if with_matrix:
        mod = mono.nmat.params.modulus
        rep.add("N-mod-X", INFO, _fmt_mat([[lift_symmetric(x, mod) for x in r] for r in mono.mod_x()]),
                precision=prec)
    rep.add("monodromy-nilpotent", PASS if mono.nilpotent else FAIL, f"index={mono.index}", precision=prec)
    e = wa.exp_check(W)
    rep.add("tau=exp(XN)", PASS if e.passed else FAIL, e.passed, precision=f"p^{e.precision}",
            witness=e.detail or "-")


def cmd_wach_monodromy(args, out):
    W = parse_wach(_read(args.file))
    rep = Report(f"wach-monodromy rank={W.rank}")
    _monodromy_items(rep, W)
    out.write(rep.render(args.format == "machine"))
    return rep.exit_code


def cmd_wach_verify(args, out):
    W = parse_wach(_read(args.file))
    D = parse_filmod(_read(args.against))
    rep = Report(f"wach-verify rank={W.rank} against dim={D.dim}")
    v = wa.verify_wach(W, D)
    for name, status, detail in v.items:
        st = {"pass": PASS, "fail": FAIL, "undecided": UNDECIDED, "not-checked": INFO}[status]
        rep.add(name, st, detail or "-")
    out.write(rep.render(args.format == "machine"))
    return rep.exit_code


def _parse_span(text: str, params: RingParams, rank: int) -> SeriesMatrix:
    cols = []
    for chunk in text.split(";"):
        toks = chunk.split()
        if len(toks) != rank:
            raise InputError(f"--span vector needs {rank} series, found {len(toks)}")
        entries = []
        for t in toks:
            if not (t.startswith("[") and t.endswith("]")):
                raise InputError(f"--span entries are series [c0,c1,...], got '{t}'")
            body = t[1:-1]
            try:
                entries.append(TruncSeries.of(params, [int(x) for x in body.split(",")] if body else []))
            except ValueError:
                raise InputError(f"bad series '{t}' in --span") from None
        cols.append([[e] for e in entries])
    return SeriesMatrix.hstack([SeriesMatrix.from_entries(params, c) for c in cols])


def cmd_wach_envelope(args, out):
    if args.ambient:
        i, j = _pair(args.ambient, "--ambient")[:2]
        params = _params(args)
        amb = wa.build_log_ambient(i, j, params)
        T, G, M, chi0, rank = amb.T, amb.G, amb.M, amb.chi0, i
    else:
        if not args.file or not args.span:
            raise InputError("wach-envelope needs --ambient i,j or a wach FILE with --span")
        W = parse_wach(_read(args.file))
        T, G, chi0, rank = W.T, W.G, W.chi0, W.rank
        M = _parse_span(args.span, W.params, W.rank)
    n = args.n if args.n is not None else rank - 1
    env = wa.naive_envelope(T, M, n, G, chi0)
    rep = Report(f"wach-envelope n={n}")
    basis = " ; ".join(" ".join(str(b.entry(r, 0)) for r in range(b.rows)) for b in env.basis)
    rep.add("rank", INFO, env.rank, precision=f"p^{env.precision}", witness=basis or "-")
    rep.add("tau-trivial-mod-X", PASS if env.tau_stable else FAIL, env.tau_stable)
    if env.gamma_trivial is not None:
        rep.add("gamma-trivial-mod-X", PASS if env.gamma_trivial else FAIL, env.gamma_trivial)
    rep.add("r", INFO if env.r is not None else UNDECIDED, env.r)
    out.write(rep.render(args.format == "machine"))
    return rep.exit_code


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--p", type=int, default=DEFAULT_P, help="prime (default 3)")
    common.add_argument("--prec", default=None, help="Np,Mx (default 8,16 or $WACHLAB_PREC)")
    common.add_argument("--format", choices=("text", "machine"), default="text")

    parser = _Parser(prog="wachlab", description="Filtered (phi,N)-modules and Wach modules at desk scale.")
    sub = parser.add_subparsers(dest="verb", parser_class=_Parser)

    def verb(name, func, help_text, file_arg=True):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if file_arg:
            sp.add_argument("file", nargs="?", default="-", help="input file (default stdin)")
        sp.set_defaults(func=func)
        return sp

    sp = verb("fpn-build", cmd_fpn_build, "direct sum of standard blocks V_i(j)", file_arg=False)
    sp.add_argument("--block", action="append", help="i,j or i,j,mult (repeatable)")
    verb("fpn-check", cmd_fpn_check, "invariants, naivety, admissibility")
    verb("fpn-hat", cmd_fpn_hat, "replace the filtration by its hat filtration")
    sp = verb("fpn-tensor", cmd_fpn_tensor, "tensor product of two modules", file_arg=False)
    sp.add_argument("file1")
    sp.add_argument("file2")
    sp = verb("fpn-sym", cmd_fpn_sym, "symmetric power")
    sp.add_argument("--n", type=int, required=True)
    sp = verb("fpn-twist", cmd_fpn_twist, "Tate twist D(j)")
    sp.add_argument("--j", type=int, required=True)
    verb("fpn-decompose", cmd_fpn_decompose, "decompose into standard blocks")
    sp = verb("wach-build", cmd_wach_build, "standard Wach modules and their sums", file_arg=False)
    sp.add_argument("--block", action="append", help="i,j with j >= 0 (repeatable)")
    verb("wach-check", cmd_wach_check, "commutation relations, positivity, monodromy")
    verb("wach-reduce", cmd_wach_reduce, "the filtered (phi,N)-module N/XN")
    sp = verb("wach-verify", cmd_wach_verify, "compare a Wach module with a filtered module")
    sp.add_argument("--against", required=True, help="filmod file")
    verb("wach-monodromy", cmd_wach_monodromy, "N = (1/X) log tau and the exponential check")
    sp = verb("wach-envelope", cmd_wach_envelope, "module generated by X^s (log tau)^-s (M)")
    sp.add_argument("--ambient", help="i,j: use the constant-coefficient model of V_i(-j)")
    sp.add_argument("--span", help="columns of M: series separated by spaces, vectors by ';'")
    sp.add_argument("--n", type=int, default=None)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        if not getattr(args, "verb", None):
            raise InputError("a verb is required; see --help")
        return args.func(args, stdout)
    except InputError as exc:
        stderr.write(f"input error: {exc}\n")
    except FormatError as exc:
        stderr.write(f"format error: {exc}\n")
    except WachlabError as exc:
        name = getattr(exc, "invariant", None)
        label = f"invariant '{name}' violated" if name else type(exc).__name__
        stderr.write(f"input error: {label}: {exc}\n")
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

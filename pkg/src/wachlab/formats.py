"""Reading and writing the ``filmod v1`` and ``wach v1`` text formats."""
from __future__ import annotations

import re
from fractions import Fraction

import numpy as np

from .errors import FormatError, InvariantError, ParameterError
from .filtered import Flag, FilPhiNModule
from .padic import RingParams, SeriesMatrix
from .wach import WachModule


def _fmt_q(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def serialize_filmod(D: FilPhiNModule) -> str:
    out = [f"filmod v1 p={D.p} dim={D.dim}", "phi:"]
    out += [" ".join(_fmt_q(x) for x in row) for row in D.phi]
    out.append("N:")
    out += [" ".join(_fmt_q(x) for x in row) for row in D.nmat]
    out.append("fil:")
    for lvl, S in D.fil.steps:
        out.append(f"level={lvl} span=" + ";".join(",".join(_fmt_q(x) for x in v) for v in S))
    return "\n".join(out) + "\n"


class _Lines:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.i = 0

    def next(self, what: str):
        while self.i < len(self.lines):
            raw = self.lines[self.i]
            self.i += 1
            if raw.strip() and not raw.lstrip().startswith("#"):
                return self.i, raw
        raise FormatError(len(self.lines) + 1, 1, f"unexpected end of input, expected {what}")

    def rest(self):
        while self.i < len(self.lines):
            raw = self.lines[self.i]
            self.i += 1
            if raw.strip() and not raw.lstrip().startswith("#"):
                yield self.i, raw


def _col(raw: str, token: str, start: int = 0) -> int:
    pos = raw.find(token, start)
    return (pos if pos >= 0 else 0) + 1


def _header(raw: str, lineno: int, magic: str, keys) -> dict:
    parts = raw.split()
    if parts[:2] != magic.split():
        raise FormatError(lineno, 1, f"expected header '{magic}'")
    vals = {}
    for tok in parts[2:]:
        if "=" not in tok:
            raise FormatError(lineno, _col(raw, tok), f"expected key=value, got '{tok}'")
        k, v = tok.split("=", 1)
        if k not in keys:
            raise FormatError(lineno, _col(raw, tok), f"unknown header key '{k}'")
        try:
            vals[k] = int(v)
        except ValueError:
            raise FormatError(lineno, _col(raw, tok) + len(k) + 1, f"'{v}' is not an integer") from None
    for k in keys:
        if k not in vals:
            raise FormatError(lineno, len(raw) + 1, f"missing header key '{k}'")
    return vals


def _rational(tok: str, lineno: int, col: int) -> Fraction:
    if not re.fullmatch(r"[+-]?\d+(/\d+)?", tok):
        raise FormatError(lineno, col, f"'{tok}' is not a rational num/den")
    try:
        return Fraction(tok)
    except ZeroDivisionError:
        raise FormatError(lineno, col, f"zero denominator in '{tok}'") from None


def _expect(lines: _Lines, label: str):
    lineno, raw = lines.next(f"'{label}'")
    if raw.strip() != label:
        raise FormatError(lineno, 1, f"expected '{label}'")


def _matrix_rows(lines: _Lines, d: int, label: str):
    _expect(lines, label)
    rows = []
    for _ in range(d):
        lineno, raw = lines.next(f"a row of {label}")
        toks = raw.split()
        if len(toks) != d:
            raise FormatError(lineno, 1, f"{label} row needs {d} entries, found {len(toks)}")
        row, pos = [], 0
        for t in toks:
            c = raw.find(t, pos)
            pos = c + len(t)
            row.append(_rational(t, lineno, c + 1))
        rows.append(row)
    return rows


def parse_filmod(text: str) -> FilPhiNModule:
    lines = _Lines(text)
    lineno, raw = lines.next("header")
    h = _header(raw, lineno, "filmod v1", ("p", "dim"))
    p, d = h["p"], h["dim"]
    if d < 1:
        raise FormatError(lineno, _col(raw, "dim="), "dim must be positive")
    phi = _matrix_rows(lines, d, "phi:")
    N = _matrix_rows(lines, d, "N:")
    _expect(lines, "fil:")
    steps = []
    fil_line = lineno
    for lineno, raw in lines.rest():
        m = re.fullmatch(r"\s*level=([+-]?\d+)\s+span=(.*?)\s*", raw)
        if not m:
            raise FormatError(lineno, 1, "expected 'level=<i> span=<v1;v2;...>'")
        lvl = int(m.group(1))
        body = m.group(2)
        base = m.start(2)
        vecs = []
        if body:
            offset = 0
            for chunk in body.split(";"):
                entries = chunk.split(",")
                if len(entries) != d:
                    raise FormatError(lineno, base + offset + 1, f"vector needs {d} entries, found {len(entries)}")
                vec, inner = [], 0
                for e in entries:
                    vec.append(_rational(e.strip(), lineno, base + offset + inner + 1))
                    inner += len(e) + 1
                vecs.append(vec)
                offset += len(chunk) + 1
        steps.append((lvl, vecs, lineno))
        fil_line = lineno
    if not steps:
        raise FormatError(fil_line + 1, 1, "the filtration needs at least one 'level=' line")
    try:
        flag = Flag.from_spans(d, [(lvl, vecs) for lvl, vecs, _ in steps])
        return FilPhiNModule(p, d, phi, N, flag)
    except InvariantError:
        raise
    except ParameterError as exc:
        raise InvariantError("parameters", str(exc)) from None


def _series_token(arr) -> str:
    return "[" + ",".join(str(int(x)) for x in arr) + "]"


def serialize_wach(W: WachModule) -> str:
    p = W.params
    out = [f"wach v1 p={p.p} Np={p.Np} Mx={p.Mx} rank={W.rank} chi0={W.chi0}"]
    for name, M in (("P", W.P), ("T", W.T), ("G", W.G)):
        out.append(f"{name}:")
        for i in range(W.rank):
            for j in range(W.rank):
                out.append(_series_token(M.arr[i, j]))
    return "\n".join(out) + "\n"


def _parse_series(raw: str, lineno: int, Mx: int, modulus: int):
    s = raw.strip()
    lead = len(raw) - len(raw.lstrip())
    if not (s.startswith("[") and s.endswith("]")):
        raise FormatError(lineno, lead + 1, "a series is written [c0,c1,...]")
    body = s[1:-1]
    toks = body.split(",") if body.strip() else []
    if len(toks) > Mx:
        raise FormatError(lineno, lead + 1, f"series has {len(toks)} coefficients, more than Mx={Mx}")
    out, pos = [], lead + 2
    for t in toks:
        if not re.fullmatch(r"\s*[+-]?\d+\s*", t):
            raise FormatError(lineno, pos, f"'{t.strip()}' is not an integer coefficient")
        out.append(int(t) % modulus)
        pos += len(t) + 1
    return out + [0] * (Mx - len(out))


def parse_wach(text: str) -> WachModule:
    lines = _Lines(text)
    lineno, raw = lines.next("header")
    h = _header(raw, lineno, "wach v1", ("p", "Np", "Mx", "rank", "chi0"))
    try:
        params = RingParams(h["p"], h["Np"], h["Mx"])
    except ParameterError as exc:
        raise InvariantError("ring-parameters", str(exc)) from None
    d = h["rank"]
    if d < 1:
        raise FormatError(lineno, _col(raw, "rank="), "rank must be positive")
    mats = {}
    for name in ("P", "T", "G"):
        _expect(lines, f"{name}:")
        arr = np.zeros((d, d, params.Mx), dtype=object)
        for i in range(d):
            for j in range(d):
                ln, r = lines.next(f"entry ({i},{j}) of {name}")
                arr[i, j, :] = _parse_series(r, ln, params.Mx, params.modulus)
        mats[name] = SeriesMatrix(params, arr)
    for ln, r in lines.rest():
        raise FormatError(ln, 1, "trailing content after the G block")
    return WachModule(params, d, mats["P"], mats["T"], mats["G"], h["chi0"])


def parse_any(text: str):
    head = next((l for l in text.splitlines() if l.strip()), "")
    if head.startswith("filmod"):
        return parse_filmod(text)
    if head.startswith("wach"):
        return parse_wach(text)
    raise FormatError(1, 1, "input is neither 'filmod v1' nor 'wach v1'")

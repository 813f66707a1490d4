"""Desk-scale survey of the Wach-module side over a grid of blocks and precisions.

For every block (i, j) and every (Np, Mx) in the grid, build the standard Wach
module and record: exactness of the commutation relations, whether N/XN is
isomorphic to the twisted standard block, the Jordan type of the monodromy,
the exponential check, the attained precision and the q-filtration jumps.
Prints one CSV row per case.

    python3 scripts/theorem_survey.py --max-i 4 --max-j 3 --prec 8,16 --prec 6,12
"""
from __future__ import annotations

import argparse
import csv
import sys
import time
from dataclasses import dataclass, field

from wachlab import linalg as la
from wachlab.filtered import isomorphic, jordan_strings, standard_block, twist
from wachlab.padic import RingParams, lift_symmetric
from wachlab.wach import build_standard_wach, check_relations, exp_check, monodromy, q_filtration, reduce_mod_X


@dataclass
class SurveyConfig:
    p: int = 3
    max_i: int = 4
    max_j: int = 3
    precisions: list = field(default_factory=lambda: [(8, 16)])


def survey_case(i: int, j: int, params: RingParams) -> dict:
    t0 = time.perf_counter()
    W = build_standard_wach(i, j, params)
    rel = check_relations(W)
    D = reduce_mod_X(W)
    iso = isomorphic(D, twist(standard_block(i, 0, params.p), -j)) is not None
    mono = monodromy(W)
    N0 = la.as_matrix([[lift_symmetric(x, params.modulus) for x in r] for r in mono.mod_x()])
    strings = dict(jordan_strings(N0))
    dims = [len(q_filtration(W, lvl).basis) for lvl in range(j + i + 2)]
    jumps = [lvl for lvl in range(len(dims) - 1) if dims[lvl] != dims[lvl + 1]]
    return {
        "p": params.p, "Np": params.Np, "Mx": params.Mx, "i": i, "j": j,
        "relations": rel.relations_passed, "positivity": rel.positivity.status,
        "reduction_iso": iso, "jordan": strings, "exp_check": exp_check(W).passed,
        "precision": mono.precision, "q_jumps": jumps,
        "seconds": round(time.perf_counter() - t0, 3),
    }


def run(cfg: SurveyConfig, out=sys.stdout) -> list:
    rows = []
    writer = None
    for Np, Mx in cfg.precisions:
        params = RingParams(cfg.p, Np, Mx)
        for i in range(1, cfg.max_i + 1):
            for j in range(cfg.max_j + 1):
                row = survey_case(i, j, params)
                rows.append(row)
                if writer is None:
                    writer = csv.DictWriter(out, fieldnames=list(row))
                    writer.writeheader()
                writer.writerow(row)
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=3)
    ap.add_argument("--max-i", type=int, default=4)
    ap.add_argument("--max-j", type=int, default=3)
    ap.add_argument("--prec", action="append", help="Np,Mx (repeatable; default 8,16)")
    a = ap.parse_args(argv)
    precs = [tuple(int(x) for x in s.split(",")) for s in a.prec] if a.prec else [(8, 16)]
    rows = run(SurveyConfig(a.p, a.max_i, a.max_j, precs))
    bad = [r for r in rows if not (r["relations"] and r["reduction_iso"] and r["exp_check"])]
    print(f"# {len(rows)} cases, {len(bad)} with a failed check", file=sys.stderr)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())

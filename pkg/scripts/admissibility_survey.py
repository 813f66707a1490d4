"""Statistics of naivety and weak admissibility on a seeded random corpus.

Draws random filtered (phi, N)-modules and tabulates, by dimension: how many
are naive, how many satisfy t_H = t_N, the admissibility verdicts (and which
tier decided them), and how often the admissibility lemma applies, i.e. D and
its crystalline companion are both admissible on the exhaustive tier.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass

from wachlab.corpus import random_module
from wachlab.errors import UnsupportedEigenstructure
from wachlab.filtered import ADMISSIBLE, crystalline_companion, is_admissible, is_naive


@dataclass
class CorpusConfig:
    count: int = 300
    seed: int = 0
    p: int = 3
    max_dim: int = 4
    jump_lo: int = -3
    jump_hi: int = 3
    balanced_fraction: float = 0.5


def run(cfg: CorpusConfig) -> dict:
    rng = random.Random(cfg.seed)
    table = defaultdict(Counter)
    lemma_violations = []
    for k in range(cfg.count):
        D = random_module(rng, cfg.p, cfg.max_dim, (cfg.jump_lo, cfg.jump_hi),
                          balanced=rng.random() < cfg.balanced_fraction)
        row = table[D.dim]
        row["modules"] += 1
        row["naive"] += is_naive(D)
        row["t_H=t_N"] += D.t_H() == D.t_N()
        try:
            v = is_admissible(D)
        except UnsupportedEigenstructure:
            row["unsupported"] += 1
            continue
        row[f"{v.status}/{'exhaustive' if v.exhaustive else 'sampled'}"] += 1
        if v.exhaustive and v.status == ADMISSIBLE:
            c = is_admissible(crystalline_companion(D))
            if c.exhaustive and c.status == ADMISSIBLE:
                row["lemma applies"] += 1
                if not is_naive(D):
                    lemma_violations.append(k)
    return {"config": asdict(cfg),
            "by_dim": {d: dict(sorted(c.items())) for d, c in sorted(table.items())},
            "lemma_violations": lemma_violations}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-dim", type=int, default=4)
    a = ap.parse_args(argv)
    result = run(CorpusConfig(count=a.count, seed=a.seed, max_dim=a.max_dim))
    json.dump(result, sys.stdout, indent=2)
    print()
    return 1 if result["lemma_violations"] else 0


if __name__ == "__main__":
    sys.exit(main())

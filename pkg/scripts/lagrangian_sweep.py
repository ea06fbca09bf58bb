"""Compare the three conformal-gravity Lagrangian densities as the metric perturbation grows.

For each amplitude a random polynomial frame δ + a·p(x) is drawn; the
script reports the Weyl-block size and the largest pairwise relative
difference between the tractor, twistor and Weyl densities.
"""

import argparse
import csv
import sys
from dataclasses import dataclass

import numpy as np

from twistgauge import conformal as CF
from twistgauge import gauge as G
from twistgauge.samples import random_frame, sample_points


@dataclass
class LagrangianSweepConfig:
    amplitudes: tuple = (0.01, 0.03, 0.1, 0.2)
    metrics_per_amplitude: int = 3
    points: int = 10
    seed: int = 42
    out: str | None = None


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def sweep(cfg: LagrangianSweepConfig):
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for amp in cfg.amplitudes:
        for m in range(cfg.metrics_per_amplitude):
            e = random_frame(rng, scale=amp)
            T = CF.tractor_connection(e)
            L = CF.lagrangian_conformal(T, CF.twistor_connection(e, tractor=T))
            pts = sample_points(rng, cfg.points, 4)
            weyl = G.max_abs_on(CF.curvature_blocks(T).W, pts)
            worst, scale = 0.0, 0.0
            for x in pts:
                a, b, c = L.at(x)
                worst = max(worst, _rel(a, b), _rel(a, c), _rel(b, c))
                scale = max(scale, abs(c))
            rows.append({"amplitude": amp, "metric": m, "max_abs_W": weyl, "max_abs_L": scale, "max_rel_diff": worst})
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n", 1)[0])
    p.add_argument("--amplitudes", nargs="+", type=float, default=list(LagrangianSweepConfig.amplitudes))
    p.add_argument("--metrics", type=int, default=LagrangianSweepConfig.metrics_per_amplitude)
    p.add_argument("--points", type=int, default=LagrangianSweepConfig.points)
    p.add_argument("--seed", type=int, default=LagrangianSweepConfig.seed)
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    a = p.parse_args(argv)
    cfg = LagrangianSweepConfig(tuple(a.amplitudes), a.metrics, a.points, a.seed, a.out)
    rows = sweep(cfg)
    fh = open(cfg.out, "w", newline="", encoding="utf-8") if cfg.out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.6e}" if isinstance(v, float) else v) for k, v in r.items()})
    finally:
        if cfg.out:
            fh.close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

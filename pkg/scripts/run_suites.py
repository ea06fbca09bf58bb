"""Run verification suites over several seeds and tabulate the worst residual per check."""

import argparse
import json
from dataclasses import asdict, dataclass, field

from twistgauge.suites import SUITES, run_suite


@dataclass
class SuiteSweepConfig:
    suites: tuple = SUITES
    seeds: tuple = (42, 7, 2024)
    samples: int = 10
    out: str | None = None


def worst_by_check(cfg: SuiteSweepConfig) -> dict:
    table: dict = {}
    for suite in cfg.suites:
        for seed in cfg.seeds:
            for rec in run_suite(suite, seed, cfg.samples).records:
                row = table.setdefault(rec.check_id, {"tolerance": rec.tolerance, "comparator": rec.comparator,
                                                      "worst": None, "failures": 0})
                row["failures"] += rec.status != "pass"
                v = rec.max_abs_error
                if v is not None:
                    better = max if rec.comparator == "<=" else min
                    row["worst"] = v if row["worst"] is None else better(row["worst"], v)
    return table


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--suites", nargs="+", default=list(SuiteSweepConfig.suites), choices=SUITES)
    p.add_argument("--seeds", nargs="+", type=int, default=list(SuiteSweepConfig.seeds))
    p.add_argument("--samples", type=int, default=SuiteSweepConfig.samples)
    p.add_argument("--out", default=None, help="optional JSON output path")
    a = p.parse_args(argv)
    cfg = SuiteSweepConfig(tuple(a.suites), tuple(a.seeds), a.samples, a.out)
    table = worst_by_check(cfg)
    for cid, row in table.items():
        worst = "error" if row["worst"] is None else f"{row['worst']:.2e}"
        print(f"{cid:<48} worst {worst:>9} {row['comparator']} {row['tolerance']:.0e}  failures {row['failures']}")
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            json.dump({"config": asdict(cfg), "checks": table}, fh, indent=2, sort_keys=True)
    return 0 if all(r["failures"] == 0 for r in table.values()) else 1


if __name__ == "__main__":
    raise SystemExit(main())

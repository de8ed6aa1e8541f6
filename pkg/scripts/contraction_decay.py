"""Decay of the Verma -> oscillator contraction residual along a mu grid.

Prints the residual per (kind, D, mu) and the fitted decay exponent in units
of log q, which should sit near -2 per unit of mu.
"""
import argparse
import json
from dataclasses import asdict, dataclass

from qfactor.qnum import QParams
from qfactor.reps import contraction_limit_check


@dataclass(frozen=True)
class Config:
    q: float = 1.3
    mu_grid: tuple = (10, 15, 20, 25, 30)
    cutoffs: tuple = (4, 6, 8, 10)
    json_out: str | None = None


def run(cfg: Config) -> list[dict]:
    p = QParams(cfg.q)
    rows = []
    for kind in (1, 2):
        for D in cfg.cutoffs:
            r = contraction_limit_check(cfg.mu_grid, D, p, kind=kind)
            rows.append({"kind": kind, "D": D, "residuals": r.notes["residuals"],
                         "rates": r.notes["log_q_decay_rates"], "passed": r.passed})
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=float, default=Config.q)
    ap.add_argument("--json", dest="json_out")
    a = ap.parse_args()
    cfg = Config(q=a.q, json_out=a.json_out)
    rows = run(cfg)
    print(f"q={cfg.q}  mu grid={list(cfg.mu_grid)}")
    for r in rows:
        res = " ".join(f"{v:9.2e}" for v in r["residuals"])
        rate = sum(r["rates"]) / len(r["rates"]) if r["rates"] else float("nan")
        print(f"osc{r['kind']} D={r['D']:>2}  {res}   mean rate {rate:+.3f}  {'pass' if r['passed'] else 'FAIL'}")
    if cfg.json_out:
        with open(cfg.json_out, "w") as fh:
            json.dump({"config": asdict(cfg), "rows": rows}, fh, indent=1)


if __name__ == "__main__":
    main()

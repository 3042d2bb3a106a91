"""Calibrate eta1/eta2 of phi1 on the engine model.

Applies p_temp at every tau' in [0, 50], evaluates both phi1' distances and
prints eta1 = 0.5 * min and eta2 = 1.5 * max of the observed values.
"""
from __future__ import annotations

import argparse

from robtl.checker import CheckConfig, Checker, nominal
from robtl.engine import attack_presets


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=100)
    ap.add_argument("--l", dest="ell", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--at", type=int, default=50, help="last application time")
    args = ap.parse_args(argv)

    presets = attack_presets()
    doc = presets.document
    cfg = CheckConfig(N=args.N, ell=args.ell, seed=args.seed)
    low, high = doc.expressions["exp_temp_low"], doc.expressions["exp_temp_high"]
    p = doc.perturbations["p_temp"]
    E = nominal(doc.kernel, doc.init, args.at + 210, cfg)
    chk = Checker(E, cfg)
    lows = [chk.distance(low, p, t) for t in range(args.at + 1)]
    highs = [chk.distance(high, p, t) for t in range(args.at + 1)]
    observed = lows + highs
    print(f"F-window distances: min={min(lows):.6g} max={max(lows):.6g}")
    print(f"G-window distances: min={min(highs):.6g} max={max(highs):.6g}")
    print(f"eta1 = {0.5 * min(observed):.4g}")
    print(f"eta2 = {1.5 * max(observed):.4g}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""||S(lambda) - Id|| near threshold and at high energy for the generic benchmarks.

    python scripts/threshold_norms.py [--lams 1e-6 1e-5 1e-4 1e3]
"""

import argparse
from pathlib import Path

from levindex.config import load_config
from levindex.scatter import threshold_norms

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--lams", type=float, nargs="+", default=[1e-6, 1e-5, 1e-4, 1e-2, 1.0, 1e3])
    args = ap.parse_args()
    print("n  potential" + "".join(f"{lam:>11.0e}" for lam in args.lams))
    names = [f"gaussian_n{n}" for n in (2, 3, 4, 5)] + ["square_well_wide"]
    for name in names:
        cfg = load_config(CONFIGS / f"{name}.toml")
        V = cfg.build_potential()
        out = threshold_norms(V, cfg.n, args.lams)
        print(f"{cfg.n}  {V.label:<32}" + "".join(f"{v:11.3g}" for v in out))


if __name__ == "__main__":
    main()

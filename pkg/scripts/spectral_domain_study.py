"""Lambda(h) and the numerical-range margin as the probe domain grows.

Dirichlet walls inflate Lambda on short domains; the values settle near the
spectral margin of the weighted far-field operator once L approaches the
solve domain.
"""

import argparse
from pathlib import Path

from kppfront.front import prepare, spectral_probe
from kppfront.io import write_csv
from kppfront.model import named_nonlinearity, validate_kernel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h", type=float, default=0.05)
    ap.add_argument("--kernel", type=float, nargs="+", default=[1.0])
    ap.add_argument("--out", type=Path, default=Path("out/spectral_domain.csv"))
    args = ap.parse_args()
    config = prepare(named_nonlinearity("fisher"), 3.0)
    kernel = validate_kernel(args.kernel)
    L_solve = config.front.profile.grid.half_length
    rows = []
    for L in (12.5, 25.0, 50.0, L_solve):
        rep = spectral_probe(config, kernel, args.h, half_length=L)
        rows.append((L, rep.lambda_h, rep.lambda_h_adjoint, rep.numerical_range_margin))
        print(f"L={L:8.3f}  Lambda={rep.lambda_h:.5f}  Lambda_ad={rep.lambda_h_adjoint:.5f}  "
              f"margin={rep.numerical_range_margin:.5f}")
    print(f"spectral margin of theta: {config.theta.margin_spectral:.5f}")
    write_csv(args.out, ["L", "lambda_h", "lambda_h_adjoint", "range_margin"], rows=rows)


if __name__ == "__main__":
    main()

"""Samples of the smooth weight, the reference weight and their distance."""

import argparse
from pathlib import Path

import numpy as np

from kppfront.front import prepare
from kppfront.io import write_csv
from kppfront.model import named_nonlinearity
from kppfront.weight import reference_weight


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--c", type=float, default=3.0)
    ap.add_argument("--out", type=Path, default=Path("out/weight.csv"))
    args = ap.parse_args()
    config = prepare(named_nonlinearity("fisher"), args.c)
    w = config.weight
    x = np.linspace(-3, 3, 1201)
    print(f"theta={w.theta:.7f} epsilon={w.epsilon:.4e} width={w.width} "
          f"d(W1inf)={w.distance_w1:.3e} d(W2inf)={w.distance_w2:.3e}")
    write_csv(args.out, ["x", "w", "w1", "w2", "w_ref", "w_ref1", "w_ref2"],
              [x, w(x), w.derivative(x, 1), w.derivative(x, 2),
               *(reference_weight(x, w.theta, n) for n in range(3))])


if __name__ == "__main__":
    main()

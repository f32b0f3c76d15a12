"""Writes data/synthetic_cfr.csv: 200 synthetic cities with a zero-inflated
fatality-rate response, log-population and a development index, and one
row (39) set to 0.999."""

import math
import random
import sys

KAPPA = (16.56, -1.59, -4.80)
BETA = (0.70, -0.155, -3.63)
GAMMA = (-4.95, 0.657, 3.75)


def expit(x):
    return 1.0 / (1.0 + math.exp(-x))


def main(path="data/synthetic_cfr.csv", n=200, seed=2020):
    rng = random.Random(seed)
    rows = []
    for _ in range(n):
        pop = min(max(rng.gauss(9.3, 1.1), 6.7), 14.5)
        hdi = rng.uniform(0.60, 0.78)
        theta = expit(KAPPA[0] + KAPPA[1] * pop + KAPPA[2] * hdi)
        mu = expit(BETA[0] + BETA[1] * pop + BETA[2] * hdi)
        phi = math.exp(GAMMA[0] + GAMMA[1] * pop + GAMMA[2] * hdi)
        if rng.random() < theta:
            y = 0.0
        else:
            y = min(max(rng.betavariate(mu * phi, (1 - mu) * phi), 1e-6), 0.999)
        rows.append((y, pop, hdi))
    rows[38] = (0.999, min(rows[38][1], 7.0), rows[38][2])
    with open(path, "w") as f:
        f.write("city,CFR,Pop,HDI\n")
        for i, (y, pop, hdi) in enumerate(rows, start=1):
            f.write(f"{i},{y:.6f},{pop:.4f},{hdi:.3f}\n")


if __name__ == "__main__":
    main(*sys.argv[1:2])

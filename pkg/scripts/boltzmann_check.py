#!/usr/bin/env python3
"""Compare fixed-beta Metropolis sampling against exact Boltzmann weights.

Enumerates all 2^n states of a small random +-1 graph, runs a long
single-replica sweep chain at the same beta, and prints the per-energy
comparison plus a chi-square p-value. A correct sampler should give p
values uniform over (0, 1) across seeds.
"""

import argparse
import sys

import numpy as np
from scipy import stats

from pamcut.engine import Replica, metropolis_sweep
from pamcut.graph import Graph, ising_energy


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    edges = [
        (u, v, int(rng.integers(0, 2)) * 2 - 1)
        for u in range(n)
        for v in range(u + 1, n)
        if rng.random() < p
    ]
    return Graph.from_edges(n, edges or [(0, 1, 1)])


def exact_probs(g, beta):
    states = np.arange(2**g.n, dtype=np.uint32)
    spins = (((states[:, None] >> np.arange(g.n, dtype=np.uint32)) & 1).astype(np.int8) * 2) - 1
    energies = (spins[:, g.edge_u] * spins[:, g.edge_v]) @ g.edge_w
    w = np.exp(-beta * (energies - energies.min()).astype(np.float64))
    z = w.sum()
    return {int(e): float(w[energies == e].sum() / z) for e in np.unique(energies)}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=12)
    parser.add_argument("--p", type=float, default=0.35)
    parser.add_argument("--beta", type=float, default=0.4)
    parser.add_argument("--sweeps", type=int, default=100_000)
    parser.add_argument("--burn", type=int, default=2_000)
    parser.add_argument("--thin", type=int, default=10)
    parser.add_argument("--graph-seed", type=int, default=60)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    if args.n > 20:
        parser.error("enumeration needs n <= 20")

    g = random_graph(args.n, args.p, args.graph_seed)
    print(f"graph: n={g.n} m={g.m}, beta={args.beta}")
    probs = exact_probs(g, args.beta)

    gen = np.random.default_rng(args.seed)
    s = (gen.integers(0, 2, g.n, dtype=np.int8) * 2) - 1
    r = Replica(s, ising_energy(g, s))
    samples = []
    for t in range(args.sweeps):
        r, _ = metropolis_sweep(g, r, args.beta, gen)
        if t >= args.burn and (t - args.burn) % args.thin == 0:
            samples.append(r.energy)
    samples = np.asarray(samples)

    print(f"{'E':>6} {'P_exact':>10} {'P_sampled':>10}")
    for e in sorted(probs):
        frac = (samples == e).mean()
        print(f"{e:>6} {probs[e]:>10.5f} {frac:>10.5f}")

    levels = sorted(probs)
    expected = np.array([probs[e] for e in levels]) * len(samples)
    observed = np.array([(samples == e).sum() for e in levels])
    merged_o, merged_e = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5:
            merged_o.append(acc_o)
            merged_e.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e and merged_e:
        merged_o[-1] += acc_o
        merged_e[-1] += acc_e
    merged_e = np.asarray(merged_e) * (np.sum(merged_o) / np.sum(merged_e))
    chi2, p = stats.chisquare(merged_o, merged_e)
    print(f"\nchi-square over {len(merged_o)} bins, {len(samples)} samples: "
          f"stat={chi2:.2f}, p={p:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

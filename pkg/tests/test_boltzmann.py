"""Distributional checks of the Metropolis kernel against exact enumeration."""

import numpy as np

from conftest import random_pm1_graph
from oracles import (
    boltzmann_energy_probs,
    chi2_pvalue_vs_boltzmann,
    enumerate_energies,
    metropolis_energy_samples,
)


def test_enumeration_probs_sum_to_one():
    g = random_pm1_graph(10, 0.35, seed=40)
    probs = boltzmann_energy_probs(g, 0.4)
    assert abs(sum(probs.values()) - 1.0) < 1e-12
    # beta = 0 must reduce to state counting
    flat = boltzmann_energy_probs(g, 0.0)
    energies = enumerate_energies(g)
    for e, p in flat.items():
        assert p == (energies == e).sum() / energies.shape[0]


def test_fixed_beta_histogram_matches_boltzmann():
    # moderate-size version of the fidelity check; the acceptance suite runs
    # the full 1e5-sweep variant
    g = random_pm1_graph(10, 0.35, seed=41)
    samples = metropolis_energy_samples(
        g, beta=0.4, total_sweeps=20_000, burn=1_000, thin=5, seed=0
    )
    p, bins = chi2_pvalue_vs_boltzmann(g, 0.4, samples)
    assert bins >= 5
    assert p > 0.01


def test_cold_chain_concentrates_on_low_energies():
    g = random_pm1_graph(10, 0.35, seed=42)
    hot = metropolis_energy_samples(g, 0.05, 4_000, 500, 5, seed=1)
    cold = metropolis_energy_samples(g, 2.0, 4_000, 500, 5, seed=1)
    assert cold.mean() < hot.mean()

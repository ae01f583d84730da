"""Shared builders for randomised test models."""

import pytest

from splitgrow import (PartitionWeights, SplittingWeights,
                       derive_splitting_weights, make_alpha_class, make_table)

DMAX3_ENTRIES = [(1, 2, 1.0), (1, 3, 0.5), (2, 2, 1.0), (2, 3, 1.0)]


@pytest.fixture
def dmax3():
    """Bounded instance with derived splitting weights (1, 2, 3) and
    stationary densities (1/4, 1/2, 1/4), both solvable by hand."""
    return make_table(3, DMAX3_ENTRIES)


def random_linear_table(rng, d_max, a=None, b=None):
    """Random bounded table whose derived splitting weights are exactly
    a*i + b: draw a sparsity pattern, then rescale every split-degree class
    (the classes partition the entries) to the target weight.

    Guarantees every degree is leaf-reachable and (for d_max > 2) that the
    top degree can split.
    """
    if a is None:
        a = float(rng.uniform(0.0, 2.0))
    if b is None:
        b = float(rng.uniform(0.1, 2.0))
    entries = {}
    for i in range(1, d_max + 1):
        for j in range(i, d_max + 1):
            if not 1 <= i + j - 2 <= d_max:
                continue
            entries[(i, j)] = 0.0 if rng.random() < 0.35 else float(rng.uniform(0.05, 4.0))
    for k in range(2, d_max + 1):
        entries[(1, k)] = float(rng.uniform(0.05, 4.0))
    # keep the top degree splittable so no class has zero total mass
    entries[(2, d_max)] = float(rng.uniform(0.05, 4.0))
    raw = derive_splitting_weights(
        PartitionWeights.from_table(d_max, [(i, j, w) for (i, j), w in entries.items()]),
        d_max)
    scaled = [(i, j, w * (a * (i + j - 2) + b) / raw[i + j - 3])
              for (i, j), w in entries.items()]
    return make_table(d_max, scaled)


def random_case3_model(rng):
    """Random unbounded model of the two-banded class (random linear head
    rescaled to the splitting weights, eventually constant leaf fraction);
    every update coefficient of the density iteration is nonnegative."""
    a = float(rng.uniform(0.2, 2.0))
    b = float(rng.uniform(0.1, 1.5))
    sw = SplittingWeights(a, b)
    M = int(rng.integers(2, 5))
    alphas = [float(rng.uniform(0.25, 1.0)) for _ in range(int(rng.integers(1, 4)))]
    head = None
    if M > 2:
        entries = {}
        for d in range(1, M):
            pairs = [(j, d + 2 - j) for j in range(1, d + 2) if j <= d + 2 - j]
            for (i, j) in pairs:
                entries[(i, j)] = float(rng.uniform(0.05, 3.0))
            entries[(1, d + 1)] = float(rng.uniform(0.1, 3.0))
        raw_pw = PartitionWeights(lambda i, j: entries.get((min(i, j), max(i, j)), 0.0))
        raw = derive_splitting_weights(raw_pw, M - 1)
        scaled = {key: w * sw(key[0] + key[1] - 2) / raw[key[0] + key[1] - 3]
                  for key, w in entries.items()}
        head = PartitionWeights(lambda i, j: scaled.get((min(i, j), max(i, j)), 0.0))
    return make_alpha_class(sw, alphas, M=M, head=head)

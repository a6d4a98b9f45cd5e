"""Randomized equivalence suite: DP and fast counts against brute force."""

from __future__ import annotations

import numpy as np

from .counting import brute_profile, count_all, count_fast_k2
from .sampling import sample_basis, trial_seed

K_CHOICES = (2, 3, 4)
P_CHOICES = (0.2, 0.5, 0.8)


def run_oracle_suite(instances: int = 200, max_n: int = 30, master_seed: int = 0) -> dict:
    """Compare count_all with exhaustive enumeration on random small instances.

    Each instance draws n in [1, max_n], k and p from the fixed choice lists,
    and is checked in both modes at every j in [0, k n]. k = 2 instances also
    check the autoconvolution path.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([master_seed, 7])))
    mismatches = []
    checked = 0
    for i in range(instances):
        n = int(rng.integers(1, max_n + 1))
        k = int(rng.choice(K_CHOICES))
        p = float(rng.choice(P_CHOICES))
        sample = sample_basis(n, p, trial_seed(master_seed, i))
        for mode in ("distinct", "multiset"):
            prof = count_all(sample, k, mode)
            brute = brute_profile(sample, k, mode)
            for j in range(k * n + 1):
                checked += 1
                if prof[j] != brute[j]:
                    mismatches.append({"instance": i, "n": n, "k": k, "p": p, "mode": mode, "j": j,
                                       "dp": prof[j], "brute": brute[j]})
        if k == 2 and count_fast_k2(sample) != count_all(sample, 2):
            mismatches.append({"instance": i, "n": n, "k": 2, "p": p, "mode": "fast_k2"})
    return {
        "instances": instances,
        "max_n": max_n,
        "master_seed": master_seed,
        "checked": checked,
        "mismatches": mismatches,
        "passed": not mismatches,
    }

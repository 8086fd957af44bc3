# Norming sequences and the infinitesimality of the triangular array.
#
# Each generator family has a closed-form long-run variance v_inf, so
# a_n = 1/sqrt(n v_inf) and b_n = -a_n n mean make a_n S_n + b_n settle
# onto a standard normal.  This script checks the scaling regularity
# (a_n -> 0, consecutive ratio -> 1, vanishing drift) and builds the
# nonincreasing levels delta_n with P(a_n |X_k| >= delta_n) <= delta_n.

import numpy as np

from mixlimit.blocking import compute_deltas
from mixlimit.processes import (
    ProcessSpec,
    generate_path,
    marginal_abs_tail,
    norming_for,
    simulate_many,
    validate_norming,
)

ar1 = ProcessSpec(family="ar1", phi=0.5)
norming = norming_for(ar1)
print("AR(1) with phi = 0.5:", norming.provenance)

# empirical check of the closed form: Var(S_n)/n should approach v_inf = 4
for n in (64, 1024, 16384):
    paths = simulate_many(ar1, n, 2000, seed=1, label=f"demo{n}")
    print(f"  empirical Var(S_n)/n at n={n:6d}: {paths.sum(axis=1).var() / n:.3f}")

# scaling regularity
rep = validate_norming(norming, n_max=10_000)
print("scaling diagnostics: a decays:", rep.a_vanishes,
      "| ratio -> 1:", rep.ratio_converges, "| drift -> 0:", rep.drift_vanishes)


class Geometric:
    a_values = staticmethod(lambda ns: 2.0 ** -np.asarray(ns, dtype=float))
    b_values = staticmethod(lambda ns: np.zeros(len(np.atleast_1d(ns))))


geo = validate_norming(Geometric(), 100)
print("a(n) = 2^-n would fail the ratio test: gap =", round(geo.ratio_gap, 3))

# --- infinitesimality levels ------------------------------------------------
# delta_n is the smallest grid level with P(a_n |X_k| >= delta) <= delta,
# monotonized so the sequence never increases.
tail = marginal_abs_tail(ar1)
a_tab = norming.a_values(np.arange(1, 4097))
deltas = compute_deltas(lambda n, d: tail(np.asarray(d) / a_tab[n - 1]), 4096, 0.05)
print("\ndelta levels (AR(1), grid step 0.05):")
for n in (10, 100, 1000, 4096):
    print(f"  n={n:5d}: delta = {deltas[n - 1]:.2f}, "
          f"tail at that level = {float(tail(deltas[n - 1] / a_tab[n - 1])):.4f}")

path = generate_path(ar1, 8, seed=7)
print("\na sample path prefix:", np.round(path.values, 3))
print("export as CSV:\n" + path.to_csv_string()[:120] + "...")

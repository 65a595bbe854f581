"""When does the most-populated subspace stop being the truth?

Walks two small instances through the exact oracle:
  * inliers split evenly over the axes of a plane, outliers piled on e3
  * general-position inliers with a repeated outlier point
and prints where the truth goes from unique, to tied, to beaten.

    python demos/well_definedness.py
"""

import numpy as np

from advrsr.dataset import fixture_axis_split, gen_general_position, with_outliers
from advrsr.grassmann import random_subspace
from advrsr.oracles import l0_bruteforce, snr_and_thresholds, well_defined_check

print("Axis-aligned plane, d=2, D=3, 10 inliers, outliers all at e3")
for n_out in range(0, 9):
    ds = fixture_axis_split(2, 3, 10, n_out)
    res = l0_bruteforce(ds.points, 2)
    print(f"  N_out={n_out}: {well_defined_check(ds).value:13s} best count {res.best_count:2d}, "
          f"{len(res.co_maximizers)} maximizing plane(s)")

# A point repeated k times plus any d-1 inliers fills a d-subspace with
# k + d - 1 points, so the truth holds only while N_out < N_in - d + 1.
rng = np.random.default_rng(0)
d, N_in = 3, 9
L = random_subspace(4, d, rng)
inl = gen_general_position(L, N_in, rng)
p = rng.standard_normal(4)
print(f"\nGeneral position, d={d}, N_in={N_in}, repeated outlier point")
for n_out in range(0, 10):
    ds = with_outliers(inl, np.repeat(p[:, None], n_out, axis=1))
    rec = snr_and_thresholds(ds)
    print(f"  N_out={n_out}: {well_defined_check(ds).value:13s} SNR {rec.snr:6.3g}  "
          f"information bound {rec.information_bound:.3g}")

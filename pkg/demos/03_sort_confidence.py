"""Probability that a sample ranks its bins in the wrong order.

For several sample sizes drawn from the two-feature example, the union
bound on the sort error is printed next to a Monte Carlo estimate obtained
from joint posterior draws.
"""
from finiteroc import sample_counts, sort_error_bound, sort_violation_frequency, worked_example

truth = worked_example()
print(f"{'n':>7} {'bound':>8} {'monte carlo':>12}")
for n in (40, 160, 640, 2560, 10240):
    counts = sample_counts(truth, n, n, seed=n)
    b = sort_error_bound(counts)
    p, se = sort_violation_frequency(counts, 5000, seed=1)
    print(f"{n:7d} {b.bound:8.4f} {p:8.4f} +- {se:.4f}")

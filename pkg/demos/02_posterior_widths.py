"""How well does a bin count pin down its probability?

Prints the width of the central 90% beta-posterior interval over a grid of
sample sizes and frequencies, then compares it with the Chebychev bound.
"""

from finiteroc import bin_posterior, chebychev_tail, chebychev_tail_universal, percentile_width_w90

freqs = (0.01, 0.05, 0.1, 0.25, 0.5)
sizes = (16, 64, 256, 1024, 4096)
print("w90 width" + "".join(f"{f:>9}" for f in freqs))
for n in sizes:
    row = [percentile_width_w90(bin_posterior(int(round(f * n)), n)) for f in freqs]
    print(f"n={n:<6}  " + "".join(f"{w:9.4f}" for w in row))

p = bin_posterior(512, 1024)
inside = p.cdf(p.mean + 0.025) - p.cdf(p.mean - 0.025)
print(f"\nk=512, n=1024: {inside:.3f} of the posterior lies within +-0.025 of the mean")

print("\nexact two-sided tail mass against the Chebychev bounds (n=256, nu=0.05)")
for k in (0, 3, 32, 128):
    q = bin_posterior(k, 256)
    tail = q.cdf(q.mean - 0.05) + 1 - q.cdf(q.mean + 0.05)
    print(f"  k={k:<4} tail={tail:.2e}  plug-in={chebychev_tail(k, 256, 0.05):.3f}"
          f"  universal={chebychev_tail_universal(256, 0.05):.3f}")
print("(with k=0 the plug-in form is 0 while the tail is not; the universal form still holds)")

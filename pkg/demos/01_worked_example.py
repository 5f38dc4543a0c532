"""Two binary features, four bins: exhaustive search versus NP design.

Every one of the 16 labelings is enumerated, and its upper hull is compared
with the five support classifiers obtained by ranking bins on their
likelihood ratio. The 40-sample counts then show what a single swapped pair
of bins does to the classifier that is actually deployed.
"""
from finiteroc import (
    auc,
    curve_value_at,
    enumerate_aos,
    likelihood_ratios,
    np_design,
    rank_bins,
    upper_hull,
    worked_example,
    worked_example_counts,
)


def show(points):
    return ", ".join(f"({float(a):.2f}, {float(b):.2f})" for a, b in points)


truth = worked_example()
roc = np_design(truth, exact=True)
print("likelihood ratios:", [str(z) for z in likelihood_ratios(truth)])
print("rank of each bin:", roc.ranking.alpha.tolist())
print("support points:   ", show(roc.points))
print("area under ROC:   ", auc(roc), "=", float(auc(roc)))

aos = enumerate_aos(truth)
print("\nall 16 labelings (classifier index j has bit x = label of bin x):")
for j, (pf, pd) in enumerate(aos):
    labels = "".join(str((j >> x) & 1) for x in range(4))
    print(f"  {labels}  pf={float(pf):.2f}  pd={float(pd):.2f}")
print("hull of the 16 points:", show(upper_hull(aos)))

counts = worked_example_counts()
est = rank_bins(likelihood_ratios(counts))
print("\n40 samples per class; estimated ranks:", est.alpha.tolist())
toc = np_design(counts, truth, exact=True)
nepc = np_design(counts)
print("curve claimed by the sample (NEPC):", show(nepc.points))
print("true operating points (TOC):       ", show(toc.points))
pf, pd = toc.points[2]
print(f"second classifier really runs at ({float(pf)}, {float(pd)}); "
      f"the ROC offers pd={float(curve_value_at(roc, pf)):.2f} at that false-alarm rate")

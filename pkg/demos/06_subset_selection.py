"""Greedy forward selection among two informative and four white features.

Features 4 and 5 carry the two-feature example; features 0 to 3 are fair
coins under both classes. Each class contributes 3072 samples, split into
1024 for design and 2048 held out for the significance test.
"""
from finiteroc import SelectionConfig, extend_with_white_features, forward_select, sample_features, worked_example

truth = extend_with_white_features(worked_example(), 6)
data = sample_features(truth, 3072, 3072, seed=0)
trace = forward_select(data, config=SelectionConfig(holdout_fraction=2 / 3, seed=0))
for step in trace.steps:
    best = max(step.candidates, key=lambda c: c["gain"])
    print(f"subset {list(step.subset)}: best candidate {best['feature']} gain {best['gain']:+.4f} "
          f"(sd {best['sd']:.4f}) -> {step.reason}, sort bound {step.bound}")
print("selected:", list(trace.selected))

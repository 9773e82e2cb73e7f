"""Tell five plastics apart from how fast a touch fades on them.

Every sample is a simulated touch with a random hold style, so the initial
temperature varies. Three classifiers are scored with stratified 5-fold
cross-validation.
"""
import time

from thermprint.datasets import material_dataset
from thermprint.learn import cross_validate, encode_dataset, train_forest, train_mlp, train_svm
from thermprint.simulate import PLASTICS

t0 = time.perf_counter()
samples = material_dataset(PLASTICS, 20, seed=0, noise_sigma_c=0.3, size=21)
X, y = encode_dataset(samples)
print(f"{len(y)} samples, {X.shape[1]} features, built in {time.perf_counter() - t0:.1f} s")

learners = {
    "forest": lambda a, b: train_forest(a, b, n_trees=50, seed=0),
    "svm": lambda a, b: train_svm(a, b, seed=0),
    "mlp": lambda a, b: train_mlp(a, b, seed=0),
}
for name, train in learners.items():
    report = cross_validate(train, X, y, k=5, seed=0)
    print(f"\n{name}")
    print(report.format())

import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermprint.core import DissipationVector, DomainError, FormatError, save_vector
from thermprint.learn import (
    CONTEXTS,
    GENDERS,
    DegenerateModelError,
    EncodingError,
    ForestModel,
    LabeledSample,
    Tree,
    dumps,
    encode_dataset,
    encode_features,
    evaluate,
    hamming_loss,
    kfold_split,
    load_manifest,
    loads,
    predict,
    train_forest,
    train_mlp,
    train_svm,
)
from thermprint.learn.mlp import init_params, loss_and_gradients
from thermprint.learn.svm import svm_objective

TRAINERS = [
    ("forest", lambda X, y, seed=0: train_forest(X, y, n_trees=5, seed=seed)),
    ("svm", lambda X, y, seed=0: train_svm(X, y, epochs=20, seed=seed)),
    ("mlp", lambda X, y, seed=0: train_mlp(X, y, epochs=50, seed=seed)),
]


def blobs(seed, n=20, d=4, classes=("a", "b", "c"), spread=0.3):
    rng = np.random.default_rng(seed)
    X, y = [], []
    for i, c in enumerate(classes):
        center = np.zeros(d)
        center[i % d] = 3.0
        X.append(center + spread * rng.standard_normal((n, d)))
        y += [c] * n
    return np.vstack(X), y


def numeric_gradients(params, Z, yi, l2, h=1e-5):
    out = {}
    for name, value in params.items():
        g = np.zeros_like(value)
        for idx in np.ndindex(value.shape):
            plus = {k: v.copy() for k, v in params.items()}
            minus = {k: v.copy() for k, v in params.items()}
            plus[name][idx] += h
            minus[name][idx] -= h
            g[idx] = (loss_and_gradients(plus, Z, yi, l2)[0]
                      - loss_and_gradients(minus, Z, yi, l2)[0]) / (2 * h)
        out[name] = g
    return out


def max_relative_error(analytic, numeric):
    worst = 0.0
    for name in analytic:
        a, n = analytic[name], numeric[name]
        denom = np.maximum(np.abs(a) + np.abs(n), 1e-8)
        worst = max(worst, float((np.abs(a - n) / denom).max()))
    return worst


# forest


def test_forest_separable_constant_vectors():
    X = np.array([[0.0, 1.0]] * 5 + [[1.0, 0.0]] * 5)
    y = ["x"] * 5 + ["y"] * 5
    model = train_forest(X, y, n_trees=10)
    assert model.predict(X) == y


def test_forest_stump_threshold_between_classes():
    rng = np.random.default_rng(4)
    for _ in range(30):
        lo = np.sort(rng.uniform(-5, 5, 6))
        hi = lo.max() + rng.uniform(0.1, 3) + np.sort(rng.uniform(0, 5, 6))
        X = np.concatenate([lo, hi])[:, None]
        y = ["a"] * 6 + ["b"] * 6
        model = train_forest(X, y, n_trees=1, max_depth=1, bootstrap=False)
        (tree,) = model.trees
        assert tree.n_nodes == 3 and tree.feature[0] == 0
        # exhaustive oracle: every threshold strictly separating the classes
        candidates = np.sort(X[:, 0])
        separating = [t for t in candidates
                      if all((v <= t) == (lab == "a") for v, lab in zip(X[:, 0], y))]
        assert separating == [lo.max()]
        assert lo.max() <= tree.threshold[0] < hi.min()
        assert model.predict(X) == y


def test_forest_single_stump_returns_training_label():
    X = np.array([[0.0], [0.0], [5.0], [5.0]])
    model = train_forest(X, ["p", "p", "q", "q"], n_trees=1, max_depth=1, bootstrap=False)
    assert predict(model, [5.0]) == "q"
    assert predict(model, [0.0]) == "p"


def leaf_tree(class_index, n_classes):
    counts = np.zeros((1, n_classes))
    counts[0, class_index] = 1.0
    return Tree(np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]), counts)


def test_forest_tie_between_trees_goes_to_smallest_label():
    classes = ("apple", "banana", "cherry")
    forest = ForestModel(classes, 2, (leaf_tree(2, 3), leaf_tree(1, 3)))
    assert forest.predict(np.zeros((1, 2))) == ["banana"]
    forest = ForestModel(classes, 2, (leaf_tree(1, 3), leaf_tree(0, 3), leaf_tree(2, 3)))
    assert forest.predict(np.zeros((1, 2))) == ["apple"]


def test_forest_training_accuracy_grows_with_trees():
    ups = downs = 0
    for seed in range(20):
        X, y = blobs(seed, n=15, spread=1.2)
        accs = [float(np.mean(np.array(train_forest(X, y, n_trees=n, seed=seed).predict(X)) == y))
                for n in (1, 25)]
        ups += accs[1] >= accs[0]
        downs += accs[1] < accs[0]
    assert ups > downs


def test_forest_argument_errors():
    X, y = blobs(0)
    with pytest.raises(ValueError):
        train_forest(X, y, n_trees=0)
    with pytest.raises(ValueError):
        train_forest(X, y, min_leaf=0)


# svm


def test_svm_separable_2d():
    rng = np.random.default_rng(0)
    a = rng.uniform(0, 1, (30, 2)) + [2.0, 2.0]
    b = rng.uniform(0, 1, (30, 2)) - [2.0, 2.0]
    X = np.vstack([a, b])
    y = ["pos"] * 30 + ["neg"] * 30
    model = train_svm(X, y, epochs=50)
    assert model.predict(X) == y


def test_svm_objective_non_increasing():
    X, y = blobs(3, spread=1.0)
    model = train_svm(X, y, epochs=40, l2=1e-2)
    hist = np.array(model.objective_history)
    assert len(hist) == 41
    assert np.all(np.diff(hist) <= 0)
    # the recorded value is the full objective of the returned weights
    assert svm_objective(model, X, y, 1e-2) == pytest.approx(hist[-1], rel=1e-12)


def test_svm_objective_recomputed_per_epoch():
    X, y = blobs(5, spread=1.0)
    values = [svm_objective(train_svm(X, y, epochs=e, l2=1e-2), X, y, 1e-2) for e in range(0, 12)]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_svm_scale_invariance():
    X, y = blobs(2, spread=1.0)
    base = train_svm(X, y, epochs=15).predict(X)
    for factor in (0.25, 4.0, 1024.0):
        scaled = train_svm(X * factor, y, epochs=15)
        assert scaled.predict(X * factor) == base


def test_svm_argument_errors():
    X, y = blobs(0)
    with pytest.raises(ValueError):
        train_svm(X, y, learning_rate=0.0)
    with pytest.raises(ValueError):
        train_svm(X, y, epochs=-1)


# mlp


def test_mlp_learns_xor():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]] * 4, dtype=float)
    y = ["zero", "one", "one", "zero"] * 4
    model = train_mlp(X, y, hidden_units=4, epochs=600, learning_rate=0.3, seed=0)
    assert model.predict(X) == y


def test_mlp_gradient_matches_finite_differences():
    rng = np.random.default_rng(8)
    for trial in range(10):
        d, h, k, n = 4, 3, 3, 7
        params = init_params(d, h, k, rng)
        params = {name: v + 0.3 * rng.standard_normal(v.shape) for name, v in params.items()}
        Z = rng.standard_normal((n, d))
        yi = rng.integers(0, k, n)
        l2 = [0.0, 1e-3][trial % 2]
        analytic = loss_and_gradients(params, Z, yi, l2)[1]
        assert max_relative_error(analytic, numeric_gradients(params, Z, yi, l2)) < 1e-4


def test_mlp_zero_epochs_softmax_normalized():
    X, y = blobs(1)
    model = train_mlp(X, y, epochs=0)
    proba = model.predict_proba(X)
    assert np.all(np.abs(proba.sum(axis=1) - 1.0) <= 1e-9)
    assert np.all(proba > 0)


def test_mlp_argument_errors():
    X, y = blobs(0)
    with pytest.raises(ValueError):
        train_mlp(X, y, hidden_units=0)


# shared behaviour


@pytest.mark.parametrize("name,train", TRAINERS, ids=[t[0] for t in TRAINERS])
def test_determinism_and_label_closure(name, train):
    X, y = blobs(7)
    a, b = train(X, y, seed=3), train(X, y, seed=3)
    assert dumps(a) == dumps(b)
    rng = np.random.default_rng(0)
    probe = rng.normal(0, 10, (50, X.shape[1]))
    assert set(a.predict(probe)) <= set(y)


@pytest.mark.parametrize("name,train", TRAINERS, ids=[t[0] for t in TRAINERS])
def test_dimension_mismatch(name, train):
    X, y = blobs(0)
    model = train(X, y)
    with pytest.raises(DomainError, match="dimension"):
        predict(model, np.zeros(X.shape[1] + 1))


@pytest.mark.parametrize("name,train", TRAINERS, ids=[t[0] for t in TRAINERS])
def test_persistence_roundtrip(name, train):
    X, y = blobs(9)
    model = train(X, y)
    back = loads(dumps(model))
    assert dumps(back) == dumps(model)
    assert back.predict(X) == model.predict(X)


@pytest.mark.parametrize("name,train", TRAINERS, ids=[t[0] for t in TRAINERS])
def test_degenerate_training_data(name, train):
    with pytest.raises(DegenerateModelError):
        train(np.zeros((4, 2)), ["a"] * 4)
    with pytest.raises(DegenerateModelError):
        train(np.zeros((3, 2)), ["a", "a", "b"])
    with pytest.raises(DomainError):
        train(np.zeros((3, 2)), ["a", "b"])


def test_model_text_errors():
    with pytest.raises(FormatError):
        loads("")
    with pytest.raises(FormatError):
        loads("MDM1 tree 2 2\nclasses a b\n")
    X, y = blobs(0)
    text = dumps(train_svm(X, y, epochs=2))
    with pytest.raises(FormatError):
        loads(text.replace("mean", "avg", 1))
    with pytest.raises(FormatError):
        loads("\n".join(text.splitlines()[:-1]))


# features and manifests


def sample(values, label="x", context=None, gender=None):
    return LabeledSample(DissipationVector(values, 8000), label, context, gender)


def test_encode_dimensions():
    s = sample([1.0, 0.5, 0.0], context="quick", gender="male")
    assert encode_features(s).shape == (3,)
    assert encode_features(s, True, True).shape == (3 + 5,)
    assert encode_features(s, True, True).tolist() == [1.0, 0.5, 0.0, 0, 0, 1, 0, 1]
    with pytest.raises(EncodingError):
        encode_features(sample([1.0]), include_context=True)
    with pytest.raises(EncodingError):
        encode_features(sample([1.0], context="fixed"), include_gender=True)


def test_one_hot_slots_exhaustive():
    for ctx, gen in itertools.product(CONTEXTS, GENDERS):
        f = encode_features(sample([1.0, 0.0], context=ctx, gender=gen), True, True)
        ctx_part, gen_part = f[2:5], f[5:]
        assert ctx_part.sum() == 1 and ctx_part[CONTEXTS.index(ctx)] == 1
        assert gen_part.sum() == 1 and gen_part[GENDERS.index(gen)] == 1


def test_sample_validation():
    with pytest.raises(DomainError):
        sample([1.0], label="two words")
    with pytest.raises(DomainError):
        sample([1.0], context="slow")
    with pytest.raises(DomainError):
        encode_dataset([sample([1.0, 0.0]), sample([1.0])])


def test_manifest_loading(tmp_path):
    save_vector(DissipationVector([1.0, 0.25], 8000), tmp_path / "a.mdv")
    save_vector(DissipationVector([1.0, 0.75], 8000), tmp_path / "b.mdv")
    (tmp_path / "m.txt").write_text("# comment\na.mdv PP fixed female\n\nb.mdv PS - male\n")
    samples = load_manifest(tmp_path / "m.txt")
    assert [(s.label, s.context, s.gender_meta) for s in samples] == [
        ("PP", "fixed", "female"), ("PS", None, "male")]
    X, y = encode_dataset(samples)
    assert X.tolist() == [[1.0, 0.25], [1.0, 0.75]] and y == ["PP", "PS"]
    (tmp_path / "bad.txt").write_text("a.mdv\n")
    with pytest.raises(FormatError, match="line 1"):
        load_manifest(tmp_path / "bad.txt")


# evaluation


def brute_force_hamming(pred, true):
    total = 0.0
    for p, t in zip(pred, true):
        labels = set(p) | set(t)
        diff = size = 0
        for lab in labels:
            cp, ct = p.count(lab), t.count(lab)
            diff += abs(cp - ct)
            size += max(cp, ct)
        total += diff / size if size else 0.0
    return total / len(true)


def test_hamming_examples():
    assert hamming_loss([["a", "b"]], [["b", "a"]]) == 0.0
    assert hamming_loss([["a", "a"]], [["b"]]) == 1.0
    assert hamming_loss([["a", "b"], ["a"]], [["a", "c"], ["a"]]) == pytest.approx((2 / 3) / 2)
    with pytest.raises(DomainError):
        hamming_loss([], [])
    with pytest.raises(DomainError):
        hamming_loss([["a"]], [])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.lists(st.sampled_from("abcd"), max_size=5),
                          st.lists(st.sampled_from("abcd"), min_size=1, max_size=5)),
                min_size=1, max_size=6))
def test_hamming_matches_brute_force(pairs):
    pred = [p for p, _ in pairs]
    true = [t for _, t in pairs]
    assert hamming_loss(pred, true) == pytest.approx(brute_force_hamming(pred, true), abs=1e-12)


def test_evaluate_report():
    X, y = blobs(4, spread=1.5)
    model = train_forest(X, y, n_trees=3)
    report = evaluate(model, X, y)
    pred = model.predict(X)
    assert report.accuracy == np.mean(np.array(pred) == np.array(y))
    assert report.confusion.sum(axis=1).tolist() == [Counter(y)[c] for c in report.classes]
    assert np.trace(report.confusion) == sum(p == t for p, t in zip(pred, y))
    assert report.format().splitlines()[0].startswith("accuracy ")
    with pytest.raises(DomainError):
        evaluate(model, np.zeros((0, X.shape[1])), [])


def test_kfold_leave_one_out():
    y = ["only"] * 7
    folds = kfold_split(y, 7, seed=1)
    tests = sorted(int(i) for _, te in folds for i in te)
    assert tests == list(range(7))
    assert all(len(te) == 1 and len(tr) == 6 for tr, te in folds)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 6))
def test_kfold_stratified_partition(seed, k):
    rng = np.random.default_rng(seed)
    y = []
    for c in "abcd"[: int(rng.integers(1, 5))]:
        y += [c] * int(rng.integers(k, 4 * k))
    folds = kfold_split(y, k, seed)
    assert len(folds) == k
    seen = np.concatenate([te for _, te in folds])
    assert sorted(seen.tolist()) == list(range(len(y)))
    sizes = [len(te) for _, te in folds]
    assert max(sizes) - min(sizes) <= 1
    total = Counter(y)
    for tr, te in folds:
        assert set(tr.tolist()).isdisjoint(te.tolist())
        assert len(tr) + len(te) == len(y)
        here = Counter(y[i] for i in te)
        for c, n in total.items():
            assert abs(here[c] - n / k) <= 1


def test_kfold_errors_and_determinism():
    with pytest.raises(DomainError, match="fewer than k"):
        kfold_split(["a"] * 5 + ["b"] * 2, 3)
    with pytest.raises(DomainError):
        kfold_split(["a"] * 5, 1)
    y = ["a"] * 6 + ["b"] * 9
    a, b = kfold_split(y, 3, seed=4), kfold_split(y, 3, seed=4)
    assert all(np.array_equal(x[1], z[1]) for x, z in zip(a, b))

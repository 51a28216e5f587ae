import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uniband import clustering
from uniband.clustering import CountryFeatures

from oracles import best_two_partition, same_partition


def test_standardize_sample_std():
    z, mean, std = clustering.standardize(np.array([[1.0], [3.0]]))
    np.testing.assert_allclose(z.ravel(), [-1 / np.sqrt(2), 1 / np.sqrt(2)])
    assert mean[0] == 2.0


def test_standardize_idempotent():
    x = np.random.default_rng(0).normal(size=(20, 3))
    z, _, _ = clustering.standardize(x)
    z2, _, _ = clustering.standardize(z)
    np.testing.assert_allclose(z, z2, atol=1e-9)


def test_zero_variance_names_feature():
    feats = [CountryFeatures(f"C{i}", 100.0 + i, 50.0, 10.0 * i) for i in range(3)]
    with pytest.raises(ValueError, match="pop_density"):
        clustering.standardize(feats)


def test_two_tight_groups_match_oracle():
    rng = np.random.default_rng(1)
    pts = np.vstack([rng.normal(0, 1e-3, (5, 3)), rng.normal(10, 1e-3, (6, 3))])
    model = clustering.kmeans(pts, 2, seed=0)
    wss, labels = best_two_partition(pts)
    assert same_partition(model.labels, labels)
    assert model.wss == pytest.approx(wss)


def test_k_equals_n():
    pts = np.random.default_rng(2).normal(size=(6, 3))
    assert clustering.kmeans(pts, 6).wss == pytest.approx(0.0, abs=1e-20)


def test_k_one_is_mean():
    pts = np.random.default_rng(3).normal(size=(9, 3))
    model = clustering.kmeans(pts, 1)
    np.testing.assert_allclose(model.centroids[0], pts.mean(axis=0))
    assert model.wss == pytest.approx(((pts - pts.mean(axis=0)) ** 2).sum())


def test_k_beyond_distinct_points():
    with pytest.raises(ValueError, match="distinct"):
        clustering.kmeans(np.ones((5, 3)), 2)


def test_same_seed_same_model():
    pts = np.random.default_rng(4).normal(size=(30, 3))
    a, b = clustering.kmeans(pts, 3, seed=9), clustering.kmeans(pts, 3, seed=9)
    np.testing.assert_array_equal(a.labels, b.labels)
    assert a.wss == b.wss


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_lloyd_wss_never_increases(seed, k):
    pts = np.random.default_rng(seed).normal(size=(15, 3))
    model = clustering.kmeans(pts, k, seed=seed, restarts=5)
    for hist in model.restart_histories:
        assert all(b <= a + 1e-12 for a, b in zip(hist, hist[1:]))


def test_wss_curve():
    pts = np.random.default_rng(5).normal(size=(7, 3))
    curve = clustering.wss_curve(pts, 7)
    assert [k for k, _ in curve] == list(range(1, 8))
    assert curve[-1][1] == pytest.approx(0.0, abs=1e-20)
    assert all(b <= a for (_, a), (_, b) in zip(curve, curve[1:]))


def test_wss_curve_elbow_on_two_groups():
    rng = np.random.default_rng(6)
    pts = np.vstack([rng.normal(0, 0.1, (10, 3)), rng.normal(5, 0.1, (10, 3))])
    (_, w1), (_, w2), (_, w3) = clustering.wss_curve(pts, 3)
    assert w1 - w2 > 10 * (w2 - w3)


def test_single_repeated_point():
    assert clustering.kmeans(np.ones((4, 3)), 1).wss == 0


def test_assign_cluster_tie_and_nearest():
    cents = np.array([[9.0, 9, 9], [5, 5, 5], [1.0, 0, 0], [9, 9, 8], [-1.0, 0, 0]])
    model = clustering.ClusterModel(5, cents, np.zeros(3), np.ones(3), np.array([]), 0.0)
    assert clustering.assign_cluster(cents[1], model) == 1
    assert clustering.assign_cluster([0.0, 0, 0], model) == 2
    assert clustering.assign_cluster([-1e-9, 0, 0], model) == 4


def test_fixture_features(fixture_dir, tmp_path):
    feats = clustering.load_features(fixture_dir / "features.csv")
    model = clustering.fit_countries(feats, k=6, seed=0)
    assert set(model.labels) == set(range(6))
    out = tmp_path / "clusters.csv"
    clustering.write_clusters(model, out)
    assert out.read_text().splitlines()[0] == "iso3,cluster_id"
    # stored mean/std put raw features back into model space
    for f, label in zip(feats, model.labels):
        assert clustering.assign_cluster(f, model) == label

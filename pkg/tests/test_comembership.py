import io

import numpy as np
import pytest

from blockkit import (
    Partition,
    comembership_counts,
    comembership_matrix,
    meet_partition,
    membership_classes,
    ring_distance_classes,
    stratified_histogram,
    write_matrix_csv,
)


def test_single_record_all_together():
    m = comembership_matrix(np.zeros((1, 4), dtype=int))
    assert (m == 1.0).all()


def test_two_records_half():
    samples = np.array([[0, 0, 0], [0, 1, 2]])
    m = comembership_matrix(samples)
    off = m[~np.eye(3, dtype=bool)]
    assert (off == 0.5).all()
    assert (np.diag(m) == 1.0).all()


def test_identical_records_give_indicator():
    samples = np.array([[0, 1, 0, 1]] * 7)
    m = comembership_matrix(samples)
    assert set(np.unique(m).tolist()) == {0.0, 1.0}


def test_counts_are_integers():
    samples = np.array([[0, 0, 1], [0, 1, 1], [0, 1, 0]])
    c = comembership_counts(samples)
    assert c.dtype == np.int64
    assert c[0, 1] == 1
    assert c[1, 2] == 1
    assert c[0, 2] == 1


def test_matrix_is_symmetric_and_relabel_invariant(rng):
    samples = rng.integers(0, 3, size=(20, 8))
    m1 = comembership_matrix(samples)
    # permute labels within every record
    shuffled = samples.copy()
    for i in range(shuffled.shape[0]):
        perm = rng.permutation(3)
        shuffled[i] = perm[shuffled[i]]
    m2 = comembership_matrix(shuffled)
    assert np.array_equal(m1, m2)
    assert np.array_equal(m1, m1.T)


def test_empty_ensemble_rejected():
    with pytest.raises(ValueError):
        comembership_matrix(np.empty((0, 3), dtype=int))


def test_histogram_masses_sum_to_one(rng):
    samples = rng.integers(0, 2, size=(9, 6))
    m = comembership_matrix(samples)
    hist = stratified_histogram(m, membership_classes([0, 0, 0, 1, 1, 1]), bins=10)
    for entry in hist.values():
        assert entry["masses"].sum() == pytest.approx(1.0, abs=1e-12)
        assert entry["bin_edges"].size == 11


def test_histogram_single_bin_for_constant_matrix():
    m = comembership_matrix(np.array([[0, 0, 1, 1]] * 3))
    hist = stratified_histogram(m, lambda i, j: "all", bins=4)
    masses = hist["all"]["masses"]
    assert (masses > 0).sum() == 2  # values 0 and 1 land in the two end bins
    assert masses[0] + masses[-1] == pytest.approx(1.0, abs=1e-12)


def test_histogram_right_closed_bins():
    # 0 falls in the first bin; exact edge values go to the bin ending there
    m = np.array([[1.0, 0.0, 0.5], [0.0, 1.0, 1.0], [0.5, 1.0, 1.0]])
    hist = stratified_histogram(m, lambda i, j: "x", bins=2)
    masses = hist["x"]["masses"]
    # pairs: (0,1)=0.0 -> bin 0, (0,2)=0.5 -> bin 0 (right edge), (1,2)=1.0 -> bin 1
    assert masses.tolist() == pytest.approx([2 / 3, 1 / 3])


def test_histogram_dict_classifier_and_missing_pair():
    m = comembership_matrix(np.array([[0, 0, 1]]))
    full = {(0, 1): "a", (0, 2): "b", (1, 2): "b"}
    hist = stratified_histogram(m, full, bins=2)
    assert sorted(hist) == ["a", "b"]
    with pytest.raises(ValueError):
        stratified_histogram(m, {(0, 1): "a"}, bins=2)


def test_ring_distance_classifier():
    classify = ring_distance_classes(6, 2)
    assert classify(0, 1) == 0    # same clique
    assert classify(0, 2) == 1    # adjacent cliques
    assert classify(0, 6) == 3    # opposite side
    assert classify(0, 10) == 1   # wraps around
    custom = ring_distance_classes(3, 2, clique_of=[0, 1, 2, 0, 1, 2])
    assert custom(0, 3) == 0
    assert custom(0, 1) == 1


def test_membership_classes():
    classify = membership_classes([0, 0, 1])
    assert classify(0, 1) == "within"
    assert classify(0, 2) == "between"


def test_meet_single_input():
    p = Partition(np.array([1, 0, 1, 2]))
    meet = meet_partition([p])
    assert meet.g.tolist() == [0, 1, 0, 2]


def test_meet_crossing_pair():
    meet = meet_partition([np.array([0, 0, 1]), np.array([0, 1, 1])])
    assert meet.g.tolist() == [0, 1, 2]


def test_meet_refines_every_input(rng):
    inputs = []
    for _ in range(4):
        _, lab = np.unique(rng.integers(0, 3, size=10), return_inverse=True)
        inputs.append(lab)
    meet = meet_partition(inputs)
    for lab in inputs:
        for i in range(10):
            for j in range(10):
                if meet.g[i] == meet.g[j]:
                    assert lab[i] == lab[j]


def test_meet_idempotent(rng):
    _, lab = np.unique(rng.integers(0, 4, size=12), return_inverse=True)
    once = meet_partition([lab, lab])
    assert once.g.tolist() == Partition(lab).canonical().g.tolist()


def test_meet_size_mismatch():
    with pytest.raises(ValueError):
        meet_partition([np.array([0, 1]), np.array([0, 1, 1])])


def test_matrix_csv_format():
    m = comembership_matrix(np.array([[0, 0, 1]]))
    buf = io.StringIO()
    write_matrix_csv(m, ["a", "b", "c"], buf)
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == ",a,b,c"
    assert lines[1] == "a,1.000000,1.000000,0.000000"
    assert len(lines) == 4

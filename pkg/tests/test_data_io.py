import gzip
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpda.data_io import (
    Dataset,
    MnistUnavailable,
    benchmark_digest,
    check_benchmark,
    export_sample_idx,
    load_benchmark,
    load_csv,
    load_idx,
    load_mnist,
    make_benchmark,
    save_benchmark,
    save_csv,
    synth_2d,
    synth_blobs,
    write_idx,
)
from dpda.datamodel import Provenance
from dpda.errors import DataFormatError, PreconditionError


def test_synth_balance_and_determinism():
    d = synth_2d(100, seed=3)
    assert d.class_counts() == {0: 50, 1: 50}
    np.testing.assert_array_equal(d.X, synth_2d(100, seed=3).X)


def test_synth_zero_sigma():
    d = synth_2d(10, means=((1.0, 2.0), (-3.0, 0.5)), sigma=0.0)
    np.testing.assert_array_equal(d.X[d.y == 0], np.tile([1.0, 2.0], (5, 1)))
    np.testing.assert_array_equal(d.X[d.y == 1], np.tile([-3.0, 0.5], (5, 1)))


def test_synth_means_monte_carlo():
    sigma = 0.7
    d = synth_2d(10000, means=((-1.0, 0.5), (2.0, -1.5)), sigma=sigma, seed=5)
    bound = 3 * sigma / np.sqrt(5000)
    assert np.all(np.abs(d.X[d.y == 0].mean(axis=0) - [-1.0, 0.5]) < bound)
    assert np.all(np.abs(d.X[d.y == 1].mean(axis=0) - [2.0, -1.5]) < bound)


@pytest.mark.parametrize("n", [101, 2])
def test_synth_rejects_bad_n(n):
    with pytest.raises(PreconditionError):
        synth_2d(n)


def test_blobs_shape():
    d = synth_blobs(31, dim=7, n_classes=3, seed=0)
    assert d.X.shape == (31, 7)
    assert d.class_counts() == {0: 11, 1: 10, 2: 10}


# -- csv ----------------------------------------------------------------------

def test_csv_three_rows(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("f0,f1,label\n1,2,0\n3,4,1\n5,6,0\n")
    d = load_csv(p)
    assert len(d) == 3 and d.dim == 2
    np.testing.assert_array_equal(d.y, [0, 1, 0])


def test_csv_bad_value_names_row(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("f0,f1,label\n1,2,0\nabc,4,1\n")
    with pytest.raises(DataFormatError) as info:
        load_csv(p)
    assert info.value.row == 2
    assert "row 2" in str(info.value)


def test_csv_missing_column(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("f0,f1,target\n1,2,0\n")
    with pytest.raises(DataFormatError):
        load_csv(p)
    with pytest.raises(DataFormatError):
        load_csv(p, feature_columns=["f0", "f9"], label_column="target")


def test_csv_schema_selects_columns(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b,c,y\n1,2,3,1\n4,5,6,0\n")
    d = load_csv(p, feature_columns=["c", "a"], label_column="y")
    np.testing.assert_array_equal(d.X, [[3, 1], [6, 4]])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 20), st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
def test_csv_round_trip(n, d, seed):
    import tempfile
    from pathlib import Path

    rng = np.random.default_rng(seed)
    data = Dataset(rng.normal(size=(n, d)) * 10.0 ** rng.integers(-6, 6), rng.integers(0, 4, n))
    with tempfile.TemporaryDirectory() as tmp:
        back = load_csv(save_csv(data, Path(tmp) / "x.csv"))
    np.testing.assert_allclose(back.X, data.X, rtol=1e-12, atol=0)
    np.testing.assert_array_equal(back.y, data.y)


def test_csv_minmax(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("f0,f1,label\n0,10,0\n5,10,1\n10,10,0\n")
    d = load_csv(p, minmax=True)
    np.testing.assert_array_equal(d.X[:, 0], [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(d.X[:, 1], [0.0, 0.0, 0.0])


# -- idx --------------------------------------------------------------------

@pytest.fixture
def idx_files(tmp_path):
    rng = np.random.default_rng(0)
    images = rng.integers(0, 256, size=(12, 28, 28))
    labels = rng.integers(0, 10, size=12)
    paths = tmp_path / "img", tmp_path / "lab"
    write_idx(images, labels, *paths)
    return images, labels, paths


def test_idx_round_trip(idx_files):
    images, labels, (ip, lp) = idx_files
    d = load_idx(ip, lp, limit=5)
    assert d.X.shape == (5, 784)
    np.testing.assert_allclose(d.X, images[:5].reshape(5, -1) / 255.0)
    np.testing.assert_array_equal(d.y, labels[:5])
    assert d.X.min() >= 0 and d.X.max() <= 1


def test_idx_gzip(tmp_path, idx_files):
    images, labels, _ = idx_files
    ip, lp = tmp_path / "i.gz", tmp_path / "l.gz"
    write_idx(images, labels, ip, lp, compress=True)
    assert ip.read_bytes()[:2] == b"\x1f\x8b"
    assert len(load_idx(ip, lp)) == 12


def test_idx_bad_magic(tmp_path, idx_files):
    _, _, (ip, lp) = idx_files
    raw = bytearray(ip.read_bytes())
    raw[2:4] = b"\x08\x01"
    bad = tmp_path / "bad"
    bad.write_bytes(bytes(raw))
    with pytest.raises(DataFormatError, match="magic"):
        load_idx(bad, lp)


def test_idx_truncated(tmp_path, idx_files):
    _, _, (ip, lp) = idx_files
    short = tmp_path / "short"
    short.write_bytes(ip.read_bytes()[:-1])
    with pytest.raises(DataFormatError):
        load_idx(short, lp)


def test_idx_count_mismatch(tmp_path, idx_files):
    _, labels, (ip, _) = idx_files
    lp = tmp_path / "lab7"
    lp.write_bytes(struct.pack(">2I", 0x801, 7) + bytes(7))
    with pytest.raises(DataFormatError):
        load_idx(ip, lp)


def test_mnist_sample_as_idx(tmp_path):
    try:
        paths = export_sample_idx(tmp_path, compress=True)
    except MnistUnavailable:
        pytest.skip("no MNIST sample installed")
    d = load_mnist(limit=100, directory=tmp_path)
    assert d.X.shape == (100, 784)
    assert set(d.y.tolist()) <= set(range(10))
    assert d.X.min() >= 0 and d.X.max() <= 1
    with gzip.open(paths[0]) as fh:
        assert fh.read(4) == b"\x00\x00\x08\x03"


def test_mnist_missing_directory(tmp_path):
    with pytest.raises(MnistUnavailable):
        load_mnist(directory=tmp_path)


# -- benchmarks ---------------------------------------------------------------

def test_point_groups():
    b = make_benchmark(synth_2d(100, seed=1), classes=[0, 1], group_size=1, seed=1)
    assert len(b.groups_with(Provenance.TRAINING)) == 50
    assert len(b.groups_with(Provenance.NON_TRAINING)) == 50
    assert all(len(g) == 1 for g in b.groups)


def test_groups_of_ten_membership():
    data = synth_2d(100, seed=2)
    b = make_benchmark(data, classes=[0, 1], group_size=10, seed=2)
    assert len(b.groups_with(Provenance.TRAINING)) == 5
    assert len(b.groups_with(Provenance.NON_TRAINING)) == 5
    train_rows = {tuple(x) for x in b.train_set.X}
    for g in b.groups:
        rows = {tuple(x) for x in g.features()}
        if g.truth is Provenance.TRAINING:
            assert rows <= train_rows
        else:
            assert not rows & train_rows
    check_benchmark(b)


def test_partial_final_group_kept():
    b = make_benchmark(synth_2d(24, seed=0), classes=[0, 1], group_size=5, seed=0)
    assert sorted(len(g) for g in b.groups) == [2, 2, 5, 5, 5, 5]


def test_benchmark_determinism_and_round_trip(tmp_path):
    data = synth_2d(60, seed=4)
    a = make_benchmark(data, classes=[0, 1], group_size=4, seed=9)
    b = make_benchmark(data, classes=[0, 1], group_size=4, seed=9)
    assert benchmark_digest(a) == benchmark_digest(b)
    back = load_benchmark(save_benchmark(a, tmp_path / "bench"))
    assert benchmark_digest(back) == benchmark_digest(a)


def test_benchmark_class_checks():
    data = synth_2d(20, seed=0)
    with pytest.raises(PreconditionError):
        make_benchmark(data, classes=[0, 5])
    with pytest.raises(PreconditionError):
        make_benchmark(data, classes=[0, 1], group_size=0)
    with pytest.raises(PreconditionError):
        make_benchmark(synth_blobs(30, 2, 3), classes=[0, 1, 2])
    multi = make_benchmark(synth_blobs(30, 2, 3), classes=[0, 1, 2], multiclass=True)
    assert multi.manifest.classes == [0, 1, 2]


def test_labels_are_remapped():
    d = Dataset(np.arange(20.0).reshape(10, 2), [7, 3] * 5)
    b = make_benchmark(d, classes=[7, 3], group_size=2)
    assert set(b.train_set.y.tolist()) <= {0, 1}
    assert b.manifest.classes == [7, 3]

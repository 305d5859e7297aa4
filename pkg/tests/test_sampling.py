"""Spectral sample extraction counts, determinism, and the stratified split."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peatcube.errors import ConfigError, EmptyClassError, InsufficientPixelsError
from peatcube.hypercube import REFLECTANCE, Hypercube, WavelengthAxis
from peatcube.masking import PixelMask
from peatcube.sampling import (
    SampleSet,
    SpectralSample,
    draw_spectral_samples,
    load_samples_csv,
    save_samples_csv,
    split_train_test,
)


def make_cube(lines, samples, bands=3, seed=0):
    rng = np.random.default_rng(seed)
    data = rng.uniform(0.0, 1.0, size=(lines, samples, bands))
    return Hypercube(
        data=data, axis=WavelengthAxis(np.arange(bands, dtype=float)), kind=REFLECTANCE
    )


def full_mask(lines, samples):
    return PixelMask(np.ones((lines, samples), dtype=bool))


class TestDrawSamples:
    @pytest.mark.parametrize(
        "shape,expected",
        [((260, 400), 2080), ((120, 120), 288)],  # M = 104000 and 14400, s = 50
    )
    def test_reported_sample_counts(self, shape, expected):
        cube = make_cube(*shape, bands=2)
        out = draw_spectral_samples(cube, full_mask(*shape), group_size=50, seed=1)
        assert len(out) == expected

    def test_group_size_one_reproduces_pixels(self):
        cube = make_cube(2, 5)
        out = draw_spectral_samples(cube, full_mask(2, 5), group_size=1, seed=3)
        assert len(out) == 10
        pixels = cube.data.reshape(-1, cube.bands)
        for s in out.samples:
            np.testing.assert_array_equal(s.spectrum, pixels[s.pixel_indices[0]])

    def test_insufficient_pixels(self):
        cube = make_cube(7, 7)
        with pytest.raises(InsufficientPixelsError):
            draw_spectral_samples(cube, full_mask(7, 7), group_size=50, seed=0)

    def test_determinism_bitwise(self):
        cube = make_cube(20, 20)
        a = draw_spectral_samples(cube, full_mask(20, 20), group_size=7, seed=99)
        b = draw_spectral_samples(cube, full_mask(20, 20), group_size=7, seed=99)
        assert len(a) == len(b)
        for sa, sb in zip(a.samples, b.samples):
            assert np.array_equal(sa.spectrum, sb.spectrum)
            assert np.array_equal(sa.pixel_indices, sb.pixel_indices)

    def test_seed_changes_grouping(self):
        cube = make_cube(20, 20)
        a = draw_spectral_samples(cube, full_mask(20, 20), group_size=7, seed=1)
        b = draw_spectral_samples(cube, full_mask(20, 20), group_size=7, seed=2)
        assert any(
            not np.array_equal(sa.pixel_indices, sb.pixel_indices)
            for sa, sb in zip(a.samples, b.samples)
        )

    def test_masked_pixels_never_sampled(self):
        cube = make_cube(10, 10)
        grid = np.zeros((10, 10), dtype=bool)
        grid[:5] = True
        out = draw_spectral_samples(cube, PixelMask(grid), group_size=5, seed=0)
        valid = set(np.flatnonzero(grid.reshape(-1)).tolist())
        for s in out.samples:
            assert set(s.pixel_indices.tolist()) <= valid

    @settings(max_examples=40, deadline=None)
    @given(
        valid=st.integers(min_value=1, max_value=400),
        group_size=st.integers(min_value=1, max_value=60),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    def test_count_disjointness_bounds(self, valid, group_size, seed):
        lines, samples = 20, 20
        rng = np.random.default_rng(seed)
        flat = np.zeros(lines * samples, dtype=bool)
        flat[rng.choice(lines * samples, size=valid, replace=False)] = True
        mask = PixelMask(flat.reshape(lines, samples))
        cube = make_cube(lines, samples, seed=seed % 17)
        if valid < group_size:
            with pytest.raises(InsufficientPixelsError):
                draw_spectral_samples(cube, mask, group_size, seed)
            return
        out = draw_spectral_samples(cube, mask, group_size, seed)
        assert len(out) == valid // group_size

        seen: set[int] = set()
        pixels = cube.data.reshape(-1, cube.bands)
        for s in out.samples:
            members = s.pixel_indices.tolist()
            assert len(members) == group_size
            assert not (seen & set(members))
            seen.update(members)
            group = pixels[s.pixel_indices]
            assert np.all(s.spectrum >= group.min(axis=0) - 1e-12)
            assert np.all(s.spectrum <= group.max(axis=0) + 1e-12)

    def test_label_and_targets_attach(self):
        cube = make_cube(4, 4)
        out = draw_spectral_samples(
            cube,
            full_mask(4, 4),
            group_size=4,
            seed=0,
            label="islay2",
            targets={"phenol": 120.5},
            cube_id="scan7",
        )
        assert all(s.label == "islay2" for s in out.samples)
        assert all(s.targets == {"phenol": 120.5} for s in out.samples)
        assert all(s.cube_id == "scan7" for s in out.samples)
        assert out.class_counts["islay2"] == len(out)


def labeled_set(counts: dict, bands=4, seed=0):
    rng = np.random.default_rng(seed)
    samples = []
    for label, n in counts.items():
        for _ in range(n):
            samples.append(
                SpectralSample(spectrum=rng.uniform(size=bands), label=label)
            )
    return SampleSet(samples=samples, seed=seed)


class TestSplit:
    def test_five_percent_of_2080(self):
        sset = labeled_set({"a": 2080})
        train, test = split_train_test(sset, 0.05, seed=1)
        assert len(train) == 104  # ceil(0.05 * 2080)
        assert len(test) == 1976

    def test_single_sample_class_goes_to_train(self):
        sset = labeled_set({"a": 1, "b": 40})
        train, test = split_train_test(sset, 0.05, seed=1)
        assert train.class_counts["a"] == 1
        assert test.class_counts["a"] == 0
        assert train.class_counts["b"] == 2  # ceil(0.05 * 40)

    def test_exact_half_split(self):
        sset = labeled_set({"a": 10, "b": 10, "c": 10})
        train, test = split_train_test(sset, 0.5, seed=2)
        for cls in "abc":
            assert train.class_counts[cls] == 5
            assert test.class_counts[cls] == 5

    def test_partition(self):
        sset = labeled_set({"a": 17, "b": 23, "c": 5}, seed=3)
        train, test = split_train_test(sset, 0.3, seed=7)
        assert len(train) + len(test) == len(sset)
        ids = lambda s: {id(x) for x in s.samples}  # noqa: E731
        assert not (ids(train) & ids(test))
        assert ids(train) | ids(test) == ids(sset)

    def test_determinism(self):
        sset = labeled_set({"a": 30, "b": 12})
        t1, _ = split_train_test(sset, 0.25, seed=42)
        t2, _ = split_train_test(sset, 0.25, seed=42)
        assert [id(s) for s in t1.samples] == [id(s) for s in t2.samples]

    def test_empty_set_rejected(self):
        with pytest.raises(EmptyClassError):
            split_train_test(SampleSet(samples=[]), 0.5, seed=0)

    def test_bad_fraction_rejected(self):
        sset = labeled_set({"a": 4})
        with pytest.raises(ConfigError):
            split_train_test(sset, 1.5, seed=0)

    def test_unlabeled_set_splits_as_one_class(self):
        rng = np.random.default_rng(0)
        sset = SampleSet(
            samples=[SpectralSample(spectrum=rng.uniform(size=3)) for _ in range(20)]
        )
        train, test = split_train_test(sset, 0.2, seed=5)
        assert len(train) == 4
        assert len(test) == 16


class TestCsvRoundTrip:
    def test_exact_round_trip(self, tmp_path):
        rng = np.random.default_rng(8)
        samples = [
            SpectralSample(
                spectrum=rng.uniform(size=5),
                label="class03",
                targets={"phenol": 12.25, "moisture": 40.125, "om": 93.5},
            ),
            SpectralSample(spectrum=rng.uniform(size=5)),  # unlabeled, no targets
            SpectralSample(spectrum=rng.uniform(size=5), label="class01",
                           targets={"phenol": 1e-7}),
        ]
        sset = SampleSet(samples=samples, seed=3)
        save_samples_csv(sset, tmp_path / "s.csv", tmp_path / "s.json", group_size=10)
        again = load_samples_csv(tmp_path / "s.csv", seed=3)
        assert len(again) == 3
        for a, b in zip(sset.samples, again.samples):
            assert np.array_equal(a.spectrum, b.spectrum)  # repr floats: exact
            assert a.label == b.label
            assert (a.targets or None) == (b.targets or None)

    def test_sidecar_contents(self, tmp_path):
        import json

        sset = labeled_set({"a": 6})
        save_samples_csv(
            sset,
            tmp_path / "s.csv",
            tmp_path / "s.json",
            group_size=50,
            sources={"scan1": 300},
        )
        meta = json.loads((tmp_path / "s.json").read_text())
        assert meta["group_size"] == 50
        assert meta["sources"] == {"scan1": 300}
        assert meta["count"] == 6
        assert meta["seed"] == 0

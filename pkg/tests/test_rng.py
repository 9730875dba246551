import numpy as np
import pytest

from deltasub.rng import SplitMix64


class TestSplitMix64:
    """SplitMix64 流"""

    def test_reference_output_for_seed_zero(self):
        assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF

    def test_same_seed_same_stream(self):
        a, b = SplitMix64(42), SplitMix64(42)
        assert [a.next_u64() for _ in range(5)] == [b.next_u64() for _ in range(5)]

    def test_vectorised_matches_scalar(self):
        a, b = SplitMix64(123), SplitMix64(123)
        expected = [a.next_u64() for _ in range(16)]
        assert [int(v) for v in b.u64_array(16)] == expected
        assert a.next_u64() == b.next_u64()

    def test_floats_in_unit_interval(self):
        values = SplitMix64(1).floats(1000)
        assert values.min() >= 0.0
        assert values.max() < 1.0

    def test_normals_moments(self):
        values = SplitMix64(2).normals(20001)
        assert values.shape == (20001,)
        assert abs(values.mean()) < 0.05
        assert abs(values.std() - 1.0) < 0.05

    def test_next_below_range(self):
        rng = SplitMix64(3)
        draws = {rng.next_below(5) for _ in range(500)}
        assert draws == {0, 1, 2, 3, 4}
        with pytest.raises(ValueError):
            rng.next_below(0)

    def test_random_mask_fits_ground_set(self):
        rng = SplitMix64(4)
        assert all(0 <= rng.random_mask(6) < 64 for _ in range(200))
        assert rng.random_mask(0) == 0

    def test_sample_subset_distinct(self):
        rng = SplitMix64(5)
        for _ in range(50):
            chosen = rng.sample_subset(10, 4)
            assert len(set(chosen)) == 4
            assert all(0 <= a < 10 for a in chosen)
        with pytest.raises(ValueError):
            rng.sample_subset(3, 4)

    def test_spawn_is_deterministic_and_distinct(self):
        parent = SplitMix64(9)
        first = parent.spawn(1).next_u64()
        assert SplitMix64(9).spawn(1).next_u64() == first
        assert SplitMix64(9).spawn(2).next_u64() != first

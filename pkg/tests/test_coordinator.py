"""Tests for the sampling coordinator."""
import pytest

from starcluster.analysis import _collect_tallies
from starcluster.coordinator import SamplingCoordinator, derive_seed
from starcluster.exceptions import InvalidArgumentError
from starcluster.models.params import ProtocolParams, Variant


class TestSamplingCoordinator:
    """Results are ordered by sample index and independent of worker count."""

    def test_inline_map(self):
        coordinator = SamplingCoordinator(workers=1)
        assert coordinator.map(derive_seed, 5, 9) == [derive_seed(k, 9) for k in range(5)]

    def test_workers_do_not_change_results(self):
        serial = SamplingCoordinator(workers=1).map(derive_seed, 23, 4)
        parallel = SamplingCoordinator(workers=2, chunk_size=3).map(derive_seed, 23, 4)
        assert parallel == serial

    async def test_async_map(self):
        coordinator = SamplingCoordinator(workers=2, chunk_size=4)
        result = await coordinator.async_map(derive_seed, 10, 1)
        assert result == [derive_seed(k, 1) for k in range(10)]

    def test_zero_samples(self):
        assert SamplingCoordinator(workers=2).map(derive_seed, 0) == []

    def test_tallies_identical_across_workers(self):
        params = ProtocolParams(variant=Variant.P1, p_s=0.6, L=6, seed=17)
        serial = _collect_tallies(params, 6, ("meas", "prep"), SamplingCoordinator(workers=1))
        parallel = _collect_tallies(
            params, 6, ("meas", "prep"), SamplingCoordinator(workers=2, chunk_size=2)
        )
        assert serial == parallel

    @pytest.mark.parametrize("kwargs", [{"workers": 0}, {"chunk_size": 0}])
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            SamplingCoordinator(**kwargs)

    def test_negative_count(self):
        with pytest.raises(InvalidArgumentError):
            SamplingCoordinator(workers=1).map(derive_seed, -1)

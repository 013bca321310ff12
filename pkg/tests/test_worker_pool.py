import numpy as np

from app.worker_pool import WorkerPool, chunk_rng, chunk_sizes


class TestChunking:
    def test_sizes_cover_n(self):
        assert chunk_sizes(10, 4) == [4, 4, 2]
        assert chunk_sizes(8, 4) == [4, 4]
        assert chunk_sizes(0, 4) == []

    def test_streams_are_reproducible_and_distinct(self):
        a = chunk_rng(7, 0).uniform(size=4)
        assert np.array_equal(a, chunk_rng(7, 0).uniform(size=4))
        assert not np.array_equal(a, chunk_rng(7, 1).uniform(size=4))
        assert not np.array_equal(a, chunk_rng(7, 0, stream=1).uniform(size=4))


class TestWorkerPool:
    def test_results_keep_submission_order(self):
        assert WorkerPool(4).map(lambda x: x * x, list(range(10))) == [x * x for x in range(10)]

    def test_chunked_sums_match_across_worker_counts(self):
        def chunk(index, size):
            return float(chunk_rng(11, index).uniform(size=size).sum())

        serial = WorkerPool(1).map_chunks(chunk, 1000, chunk_size=64)
        parallel = WorkerPool(3).map_chunks(chunk, 1000, chunk_size=64)
        assert serial == parallel
        assert len(serial) == 16

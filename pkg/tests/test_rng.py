from collections import Counter

from plstar import rng


def test_stream_is_reproducible():
    a = rng.Stream(42)
    b = rng.Stream(42)
    assert [a.next_u64() for _ in range(20)] == [b.next_u64() for _ in range(20)]


def test_different_seeds_differ():
    a = rng.Stream(1)
    b = rng.Stream(2)
    assert [a.next_u64() for _ in range(8)] != [b.next_u64() for _ in range(8)]


def test_substreams_are_independent_of_each_other():
    first = [rng.substream(7, "alphabet").next_u64() for _ in range(5)]
    # drawing from another substream must not shift the first one
    other = rng.substream(7, "prefixes")
    other.next_u64()
    again = [rng.substream(7, "alphabet").next_u64() for _ in range(5)]
    assert first == again
    assert first != [rng.substream(7, "prefixes").next_u64() for _ in range(5)]


def test_random_in_unit_interval():
    s = rng.Stream(123)
    values = [s.random() for _ in range(1000)]
    assert all(0.0 <= v < 1.0 for v in values)
    assert 0.4 < sum(values) / len(values) < 0.6


def test_randrange_bounds_and_coverage():
    s = rng.Stream(9)
    counts = Counter(s.randrange(5) for _ in range(2000))
    assert set(counts) == {0, 1, 2, 3, 4}
    assert min(counts.values()) > 250


def test_shuffle_permutes():
    s = rng.Stream(5)
    items = list(range(10))
    s.shuffle(items)
    assert sorted(items) == list(range(10))
    assert items != list(range(10))


def test_permutation_deterministic():
    assert rng.Stream(11).permutation(6) == rng.Stream(11).permutation(6)

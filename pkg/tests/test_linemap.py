import random

import pytest

from hdldiff.linemap import LineMap, Segment


def test_identity():
    m = LineMap.identity(10)
    assert m.is_identity
    for ln in range(1, 11):
        assert m.map_line(ln) == ln
        assert m.unmap_line(ln) == ln


def test_insertion_shifts_following_lines():
    m = LineMap.from_insertion(2, 1, 5)
    assert m.map_line(1) == 1
    assert m.map_line(2) == 3
    assert m.map_line(5) == 6
    assert m.unmap_line(3) == 2
    assert m.unmap_line(2) is None  # the inserted line has no original
    assert m.variant_lines() == 6


def test_deletion_marks_and_shifts():
    m = LineMap.from_deletion(10, 12, 20)
    assert m.map_line(9) == 9
    assert m.map_line(10) is None
    assert m.map_line(13) == 10
    assert m.deleted == frozenset({10, 11, 12})
    assert m.unmap_line(10) == 13
    assert m.variant_lines() == 17


def test_compose_matches_sequential_application():
    rng = random.Random(5)
    for _ in range(200):
        n = rng.randint(10, 60)
        maps = []
        cur_n = n
        for _ in range(rng.randint(1, 4)):
            if rng.random() < 0.5:
                at = rng.randint(1, cur_n)
                k = rng.randint(1, 3)
                maps.append(LineMap.from_insertion(at, k, cur_n))
                cur_n += k
            else:
                first = rng.randint(1, cur_n)
                last = min(cur_n, first + rng.randint(0, 2))
                maps.append(LineMap.from_deletion(first, last, cur_n))
                cur_n -= last - first + 1
                if cur_n < 1:
                    break
        if cur_n < 1:
            continue
        composed = maps[0]
        for m in maps[1:]:
            composed = composed.compose(m)
        for line in range(1, n + 1):
            expected = line
            for m in maps:
                expected = m.map_line(expected)
                if expected is None:
                    break
            assert composed.map_line(line) == expected


def test_compose_associative_on_random_lines():
    rng = random.Random(6)
    for _ in range(100):
        n = 40
        m1 = LineMap.from_insertion(rng.randint(1, n), rng.randint(1, 2), n)
        m2 = LineMap.from_deletion(5, 7, m1.variant_lines())
        m3 = LineMap.from_insertion(rng.randint(1, m2.variant_lines()), 1,
                                    m2.variant_lines())
        left = m1.compose(m2).compose(m3)
        right = m1.compose(m2.compose(m3))
        for line in rng.sample(range(1, n + 1), 10):
            assert left.map_line(line) == right.map_line(line)


def test_monotonicity_invariant():
    rng = random.Random(7)
    for _ in range(200):
        n = 30
        m = LineMap.from_insertion(rng.randint(1, n), rng.randint(1, 4), n)
        m = m.compose(LineMap.from_deletion(rng.randint(1, 10),
                                            rng.randint(10, 15), m.variant_lines()))
        images = [m.map_line(ln) for ln in range(1, n + 1)]
        defined = [v for v in images if v is not None]
        assert defined == sorted(defined)
        assert len(set(defined)) == len(defined)


def test_rejects_nonmonotone_segments():
    with pytest.raises(ValueError):
        LineMap((Segment(1, 5, 0), Segment(6, 10, -3)), frozenset(), 10)

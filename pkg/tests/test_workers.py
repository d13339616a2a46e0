from StableTheta.utils.workers import parallel_map


def test_serial_and_parallel_agree():
    items = [-3, 1, -4, 1, -5, 9]
    assert parallel_map(abs, items) == [3, 1, 4, 1, 5, 9]
    assert parallel_map(abs, items, workers=2) == [3, 1, 4, 1, 5, 9]


def test_empty_and_single():
    assert parallel_map(abs, [], workers=4) == []
    assert parallel_map(abs, [-2], workers=4) == [2]

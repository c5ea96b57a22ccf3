import numpy as np

from grflab import textio


def test_scalar_round_trip():
    text = textio.dump_fields({"dim": 3, "eta": 0.1 + 0.2}, {})
    scalars, entries = textio.parse_fields(text)
    assert scalars["dim"] == 3.0
    assert scalars["eta"] == 0.1 + 0.2
    assert entries == {}


def test_array_round_trip_is_exact():
    rng = np.random.default_rng(7)
    arr = rng.standard_normal((3, 4, 2))
    arr[0, 0, 0] = 0.0
    text = textio.dump_fields({}, {"c": arr})
    _, entries = textio.parse_fields(text)
    rebuilt = textio.build_array(entries, "c", arr.shape)
    assert np.array_equal(rebuilt, arr)


def test_zero_entries_are_omitted():
    arr = np.zeros((2, 2))
    arr[0, 1] = 1.5
    lines = textio.format_array("b", arr)
    assert lines == ["b[0][1] = 1.5"]


def test_comments_and_blank_lines_ignored():
    text = "# header\n\ndim = 2\n# trailing\nc[0][1][0] = -2.0\n"
    scalars, entries = textio.parse_fields(text)
    assert scalars == {"dim": 2.0}
    assert entries["c"] == {(0, 1, 0): -2.0}


def test_build_array_missing_name_is_zero():
    _, entries = textio.parse_fields("dim = 2\n")
    assert np.array_equal(textio.build_array(entries, "g", (2, 2)),
                          np.zeros((2, 2)))

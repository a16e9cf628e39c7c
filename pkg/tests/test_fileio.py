import numpy as np
import pytest

from toeplitz_enum import fileio
from toeplitz_enum.errors import DataError


def test_binary_round_trip_is_bit_exact(tmp_path, rng):
    x = rng.standard_normal((3, 17)) + 1j * rng.standard_normal((3, 17))
    x[0, 0] = complex(np.nextafter(0, 1), -0.0)
    path = tmp_path / 'x.tgt'
    fileio.save(path, x, fileio.Kind.SNAPSHOTS)
    y, kind = fileio.load(path)
    assert kind is fileio.Kind.SNAPSHOTS
    assert y.tobytes() == x.tobytes()


def test_header_layout():
    buf = fileio.to_bytes(np.eye(2), fileio.Kind.COVARIANCE)
    assert buf[:4] == b'TGT1'
    assert int.from_bytes(buf[4:8], 'little') == 2
    assert int.from_bytes(buf[12:16], 'little') == 1
    assert len(buf) == 20 + 4 * 16


@pytest.mark.parametrize('cut', [3, 10, 20, 50])
def test_truncated_file_names_offset(cut):
    buf = fileio.to_bytes(np.eye(2), fileio.Kind.COVARIANCE)[:cut]
    with pytest.raises(DataError, match='offset'):
        fileio.from_bytes(buf)


def test_bad_magic_and_trailing_bytes():
    buf = fileio.to_bytes(np.eye(2), fileio.Kind.COVARIANCE)
    with pytest.raises(DataError, match='magic'):
        fileio.from_bytes(b'XXXX' + buf[4:])
    with pytest.raises(DataError, match='trailing'):
        fileio.from_bytes(buf + b'\0')


def test_text_round_trip_and_classification(tmp_path):
    r = np.array([[2, 1 + 1j], [1 - 1j, 2]])
    p = tmp_path / 'r.csv'
    p.write_text(fileio.format_text(r))
    y, kind = fileio.load(p)
    assert kind is fileio.Kind.COVARIANCE
    np.testing.assert_array_equal(y, r)
    x = np.arange(6).reshape(2, 3) * (1 + 2j)
    p.write_text(fileio.format_text(x))
    y, kind = fileio.load(p)
    assert kind is fileio.Kind.SNAPSHOTS
    np.testing.assert_array_equal(y, x)


def test_text_errors_name_line():
    with pytest.raises(DataError, match='line 2'):
        fileio.parse_text('1,0,2,0\n1,0,2\n')
    with pytest.raises(DataError, match='line 1'):
        fileio.parse_text('1,zz\n')
    with pytest.raises(DataError):
        fileio.parse_text('# only a comment\n')


def test_kind_conflict(tmp_path):
    p = tmp_path / 'x.tgt'
    fileio.save(p, np.ones((2, 5)), fileio.Kind.SNAPSHOTS)
    with pytest.raises(DataError):
        fileio.load(p, fileio.Kind.COVARIANCE)
    with pytest.raises(DataError):
        fileio.to_bytes(np.ones((2, 3)), fileio.Kind.COVARIANCE)

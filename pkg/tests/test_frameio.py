import numpy as np
import pytest

from e2vts.frameio import (
    DecodeError,
    Y4mReader,
    iter_source,
    list_frame_files,
    read_image,
    write_image,
    write_y4m,
)


def test_ppm_round_trip(tmp_path, rng):
    img = rng.integers(0, 256, (9, 13, 3), dtype=np.uint8)
    path = tmp_path / "frame_0.ppm"
    write_image(path, img)
    assert np.array_equal(read_image(path), img)


def test_png_round_trip(tmp_path, rng):
    img = rng.integers(0, 256, (12, 8, 3), dtype=np.uint8)
    path = tmp_path / "frame_0.png"
    write_image(path, img)
    assert np.array_equal(read_image(path), img)


def test_gray_png_round_trip(tmp_path, rng):
    img = rng.integers(0, 256, (6, 6), dtype=np.uint8)
    path = tmp_path / "g.png"
    write_image(path, img)
    assert np.array_equal(read_image(path), img)


def test_ppm_with_comments(tmp_path):
    path = tmp_path / "c.ppm"
    path.write_bytes(b"P6\n# a comment\n2 1\n255\n" + bytes([1, 2, 3, 4, 5, 6]))
    img = read_image(path)
    assert img.shape == (1, 2, 3)
    assert list(img[0, 0]) == [1, 2, 3]


def test_truncated_ppm_raises(tmp_path):
    path = tmp_path / "t.ppm"
    path.write_bytes(b"P6\n4 4\n255\n\x00\x00")
    with pytest.raises(DecodeError):
        read_image(path)


def test_corrupt_png_raises(tmp_path):
    path = tmp_path / "bad.png"
    path.write_bytes(b"\x89PNG\r\n\x1a\nnope")
    with pytest.raises(DecodeError):
        read_image(path)


def test_natural_numeric_ordering(tmp_path):
    for name in ("frame_10.png", "frame_2.png", "frame_1.png"):
        write_image(tmp_path / name, np.zeros((2, 2), np.uint8))
    names = [p.name for p in list_frame_files(tmp_path)]
    assert names == ["frame_1.png", "frame_2.png", "frame_10.png"]


def test_y4m_round_trip(tmp_path):
    # smooth gradients: 4:2:0 chroma subsampling is nearly lossless there
    ys, xs = np.mgrid[0:16, 0:24]
    frames = []
    for k in range(3):
        rgb = np.stack([(xs * 10 + k) % 256, (ys * 12) % 256,
                        ((xs + ys) * 5) % 256], axis=-1).astype(np.uint8)
        frames.append(rgb)
    path = tmp_path / "clip.y4m"
    write_y4m(path, frames)
    decoded = list(Y4mReader(path))
    assert [f.index for f in decoded] == [0, 1, 2]
    for orig, frame in zip(frames, decoded):
        assert frame.pixels.shape == orig.shape
        err = np.abs(frame.pixels.astype(int) - orig.astype(int)).mean()
        assert err < 8

    gen = np.random.default_rng(3)
    gray_in = np.repeat(gen.integers(0, 256, (16, 24, 1), dtype=np.uint8), 3, 2)
    write_y4m(path, [gray_in])
    out = next(iter(Y4mReader(path)))
    assert np.abs(out.pixels.astype(int) - gray_in.astype(int)).max() <= 2


def test_y4m_rejects_bad_signature(tmp_path):
    path = tmp_path / "bad.y4m"
    path.write_bytes(b"NOTYUV\n")
    with pytest.raises(DecodeError):
        Y4mReader(path)


def test_y4m_truncated_frame(tmp_path, rng):
    frames = [rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)]
    path = tmp_path / "trunc.y4m"
    write_y4m(path, frames)
    data = path.read_bytes()
    path.write_bytes(data[:-10])
    with pytest.raises(DecodeError):
        list(Y4mReader(path))


def test_iter_source_directory(tmp_path, rng):
    for i in range(4):
        write_image(tmp_path / f"{i}.png",
                    rng.integers(0, 256, (4, 4, 3), dtype=np.uint8))
    pairs = list(iter_source(tmp_path))
    assert [i for i, _ in pairs] == [0, 1, 2, 3]
    frame = pairs[2][1].load()
    assert frame.index == 2 and frame.w == 4


def test_iter_source_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        list(iter_source(tmp_path / "nope"))

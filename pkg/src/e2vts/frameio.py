"""Frame ingest and image file I/O.

Sources: a directory of numerically named PNG/PPM files, or a Y4M stream
(8-bit 4:2:0, converted to RGB with full-range BT.601).  Decoding failures
surface as :class:`DecodeError` so callers can record and continue.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Iterator

import numpy as np
from PIL import Image

from .imgcore import Frame, rgb_to_yuv, yuv_to_rgb

IMAGE_EXTENSIONS = {".png", ".ppm"}


class DecodeError(Exception):
    """A frame could not be decoded."""


def read_image(path: str | Path) -> np.ndarray:
    """Read a PNG or PPM file into a uint8 array, (h, w) or (h, w, 3)."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".ppm":
            return _read_ppm(path)
        with Image.open(path) as im:
            if im.mode not in ("L", "RGB"):
                im = im.convert("RGB" if im.mode not in ("1", "I;16") else "L")
            return np.asarray(im, dtype=np.uint8)
    except DecodeError:
        raise
    except Exception as exc:
        raise DecodeError(f"{path}: {exc}") from exc


def write_image(path: str | Path, pixels: np.ndarray) -> None:
    """Write a uint8 array as PNG or PPM, chosen by file extension."""
    path = Path(path)
    if path.suffix.lower() == ".ppm":
        _write_ppm(path, pixels)
        return
    mode = "L" if pixels.ndim == 2 else "RGB"
    Image.fromarray(pixels, mode=mode).save(path, format="PNG")


def encode_png(pixels: np.ndarray) -> bytes:
    """PNG-encode a uint8 array in memory."""
    import io

    mode = "L" if pixels.ndim == 2 else "RGB"
    buf = io.BytesIO()
    Image.fromarray(pixels, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def _read_ppm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    if not data.startswith(b"P6"):
        raise DecodeError(f"{path}: not a binary PPM (P6) file")
    # header = magic, width, height, maxval; '#' comments allowed
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        m = re.match(rb"(?:\s+|#[^\n]*\n)*([0-9]+)", data[pos:])
        if not m:
            raise DecodeError(f"{path}: malformed PPM header")
        tokens.append(m.group(1))
        pos += m.end()
    w, h, maxval = (int(t) for t in tokens)
    if maxval != 255:
        raise DecodeError(f"{path}: only 8-bit PPM supported")
    pos += 1  # single whitespace after maxval
    raster = data[pos:pos + w * h * 3]
    if len(raster) != w * h * 3:
        raise DecodeError(f"{path}: truncated PPM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w, 3).copy()


def _write_ppm(path: Path, pixels: np.ndarray) -> None:
    if pixels.ndim == 2:
        pixels = np.repeat(pixels[:, :, None], 3, axis=2)
    h, w = pixels.shape[:2]
    with open(path, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (w, h))
        f.write(np.ascontiguousarray(pixels, dtype=np.uint8).tobytes())


def _numeric_key(path: Path) -> tuple:
    # natural sort: frame_10 after frame_2
    parts = re.split(r"(\d+)", path.name)
    return tuple(int(p) if p.isdigit() else p for p in parts)


def list_frame_files(directory: str | Path) -> list[Path]:
    """Image files of a directory in natural numeric order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    files = [p for p in directory.iterdir()
             if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS]
    return sorted(files, key=_numeric_key)


def read_frame_dir(directory: str | Path) -> Iterator[tuple[int, Path]]:
    """Yield (index, path) pairs; decoding is left to the caller."""
    for index, path in enumerate(list_frame_files(directory)):
        yield index, path


class Y4mReader:
    """Streaming reader for YUV4MPEG2 files with 8-bit 4:2:0 chroma."""

    _C420_TAGS = {"420", "420jpeg", "420mpeg2", "420paldv"}

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._f = open(self.path, "rb")
        header = self._f.readline()
        if not header.startswith(b"YUV4MPEG2"):
            self._f.close()
            raise DecodeError(f"{self.path}: missing YUV4MPEG2 signature")
        self.width = self.height = 0
        colorspace = "420"
        for token in header.decode("ascii", "replace").split()[1:]:
            if token.startswith("W"):
                self.width = int(token[1:])
            elif token.startswith("H"):
                self.height = int(token[1:])
            elif token.startswith("C"):
                colorspace = token[1:]
        if self.width < 2 or self.height < 2:
            self._f.close()
            raise DecodeError(f"{self.path}: bad stream geometry")
        if colorspace not in self._C420_TAGS:
            self._f.close()
            raise DecodeError(f"{self.path}: unsupported colorspace C{colorspace}")
        if self.width % 2 or self.height % 2:
            self._f.close()
            raise DecodeError(f"{self.path}: 4:2:0 requires even dimensions")

    def __iter__(self) -> Iterator[Frame]:
        index = 0
        w, h = self.width, self.height
        ysize, csize = w * h, (w // 2) * (h // 2)
        while True:
            marker = self._f.readline()
            if not marker:
                break
            if not marker.startswith(b"FRAME"):
                raise DecodeError(f"{self.path}: bad frame marker at frame {index}")
            raw = self._f.read(ysize + 2 * csize)
            if len(raw) != ysize + 2 * csize:
                raise DecodeError(f"{self.path}: truncated frame {index}")
            y = np.frombuffer(raw, dtype=np.uint8, count=ysize).reshape(h, w)
            u = np.frombuffer(raw, dtype=np.uint8, count=csize,
                              offset=ysize).reshape(h // 2, w // 2)
            v = np.frombuffer(raw, dtype=np.uint8, count=csize,
                              offset=ysize + csize).reshape(h // 2, w // 2)
            up = np.repeat(np.repeat(u, 2, axis=0), 2, axis=1)
            vp = np.repeat(np.repeat(v, 2, axis=0), 2, axis=1)
            yield Frame(index=index, pixels=yuv_to_rgb(y, up, vp))
            index += 1
        self._f.close()

    def close(self) -> None:
        self._f.close()


def write_y4m(path: str | Path, frames: list[np.ndarray]) -> None:
    """Write RGB uint8 arrays as a C420 Y4M stream (2x2 chroma averaging)."""
    if not frames:
        raise ValueError("no frames to write")
    h, w = frames[0].shape[:2]
    if w % 2 or h % 2:
        raise ValueError("4:2:0 requires even dimensions")
    with open(path, "wb") as f:
        f.write(b"YUV4MPEG2 W%d H%d F30:1 Ip A1:1 C420jpeg\n" % (w, h))
        for i, rgb in enumerate(frames):
            y, u, v = rgb_to_yuv(Frame(index=i, pixels=rgb))
            usub = u.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))
            vsub = v.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))
            f.write(b"FRAME\n")
            f.write(y.tobytes())
            f.write(np.clip(np.rint(usub), 0, 255).astype(np.uint8).tobytes())
            f.write(np.clip(np.rint(vsub), 0, 255).astype(np.uint8).tobytes())


def iter_source(source: str | Path) -> Iterator[tuple[int, "FrameHandle"]]:
    """Iterate a frame source: a directory of images or a .y4m file.

    Yields (index, handle) where handle.load() decodes the frame and may
    raise :class:`DecodeError`.
    """
    source = Path(source)
    if source.is_dir():
        for index, path in read_frame_dir(source):
            yield index, FrameHandle(index=index, path=path)
    elif source.suffix.lower() == ".y4m":
        for frame in Y4mReader(source):
            yield frame.index, FrameHandle(index=frame.index, frame=frame)
    else:
        raise FileNotFoundError(f"frame source not found: {source}")


class FrameHandle:
    """Lazily decodable reference to one frame of a source."""

    def __init__(self, index: int, path: Path | None = None,
                 frame: Frame | None = None):
        self.index = index
        self.path = path
        self._frame = frame

    def load(self) -> Frame:
        if self._frame is None:
            self._frame = Frame(index=self.index, pixels=read_image(self.path))
        return self._frame

"""Walk through Stage II on three kinds of frames: a text block, a blank
frame, and dense noise.

The screen merges per-channel Canny maps, closes them morphologically,
and reads the text region off the axis histogram peaks.  The demo dumps
the intermediate edge map and the final crop so you can eyeball each
step.
"""

from pathlib import Path

import numpy as np

from e2vts.frameio import write_image
from e2vts.imgcore import Frame
from e2vts.synth import blank_frame, glyph_block_frame, noise_frame
from e2vts.textregion import ScreenConfig, closed_edge_map, screen_frame

OUT = Path(__file__).parent / "out"


def describe(name, frame, cfg):
    decision = screen_frame(frame, cfg)
    print(f"{name:<12} verdict={decision.verdict.value:<12} "
          f"peaks_x={len(decision.peaks_x):<3} peaks_y={len(decision.peaks_y):<3} "
          f"mu_x={decision.mean_x:6.1f} mu_y={decision.mean_y:6.1f}")
    return decision


def main():
    OUT.mkdir(exist_ok=True)
    cfg = ScreenConfig()

    glyphs = glyph_block_frame(240, 320, seed=3)
    text = Frame(index=0, pixels=glyphs.pixels)
    decision = describe("text block", text, cfg)
    write_image(OUT / "screen_input.png", glyphs.pixels)
    write_image(OUT / "screen_edges.png",
                closed_edge_map(text, cfg).astype(np.uint8) * 255)
    row0, row1, col0, col1 = decision.crop_slices()
    write_image(OUT / "screen_crop.png", glyphs.pixels[row0:row1, col0:col1])
    print(f"  crop rows {row0}:{row1} cols {col0}:{col1} "
          f"({(row1 - row0) * (col1 - col0) / (240 * 320):.0%} of the frame)")

    describe("blank", Frame(index=1, pixels=blank_frame(240, 320)), cfg)
    describe("noise", Frame(index=2, pixels=noise_frame(240, 320, seed=8)), cfg)
    print(f"wrote screen_input/edges/crop under {OUT}/")


if __name__ == "__main__":
    main()

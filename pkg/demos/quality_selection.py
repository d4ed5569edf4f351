"""Walk through Stage I: score a burst of frames and pick the sharpest.

We fake a hand-held burst by blurring one textured frame with increasing
sigma, then let the window selector selective between them.  Sharpness
falls monotonically under blur for both measures, so the untouched frame
should win the fused ranking.
"""

from pathlib import Path

from e2vts.imgcore import Frame
from e2vts.frameio import write_image
from e2vts.quality import QualityConfig, analyze_window
from e2vts.synth import blur_gray, textured_gray

OUT = Path(__file__).parent / "out"


def main():
    OUT.mkdir(exist_ok=True)
    base = textured_gray(240, 320, seed=14)
    sigmas = [0.0, 0.8, 1.6, 3.0, 5.0]
    frames = [Frame(index=i, pixels=blur_gray(base, s))
              for i, s in enumerate(sigmas)]

    selection = analyze_window(0, frames, QualityConfig())
    print("frame  sigma  G_FFT         G_LV          fft_rank  lv_rank")
    for i, s in enumerate(sigmas):
        print(f"{i:>5}  {s:>5.1f}  {selection.fft_scores[i]:<12.2f}"
              f"  {selection.lv_scores[i]:<12.2f}"
              f"  {selection.fft_ranks[i]:>8}  {selection.lv_ranks[i]:>7}")
    print(f"\nselected frame: {selection.selected} "
          f"(sigma {sigmas[selection.selected]})")

    for frame in (frames[selection.selected], frames[-1]):
        name = "selected.png" if frame.index == selection.selected else "worst.png"
        write_image(OUT / name, frame.pixels)
    print(f"wrote {OUT}/selected.png and {OUT}/worst.png")


if __name__ == "__main__":
    main()

"""Reproduce the stage-ablation comparison on a synthetic video.

A 300-frame clip alternates text scenes with blank or blurred gaps.  Each
stage subset runs through the metered pipeline against a downstream
spotter that burns a fixed 5 ms of CPU per call, the stand-in for a real
detector/recognizer.  Fewer spotter calls at modest stage cost is the
whole energy story.
"""

from e2vts.imgcore import Frame
from e2vts.ood import EdgeGridExtractor, svm_train
from e2vts.pipeline import MockSpotter, PipelineConfig, run_pipeline
from e2vts.synth import blank_frame, blur_rgb, text_frame, text_scene_video


def train_model():
    extractor = EdgeGridExtractor()
    samples, labels = [], []
    for s in range(20):
        samples.append(extractor(Frame(index=0, pixels=text_frame(128, 256, seed=500 + s))))
        labels.append(1)
    for s in range(10):
        samples.append(extractor(Frame(index=0, pixels=blank_frame(128, 256, s))))
        labels.append(-1)
        samples.append(extractor(Frame(index=0,
                                       pixels=blur_rgb(text_frame(128, 256, seed=700 + s), 8.0))))
        labels.append(-1)
    model = svm_train(samples, labels, seed=0)
    model.extractor_id = extractor.extractor_id
    model.extractor_params = extractor.params()
    return model


def main():
    video = text_scene_video(seed=4)
    frames = [Frame(index=i, pixels=p) for i, p in enumerate(video.frames)]
    model = train_model()

    subsets = [(False, False, False), (True, False, False),
               (False, True, False), (False, False, True),
               (True, True, False), (True, True, True)]
    print(f"{'stages':<10}{'spotted':>8}{'scenes':>8}{'stage cpu ms':>14}"
          f"{'spotter cpu ms':>16}{'total cpu ms':>14}")
    for s1, s2, s3 in subsets:
        cfg = PipelineConfig(stage1=s1, stage2=s2, stage3=s3)
        result = run_pipeline(frames, cfg, MockSpotter(cost_ms=5.0),
                              ood_model=model if s3 else None)
        spotted = [e["index"] for e in result.trace
                   if e.get("fate") == "spotted"]
        scenes = {video.scene_of_frame[i] for i in spotted
                  if video.scene_of_frame[i] is not None}
        stage_cpu = sum(result.metrics.entry(k).cpu_ns for k in
                        ("stage1_quality", "stage2_screen", "stage3_ood")
                        if k in result.metrics.stages)
        spot_cpu = result.metrics.entry("spotter").cpu_ns
        print(f"{cfg.stages_label():<10}{len(spotted):>8}"
              f"{len(scenes):>7}/{video.n_scenes}"
              f"{stage_cpu / 1e6:>13.0f}{spot_cpu / 1e6:>16.0f}"
              f"{(stage_cpu + spot_cpu) / 1e6:>14.0f}")


if __name__ == "__main__":
    main()

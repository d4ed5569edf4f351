"""Train the Stage III rejector on synthetic accept/reject frames and
inspect its decisions plus the training objective curve.

Accepts are sharp text frames; rejects are blanks and heavy blurs, the
classic out-of-distribution cases for a text spotter.
"""

import numpy as np

from e2vts.imgcore import Frame
from e2vts.ood import EdgeGridExtractor, svm_predict, svm_train
from e2vts.synth import blank_frame, blur_rgb, text_frame


def main():
    extractor = EdgeGridExtractor()
    samples, labels, names = [], [], []
    for s in range(20):
        samples.append(extractor(Frame(index=0, pixels=text_frame(128, 256, seed=s))))
        labels.append(1)
    for s in range(10):
        samples.append(extractor(Frame(index=0, pixels=blank_frame(128, 256, s))))
        labels.append(-1)
        blurred = blur_rgb(text_frame(128, 256, seed=100 + s), 8.0)
        samples.append(extractor(Frame(index=0, pixels=blurred)))
        labels.append(-1)

    model, history = svm_train(samples, labels, seed=0, collect_history=True)
    acc = np.mean([svm_predict(model, x) == y for x, y in zip(samples, labels)])
    print(f"training accuracy: {acc:.3f}")
    print("objective by epoch (every 10th):",
          [f"{history[e]:.4f}" for e in range(0, len(history), 10)])

    probes = {
        "fresh text frame": text_frame(128, 256, seed=999),
        "blank frame": blank_frame(128, 256, 5),
        "heavy blur": blur_rgb(text_frame(128, 256, seed=998), 8.0),
    }
    for name, pixels in probes.items():
        feats = extractor(Frame(index=0, pixels=pixels))
        value = model.decision_value(feats)
        label = "accept" if svm_predict(model, feats) > 0 else "reject"
        print(f"{name:<18} decision value {value:+8.3f} -> {label}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Build the desk-scale MNIST fixtures under data/.

Source: the `mnist` npm package (MIT), which ships 10,000 MNIST digits as
per-class JSON arrays of 3-decimal normalized floats. round(x * 255)
recovers the original 8-bit intensity exactly (max quantization error is
0.125 of a level).

    npm pack mnist && tar xzf mnist-*.tgz
    python3 scripts/make_fixtures.py package/src/digits data/

Also writes the posneg golden files for the first digit-4 test image,
computed here with numpy so they stay independent of the Rust encoder.
"""
import json
import struct
import sys
from pathlib import Path

import numpy as np

PER_CLASS_TRAIN = 100
PER_CLASS_TEST = 100
SEED = 20231


def load_class(digits_dir, d):
    flat = json.loads((digits_dir / f"{d}.json").read_text())["data"]
    arr = np.rint(np.asarray(flat, dtype=np.float64) * 255.0).astype(np.int64)
    assert arr.min() >= 0 and arr.max() <= 255
    return arr.reshape(-1, 28 * 28).astype(np.uint8)


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        f.write(images.tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    digits_dir = Path(sys.argv[1])
    out = Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    train, test = [], []
    for d in range(10):
        imgs = load_class(digits_dir, d)
        train += [(img, d) for img in imgs[:PER_CLASS_TRAIN]]
        test += [(img, d) for img in imgs[PER_CLASS_TRAIN:PER_CLASS_TRAIN + PER_CLASS_TEST]]
    rng = np.random.default_rng(SEED)
    for name, rows in (("train", train), ("test", test)):
        order = rng.permutation(len(rows))
        images = np.stack([rows[i][0] for i in order])
        labels = np.array([rows[i][1] for i in order])
        write_idx_images(out / f"desk-{name}-images.idx3-ubyte", images)
        write_idx_labels(out / f"desk-{name}-labels.idx1-ubyte", labels)
        if name == "test":
            four = images[int(np.argmax(labels == 4))]
            line = lambda v: " ".join(str(int(x)) for x in v) + "\n"
            (out / "digit4.txt").write_text(line(four))
            (out / "digit4.pos.txt").write_text(line((four > 127).astype(int)))
            (out / "digit4.neg.txt").write_text(line((four <= 127).astype(int)))
            print("digit-4 test index:", int(np.argmax(labels == 4)))


if __name__ == "__main__":
    main()

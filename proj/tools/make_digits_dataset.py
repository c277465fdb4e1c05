#!/usr/bin/env python3
"""Build a small 28x28 handwritten-digit dataset in IDX format.

Uses the scikit-learn digits set (1797 8x8 images) upscaled to 28x28 with
bilinear interpolation, so the pipeline exercises the same image geometry
as the classic MNIST files without downloading anything. Output files use
the standard IDX magic numbers and layout.
"""

import argparse
import pathlib
import struct

import numpy as np
from sklearn.datasets import load_digits


def bilinear_resize(images: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    n, h, w = images.shape
    ys = np.linspace(0, h - 1, out_h)
    xs = np.linspace(0, w - 1, out_w)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[None, :, None]
    fx = (xs - x0)[None, None, :]
    a = images[:, y0][:, :, x0]
    b = images[:, y0][:, :, x1]
    c = images[:, y1][:, :, x0]
    d = images[:, y1][:, :, x1]
    top = a * (1 - fx) + b * fx
    bot = c * (1 - fx) + d * fx
    return top * (1 - fy) + bot * fy


def write_idx_images(path: pathlib.Path, images: np.ndarray) -> None:
    n, h, w = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, h, w))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path: pathlib.Path, labels: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data", help="output directory")
    ap.add_argument("--train", type=int, default=1500, help="training image count")
    args = ap.parse_args()

    digits = load_digits()
    images = digits.images / 16.0  # native range 0..16
    big = bilinear_resize(images, 28, 28)
    big = np.clip(np.rint(big * 255.0), 0, 255)

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    k = args.train
    write_idx_images(out / "digits-train-images.idx", big[:k])
    write_idx_labels(out / "digits-train-labels.idx", digits.target[:k])
    write_idx_images(out / "digits-test-images.idx", big[k:])
    write_idx_labels(out / "digits-test-labels.idx", digits.target[k:])
    print(f"wrote {k} train / {len(big) - k} test images to {out}")


if __name__ == "__main__":
    main()

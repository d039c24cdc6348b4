"""Scores the PGM noise fixtures with TensorFlow's MS-SSIM.

usage: python3 msssim_tf.py <fixture-dir>
Prints one "page sigma value" line per noisy image.
"""
import pathlib
import re
import sys

import numpy as np
import tensorflow as tf


def read_pgm(path):
    data = path.read_bytes()
    tokens = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
    w, h, _ = (int(t) for t in tokens.groups())
    pixels = np.frombuffer(data[tokens.end():], dtype=np.uint8, count=w * h)
    return pixels.reshape(h, w, 1).astype(np.float64)


def main(root):
    root = pathlib.Path(root)
    for noisy in sorted(root.glob("page*_s*.pgm")):
        page, sigma = re.match(r"page(\d+)_s(\d+)", noisy.stem).groups()
        clean = read_pgm(root / f"page{page}_clean.pgm")
        test = read_pgm(noisy)
        value = tf.image.ssim_multiscale(
            tf.constant(clean[None]), tf.constant(test[None]), max_val=255.0,
            filter_size=11, filter_sigma=1.5, k1=0.01, k2=0.03)
        print(int(page), int(sigma), "%.10f" % float(value.numpy()[0]))


if __name__ == "__main__":
    main(sys.argv[1])

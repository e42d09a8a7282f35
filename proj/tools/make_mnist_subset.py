#!/usr/bin/env python3
# Copyright 2026 The dpkan Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Builds IDX train/test files from the 10,000 digits of the `mnist` npm package.

The package stores each digit class as src/digits/<label>.json holding
{"data": [...]} with 784 intensities per image, scaled to [0, 1] and rounded
to three decimals. Rounding v * 255 recovers the original bytes exactly.

    npm pack mnist && tar xzf mnist-*.tgz
    tools/make_mnist_subset.py --package package --out data/mnist-subset
"""

import argparse
import json
import pathlib
import random
import struct

PIXELS = 28 * 28


def load_digits(package: pathlib.Path):
    examples = []
    for label in range(10):
        with open(package / "src" / "digits" / f"{label}.json") as f:
            flat = json.load(f)["data"]
        if len(flat) % PIXELS:
            raise ValueError(f"{label}.json: length {len(flat)} is not a multiple of {PIXELS}")
        for i in range(0, len(flat), PIXELS):
            pixels = bytes(round(v * 255) for v in flat[i:i + PIXELS])
            examples.append((pixels, label))
    return examples


def write_idx(path_images: pathlib.Path, path_labels: pathlib.Path, examples):
    with open(path_images, "wb") as f:
        f.write(struct.pack(">IIII", 2051, len(examples), 28, 28))
        for pixels, _ in examples:
            f.write(pixels)
    with open(path_labels, "wb") as f:
        f.write(struct.pack(">II", 2049, len(examples)))
        f.write(bytes(label for _, label in examples))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--package", type=pathlib.Path, required=True,
                        help="extracted npm package directory")
    parser.add_argument("--out", type=pathlib.Path, required=True)
    parser.add_argument("--train", type=int, default=8000, help="training examples")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    examples = load_digits(args.package)
    random.Random(args.seed).shuffle(examples)
    if not 0 < args.train < len(examples):
        raise SystemExit(f"--train must lie in (0, {len(examples)})")
    args.out.mkdir(parents=True, exist_ok=True)
    write_idx(args.out / "train-images-idx3-ubyte", args.out / "train-labels-idx1-ubyte",
              examples[:args.train])
    write_idx(args.out / "test-images-idx3-ubyte", args.out / "test-labels-idx1-ubyte",
              examples[args.train:])
    print(f"wrote {args.train} training and {len(examples) - args.train} test examples "
          f"to {args.out}")


if __name__ == "__main__":
    main()

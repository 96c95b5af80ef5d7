#!/usr/bin/env python3
"""Build IDX files from the 10k-digit MNIST subset shipped in the `mnist` npm package.

Full MNIST IDX files work too; point SPARSELUT_MNIST_DIR at a directory holding
train-images-idx3-ubyte / train-labels-idx1-ubyte / t10k-images-idx3-ubyte /
t10k-labels-idx1-ubyte. This script exists for machines that can reach an npm
registry but not the MNIST mirrors.

Split: every 5th digit of each class goes to the test files (8004 train / 1996 test).
"""
import argparse
import json
import pathlib
import struct
import subprocess
import tarfile
import tempfile


def write_idx(out_dir, stem, images, labels):
    with open(out_dir / f"{stem}-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))
    with open(out_dir / f"{stem}-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/mnist")
    ap.add_argument("--tarball", help="pre-downloaded mnist-*.tgz (skips npm pack)")
    args = ap.parse_args()
    out_dir = pathlib.Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp:
        tarball = args.tarball
        if tarball is None:
            subprocess.run(["npm", "pack", "mnist@1.1.0"], cwd=tmp, check=True,
                           stdout=subprocess.DEVNULL)
            tarball = str(pathlib.Path(tmp) / "mnist-1.1.0.tgz")
        with tarfile.open(tarball) as tf:
            tf.extractall(tmp)
        digits_dir = pathlib.Path(tmp) / "package" / "src" / "digits"

        train, test = [], []
        for label in range(10):
            data = json.loads((digits_dir / f"{label}.json").read_text())["data"]
            n = len(data) // 784
            for i in range(n):
                pixels = [max(0, min(255, round(v * 255))) for v in data[i * 784:(i + 1) * 784]]
                (test if i % 5 == 4 else train).append((pixels, label))

    # interleave classes so file order is not sorted by label
    def interleave(samples):
        by_label = [[s for s in samples if s[1] == c] for c in range(10)]
        out = []
        for i in range(max(len(b) for b in by_label)):
            for b in by_label:
                if i < len(b):
                    out.append(b[i])
        return out

    train, test = interleave(train), interleave(test)
    write_idx(out_dir, "train", [s[0] for s in train], [s[1] for s in train])
    write_idx(out_dir, "t10k", [s[0] for s in test], [s[1] for s in test])
    print(f"wrote {len(train)} train / {len(test)} test digits to {out_dir}")


if __name__ == "__main__":
    main()

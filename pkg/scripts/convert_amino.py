"""Convert the public amino-acid fluorescence data to the text tensor format.

The dataset (five mixtures of tryptophan, tyrosine and phenylalanine,
emission 250-450 nm by excitation 240-300 nm) is distributed as a MATLAB
file holding a variable ``X`` of size 5 x 201 x 61, or as a 5 x 12261 matrix
with ``DimX = [5 201 61]``. It is not shipped with this package.

Usage::

    python3 scripts/convert_amino.py amino.mat amino.txt
    cpdqz fluor --data amino.txt --out results/fluor
"""
import argparse
import sys

import numpy as np
import scipy.io

from cpdqz.tensor import DenseTensor
from cpdqz.tensorio import write_tensor

SHAPE = (5, 201, 61)


def load_mat(path: str, key: str = "X") -> np.ndarray:
    mat = scipy.io.loadmat(path)
    if key not in mat:
        raise KeyError(f"{path} has no variable {key!r}; found {sorted(k for k in mat if not k.startswith('__'))}")
    x = np.asarray(mat[key], dtype=float)
    if x.shape == SHAPE:
        return x
    if x.size == int(np.prod(SHAPE)):
        # flattened layout: mixtures x (emission fastest, then excitation)
        return x.reshape(SHAPE, order="F")
    raise ValueError(f"variable {key!r} has shape {x.shape}, expected {SHAPE}")


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description="Convert amino.mat to the cpdqz tensor text format.")
    p.add_argument("mat")
    p.add_argument("out")
    p.add_argument("--key", default="X")
    args = p.parse_args(argv)
    try:
        x = load_mat(args.mat, args.key)
    except (OSError, KeyError, ValueError) as exc:
        print(exc, file=sys.stderr)
        return 3
    if np.isnan(x).any():
        print("warning: NaN entries (unmeasured Rayleigh region) replaced by 0", file=sys.stderr)
        x = np.nan_to_num(x)
    write_tensor(DenseTensor(x), args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

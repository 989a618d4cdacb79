#!/usr/bin/env python3
"""Convert the binary CTM tables shipped with pybdm into this project's CSV format.

pybdm stores only one representative of each complement pair (keys beginning
with '0'). The CSV files written here list every key explicitly, so the
complement of each stored key is added with the same value.

Usage: import_pybdm_tables.py PYBDM_CTMDATA_DIR OUTPUT_DIR
"""
import gzip
import pickle
import sys
from pathlib import Path


def complement(bits: str) -> str:
    return bits.translate(str.maketrans("01", "10"))


def expand(table):
    out = {}
    for shape, entries in table.items():
        for key, value in entries.items():
            for k in (key, complement(key)):
                if (shape, k) in out and out[(shape, k)][1] != value:
                    raise ValueError(f"conflicting values for {shape} {k}")
                out[(shape, k)] = (shape, value)
    return out


def write(path: Path, kind: str, rows, provenance: str) -> None:
    with path.open("w", newline="\n") as f:
        f.write(f"# {provenance}\n")
        f.write("kind,dims,bits,value\n")
        for (shape, bits), (_, value) in sorted(rows.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            dims = str(shape[0]) if kind == "string" else f"{shape[0]}x{shape[1]}"
            f.write(f"{kind},{dims},{bits},{value!r}\n")


def main() -> int:
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    src, dst = Path(sys.argv[1]), Path(sys.argv[2])
    dst.mkdir(parents=True, exist_ok=True)
    for name, kind in (("ctm-b2-d12", "string"), ("ctm-b2-d4x4", "array")):
        with gzip.open(src / f"{name}.pkl.gz", "rb") as f:
            table = pickle.load(f)
        rows = expand(table)
        write(dst / f"{name}.csv", kind, rows,
              f"{name}: published 2-symbol CTM values in bits, converted from pybdm 0.1.0 (MIT)")
        print(f"{name}: {len(rows)} entries")
    return 0


if __name__ == "__main__":
    sys.exit(main())

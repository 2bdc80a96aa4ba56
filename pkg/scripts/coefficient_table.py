"""
Dump the bubble coefficient tables for the default (N, r) matrix.

For every pair the printed and corrected coefficients of
(−Δ)^j u_ε are written side by side:

  - (3, 1)
  - (5, 2)
  - (7, 3)

Rows where the two disagree are counted and logged.

    python scripts/coefficient_table.py [output.csv]
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

import pandas as pd

from bubble.coefficients import coefficient_defects
from settings import make_logger

logger = make_logger("scripts", "BUBBLE")

MATRIX = [(3, 1), (5, 2), (7, 3)]


def coefficient_frame() -> pd.DataFrame:
    """One row per (N, r, i, j)."""
    frames = []
    for N, r in MATRIX:
        frame = pd.DataFrame(coefficient_defects(N, r))
        frame.insert(0, "r", r)
        frame.insert(0, "N", N)
        frames.append(frame)
        logger.info(f"N={N} r={r}: {int(frame['mismatch'].sum())} of {len(frame)} printed coefficients differ")
    return pd.concat(frames, ignore_index=True)


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "bubble_coefficients.csv"
    coefficient_frame().to_csv(out, index=False, lineterminator="\n")
    print(f"Wrote {out}")

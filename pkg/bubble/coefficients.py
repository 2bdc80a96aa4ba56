"""
Coefficient tables for iterated Laplacians of the bubble
========================================================

The closed form reads

    (−Δ)^j u_ε(t) = ε^{(N−2r+4j)/2} Σ_{i=0}^{j} G(i,j) t^{2i} / (ε² + t²)^{(N−2r+4j)/2}

with the printed product G(i,j) = 2^i · C(j,i) · K_j · D(i,j) · E(i,j).

The printed table is kept exactly as written. The corrected table is derived
by exact recursion: for a radial F(x) with x = t², Δ = 4x d²/dx² + 2N d/dx,
so (−Δ) maps P(x)(1+x)^{−b} to P̃(x)(1+x)^{−b−2} with a polynomial P̃
computed in rational arithmetic. Corrected coefficients c(i,j) multiply
ε^{−2i} t^{2i}; the printed formula carries no ε^{−2i} factor.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Dict, List, Tuple


def coeff_K(j: int, N: int, r: int) -> int:
    """K_j = Π_{h=0}^{j−1} (N − 2r + 2h); the empty product is 1."""
    out = 1
    for h in range(j):
        out *= N - 2 * r + 2 * h
    return out


def coeff_D(i: int, j: int, r: int) -> int:
    """D(i,j) = 1 if i = 0, else Π_{h=0}^{j−1} (r − h)."""
    if not 0 <= i <= j:
        raise ValueError(f"D(i,j) needs 0 <= i <= j, got i={i}, j={j}")
    if i == 0:
        return 1
    out = 1
    for h in range(j):
        out *= r - h
    return out


def coeff_E(i: int, j: int, N: int) -> int:
    """E(i,j) = Π_{h=0}^{j−1} (N + 2h) for i < j, 1 for i = j, 0 for i > j."""
    if i < 0 or j < 0:
        raise ValueError(f"E(i,j) needs i, j >= 0, got i={i}, j={j}")
    if i > j:
        return 0
    if i == j:
        return 1
    out = 1
    for h in range(j):
        out *= N + 2 * h
    return out


def printed_G(i: int, j: int, N: int, r: int) -> int:
    return 2 ** i * comb(j, i) * coeff_K(j, N, r) * coeff_D(i, j, r) * coeff_E(i, j, N)


# ====== exact polynomial helpers (coefficients indexed by power of x) ======

Poly = List[Fraction]


def _trim(p: Poly) -> Poly:
    while len(p) > 1 and p[-1] == 0:
        p = p[:-1]
    return p


def _add(a: Poly, b: Poly) -> Poly:
    size = max(len(a), len(b))
    return _trim([
        (a[k] if k < len(a) else Fraction(0)) + (b[k] if k < len(b) else Fraction(0))
        for k in range(size)
    ])


def _scale(a: Poly, c: Fraction) -> Poly:
    return _trim([c * x for x in a])


def _shift(a: Poly) -> Poly:
    """Multiply by x."""
    return [Fraction(0)] + list(a)


def _one_plus_x(a: Poly) -> Poly:
    return _add(a, _shift(a))


def _deriv(a: Poly) -> Poly:
    if len(a) == 1:
        return [Fraction(0)]
    return [k * a[k] for k in range(1, len(a))]


def _neg_laplacian_step(p: Poly, b: Fraction, N: int) -> Poly:
    """(−Δ)[P (1+x)^{−b}] = P̃ (1+x)^{−b−2}."""
    q = _add(_one_plus_x(_deriv(p)), _scale(p, -b))
    inner = _add(_one_plus_x(_deriv(q)), _scale(q, -(b + 1)))
    out = _add(_scale(_shift(inner), Fraction(4)), _scale(_one_plus_x(q), Fraction(2 * N)))
    return _scale(out, Fraction(-1))


@dataclass(frozen=True)
class CoeffTable:
    """Printed and corrected coefficients for 0 <= i <= j <= r."""

    N: int
    r: int
    printed: Dict[Tuple[int, int], int] = field(default_factory=dict)
    corrected: Dict[Tuple[int, int], Fraction] = field(default_factory=dict)

    def row(self, j: int, variant: str = "corrected") -> list:
        table = self.corrected if variant == "corrected" else self.printed
        return [table[(i, j)] for i in range(j + 1)]


def corrected_coefficients(N: int, r: int) -> Dict[Tuple[int, int], Fraction]:
    """Exact c(i,j) with (−Δ)^j U(τ) = Σ_i c(i,j) τ^{2i} / (1+τ²)^{(N−2r)/2+2j}, U the unit bubble."""
    b = Fraction(N - 2 * r, 2)
    poly: Poly = [Fraction(1)]
    out: Dict[Tuple[int, int], Fraction] = {(0, 0): Fraction(1)}
    for j in range(1, r + 1):
        poly = _neg_laplacian_step(poly, b, N)
        b += 2
        for i in range(j + 1):
            out[(i, j)] = poly[i] if i < len(poly) else Fraction(0)
    return out


@lru_cache(maxsize=None)
def build_table(N: int, r: int) -> CoeffTable:
    """Deterministic coefficient table for (N, r)."""
    if N <= 2 * r:
        raise ValueError(f"coefficient table needs N > 2r, got N={N}, r={r}")
    printed = {
        (i, j): printed_G(i, j, N, r) for j in range(r + 1) for i in range(j + 1)
    }
    return CoeffTable(N=N, r=r, printed=printed, corrected=corrected_coefficients(N, r))


def coefficient_defects(N: int, r: int) -> List[dict]:
    """Per (i, j): printed vs corrected coefficient.

    ``mismatch`` flags differing numbers; ``missing_scale`` flags terms where the
    printed formula drops the ε^{−2i} factor (every i > 0).
    """
    table = build_table(N, r)
    rows = []
    for j in range(1, r + 1):
        for i in range(j + 1):
            printed = table.printed[(i, j)]
            corrected = table.corrected[(i, j)]
            rows.append({
                "i": i,
                "j": j,
                "printed": printed,
                "corrected": str(corrected),
                "mismatch": Fraction(printed) != corrected,
                "missing_scale": i > 0,
            })
    return rows

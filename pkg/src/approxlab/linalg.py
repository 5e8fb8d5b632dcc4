"""Exact linear algebra over Q, Q(sqrt d) and F_p.

Matrices are lists of row lists.  Entries over Q are Fractions, over
Q(sqrt d) QuadElems (mixed with Fractions is fine); F_p routines take ints.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

__all__ = [
    "bareiss_echelon",
    "rref",
    "nullspace",
    "rank",
    "solve_in_span",
    "pseudo_inverse",
    "rref_mod_p",
    "nullspace_mod_p",
]


def _is_zero(x) -> bool:
    return x == 0


def bareiss_echelon(rows: Sequence[Sequence]) -> tuple[list[list], list[int]]:
    """Fraction-free row echelon form (Bareiss), pivoting on the first nonzero row.

    Returns the echelon rows (only the nonzero ones) and the pivot columns.
    Every division performed is exact in the coefficient ring generated by
    the entries, so integer input stays integral.
    """
    if not rows:
        return [], []
    integral = all(isinstance(x, int) for r in rows for x in r)
    M = [list(r) if integral else [Fraction(x) if isinstance(x, int) else x for x in r] for r in rows]
    nrows, ncols = len(M), len(M[0])
    pivots: list[int] = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if not _is_zero(M[i][c])), None)
        if piv is None:
            continue
        if piv != r:
            M[r], M[piv] = M[piv], M[r]
        pr = M[r]
        pc = pr[c]
        for i in range(r + 1, nrows):
            row = M[i]
            f = row[c]
            if integral:
                for j in range(c, ncols):
                    row[j] = (pc * row[j] - f * pr[j]) // prev
            else:
                for j in range(c, ncols):
                    row[j] = (pc * row[j] - f * pr[j]) / prev
        prev = pc
        pivots.append(c)
        r += 1
    return M[:r], pivots


def rref(rows: Sequence[Sequence]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form: Bareiss forward pass, then back-substitution."""
    E, pivots = bareiss_echelon(rows)
    for k in range(len(E) - 1, -1, -1):
        c = pivots[k]
        inv = 1 / Fraction(E[k][c]) if isinstance(E[k][c], int) else 1 / E[k][c]
        E[k] = [x * inv for x in E[k]]
        for i in range(k):
            f = E[i][c]
            if not _is_zero(f):
                E[i] = [a - f * b for a, b in zip(E[i], E[k])]
    return E, pivots


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[list]:
    """Basis of {v : M v = 0}, one vector per free column (canonical RREF basis)."""
    if ncols is None:
        ncols = len(rows[0])
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    R, pivots = rref(rows)
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for k, c in enumerate(pivots):
            v[c] = -R[k][f]
        basis.append(v)
    return basis


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    return len(bareiss_echelon(rows)[1])


def solve_in_span(basis: Sequence[Sequence], target: Sequence):
    """Coefficients c with sum c_i basis_i == target, or None if target is outside the span.

    ``basis`` must be linearly independent.
    """
    k = len(basis)
    n = len(target)
    if k == 0:
        return [] if all(_is_zero(x) for x in target) else None
    # augmented system: columns are basis vectors, last column target
    A = [[basis[j][i] for j in range(k)] + [target[i]] for i in range(n)]
    R, pivots = rref(A)
    if k in pivots:
        return None
    coeffs = [Fraction(0)] * k
    for r, c in enumerate(pivots):
        coeffs[c] = R[r][k]
    return coeffs


def pseudo_inverse(basis: Sequence[Sequence]) -> list[list]:
    """Exact left inverse (B^T B)^{-1} B^T of the n x r matrix with the given columns."""
    r = len(basis)
    n = len(basis[0])
    gram = [[sum(basis[i][t] * basis[j][t] for t in range(n)) for j in range(r)] for i in range(r)]
    aug = [gram[i] + [Fraction(int(i == j)) for j in range(r)] for i in range(r)]
    R, pivots = rref(aug)
    if pivots != list(range(r)):
        raise ValueError("basis vectors are linearly dependent")
    ginv = [row[r:] for row in R]
    return [[sum(ginv[i][j] * basis[j][t] for j in range(r)) for t in range(n)] for i in range(r)]


def rref_mod_p(rows: Sequence[Sequence[int]], p: int) -> tuple[list[list[int]], list[int]]:
    M = [[x % p for x in r] for r in rows]
    if not M:
        return [], []
    nrows, ncols = len(M), len(M[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = pow(M[r][c], -1, p)
        M[r] = [(x * inv) % p for x in M[r]]
        for i in range(nrows):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return M[:r], pivots


def nullspace_mod_p(rows: Sequence[Sequence[int]], p: int, ncols: int) -> list[list[int]]:
    R, pivots = rref_mod_p(rows, p)
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [0] * ncols
        v[f] = 1
        for k, c in enumerate(pivots):
            v[c] = (-R[k][f]) % p
        basis.append(v)
    return basis

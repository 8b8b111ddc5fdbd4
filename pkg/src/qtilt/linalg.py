"""Deterministic exact linear algebra over the supported ground rings.

The workhorse is a Smith normal form over a discrete valuation ring (fields
run through the same code path with every exponent forced to 0).  All derived
operations (saturated kernels, saturations with torsion invariants, solving
inside column spans, free complements) read their bases off the SNF
transformation matrices, so identical inputs produce bit-identical outputs.

Pivot rule: among the entries of minimal valuation pick the lexicographically
smallest (row, col).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .ring import GroundRing, RingElem, RingError


class LinAlgError(ValueError):
    pass


@dataclass(frozen=True)
class Mat:
    """Dense matrix of ring elements sharing one ground ring."""

    ring: GroundRing
    rows: int
    cols: int
    entries: tuple[tuple[RingElem, ...], ...]

    @staticmethod
    def from_rows(ring: GroundRing, rows: Iterable[Iterable[RingElem]],
                  cols: int | None = None) -> "Mat":
        rs = tuple(tuple(r) for r in rows)
        if rs:
            cols = len(rs[0])
        elif cols is None:
            cols = 0
        for r in rs:
            if len(r) != cols:
                raise LinAlgError("ragged rows")
            for e in r:
                if e.ring != ring:
                    raise LinAlgError("entry from a different ring")
        return Mat(ring, len(rs), cols, rs)

    @staticmethod
    def zero(ring: GroundRing, rows: int, cols: int) -> "Mat":
        z = ring.zero()
        return Mat(ring, rows, cols, tuple(tuple(z for _ in range(cols)) for _ in range(rows)))

    @staticmethod
    def identity(ring: GroundRing, n: int) -> "Mat":
        z, o = ring.zero(), ring.one()
        return Mat(ring, n, n, tuple(
            tuple(o if i == j else z for j in range(n)) for i in range(n)))

    @staticmethod
    def from_cols(ring: GroundRing, cols: Sequence[Sequence[RingElem]],
                  rows: int | None = None) -> "Mat":
        cs = [list(c) for c in cols]
        if cs:
            rows = len(cs[0])
        elif rows is None:
            rows = 0
        return Mat.from_rows(
            ring, [[cs[j][i] for j in range(len(cs))] for i in range(rows)],
            cols=len(cs))

    def __getitem__(self, ij: tuple[int, int]) -> RingElem:
        return self.entries[ij[0]][ij[1]]

    def col(self, j: int) -> "Mat":
        return Mat.from_rows(self.ring, [[self.entries[i][j]] for i in range(self.rows)], cols=1)

    def take_cols(self, idx: Sequence[int]) -> "Mat":
        return Mat.from_rows(self.ring, [[self.entries[i][j] for j in idx]
                                         for i in range(self.rows)], cols=len(idx))

    def take_rows(self, idx: Sequence[int]) -> "Mat":
        return Mat.from_rows(self.ring, [self.entries[i] for i in idx], cols=self.cols)

    def transpose(self) -> "Mat":
        return Mat.from_rows(self.ring, [[self.entries[i][j] for i in range(self.rows)]
                                         for j in range(self.cols)], cols=self.rows)

    @property
    def T(self) -> "Mat":
        return self.transpose()

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.cols != other.rows:
            raise LinAlgError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        if self.ring != other.ring:
            raise LinAlgError("mixed rings in matrix product")
        z = self.ring.zero()
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = z
                for k in range(self.cols):
                    a = self.entries[i][k]
                    b = other.entries[k][j]
                    if not (a.is_zero() or b.is_zero()):
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return Mat.from_rows(self.ring, out, cols=other.cols)

    def __add__(self, other: "Mat") -> "Mat":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise LinAlgError("shape mismatch in sum")
        return Mat.from_rows(self.ring, [
            [a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)
        ], cols=self.cols)

    def __sub__(self, other: "Mat") -> "Mat":
        return self + (-other)

    def __neg__(self) -> "Mat":
        return Mat.from_rows(self.ring, [[-a for a in r] for r in self.entries], cols=self.cols)

    def scale(self, c: RingElem) -> "Mat":
        return Mat.from_rows(self.ring, [[a * c for a in r] for r in self.entries], cols=self.cols)

    def is_zero(self) -> bool:
        return all(e.is_zero() for r in self.entries for e in r)

    def to_lists(self) -> list[list[RingElem]]:
        return [list(r) for r in self.entries]

    def __str__(self) -> str:
        body = "; ".join(", ".join(str(e) for e in r) for r in self.entries)
        return f"[{body}]"


def hstack(mats: Sequence[Mat]) -> Mat:
    mats = list(mats)
    if not mats:
        raise LinAlgError("hstack of nothing")
    rows = mats[0].rows
    if any(m.rows != rows for m in mats):
        raise LinAlgError("hstack row mismatch")
    return Mat.from_rows(mats[0].ring, [
        [e for m in mats for e in m.entries[i]] for i in range(rows)
    ], cols=sum(m.cols for m in mats))


def vstack(mats: Sequence[Mat]) -> Mat:
    mats = list(mats)
    if not mats:
        raise LinAlgError("vstack of nothing")
    cols = mats[0].cols
    if any(m.cols != cols for m in mats):
        raise LinAlgError("vstack col mismatch")
    return Mat.from_rows(mats[0].ring, [r for m in mats for r in m.entries], cols=cols)


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmithDecomposition:
    """U @ M @ V = diag(pi**e for e in exponents), padded by zero rows/cols.

    U and V (and their tracked inverses) have unit determinant valuation and
    the exponents are weakly increasing; over a field all exponents are zero.
    """

    U: Mat
    Uinv: Mat
    V: Mat
    Vinv: Mat
    exponents: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.exponents)

    def diagonal(self, rows: int, cols: int) -> Mat:
        ring = self.U.ring
        d = Mat.zero(ring, rows, cols).to_lists()
        if self.exponents:
            pi = ring.uniformizer() if ring.is_dvr else ring.one()
            for t, e in enumerate(self.exponents):
                d[t][t] = pi ** e if ring.is_dvr else ring.one()
        return Mat.from_rows(ring, d, cols=cols)


def smith_normal_form(M: Mat) -> SmithDecomposition:
    ring = M.ring
    a = M.to_lists()
    m, n = M.rows, M.cols
    u = Mat.identity(ring, m).to_lists()
    uinv = Mat.identity(ring, m).to_lists()
    v = Mat.identity(ring, n).to_lists()
    vinv = Mat.identity(ring, n).to_lists()

    def row_op(i, t, c):
        # R_i += c * R_t on the working matrix and U; inverse op on Uinv.
        for j in range(n):
            a[i][j] = a[i][j] + c * a[t][j]
        for j in range(m):
            u[i][j] = u[i][j] + c * u[t][j]
        for j in range(m):
            uinv[j][t] = uinv[j][t] - c * uinv[j][i]

    def col_op(j, t, c):
        for i in range(m):
            a[i][j] = a[i][j] + c * a[i][t]
        for i in range(n):
            v[i][j] = v[i][j] + c * v[i][t]
        for i in range(n):
            vinv[t][i] = vinv[t][i] - c * vinv[j][i]

    def row_swap(i, t):
        a[i], a[t] = a[t], a[i]
        u[i], u[t] = u[t], u[i]
        for j in range(m):
            uinv[j][i], uinv[j][t] = uinv[j][t], uinv[j][i]

    def col_swap(j, t):
        for i in range(m):
            a[i][j], a[i][t] = a[i][t], a[i][j]
        for i in range(n):
            v[i][j], v[i][t] = v[i][t], v[i][j]
        vinv[j], vinv[t] = vinv[t], vinv[j]

    exps: list[int] = []
    t = 0
    while t < min(m, n):
        pivot = None
        pval = None
        for i in range(t, m):
            for j in range(t, n):
                e = a[i][j]
                if e.is_zero():
                    continue
                val = e.valuation()
                if pval is None or val < pval:
                    pivot, pval = (i, j), val
        if pivot is None:
            break
        pi, pj = pivot
        if pi != t:
            row_swap(pi, t)
        if pj != t:
            col_swap(pj, t)
        piv = a[t][t]
        for i in range(t + 1, m):
            if not a[i][t].is_zero():
                row_op(i, t, -(a[i][t].divide(piv)))
        for j in range(t + 1, n):
            if not a[t][j].is_zero():
                col_op(j, t, -(a[t][j].divide(piv)))
        exps.append(pval if ring.is_dvr else 0)
        t += 1

    # Normalize the diagonal to pure uniformizer powers (1 over a field).
    for t, e in enumerate(exps):
        target = (M.ring.uniformizer() ** e) if ring.is_dvr else ring.one()
        unit = a[t][t].divide(target)
        c = unit.inverse()
        for j in range(n):
            a[t][j] = a[t][j] * c
        for j in range(m):
            u[t][j] = u[t][j] * c
        for j in range(m):
            uinv[j][t] = uinv[j][t] * unit

    return SmithDecomposition(
        U=Mat.from_rows(ring, u, cols=m),
        Uinv=Mat.from_rows(ring, uinv, cols=m),
        V=Mat.from_rows(ring, v, cols=n),
        Vinv=Mat.from_rows(ring, vinv, cols=n),
        exponents=tuple(exps),
    )


def rank(M: Mat) -> int:
    """Rank of M over the fraction field."""
    return smith_normal_form(M).rank


def kernel_saturated(M: Mat) -> Mat:
    """Basis (as columns) of ker M.

    Over a domain the kernel of a matrix inside a free module is saturated,
    so the quotient by it is torsion free; over a DVR that quotient is free.
    """
    snf = smith_normal_form(M)
    return snf.V.take_cols(range(snf.rank, M.cols))


def saturation_with_invariants(G: Mat) -> tuple[Mat, tuple[int, ...]]:
    """Saturation of the column span of G inside the ambient free module.

    Returns (S, exponents): the columns of S form a basis of
    {m in ambient : xi * m in span(G) for some xi != 0}, and
    span(S)/span(G) is isomorphic to the direct sum of A/pi**e over the
    returned exponents (zero exponents are omitted, so the tuple is empty
    exactly when span(G) is already saturated).
    """
    snf = smith_normal_form(G)
    S = snf.Uinv.take_cols(range(snf.rank))
    return S, tuple(e for e in snf.exponents if e > 0)


def solve_in_span(G: Mat, b: Mat) -> Mat | None:
    """Solve G @ x = b exactly over the ring; None when b is not in the span.

    Membership is ring-exact, not fraction-field membership.  Free
    coordinates of the solution are set to zero, so the output is
    deterministic.
    """
    if b.rows != G.rows or b.cols != 1:
        raise LinAlgError("b must be a column of matching height")
    snf = smith_normal_form(G)
    ring = G.ring
    ub = snf.U @ b
    z: list[RingElem] = []
    pi = ring.uniformizer() if ring.is_dvr else ring.one()
    for t in range(G.cols):
        if t < snf.rank:
            d = pi ** snf.exponents[t] if ring.is_dvr else ring.one()
            try:
                z.append(ub[t, 0].divide(d))
            except RingError:
                return None
        else:
            z.append(ring.zero())
    for t in range(snf.rank, G.rows):
        if not ub[t, 0].is_zero():
            return None
    return snf.V @ Mat.from_cols(ring, [z])


def free_complement(G: Mat) -> Mat:
    """Columns completing a basis of span(G) to a basis of the ambient module.

    Requires the quotient ambient/span(G) to be free, i.e. the saturation
    exponents of G must be empty.
    """
    snf = smith_normal_form(G)
    if any(e > 0 for e in snf.exponents):
        raise LinAlgError(
            "column span is not a direct summand (nonzero saturation exponents)"
        )
    return snf.Uinv.take_cols(range(snf.rank, G.rows))


def relative_invariants(sub: Mat, sup: Mat) -> tuple[int, ...]:
    """Invariant factors of span(sup)/span(sub) for span(sub) inside span(sup).

    Both matrices live in the same ambient free module (equal row count) and
    every column of sub must lie in the ring-span of sup.  Zero invariants
    are omitted: an empty tuple certifies equality of the spans when the
    fraction-field ranks agree.
    """
    if sub.rows != sup.rows:
        raise LinAlgError("ambient rank mismatch")
    snf = smith_normal_form(sup)
    basis = snf.Uinv.take_cols(range(snf.rank))
    if any(e > 0 for e in snf.exponents):
        # Express the span basis exactly: scale back by the diagonal.
        ring = sup.ring
        pi = ring.uniformizer()
        cols = []
        for t in range(snf.rank):
            cols.append([basis[i, t] * pi ** snf.exponents[t] for i in range(sup.rows)])
        basis = Mat.from_cols(ring, cols, rows=sup.rows)
    coords = []
    for j in range(sub.cols):
        x = solve_in_span(basis, sub.col(j))
        if x is None:
            raise LinAlgError("sub is not contained in the span of sup")
        coords.append([x[i, 0] for i in range(basis.cols)])
    X = Mat.from_cols(sub.ring, coords, rows=basis.cols)
    snf_x = smith_normal_form(X)
    if snf_x.rank < basis.cols:
        raise LinAlgError("quotient span(sup)/span(sub) is not torsion")
    return tuple(e for e in snf_x.exponents if e > 0)


def is_unit_matrix(M: Mat) -> bool:
    """True when M is square and invertible over the ring."""
    if M.rows != M.cols:
        return False
    snf = smith_normal_form(M)
    return snf.rank == M.rows and all(e == 0 for e in snf.exponents)


def inverse_unit(M: Mat) -> Mat:
    """Inverse of a matrix that is invertible over the ring."""
    snf = smith_normal_form(M)
    if snf.rank != M.rows or M.rows != M.cols or any(snf.exponents):
        raise LinAlgError("matrix is not invertible over the ring")
    return snf.V @ snf.U


def det_valuation(M: Mat) -> int | float:
    """Valuation of det(M): the sum of the SNF exponents, or infinity."""
    if M.rows != M.cols:
        raise LinAlgError("determinant of a non-square matrix")
    snf = smith_normal_form(M)
    if snf.rank < M.rows:
        return math.inf
    return sum(snf.exponents)

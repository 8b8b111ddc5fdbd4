"""Root-system combinatorics: Cartan data, weights, dominance, weight
enumeration, and an independent Weyl-character oracle.

Weights are plain integer tuples in fundamental-weight coordinates, so the
pairing of a weight with a simple coroot is an O(1) coordinate read-off.

Convention: ``cartan[i][j]`` is the pairing of the simple root alpha_j with
the simple coroot of alpha_i, so the fundamental coordinates of alpha_j form
the j-th *column* of the matrix.  The symmetrizers d satisfy
d[i] * cartan[i][j] == d[j] * cartan[j][i] with entries in {1, 2, 3} and at
least one 1 per irreducible component; this pins d[i] to half the squared
length of alpha_i, which is what the quantum binomial subscripts require.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

Weight = tuple[int, ...]


class RootSystemError(ValueError):
    pass


def _chain(n: int) -> list[list[int]]:
    a = [[2 if i == j else 0 for j in range(n)] for i in range(n)]
    for i in range(n - 1):
        a[i][i + 1] = -1
        a[i + 1][i] = -1
    return a


def _label_cartan(family: str, n: int) -> list[list[int]]:
    if family == "A" and n >= 1:
        return _chain(n)
    if family == "B" and n >= 2:
        a = _chain(n)
        a[n - 1][n - 2] = -2
        return a
    if family == "C" and n >= 2:
        a = _chain(n)
        a[n - 2][n - 1] = -2
        return a
    if family == "D" and n >= 3:
        a = _chain(n)
        a[n - 2][n - 1] = a[n - 1][n - 2] = 0
        a[n - 3][n - 1] = a[n - 1][n - 3] = -1
        return a
    if family == "E" and n in (6, 7, 8):
        a = [[2 if i == j else 0 for j in range(n)] for i in range(n)]
        edges = [(0, 2), (1, 3), (2, 3), (3, 4), (4, 5)]
        if n >= 7:
            edges.append((5, 6))
        if n == 8:
            edges.append((6, 7))
        for i, j in edges:
            a[i][j] = a[j][i] = -1
        return a
    if family == "F" and n == 4:
        a = _chain(4)
        a[2][1] = -2
        a[1][2] = -1
        return a
    if family == "G" and n == 2:
        return [[2, -3], [-1, 2]]
    raise RootSystemError(f"unsupported type {family}{n}")


def _symmetrizer(cartan: list[list[int]]) -> tuple[int, ...]:
    """Minimal positive-integer d with d[i]*A[i][j] symmetric, per component."""
    n = len(cartan)
    d: list[Fraction | None] = [None] * n
    for start in range(n):
        if d[start] is not None:
            continue
        d[start] = Fraction(1)
        stack = [start]
        comp = [start]
        while stack:
            i = stack.pop()
            for j in range(n):
                if i == j or cartan[i][j] == 0:
                    continue
                want = d[i] * Fraction(cartan[i][j], cartan[j][i])
                if d[j] is None:
                    d[j] = want
                    stack.append(j)
                    comp.append(j)
                elif d[j] != want:
                    raise RootSystemError("Cartan matrix is not symmetrizable")
        scale = min(d[j] for j in comp)
        for j in comp:
            d[j] = d[j] / scale
    out = []
    for x in d:
        if x.denominator != 1 or x.numerator not in (1, 2, 3):
            raise RootSystemError(f"symmetrizer entry {x} outside {{1,2,3}}")
        out.append(x.numerator)
    return tuple(out)


def _fraction_matrix_inverse(a: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(a)
    m = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            raise RootSystemError("singular Cartan matrix")
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [c * inv for c in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [c - f * p for c, p in zip(m[r], m[col])]
    return [row[n:] for row in m]


@dataclass(frozen=True)
class RootSystem:
    """Validated Cartan datum of finite type."""

    label: str
    cartan: tuple[tuple[int, ...], ...]
    d: tuple[int, ...]
    _inv_cartan: tuple[tuple[Fraction, ...], ...] = field(repr=False, compare=False, default=())

    @property
    def rank(self) -> int:
        return len(self.cartan)

    # -- weight arithmetic -------------------------------------------------

    def simple_root(self, i: int) -> Weight:
        """Fundamental coordinates of alpha_i (the i-th column)."""
        return tuple(self.cartan[r][i] for r in range(self.rank))

    def add_root(self, mu: Weight, i: int, n: int = 1) -> Weight:
        root = self.simple_root(i)
        return tuple(m + n * r for m, r in zip(mu, root))

    def zero_weight(self) -> Weight:
        return (0,) * self.rank

    def rho(self) -> Weight:
        return (1,) * self.rank

    def root_coords(self, mu: Weight) -> tuple[Fraction, ...]:
        """Coefficients c with mu = sum c_j alpha_j."""
        return tuple(
            sum(self._inv_cartan[j][r] * mu[r] for r in range(self.rank))
            for j in range(self.rank)
        )

    def height(self, mu: Weight) -> Fraction:
        return sum(self.root_coords(mu), Fraction(0))

    def inner(self, x: Weight, y: Weight) -> Fraction:
        """The W-invariant bilinear form in fundamental coordinates."""
        c = self.root_coords(y)
        return sum(c[j] * self.d[j] * x[j] for j in range(self.rank))

    def reflect(self, mu: Weight, i: int) -> Weight:
        return self.add_root(mu, i, -mu[i])

    def is_dominant(self, mu: Weight) -> bool:
        return all(c >= 0 for c in mu)

    def dominant_conjugate(self, mu: Weight) -> Weight:
        while True:
            i = next((j for j, c in enumerate(mu) if c < 0), None)
            if i is None:
                return mu
            mu = self.reflect(mu, i)

    def check_weight(self, mu: Weight) -> None:
        if len(mu) != self.rank:
            raise RootSystemError(f"weight {mu} has wrong length for rank {self.rank}")

    # -- positive roots ------------------------------------------------------

    def positive_roots(self) -> list[Weight]:
        """All positive roots in fundamental coordinates, by increasing height."""
        simple = [self.simple_root(i) for i in range(self.rank)]
        heights = {r: 1 for r in simple}
        level = list(simple)
        h = 1
        while level:
            h += 1
            nxt = []
            for gamma in level:
                for i, alpha in enumerate(simple):
                    cand = tuple(g + a for g, a in zip(gamma, alpha))
                    if cand in heights:
                        continue
                    # Length p of the alpha-string below gamma; gamma + alpha
                    # is a root iff p - <gamma, alpha^vee> > 0.
                    p = 0
                    down = tuple(g - a for g, a in zip(gamma, alpha))
                    while down in heights:
                        p += 1
                        down = tuple(g - a for g, a in zip(down, alpha))
                    if p - gamma[i] > 0:
                        heights[cand] = h
                        nxt.append(cand)
            level = nxt
        return sorted(heights, key=lambda r: (heights[r], r))

    def __str__(self) -> str:
        return self.label


def _finite_type_check(cartan: list[list[int]], d: tuple[int, ...]) -> None:
    """Finite type iff the symmetrized matrix is positive definite."""
    n = len(cartan)
    b = [[Fraction(d[i] * cartan[i][j]) for j in range(n)] for i in range(n)]
    # Leading principal minors via fraction-free-ish elimination.
    m = [row[:] for row in b]
    det = Fraction(1)
    for col in range(n):
        if m[col][col] == 0:
            raise RootSystemError("Cartan matrix is not of finite type")
        det *= m[col][col]
        if det <= 0:
            raise RootSystemError("Cartan matrix is not of finite type")
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            m[r] = [c - f * p for c, p in zip(m[r], m[col])]


def _validate(cartan: list[list[int]]) -> None:
    n = len(cartan)
    for i, row in enumerate(cartan):
        if len(row) != n:
            raise RootSystemError("Cartan matrix must be square")
        if row[i] != 2:
            raise RootSystemError("Cartan diagonal entries must equal 2")
        for j, a in enumerate(row):
            if i != j and a > 0:
                raise RootSystemError("Cartan off-diagonal entries must be <= 0")
            if i != j and (a == 0) != (cartan[j][i] == 0):
                raise RootSystemError("Cartan zero pattern must be symmetric")


def root_system(spec: str | list[list[int]], label: str | None = None) -> RootSystem:
    """Build a validated root system from a label like "B3" or an explicit
    Cartan matrix of finite type."""
    if isinstance(spec, str):
        m = re.fullmatch(r"([A-G])(\d+)", spec.strip())
        if not m:
            raise RootSystemError(f"bad root system label {spec!r}")
        cartan = _label_cartan(m.group(1), int(m.group(2)))
        label = spec.strip()
    else:
        cartan = [list(map(int, row)) for row in spec]
        label = label or "custom"
    _validate(cartan)
    d = _symmetrizer(cartan)
    _finite_type_check(cartan, d)
    frac = [[Fraction(c) for c in row] for row in cartan]
    inv = _fraction_matrix_inverse(frac)
    return RootSystem(
        label=label,
        cartan=tuple(tuple(r) for r in cartan),
        d=d,
        _inv_cartan=tuple(tuple(r) for r in inv),
    )


def pairing(rs: RootSystem, mu: Weight, alpha: int) -> int:
    """The pairing of mu with the alpha-th simple coroot."""
    rs.check_weight(mu)
    return mu[alpha]


def dominance_leq(rs: RootSystem, mu: Weight, lam: Weight) -> bool:
    """True iff lam - mu is a nonnegative integer combination of simple roots."""
    rs.check_weight(mu)
    rs.check_weight(lam)
    diff = tuple(a - b for a, b in zip(lam, mu))
    coords = rs.root_coords(diff)
    return all(c.denominator == 1 and c >= 0 for c in coords)


def weights_below(
    rs: RootSystem,
    lam: Weight,
    prune_hull: bool = True,
    height_bound: int | None = None,
) -> list[Weight]:
    """All weights mu <= lam (hull-pruned by default), in processing order.

    With pruning, mu is kept iff its dominant conjugate is <= lam; this is
    exactly the convex hull of the Weyl orbit of lam intersected with
    lam + (root lattice).  Output is ordered by increasing height of
    lam - mu with lexicographic tie-break, a linear extension of reverse
    dominance: every mu + n*alpha precedes mu.
    """
    rs.check_weight(lam)
    if not prune_hull and height_bound is None:
        raise RootSystemError("an explicit height bound is required when not pruning")

    def keep(mu: Weight) -> bool:
        if prune_hull:
            return dominance_leq(rs, rs.dominant_conjugate(mu), lam)
        return True

    out = [lam]
    level = {lam}
    h = 0
    while level:
        h += 1
        if height_bound is not None and h > height_bound:
            break
        nxt = set()
        for mu in level:
            for i in range(rs.rank):
                cand = rs.add_root(mu, i, -1)
                if cand not in nxt and keep(cand):
                    nxt.add(cand)
        out.extend(sorted(nxt))
        level = nxt
    return out


Character = dict[Weight, int]


def weyl_character(rs: RootSystem, lam: Weight) -> Character:
    """Multiplicities of the irreducible characteristic-zero character with
    highest weight lam, via the Freudenthal recursion.

    This is the independent oracle used to accept the constructed modules;
    it shares no code with the extension engine.
    """
    rs.check_weight(lam)
    if not rs.is_dominant(lam):
        raise RootSystemError(f"{lam} is not dominant")
    rho = rs.rho()
    pos = rs.positive_roots()
    lam_rho = tuple(a + b for a, b in zip(lam, rho))
    norm_top = rs.inner(lam_rho, lam_rho)
    mult: dict[Weight, Fraction] = {lam: Fraction(1)}
    for mu in weights_below(rs, lam, prune_hull=True)[1:]:
        acc = Fraction(0)
        for gamma in pos:
            k = 1
            while True:
                up = tuple(m + k * g for m, g in zip(mu, gamma))
                m_up = mult.get(up)
                if m_up is None:
                    # Outside the stored hull: multiplicity zero, and going
                    # further along gamma stays outside.
                    break
                if m_up:
                    acc += m_up * rs.inner(up, gamma)
                k += 1
        mu_rho = tuple(a + b for a, b in zip(mu, rho))
        denom = norm_top - rs.inner(mu_rho, mu_rho)
        if denom == 0:
            raise RootSystemError("Freudenthal denominator vanished")
        m = 2 * acc / denom
        if m.denominator != 1 or m < 0:
            raise RootSystemError(f"non-integral multiplicity {m} at {mu}")
        mult[mu] = m
    return {mu: int(m) for mu, m in mult.items() if m > 0}


def weyl_dimension(rs: RootSystem, lam: Weight) -> int:
    """Dimension by the product formula; a second independent cross-check."""
    rs.check_weight(lam)
    if not rs.is_dominant(lam):
        raise RootSystemError(f"{lam} is not dominant")
    rho = rs.rho()
    lam_rho = tuple(a + b for a, b in zip(lam, rho))
    dim = Fraction(1)
    for gamma in rs.positive_roots():
        dim *= Fraction(rs.inner(lam_rho, gamma), rs.inner(rho, gamma))
    if dim.denominator != 1:
        raise RootSystemError("non-integral Weyl dimension")
    return int(dim)

"""Symmetric contravariant bilinear forms on graded objects.

A form is stored as one Gram matrix per weight (cross-weight pairings vanish
by definition of the representation).  Contravariance means every raising
operator is adjoint to the matching lowering operator:

    Gram[mu + n*alpha] @ E[(mu, alpha, n)] == F[(mu, alpha, n)].T @ Gram[mu].

The two constructive operations mirror the extension steps of
:mod:`qtilt.xcat`: a form extends uniquely along a minimal extension, and
over a local ring a non-degenerate form can be pushed through a full
saturated build (``build_smax_with_form``), certifying self-duality of the
result.
"""

from __future__ import annotations

from . import linalg
from .linalg import Mat, hstack, vstack
from .ring import GroundRing
from .rootsys import Weight
from .xcat import (
    Report,
    XObject,
    _build_order,
    _delta_rank,
    _seed,
    delta_space,
    minimal_extend,
)

GradedForm = dict[Weight, Mat]


class FormError(ValueError):
    pass


def _gram(b: GradedForm, M: XObject, mu: Weight) -> Mat:
    g = b.get(mu)
    if g is None:
        return Mat.zero(M.ring, M.rank(mu), M.rank(mu))
    return g


def _gram_delta(b: GradedForm, M: XObject, mu: Weight, index) -> Mat:
    """Block-diagonal Gram matrix on the upper-neighbour sum."""
    dr = _delta_rank(index)
    out = Mat.zero(M.ring, dr, dr).to_lists()
    for blk in index:
        up = M.rs.add_root(mu, blk.alpha, blk.n)
        g = _gram(b, M, up)
        for i in range(blk.rank):
            for j in range(blk.rank):
                out[blk.offset + i][blk.offset + j] = g[i, j]
    return Mat.from_rows(M.ring, out, cols=dr)


def _is_nondegenerate(g: Mat, ring: GroundRing) -> bool:
    """Unit Gram determinant: full rank with zero valuation."""
    if g.rows == 0:
        return True
    snf = linalg.smith_normal_form(g)
    return snf.rank == g.rows and all(e == 0 for e in snf.exponents)


def check_form(M: XObject, b: GradedForm) -> Report:
    """Verify symmetry and exact contravariance; report per-weight
    non-degeneracy and the radical rank."""
    rep = Report()
    sym_fail = contra_fail = 0
    for mu in sorted(set(M.spaces) | set(b)):
        g = _gram(b, M, mu)
        if g.rows != M.rank(mu) or g.cols != M.rank(mu):
            rep.add("form-shape", mu, False,
                    f"Gram is {g.rows}x{g.cols}, space has rank {M.rank(mu)}")
            continue
        if g != g.T:
            sym_fail += 1
            rep.add("form-symmetric", mu, False)
    if not sym_fail:
        rep.add("form-symmetric", None, True)
    for (mu, a, n), e in sorted(M.eops.items()):
        up = M.rs.add_root(mu, a, n)
        lhs = _gram(b, M, up) @ e
        rhs = M.fop(mu, a, n).T @ _gram(b, M, mu)
        if lhs != rhs:
            contra_fail += 1
            rep.add("form-contravariant", mu, False, f"alpha={a} n={n}")
    if not contra_fail:
        rep.add("form-contravariant", None, True)
    for mu in sorted(M.spaces):
        g = _gram(b, M, mu)
        nondeg = _is_nondegenerate(g, M.ring)
        radical = linalg.kernel_saturated(g).cols
        rep.add("form-nondegenerate", mu, nondeg,
                f"radical rank {radical}" if not nondeg else None)
    return rep


def extend_form_minimal(M: XObject, b: GradedForm, mu: Weight) -> GradedForm:
    """The unique contravariant extension of b across the minimal extension
    at mu.

    M may be passed either before or after the extension step; the step is
    deterministic, so recomputing it internally yields the same matrices.
    The Gram matrix at mu is forced: pairing two lowered vectors must equal
    the pairing of one against the raise-then-lower image of the other.
    """
    if mu not in M.region:
        M = minimal_extend(M, mu)
    index, e_mu, f_mu = delta_space(M, mu)
    r = M.rank(mu)
    out = dict(b)
    if r == 0:
        out[mu] = Mat.zero(M.ring, 0, 0)
        return out
    g_delta = _gram_delta(b, M, mu, index)
    # Columns x_i with F_mu @ x_i = e_i, the chosen basis of the new space.
    cols = []
    for i in range(r):
        target = Mat.from_cols(M.ring, [[M.ring.one() if j == i else M.ring.zero()
                                         for j in range(r)]])
        x = linalg.solve_in_span(f_mu, target)
        if x is None:
            raise FormError("lowering operator is not surjective at the new weight")
        cols.append([x[j, 0] for j in range(f_mu.cols)])
    lifts = Mat.from_cols(M.ring, cols, rows=f_mu.cols)
    out[mu] = lifts.T @ g_delta @ e_mu
    return out


def complete_nondegenerate(
    M: XObject, b: GradedForm, mu: Weight
) -> tuple[XObject, GradedForm]:
    """Extend across mu keeping the form non-degenerate.

    When the forced extension of the form is already non-degenerate this is
    just the minimal extension.  Otherwise (over a local ring) the weight
    space is enlarged by a free module dual to the residue radical, paired
    hyperbolically against it; the new generators raise to the unique
    vectors adjoint to lowering, solved through the inverse of the
    non-degenerate Gram matrix on the upper-neighbour sum.
    """
    Mt = minimal_extend(M, mu)
    bt = extend_form_minimal(Mt, b, mu)
    g = bt[mu]
    if _is_nondegenerate(g, M.ring):
        return Mt, bt
    if M.ring.is_field:
        raise FormError("degenerate extension over a field: input form degenerate")
    index, e_mu, f_mu = delta_space(Mt, mu)
    dr = _delta_rank(index)
    r = Mt.rank(mu)
    g_delta = _gram_delta(bt, Mt, mu, index)
    if not _is_nondegenerate(g_delta, M.ring):
        raise FormError("form degenerate on the upper-neighbour sum")
    snf = linalg.smith_normal_form(g)
    if snf.rank != r:
        raise FormError("Gram radical nonzero; input form was degenerate")
    # Residue radical = span of the V-columns with positive exponent; their
    # count is the rank of the hyperbolic partner S.
    rad_idx = [t for t, e in enumerate(snf.exponents) if e > 0]
    k = len(rad_idx)
    # Pair the i-th new generator against the rad_idx[i]-th V-column:
    # b(e_a, s_i) = (Vinv @ e_a)[rad_idx[i]].
    w_rows = snf.Vinv.take_rows(rad_idx)          # k x r
    pairing = w_rows.T                            # r x k
    gram_new = vstack([
        hstack([g, pairing]),
        hstack([pairing.T, Mat.zero(M.ring, k, k)]),
    ])
    # New raising columns: G_delta @ E'(s_i) = (Vinv @ F_mu row picture).
    rhs = w_rows @ f_mu                           # k x dr
    g_delta_inv = linalg.inverse_unit(g_delta)
    e_prime = g_delta_inv @ rhs.T                 # dr x k
    e_new = hstack([e_mu, e_prime]) if e_mu.cols else e_prime
    f_new = vstack([f_mu, Mat.zero(M.ring, k, dr)]) if f_mu.rows else Mat.zero(M.ring, k, dr)
    from .xcat import _store_blocks

    M_new = _store_blocks(Mt, mu, index, e_new, f_new, r + k)
    out = dict(bt)
    out[mu] = gram_new
    return M_new, out


def build_smax_with_form(
    rs, ring: GroundRing, lam: Weight,
    prune: bool = True, height_bound: int | None = None,
    weights: list[Weight] | None = None,
) -> tuple[XObject, GradedForm]:
    """Build the maximal object together with a non-degenerate symmetric
    contravariant form, by completing the form at every extension step.

    The result carries its own maximality certificate: a non-degenerate
    contravariant form forces the raising image to be saturated, so the
    object is isomorphic to the output of ``build_smax``.
    """
    order = _build_order(rs, lam, prune, height_bound, weights)
    M = _seed(rs, ring, lam)
    b: GradedForm = {lam: Mat.identity(ring, 1)}
    for mu in order[1:]:
        M, b = complete_nondegenerate(M, b, mu)
    from .xcat import maximality_certificate

    cert = maximality_certificate(M)
    if not cert.ok:
        raise FormError(f"form-carrying build failed maximality: {cert.failures()}")
    return M, b

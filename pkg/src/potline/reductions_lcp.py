"""P-LCP to USO (out-maps) and P-LCP to EOPL/UniqueEOPL (Lemke-path
encoding), with map-back of every target certificate.

Vertex codes are 2d-bit strings: the low d bits select the tight side per
label (bit i set means w_i = 0), the next d bits one-hot encode the
duplicate label (all zero when z = 0).  Invalid codes self-loop.
Degenerate right-hand sides are handled by the same symbolic
lexicographic perturbation the solvers use, so the out-map and the line
view agree on ties.
"""

from __future__ import annotations

from fractions import Fraction

from .pivoting import LemkeSystem, a_alpha, principal_minor
from .problems import (
    Certificate,
    LcpInstance,
    LineInstance,
    UnmappableCert,
    UsoInstance,
    cert,
    verify_lcp,
)
from .rational import SingularMatrixError, ceil_log2, solve_linear_multi
from math import lcm


def integer_scale(inst: LcpInstance) -> tuple[LcpInstance, int]:
    """Scale (M, q) by the lcm of all denominators.  Uniform row scaling
    keeps the covering vector all-ones and preserves solutions, violations
    and the Lemke path combinatorics (z is scaled)."""
    dens = [x.denominator for row in inst.M for x in row] + [x.denominator for x in inst.q]
    scale = lcm(*dens) if dens else 1
    if scale == 1:
        return inst, 1
    m2 = [[x * scale for x in row] for row in inst.M]
    q2 = [x * scale for x in inst.q]
    return LcpInstance(M=m2, q=q2), scale


def out_map(inst: LcpInstance, alpha) -> int | None:
    """Sign bit-string of A_alpha^{-1} q, or None (dash) on singularity.

    Zero entries are resolved by the lexicographic perturbation over
    [q | I]: the first nonzero entry of the row decides the sign.
    """
    d = inst.d
    alpha = frozenset(alpha)
    a = a_alpha(inst.M, alpha)
    rhs = [[inst.q[r]] + [Fraction(r == j) for j in range(d)] for r in range(d)]
    try:
        rows = solve_linear_multi(a, rhs)
    except SingularMatrixError:
        return None
    bits = 0
    for i in range(d):
        lead = next((c for c in rows[i] if c != 0), Fraction(0))
        if lead < 0:
            bits |= 1 << i
    return bits


def plcp_to_uso(inst: LcpInstance) -> UsoInstance:
    """Orient vertex v by out(alpha(v)) with alpha(v) = set bits of v."""
    d = inst.d
    cache: dict[int, int | None] = {}

    def orient(v: int):
        if v not in cache:
            alpha = frozenset(i for i in range(d) if v >> i & 1)
            cache[v] = out_map(inst, alpha)
        return cache[v]

    return UsoInstance(n=d, orient=orient)


def map_back_uso(inst: LcpInstance, uso: UsoInstance, c: Certificate) -> Certificate:
    """US1 -> Q1, USV1 -> PV1 (singular cone), USV2 -> PV3."""
    d = inst.d

    def alpha_of(v):
        return frozenset(i for i in range(d) if v >> i & 1)

    if c.kind == "US1":
        alpha = alpha_of(c.v)
        a = a_alpha(inst.M, alpha)
        from .rational import solve_linear

        x = solve_linear(a, inst.q)
        y = [x[i] if i in alpha else Fraction(0) for i in range(d)]
        out = cert("Q1", y=y)
    elif c.kind == "USV1":
        out = cert("PV1", alpha=alpha_of(c.v))
    elif c.kind == "USV2":
        out = cert("PV3", alpha=alpha_of(c.v), beta=alpha_of(c.u))
    else:
        raise UnmappableCert(f"unexpected USO certificate {c.kind}")
    if not verify_lcp(inst, out):
        raise UnmappableCert(f"map-back of {c} failed verification")
    return out


# ---------------------------------------------------------------------------
# P-LCP -> EOPL / UniqueEOPL via the Lemke path

class PlcpLineView:
    """Lazy EOPL/UniqueEOPL instance over 2d-bit codes of Lemke-path
    vertices.  All arithmetic runs on the integer-scaled instance.

    The right-hand side is perturbed symbolically, so z values are
    polynomials in eps.  The potential applies the floor(Delta^2 *
    (Delta - z)) digit construction to every eps coefficient of z and
    combines the digits in mixed radix; that keeps the potential an
    integer, keeps V(0^n) = 0, and separates any two vertices whose z
    values differ even only in the perturbation (without this, degenerate
    instances sever the line at edges of numeric length zero)."""

    def __init__(self, inst: LcpInstance, flavor: str = "ueopl"):
        if all(qi >= 0 for qi in inst.q):
            raise ValueError("q >= 0 is solved by y = 0; the line view needs min q < 0")
        self.original = inst
        self.inst, self.scale = integer_scale(inst)
        self.d = inst.d
        self.sys = LemkeSystem(self.inst.M, self.inst.q)
        self.nbits = 2 * self.d
        i_max = max(
            max((x for row in self.inst.M for x in row), default=Fraction(0)),
            max((abs(x) for x in self.inst.q), default=Fraction(0)),
        )
        i_max = max(int(i_max), 1)
        n = 2 * self.d
        fact = 1
        for t in range(2, n + 1):
            fact *= t
        self.delta = fact * i_max ** (2 * self.d + 1) + 1
        self.radix = 2 * self.delta**3 + 1
        self.m_pot = ceil_log2(self.radix ** (self.d + 1)) + 1
        self.flavor = flavor
        self._vertex_cache: dict[int, tuple | None] = {}
        self._start = None

    # -- code <-> vertex -----------------------------------------------------
    def code_of(self, basis) -> int:
        d = self.d
        u = 0
        for i in range(d):
            if d + i not in basis:  # w_i nonbasic, i.e. w_i = 0
                u |= 1 << i
        dl = self.sys.duplicate_label(basis)
        if dl is not None:
            u |= 1 << (d + dl)
        return u

    def start_vertex(self):
        if self._start is None:
            basis, vals, _ = self.sys.start_vertex()
            self._start = (basis, vals)
        return self._start

    def vertex_of(self, u: int):
        """(basis, vals) for a valid code, else None.  Validity: at most
        one duplicate bit, solvable, lex-feasible, and canonical (the
        round trip code_of reproduces u)."""
        if u in self._vertex_cache:
            return self._vertex_cache[u]
        res = self._compute_vertex(u)
        self._vertex_cache[u] = res
        return res

    def _compute_vertex(self, u: int):
        d = self.d
        if u == 0:
            return None
        dup_bits = [i for i in range(d) if u >> (d + i) & 1]
        if len(dup_bits) > 1:
            return None
        basis = set()
        if dup_bits:
            l = dup_bits[0]
            basis.add(self.sys.zvar)
            for i in range(d):
                if i == l:
                    continue
                basis.add(i if u >> i & 1 else d + i)  # nontight side is basic
        else:
            for i in range(d):
                basis.add(i if u >> i & 1 else d + i)
        basis = frozenset(basis)
        vals = self.sys.solve_basis(basis)
        if vals is None or not self.sys.feasible(vals):
            return None
        if self.code_of(basis) != u:
            return None
        return basis, vals

    def is_valid(self, u: int) -> bool:
        return u == 0 or self.vertex_of(u) is not None

    def etoi(self, u: int):
        v = self.vertex_of(u)
        if v is None:
            return None
        return self.sys.numeric_point(v[1])

    # -- oracles ---------------------------------------------------------------
    def _lex_z(self, basis, vals):
        if self.sys.zvar in basis:
            return vals[self.sys.zvar]
        from .rational import LexVec

        return LexVec.const(0, self.d)

    def successor(self, u: int) -> int:
        if u == 0:
            basis, _ = self.start_vertex()
            return self.code_of(basis)
        vtx = self.vertex_of(u)
        if vtx is None:
            return u
        basis, vals = vtx
        if self.sys.zvar not in basis:
            return u  # z = 0: ends of the line have no successor
        fwd = self.sys.forward_entering(basis)
        if fwd is None:
            return u
        step = self.sys.ratio_step(basis, vals, fwd)
        if step is None:
            return u  # forward edge is a ray
        nb, nv, _, _ = step
        if self._lex_z(basis, vals) > self._lex_z(nb, nv):
            return self.code_of(nb)
        return u

    def predecessor(self, u: int) -> int:
        if u == 0:
            return 0
        vtx = self.vertex_of(u)
        if vtx is None:
            return u
        basis, vals = vtx
        sbasis, _ = self.start_vertex()
        if basis == sbasis:
            return 0
        if self.sys.zvar not in basis:
            # relax z = 0; the edge points into u iff the cone minor is
            # positive (its z-decreasing side is forward).
            alpha = self.sys.support(basis)
            if principal_minor(self.inst.M, alpha) <= 0:
                return u
            entering = self.sys.zvar
        else:
            entering = self.sys.backward_entering(basis)
            if entering is None:
                return u
        step = self.sys.ratio_step(basis, vals, entering)
        if step is None:
            return u
        nb, nv, _, _ = step
        if self._lex_z(nb, nv) > self._lex_z(basis, vals):
            return self.code_of(nb)
        return u

    def potential(self, u: int) -> int:
        if u == 0:
            return 0
        vtx = self.vertex_of(u)
        if vtx is None:
            return 0
        basis, vals = vtx
        coeffs = self._lex_z(basis, vals).coeffs
        val = 0
        for k in range(self.d + 1):
            digit = int((self.delta**2) * (self.delta - coeffs[k]))
            digit = min(max(digit, 0), self.radix - 1)
            val = val * self.radix + digit
        return val

    def line_instance(self) -> LineInstance:
        return LineInstance(
            n=self.nbits,
            successor=self.successor,
            predecessor=self.predecessor,
            potential=self.potential,
            flavor=self.flavor,
            m_pot=self.m_pot,
        )


def plcp_to_eopl(inst: LcpInstance, flavor: str = "ueopl") -> tuple[LineInstance, PlcpLineView]:
    view = PlcpLineView(inst, flavor=flavor)
    return view.line_instance(), view


# -- map-back ----------------------------------------------------------------

def _pv2_from_same_z_points(inst: LcpInstance, y1, y2) -> Certificate | None:
    x = [a - b for a, b in zip(y1, y2)]
    if all(v == 0 for v in x):
        return None
    c = cert("PV2", x=x)
    return c if verify_lcp(inst, c) else None


def _edge_points_same_z(view: PlcpLineView, basis, vals):
    """Points on the two relaxation edges at a duplicate vertex sharing one
    z value.  Returns a list of numeric
    (y, z) pairs, all with equal z."""
    sys = view.sys
    l = sys.duplicate_label(basis)
    if l is None:
        return []
    z0 = sys.z_of(vals).numeric
    edges = []
    for entering in (l, sys.d + l):
        eta = sys.direction(basis, entering)
        dz = eta.get(sys.zvar, Fraction(0))
        step = sys.ratio_step(basis, vals, entering)
        if step is None:
            t_max = None  # ray: any positive step stays feasible
        else:
            t_max = step[3].numeric
        edges.append((eta, dz, t_max))
    signs = [dz for _, dz, _ in edges]
    out = []
    if all(s > 0 for s in signs) or all(s < 0 for s in signs):
        # Both edges move z the same way; step to z0 +/- eps on each with
        # eps below both z spans.
        spans = [abs(dz) * t_max if t_max is not None else None for _, dz, t_max in edges]
        finite = [s for s in spans if s is not None]
        if any(s == 0 for s in finite):
            return []
        eps = min(finite) / 2 if finite else Fraction(1)
        for eta, dz, _ in edges:
            t = eps / abs(dz)
            y, _, z = sys.edge_point(vals, eta, t)
            out.append((y, z))
        return out
    for eta, dz, t_max in edges:
        if dz == 0:
            # z is constant along this edge: the vertex and any interior
            # edge point already share a z value.
            t = Fraction(1) if t_max is None else t_max / 2
            if t == 0:
                continue
            y0, _, _ = sys.numeric_point(vals)
            y1, _, _ = sys.edge_point(vals, eta, t)
            out.append((y0, z0))
            out.append((y1, z0))
            return out
    return []


def map_back_lcp(inst: LcpInstance, view: PlcpLineView, c: Certificate) -> Certificate:
    """Map a verified EOPL/UniqueEOPL certificate back to Q1/PV1/PV2.

    z = 0 ends decode to Q1.  Stalled vertices (z > 0) yield two LCP
    solutions for a shifted q and hence a sign-reversing vector (PV2), or
    a non-positive principal minor (PV1) when a degenerate cone is
    involved.  Equal/straddling-potential pairs (UV3) yield PV2 the same
    way.  R2/UV1 are impossible by construction.
    """
    sys = view.sys
    scaled = view.inst

    def finish(out):
        if out is not None and verify_lcp(inst, out):
            return out
        return None

    def pv1_candidates(basis):
        alpha = sys.support(basis)
        l = sys.duplicate_label(basis)
        cands = [alpha, alpha | {l}] if l is not None else [alpha]
        for a in cands:
            if a and principal_minor(scaled.M, a) <= 0:
                got = finish(cert("PV1", alpha=frozenset(a)))
                if got:
                    return got
        # A severed line is impossible for P-matrices, so some principal
        # minor is non-positive; scan them all (desk scale).
        from itertools import combinations

        for r in range(1, view.d + 1):
            for sub in combinations(range(view.d), r):
                if principal_minor(scaled.M, sub) <= 0:
                    got = finish(cert("PV1", alpha=frozenset(sub)))
                    if got:
                        return got
        return None

    def ray_pv2(other_vals):
        # The start code stands for the primary ray (y = 0, z >= z0); the
        # ray point at the other vertex's z value pairs with it for PV2.
        y_other, _, z_other = sys.numeric_point(other_vals)
        if all(v == 0 for v in y_other):
            return None
        w_ray = [qi + z_other for qi in scaled.q]
        if any(v < 0 for v in w_ray):
            return None
        return finish(_pv2_from_same_z_points(inst, y_other, [Fraction(0)] * view.d))

    if c.kind in ("U1", "R1", "UV2"):
        vtx = view.vertex_of(c.x) if c.x != 0 else None
        if vtx is None:
            raise UnmappableCert(f"{c} is not a valid configuration")
        basis, vals = vtx
        if sys.zvar not in basis:
            y, _, _ = sys.numeric_point(vals)
            out = finish(cert("Q1", y=y))
            if out:
                return out
            raise UnmappableCert(f"z=0 decode of {c} failed")
        pts = _edge_points_same_z(view, basis, vals)
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if pts[i][1] == pts[j][1]:
                    out = finish(_pv2_from_same_z_points(inst, pts[i][0], pts[j][0]))
                    if out:
                        return out
        out = pv1_candidates(basis)
        if out:
            return out
        raise UnmappableCert(f"stalled vertex for {c} yielded no violation")

    if c.kind == "UV3":
        if c.x == 0 or c.y == 0:
            other = view.vertex_of(c.y if c.x == 0 else c.x)
            if other is not None:
                out = ray_pv2(other[1])
                if out:
                    return out
            raise UnmappableCert(f"UV3 {c} through the start gave no violation")
        va = view.vertex_of(c.x)
        vb = view.vertex_of(c.y)
        if va is None or vb is None:
            raise UnmappableCert("UV3 endpoints are not valid configurations")
        ya, _, za = sys.numeric_point(va[1])
        yb, _, zb = sys.numeric_point(vb[1])
        if za == zb:
            out = finish(_pv2_from_same_z_points(inst, ya, yb))
            if out:
                return out
        else:
            # V(x) < V(y) < V(S(x)): a point on the edge out of x shares
            # y's z value.
            basis, vals = va
            if sys.zvar in basis:
                fwd = sys.forward_entering(basis)
                if fwd is not None:
                    eta = sys.direction(basis, fwd)
                    dz = eta.get(sys.zvar, Fraction(0))
                    if dz != 0:
                        t = (zb - za) / dz
                        if t > 0:
                            y_mid, _, z_mid = sys.edge_point(vals, eta, t)
                            if z_mid == zb:
                                out = finish(_pv2_from_same_z_points(inst, y_mid, yb))
                                if out:
                                    return out
        for basis, _ in (va, vb):
            out = pv1_candidates(basis)
            if out:
                return out
        raise UnmappableCert(f"UV3 {c} yielded no violation")

    if c.kind in ("R2", "UV1"):
        raise UnmappableCert("potential never decreases along valid edges of the Lemke line")

    raise UnmappableCert(f"unexpected certificate {c.kind}")

"""Reductions into and out of OPDC: USO -> OPDC, PL-Contraction -> OPDC
(with the kappa grid sizing), OPDC -> UniqueForwardEOPL, plus map-backs.

The OPDC -> UFEOPL vertices are surface tuples (p_0, ..., p_d): position
i holds the most recent point visited on the i-surface (all directions
zero in dimensions 0..i-1), or a dash.  Two validity rules are tightened
relative to the obvious reading of the construction, both needed to keep
the image line unique on violation-free sources:

  * a witness at a non-minimal position must point strictly up in its
    next dimension (a zero there would let stale witnesses coexist with
    the point they should have committed past);
  * a tuple with position d occupied is the terminal form and must be
    dash everywhere else.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from .problems import (
    DOWN,
    UP,
    ZERO,
    Certificate,
    ContractionInstance,
    LineInstance,
    OpdcInstance,
    UnmappableCert,
    UsoInstance,
    cert,
    verify_contraction,
    verify_opdc,
    verify_uso,
)
from .rational import ceil_log2


# ---------------------------------------------------------------------------
# USO -> OPDC

def uso_to_opdc(inst: UsoInstance) -> OpdcInstance:
    """Grid {0,1}^n; directions follow the orientation: zero where the
    edge points in, otherwise toward the neighbour; dash vertices are
    all-zero."""

    def direction(i, p):
        v = sum(bit << j for j, bit in enumerate(p))
        o = inst.orient(v)
        if o is None:
            return ZERO
        if o >> i & 1 == 0:
            return ZERO
        return UP if p[i] == 0 else DOWN

    return OpdcInstance(widths=(1,) * inst.n, direction=direction)


def map_back_uso(inst: UsoInstance, c: Certificate) -> Certificate:
    """O1 -> US1/USV1; OV1, OV2 -> USV2; OV3 never occurs."""

    def vid(p):
        return sum(bit << j for j, bit in enumerate(p))

    if c.kind == "O1":
        v = vid(c.p)
        out = cert("USV1", v=v) if inst.orient(v) is None else cert("US1", v=v)
    elif c.kind in ("OV1", "OV2"):
        v, u = vid(c.p), vid(c.q)
        for cand in (cert("USV1", v=v), cert("USV1", v=u), cert("USV2", v=v, u=u)):
            if verify_uso(inst, cand):
                return cand
        raise UnmappableCert(f"{c} gave no USO violation")
    else:
        raise UnmappableCert("OV3 cannot occur on USO-derived instances")
    if not verify_uso(inst, out):
        raise UnmappableCert(f"map-back of {c} failed verification")
    return out


# ---------------------------------------------------------------------------
# PL-Contraction -> OPDC

def compute_kappa(circuit) -> tuple:
    """Closed-form per-dimension grid exponents
    kappa_i = (d-i+1)((5n+2) log n + n + (4n+2) b(M) + 1) + b(q)
    with log = ceil log2 and (n, b(M), b(q)) measured from the induced
    LCP.  Monotone non-increasing in i."""
    from .circuits import measure

    stats = measure(circuit)
    n, bm, bq = stats["n"], stats["bM"], stats["bq"]
    d = circuit.d
    inner = (5 * n + 2) * ceil_log2(n) + n + (4 * n + 2) * bm + 1
    return tuple((d - i + 1) * inner + bq for i in range(1, d + 1))


def contraction_to_opdc(inst: ContractionInstance, kappa=None) -> OpdcInstance:
    """Grid widths k_i = 2^kappa_i; directions follow the sign of
    f(p')_i - p'_i at the mapped point p' = (p_i / k_i)."""
    kappa = tuple(kappa) if kappa is not None else inst.effective_kappa()
    widths = tuple((1 << k) for k in kappa)
    cache: dict[tuple, list] = {}

    def direction(i, p):
        if p not in cache:
            x = [Fraction(p[j], widths[j]) for j in range(len(widths))]
            fx = inst.f(x)
            cache[p] = [fx[j] - x[j] for j in range(len(widths))]
        diff = cache[p][i]
        if diff > 0:
            return UP
        if diff < 0:
            return DOWN
        return ZERO

    return OpdcInstance(widths=widths, direction=direction)


def map_back_contraction(inst: ContractionInstance, view: OpdcInstance, c: Certificate) -> Certificate:
    """O1 -> CM1, OV1 -> CMV1, OV2 -> CMV3, OV3 -> CMV2."""
    widths = view.widths

    def to_box(p):
        return [Fraction(p[j], widths[j]) for j in range(len(widths))]

    if c.kind == "O1":
        out = cert("CM1", x=to_box(c.p))
    elif c.kind == "OV1":
        out = cert("CMV1", x=to_box(c.p), y=to_box(c.q))
    elif c.kind == "OV2":
        out = cert("CMV3", level=c.level, x=to_box(c.p), y=to_box(c.q))
    elif c.kind == "OV3":
        out = cert("CMV2", x=to_box(c.p))
    else:
        raise UnmappableCert(f"unexpected OPDC certificate {c.kind}")
    if not verify_contraction(inst, out):
        raise UnmappableCert(f"map-back of {c} failed verification")
    return out


# ---------------------------------------------------------------------------
# OPDC -> UniqueForwardEOPL (surface tuples)

DASH = None


class OpdcLineView:
    """Lazy UFEOPL instance whose vertices encode surface tuples."""

    def __init__(self, inst: OpdcInstance):
        self.inst = inst
        self.d = inst.d
        self.widths = inst.widths
        self.coord_bits = [max(1, ceil_log2(k + 1)) for k in inst.widths]
        self.entry_bits = 1 + sum(self.coord_bits)
        self.nbits = (self.d + 1) * self.entry_bits
        # Weight base for the lexicographic potential: digits are
        # coordinates + 1, so strictly below max(k) + 2.
        self.base = max(inst.widths) + 2
        self.m_pot = ceil_log2(self.base ** self.d) + 1
        start = ((0,) * self.d,) + (DASH,) * self.d
        self._start_raw = self._encode_raw(start)

    # -- encoding ------------------------------------------------------------
    def _encode_raw(self, tup) -> int:
        word = 0
        shift = 0
        for entry in tup:
            if entry is not DASH:
                word |= 1 << shift
                off = shift + 1
                for j, bits in enumerate(self.coord_bits):
                    word |= entry[j] << off
                    off += bits
            shift += self.entry_bits
        return word

    def encode(self, tup) -> int:
        # XOR against the start tuple's raw code so the start maps to 0^n.
        return self._encode_raw(tup) ^ self._start_raw

    def decode(self, code: int):
        """Tuple for a code, or None when any coordinate is off-grid."""
        raw = code ^ self._start_raw
        out = []
        shift = 0
        for _ in range(self.d + 1):
            if raw >> shift & 1:
                off = shift + 1
                coords = []
                for j, bits in enumerate(self.coord_bits):
                    v = (raw >> off) & ((1 << bits) - 1)
                    if v > self.widths[j]:
                        return None
                    coords.append(v)
                    off += bits
                out.append(tuple(coords))
            else:
                off = shift + 1
                for bits in self.coord_bits:
                    if (raw >> off) & ((1 << bits) - 1):
                        return None  # dash entries carry zero coordinates
                    off += bits
                out.append(DASH)
            shift += self.entry_bits
        return tuple(out)

    # -- validity ------------------------------------------------------------
    def is_vertex_tuple(self, tup) -> bool:
        d, D = self.d, self.inst.D
        present = [i for i in range(d + 1) if tup[i] is not DASH]
        if not present:
            return False
        if tup[d] is not DASH and len(present) > 1:
            return False
        lowest = present[0]
        for i in present:
            p = tup[i]
            for j in range(min(i, d)):
                if D(j, p) != ZERO:
                    return False
            if i < d:
                di = D(i, p)
                if i == lowest:
                    if di == DOWN:
                        return False
                elif di != UP:
                    return False
            for j in range(i + 1, d):
                if tup[j] is DASH:
                    if p[j] != 0:
                        return False
                elif p[j] != tup[j][j] + 1:
                    return False
        return True

    # -- successor rules -------------------------------------------------------
    def successor_tuple(self, tup):
        """S on tuples; returns the input for self-loops."""
        d, D = self.d, self.inst.D
        i = next((k for k in range(d + 1) if tup[k] is not DASH), None)
        if i is None or not self.is_vertex_tuple(tup):
            return tup
        if i == d:
            return tup  # terminal: the solution sits at its predecessor
        p = tup[i]
        if D(i, p) == ZERO:
            new = list(tup)
            new[i] = DASH
            new[i + 1] = p
            if i + 1 == d:
                new = [DASH] * d + [p]
            return tuple(new)
        if i > 0:
            if p[i] + 1 > self.widths[i]:
                return tup  # stuck at the boundary: OV3
            q = tuple(0 if j < i else (p[i] + 1 if j == i else p[j]) for j in range(d))
            new = list(tup)
            new[0] = q
            return tuple(new)
        if p[0] + 1 > self.widths[0]:
            return tup
        q = (p[0] + 1,) + p[1:]
        return (q,) + tup[1:]

    def successor(self, code: int) -> int:
        tup = self.decode(code)
        if tup is None:
            return code
        nxt = self.successor_tuple(tup)
        return code if nxt == tup else self.encode(nxt)

    def potential(self, code: int) -> int:
        tup = self.decode(code)
        if tup is None or not self.is_vertex_tuple(tup):
            return 0
        raw = 0
        for j in range(self.d):
            digit = 0 if tup[j] is DASH else tup[j][j] + 1
            raw += digit * self.base**j
        return max(0, raw - 1)  # the start tuple's raw potential is 1

    def line_instance(self) -> LineInstance:
        return LineInstance(
            n=self.nbits,
            successor=self.successor,
            potential=self.potential,
            flavor="ufeopl",
            m_pot=self.m_pot,
            vertex_iter=self.enumerate_codes,
        )

    def enumerate_codes(self):
        """All codes of valid vertex tuples (desk scale only)."""
        pts = list(self.inst.points())
        options = [pts + [DASH]] * (self.d + 1)
        out = []
        for tup in product(*options):
            if self.is_vertex_tuple(tup):
                out.append(self.encode(tup))
        return out


def opdc_to_ufeopl(inst: OpdcInstance) -> tuple[LineInstance, OpdcLineView]:
    view = OpdcLineView(inst)
    return view.line_instance(), view


# -- map-back ----------------------------------------------------------------

def _column_search(inst: OpdcInstance, dim: int, zero_pt, up_pt) -> Certificate | None:
    """Both points lie in one line of the grid along `dim` (a 1-slice when
    dim = 0); zero_pt has direction zero, up_pt sits above it pointing up.
    Binary search for a second zero (OV1), an adjacent down-over-up pair
    (OV2), or up at the top boundary (OV3).  Only valid for dim = 0, where
    every grid point is trivially on the 0-surface."""
    if dim != 0:
        return None

    def at(t):
        return (t,) + tuple(up_pt[1:])

    k = inst.widths[0]
    top = at(k)
    if inst.D(0, top) == UP:
        return cert("OV3", level=1, p=top)
    if inst.D(0, top) == ZERO and top != zero_pt:
        return cert("OV1", level=1, p=zero_pt, q=top)
    lo, hi = up_pt[0], k
    # invariant: D(lo) = up, D(hi) in {down, zero-with-OV1-return}
    while hi - lo > 1:
        mid = (lo + hi) // 2
        dmid = inst.D(0, at(mid))
        if dmid == ZERO:
            return cert("OV1", level=1, p=zero_pt, q=at(mid))
        if dmid == UP:
            lo = mid
        else:
            hi = mid
    if inst.D(0, at(hi)) == DOWN:
        return cert("OV2", level=1, p=at(hi), q=at(lo))
    return None


def _scan_for_violation(inst: OpdcInstance, budget: int = 1 << 16) -> Certificate | None:
    """Desk-scale fallback: exhaustively find any OPDC violation."""
    from .solvers import brute_force

    try:
        for c in brute_force(inst, budget=budget):
            if c.kind != "O1":
                return c
    except Exception:
        return None
    return None


def map_back_opdc(inst: OpdcInstance, view: OpdcLineView, c: Certificate) -> Certificate:
    """UF1 -> O1/OV2/OV3 by which successor rule stalled; UFV1 -> OV1 via
    the largest differing tuple position (with a boundary OV3, a
    column binary search, or a desk-scale scan covering the remaining
    shapes)."""
    d, D = view.d, inst.D

    def ensure(out):
        if out is not None and verify_opdc(inst, out):
            return out
        return None

    if c.kind == "UF1":
        x = view.decode(c.x)
        if x is None or not view.is_vertex_tuple(x):
            raise UnmappableCert("UF1 witness is not a vertex")
        y = view.successor_tuple(x)
        i = next(k for k in range(d + 1) if x[k] is not DASH)
        if y != x and view.is_vertex_tuple(y):
            iy = next(k for k in range(d + 1) if y[k] is not DASH)
            if iy == d:
                out = ensure(cert("O1", p=y[d]))
                if out:
                    return out
            if view.successor_tuple(y) == y and iy < d:
                # valid self-loop: stuck at the boundary going up
                p = y[iy]
                out = ensure(cert("OV3", level=iy + 1, p=p))
                if out:
                    return out
        if y == x:
            # x itself stalled at the grid boundary
            p = x[i]
            out = ensure(cert("OV3", level=i + 1, p=p))
            if out:
                return out
        else:
            p = x[i]
            if not view.is_vertex_tuple(y):
                if D(i, p) == ZERO and i + 1 <= d:
                    # rule 2 fired and the moved witness is rejected:
                    # D_{i+1}(p) = down against the old witness or 0-edge
                    if i + 1 < d and D(i + 1, p) == DOWN:
                        if x[i + 1] is not DASH:
                            out = ensure(cert("OV2", level=i + 2, p=p, q=x[i + 1]))
                            if out:
                                return out
                        out = ensure(cert("OV3", level=i + 2, p=p))
                        if out:
                            return out
                else:
                    # rules 3/4 fired and the advanced point q looks down
                    q = y[0]
                    if i > 0:
                        out = ensure(cert("OV3", level=1, p=q))
                        if out:
                            return out
                    else:
                        out = ensure(cert("OV2", level=1, p=q, q=p))
                        if out:
                            return out
        scan = _scan_for_violation(inst)
        if scan is not None:
            return scan
        raise UnmappableCert(f"UF1 {c} gave no OPDC certificate")

    if c.kind == "UFV1":
        x = view.decode(c.x)
        y = view.decode(c.y)
        if x is None or y is None:
            raise UnmappableCert("UFV1 endpoints do not decode")
        diff = [k for k in range(d + 1) if x[k] != y[k]]
        if diff:
            j = max(diff)
            px, py = x[j], y[j]
            if px is not DASH and py is not DASH:
                if j == d or px[j] == py[j]:
                    out = ensure(cert("OV1", level=min(j, d), p=px, q=py))
                    if out:
                        return out
                else:
                    lo_pt, hi_pt = (px, py) if px[j] < py[j] else (py, px)
                    if D(j, lo_pt) == ZERO and D(j, hi_pt) == ZERO:
                        out = ensure(cert("OV1", level=j + 1, p=lo_pt, q=hi_pt))
                        if out:
                            return out
                    if hi_pt[j] == inst.widths[j] and D(j, hi_pt) == UP:
                        out = ensure(cert("OV3", level=j + 1, p=hi_pt))
                        if out:
                            return out
                    if j == 0 and D(0, lo_pt) == ZERO and D(0, hi_pt) == UP:
                        out = ensure(_column_search(inst, 0, lo_pt, hi_pt))
                        if out:
                            return out
        scan = _scan_for_violation(inst)
        if scan is not None:
            return scan
        raise UnmappableCert(f"UFV1 {c} gave no OPDC certificate")

    raise UnmappableCert(f"unexpected certificate {c.kind}")

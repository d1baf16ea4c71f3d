"""Line-to-line reductions: EOML <-> EOPL, UFEOPL -> UFEOPL+1, the
reversible-pebbling reduction UFEOPL+1 -> UniqueEOPL, potential
normalization, and the hardness direction UniqueEOPL -> OPDC.

All images are lazy oracle views; map-backs are defensive: they build the
candidate certificates dictated by the construction's case analysis and
return the first that passes the source verifier.
"""

from __future__ import annotations

from .problems import (
    DOWN,
    UP,
    ZERO,
    Certificate,
    LineInstance,
    OpdcInstance,
    UnmappableCert,
    cert,
    verify_line,
)


class TrivialInstance(Exception):
    """The source instance is solved by 0^n or S(0^n); carries the answer."""

    def __init__(self, certificate):
        super().__init__(f"trivial instance: {certificate}")
        self.certificate = certificate


def _first_verifying(inst: LineInstance, candidates) -> Certificate:
    for c in candidates:
        try:
            if verify_line(inst, c):
                return c
        except Exception:
            continue
    raise UnmappableCert("no candidate certificate verified on the source")


# ---------------------------------------------------------------------------
# EOML -> EOPL  (one extra bit; dummies self-loop)

class EomlToEopl:
    def __init__(self, src: LineInstance):
        if src.flavor != "eoml":
            raise ValueError("source must be EOML")
        self.src = src
        self.nbits = src.n + 1
        self.m_pot = src.m_pot

    def _split(self, x):
        return x >> self.src.n, x & ((1 << self.src.n) - 1)

    def _join(self, b, u):
        return (b << self.src.n) | u

    def successor(self, x):
        b, u = self._split(x)
        if x == 0:
            return self._join(1, 0)
        if b == 0:
            return x
        if self.src.V(u) == 0:
            return x
        return self._join(1, self.src.S(u))

    def predecessor(self, x):
        b, u = self._split(x)
        if x == 0:
            return x
        if b == 0:
            return x
        if u == 0:
            return 0
        if self.src.V(u) == 0:
            return x
        return self._join(1, self.src.P(u))

    def potential(self, x):
        b, u = self._split(x)
        return 0 if b == 0 else self.src.V(u)

    def line_instance(self):
        return LineInstance(
            n=self.nbits,
            successor=self.successor,
            predecessor=self.predecessor,
            potential=self.potential,
            flavor="eopl",
            m_pot=self.m_pot,
        )

    def map_back(self, c: Certificate) -> Certificate:
        _, u = self._split(c.x)
        return _first_verifying(
            self.src, [cert("T1", x=u), cert("T2", x=u), cert("T3", x=u)]
        )


def eoml_to_eopl(src: LineInstance):
    view = EomlToEopl(src)
    return view.line_instance(), view


# ---------------------------------------------------------------------------
# EOPL -> EOML  (potential captured in the low bits)

class EoplToEoml:
    def __init__(self, src: LineInstance):
        if src.flavor != "eopl":
            raise ValueError("source must be EOPL")
        for x in (0, src.S(0)):
            for kind in ("R1", "R2"):
                c = cert(kind, x=x)
                if verify_line(src, c):
                    raise TrivialInstance(c)
        self.src = src
        self.m = src.m_pot
        self.nbits = src.n + self.m
        self.m_pot = src.m_pot
        self.u1 = src.S(0)
        self.u2 = src.S(self.u1)
        self.p2 = src.V(self.u2)

    def _split(self, x):
        return x >> self.m, x & ((1 << self.m) - 1)

    def _join(self, u, pi):
        return (u << self.m) | pi

    def successor(self, x):
        src = self.src
        u, pi = self._split(x)
        if (u == 0 and pi == 1) or u == self.u1:
            return x
        if x == 0:
            return self._join(self.u2, 2) if self.p2 == 2 else self._join(0, 2)
        if u == 0:
            if 2 <= pi < self.p2 - 1:
                return self._join(0, pi + 1)
            if pi == self.p2 - 1:
                return self._join(self.u2, self.p2)
            return x
        up = src.S(u)
        if src.P(up) != u or up == u:
            return x
        p, pp = src.V(u), src.V(up)
        if (pi == p == pp) or (pi == p and pp == p + 1) or (pi == p and pp == p - 1):
            return self._join(up, pp)
        if (pi < p <= pp) or (p <= pp <= pi) or (pi > p >= pp) or (p >= pp >= pi):
            return x
        if p < pp:
            if p <= pi < pp - 1:
                return self._join(u, pi + 1)
            if pi == pp - 1:
                return self._join(up, pp)
        else:
            if p >= pi > pp + 1:
                return self._join(u, pi - 1)
            if pi == pp + 1:
                return self._join(up, pp)
        return x

    def predecessor(self, x):
        src = self.src
        u, pi = self._split(x)
        if (u == 0 and pi == 1) or u == self.u1:
            return x
        if u == 0:
            if pi == 0:
                return 0
            if pi < self.p2 and pi not in (1, 2):
                return self._join(0, pi - 1)
            if pi < self.p2 and pi == 2:
                return 0
        if u == self.u2 and pi == self.p2:
            return 0 if self.p2 == 2 else self._join(0, self.p2 - 1)
        if pi == src.V(u) and u != 0:
            w = src.P(u)
            if src.S(w) != u or w == u:
                return x
            p, pw = src.V(u), src.V(w)
            if p == pw:
                return self._join(w, pw)
            return self._join(w, p - 1) if pw < p else self._join(w, p + 1)
        up = src.S(u)
        if src.P(up) != u or up == u:
            return x
        p, pp = src.V(u), src.V(up)
        if (pp == p) or (pi < p < pp) or (p < pp <= pi) or (pi > p > pp) or (p > pp >= pi):
            return x
        if p < pp and p < pi <= pp - 1:
            return self._join(u, pi - 1)
        if p > pp and p > pi >= pp + 1:
            return self._join(u, pi + 1)
        return x

    def potential(self, x):
        if x == 0:
            return 1
        if self.successor(x) == x and self.predecessor(x) == x:
            return 0
        _, pi = self._split(x)
        return pi

    def line_instance(self):
        return LineInstance(
            n=self.nbits,
            successor=self.successor,
            predecessor=self.predecessor,
            potential=self.potential,
            flavor="eoml",
            m_pot=self.m_pot,
        )

    def map_back(self, c: Certificate) -> Certificate:
        src = self.src
        u, _ = self._split(c.x)
        cands = [cert("R1", x=u), cert("R2", x=u)]
        try:
            w = src.P(u)
            cands += [cert("R1", x=w), cert("R2", x=w), cert("R2", x=src.P(w))]
        except Exception:
            pass
        return _first_verifying(src, cands)


def eopl_to_eoml(src: LineInstance):
    view = EoplToEoml(src)
    return view.line_instance(), view


# ---------------------------------------------------------------------------
# UFEOPL -> UFEOPL+1  (chain insertion)

class UfeoplToPlus1:
    def __init__(self, src: LineInstance):
        if src.flavor != "ufeopl":
            raise ValueError("source must be UFEOPL")
        self.src = src
        self.iw = src.m_pot  # chain index width: gaps are < 2^m_pot
        self.nbits = src.n + self.iw
        self.m_pot = src.m_pot + 1

    def _split(self, x):
        return x >> self.iw, x & ((1 << self.iw) - 1)

    def _join(self, v, i):
        return (v << self.iw) | i

    def successor(self, x):
        src = self.src
        v, i = self._split(x)
        sv = src.S(v)
        if sv == v:
            return x
        gap = src.V(sv) - src.V(v)
        if gap > i + 1:
            return self._join(v, i + 1)
        if gap == i + 1:
            return self._join(sv, 0)
        return x

    def potential(self, x):
        v, i = self._split(x)
        return self.src.V(v) + i

    def line_instance(self):
        return LineInstance(
            n=self.nbits,
            successor=self.successor,
            potential=self.potential,
            flavor="ufeoplplus1",
            m_pot=self.m_pot,
        )

    def map_back(self, c: Certificate) -> Certificate:
        src = self.src
        if c.kind == "UFP1":
            v, _ = self._split(c.x)
            return _first_verifying(src, [cert("UF1", x=v), cert("UF1", x=src.S(v))])
        if c.kind == "UFPV1":
            v, _ = self._split(c.x)
            u, _ = self._split(c.y)
            return _first_verifying(
                src, [cert("UFV1", x=v, y=u), cert("UFV1", x=u, y=v)]
            )
        raise UnmappableCert(f"unexpected certificate {c.kind}")


def ufeopl_to_plus1(src: LineInstance):
    view = UfeoplToPlus1(src)
    return view.line_instance(), view


# ---------------------------------------------------------------------------
# UFEOPL+1 -> UniqueEOPL  (reversible pebbling)

class PebblingView:
    """Vertices are pebbling configurations ((v_1, a_1), ..., (v_np, a_np))
    of the optimal strategy; the potential is the move index.  The
    strategy step is recovered from the configuration alone by structural
    recursion on the highest pebble, which makes both circuits stateless.
    """

    def __init__(self, src: LineInstance):
        if src.flavor != "ufeoplplus1":
            raise ValueError("source must be UFEOPL+1")
        self.src = src
        self.n_peb = max(1, src.m_pot)
        self.m = src.n
        self.pw = max(1, src.m_pot)  # position width
        self.entry = 1 + self.m + self.pw
        self.nbits = self.n_peb * self.entry
        self._t_memo = {1: 1}
        self.total = self._t(self.n_peb)
        self.m_pot = max(1, self.total.bit_length())

    def _t(self, n):
        if n not in self._t_memo:
            self._t_memo[n] = 3 * self._t(n - 1) + 1
        return self._t_memo[n]

    # -- configs ---------------------------------------------------------------
    def decode(self, code):
        """List of (v, a) pairs or None per pebble; None for junk codes."""
        out = []
        for i in range(self.n_peb):
            chunk = (code >> (i * self.entry)) & ((1 << self.entry) - 1)
            if chunk & 1:
                v = (chunk >> 1) & ((1 << self.m) - 1)
                a = chunk >> (1 + self.m)
                out.append((v, a))
            else:
                if chunk:
                    return None
                out.append(None)
        return out

    def encode(self, config):
        code = 0
        for i, entry in enumerate(config):
            if entry is not None:
                v, a = entry
                chunk = 1 | (v << 1) | (a << (1 + self.m))
                code |= chunk << (i * self.entry)
        return code

    def index_of(self, config):
        """Move count of a strategy state, or None for non-states."""
        placed = {i + 1: entry[1] for i, entry in enumerate(config) if entry is not None}
        return self._index(self.n_peb, 0, placed)

    def _index(self, n, base, placed):
        if not placed:
            return 0
        if n == 1:
            pos = placed.get(1)
            if pos == base + 1 and len(placed) == 1:
                return 1
            return None
        t1 = self._t(n - 1)
        half = 1 << (n - 1)
        pn = placed.get(n)
        sub = {k: v for k, v in placed.items() if k != n}
        if pn is None:
            if any(v >= base + half for v in sub.values()):
                return None
            return self._index(n - 1, base, sub)
        if pn != base + half:
            return None
        if not sub:
            return 2 * t1 + 1
        if all(v < base + half for v in sub.values()):
            ts = self._index(n - 1, base, sub)
            return None if ts is None else t1 + 1 + (t1 - ts)
        if all(v > base + half for v in sub.values()):
            ts = self._index(n - 1, base + half, sub)
            return None if ts is None else 2 * t1 + 1 + ts
        return None

    def move(self, t):
        """The t-th move (0-indexed) of the optimal strategy: a tuple
        (op, pebble, position)."""
        return self._move(self.n_peb, 0, t)

    def _move(self, n, base, t):
        if n == 1:
            return ("place", 1, base + 1)
        t1 = self._t(n - 1)
        half = 1 << (n - 1)
        if t < t1:
            return self._move(n - 1, base, t)
        if t == t1:
            return ("place", n, base + half)
        if t < 2 * t1 + 1:
            rev = t - (t1 + 1)
            op, peb, pos = self._move(n - 1, base, t1 - 1 - rev)
            return ("remove" if op == "place" else "place", peb, pos)
        return self._move(n - 1, base + half, t - (2 * t1 + 1))

    def is_vertex_config(self, config):
        if config is None:
            return False
        src = self.src
        for entry in config:
            if entry is None:
                continue
            v, a = entry
            if src.V(v) != a or src.S(v) == v:
                return False
        return self.index_of(config) is not None

    # -- moves against the source line ------------------------------------------
    def _label_at(self, config, pos):
        if pos == 0:
            return 0  # the start vertex carries a virtual pebble
        for entry in config:
            if entry is not None and entry[1] == pos:
                return entry[0]
        return None

    def _step_vertex(self, config, pos):
        """Vertex that the strategy wants at `pos`: the successor of the
        pebble at pos-1.  None when the source line cannot supply it."""
        src = self.src
        jv = self._label_at(config, pos - 1)
        if jv is None:
            return None
        u = src.S(jv)
        if u == jv or src.V(u) != pos or src.S(u) == u:
            return None
        return u

    def _apply(self, config, mv):
        """Next config or None when the move stalls against the line."""
        op, peb, pos = mv
        config = list(config)
        if op == "place":
            u = self._step_vertex(config, pos)
            if u is None:
                return None
            config[peb - 1] = (u, pos)
            return config
        entry = config[peb - 1]
        u = self._step_vertex(config, pos)
        if u is None or entry is None or entry[0] != u:
            return None
        config[peb - 1] = None
        return config

    def successor(self, code):
        config = self.decode(code)
        if not self.is_vertex_config(config):
            return code
        t = self.index_of(config)
        if t >= self.total:
            return code
        nxt = self._apply(config, self.move(t))
        return code if nxt is None else self.encode(nxt)

    def predecessor(self, code):
        config = self.decode(code)
        if not self.is_vertex_config(config):
            return code
        t = self.index_of(config)
        if t == 0:
            return code
        op, peb, pos = self.move(t - 1)
        undo = ("remove" if op == "place" else "place", peb, pos)
        prev = self._apply(config, undo)
        return code if prev is None else self.encode(prev)

    def potential(self, code):
        config = self.decode(code)
        if not self.is_vertex_config(config):
            return 0
        return self.index_of(config)

    def line_instance(self):
        return LineInstance(
            n=self.nbits,
            successor=self.successor,
            predecessor=self.predecessor,
            potential=self.potential,
            flavor="ueopl",
            m_pot=self.m_pot,
            vertex_iter=self.enumerate_codes,
        )

    def enumerate_codes(self):
        """All valid configs: strategy states crossed with the potential
        preimages of their positions (desk scale only)."""
        src = self.src
        if src.vertex_iter is not None:
            ids = list(src.vertex_iter())
        else:
            ids = list(range(src.size))
        by_pot = {}
        for v in ids:
            if src.S(v) != v:
                by_pot.setdefault(src.V(v), []).append(v)
        positions = [dict()]
        state = {}
        for t in range(self.total):
            op, peb, pos = self.move(t)
            state = dict(state)
            if op == "place":
                state[peb] = pos
            else:
                del state[peb]
            positions.append(state)
        from itertools import product

        seen = set()
        out = []
        for state in positions:
            pebs = sorted(state)
            pools = [by_pot.get(state[p], []) for p in pebs]
            if any(not pool for pool in pools):
                continue
            for labels in product(*pools):
                config = [None] * self.n_peb
                for p, v in zip(pebs, labels):
                    config[p - 1] = (v, state[p])
                code = self.encode(config)
                if code not in seen:
                    seen.add(code)
                    out.append(code)
        return out

    # -- map-back ---------------------------------------------------------------
    def _stall_candidates(self, config, mv):
        src = self.src
        op, peb, pos = mv
        cands = []
        jv = self._label_at(config, pos - 1)
        if jv is not None:
            cands.append(cert("UFP1", x=jv))
            u = src.S(jv)
            if op == "remove" and config[peb - 1] is not None:
                v_peb = config[peb - 1][0]
                cands.append(cert("UFPV1", x=v_peb, y=u))
                cands.append(cert("UFPV1", x=u, y=v_peb))
        for entry in config:
            if entry is not None:
                cands.append(cert("UFP1", x=entry[0]))
        return cands

    def map_back(self, c: Certificate) -> Certificate:
        src = self.src
        if c.kind in ("U1", "UV2"):
            config = self.decode(c.x)
            if not self.is_vertex_config(config):
                raise UnmappableCert("certificate vertex is not a config")
            t = self.index_of(config)
            if c.kind == "U1":
                if t >= self.total:
                    top = max((e for e in config if e is not None), key=lambda e: e[1])
                    return _first_verifying(src, [cert("UFP1", x=top[0])])
                return _first_verifying(src, self._stall_candidates(config, self.move(t)))
            if t == 0:
                raise UnmappableCert("UV2 at the start config")
            op, peb, pos = self.move(t - 1)
            undo = ("remove" if op == "place" else "place", peb, pos)
            return _first_verifying(src, self._stall_candidates(config, undo))
        if c.kind == "UV3":
            ca = self.decode(c.x)
            cb = self.decode(c.y)
            if ca is None or cb is None:
                raise UnmappableCert("UV3 endpoints do not decode")
            cands = []
            for ea, eb in zip(ca, cb):
                if ea is not None and eb is not None and ea[0] != eb[0]:
                    cands.append(cert("UFPV1", x=ea[0], y=eb[0]))
            return _first_verifying(src, cands)
        if c.kind == "UV1":
            raise UnmappableCert("the pebbling potential increases by exactly 1")
        raise UnmappableCert(f"unexpected certificate {c.kind}")


def plus1_to_ueopl(src: LineInstance):
    view = PebblingView(src)
    return view.line_instance(), view


# ---------------------------------------------------------------------------
# Potential normalization (every edge +1; ends at potential 2^n - 1)

class NormalizeView:
    def __init__(self, src: LineInstance):
        if src.flavor != "ueopl":
            raise ValueError("source must be UniqueEOPL")
        self.src = src
        self.iw = src.m_pot + 1  # 2^iw exceeds any line length
        self.top = (1 << self.iw) - 1
        self.nbits = src.n + self.iw
        self.m_pot = self.iw

    def _split(self, x):
        return x >> self.iw, x & ((1 << self.iw) - 1)

    def _join(self, v, i):
        return (v << self.iw) | i

    def successor(self, x):
        src = self.src
        v, i = self._split(x)
        sv = src.S(v)
        if sv == v and src.P(v) == v:
            return x  # junk label
        if src.P(sv) != v or sv == v:  # v is an end of line: dummy tail
            tot = src.V(v) + i
            if tot > self.top:
                return x
            if tot == self.top:
                return 0  # makes x an end: P(0) = 0 != x
            return self._join(v, i + 1)
        gap = src.V(sv) - src.V(v)
        if gap > i + 1:
            return self._join(v, i + 1)
        if gap == i + 1:
            return self._join(sv, 0)
        return x

    def predecessor(self, x):
        src = self.src
        v, i = self._split(x)
        if x == 0:
            return 0
        sv = src.S(v)
        if sv == v and src.P(v) == v:
            return x
        if src.P(sv) != v or sv == v:
            tot = src.V(v) + i
            if tot > self.top:
                return x
            if i > 0:
                return self._join(v, i - 1)
        else:
            gap = src.V(sv) - src.V(v)
            if gap < i + 1:
                return x
            if i > 0:
                return self._join(v, i - 1)
        # i == 0: enter through the source predecessor's chain
        w = src.P(v)
        if w == v or src.S(w) != v or src.V(v) <= src.V(w):
            return x
        return self._join(w, src.V(v) - src.V(w) - 1)

    def potential(self, x):
        v, i = self._split(x)
        return self.src.V(v) + i

    def line_instance(self):
        return LineInstance(
            n=self.nbits,
            successor=self.successor,
            predecessor=self.predecessor,
            potential=self.potential,
            flavor="ueopl",
            m_pot=self.m_pot,
        )

    def map_back(self, c: Certificate) -> Certificate:
        src = self.src
        if c.kind in ("U1", "UV1", "UV2"):
            v, _ = self._split(c.x)
            kinds = {"U1": ["U1"], "UV1": ["UV1", "U1"], "UV2": ["UV2", "UV1", "U1"]}[c.kind]
            cands = [cert(k, x=v) for k in kinds]
            cands.append(cert("UV1", x=src.P(v)))
            return _first_verifying(src, cands)
        if c.kind == "UV3":
            v, _ = self._split(c.x)
            u, _ = self._split(c.y)
            return _first_verifying(
                src,
                [
                    cert("UV3", x=v, y=u),
                    cert("UV3", x=u, y=v),
                    cert("U1", x=v),
                    cert("U1", x=u),
                ],
            )
        raise UnmappableCert(f"unexpected certificate {c.kind}")


def normalize_potentials(src: LineInstance):
    view = NormalizeView(src)
    return view.line_instance(), view


# ---------------------------------------------------------------------------
# UniqueEOPL -> OPDC  (hardness direction)

class UeoplToOpdc:
    """Source must be normalized: every valid edge raises the potential by
    exactly 1 and x is a U1 iff V(x) = 2^n_blocks - 1.  Points of the OPDC
    instance are n_blocks-tuples of m-bit vertex labels; block b occupies
    dimensions b*m .. b*m + m - 1.
    """

    def __init__(self, src: LineInstance, n_blocks: int | None = None):
        if src.flavor != "ueopl":
            raise ValueError("source must be UniqueEOPL")
        self.src = src
        self.m = src.n
        self.n_blocks = n_blocks if n_blocks is not None else src.m_pot
        self.dims = self.m * self.n_blocks
        self._decode_cache: dict[tuple, tuple] = {}

    def blocks_of(self, p):
        m = self.m
        return [
            sum(p[b * m + t] << t for t in range(m)) for b in range(self.n_blocks)
        ]

    def _chain(self, blocks):
        """Process blocks top-down; per block b return (lo, start) of the
        sub-instance before the block's half is chosen, and finally the
        decoded vertex."""
        src = self.src
        lo, start = 0, 0
        states = [None] * self.n_blocks
        for b in range(self.n_blocks - 1, -1, -1):
            states[b] = (lo, start)
            half = 1 << b
            if src.V(blocks[b]) - lo == half:
                lo += half
                start = blocks[b]
        return states, start

    def decode(self, p):
        p = tuple(p)
        if p not in self._decode_cache:
            blocks = self.blocks_of(p)
            states, start = self._chain(blocks)
            self._decode_cache[p] = (tuple(states), start)
        return self._decode_cache[p]

    def opdc_instance(self) -> OpdcInstance:
        src = self.src

        def direction(j, p):
            b, t = divmod(j, self.m)
            blocks = self.blocks_of(p)
            states, dec = self.decode(p)
            lo, _ = states[b]
            half = 1 << b
            if src.V(blocks[b]) - lo == half:
                return ZERO
            if src.V(dec) - lo == half - 1:
                u = src.S(dec)
                bit = u >> t & 1
                if p[j] == 0 and bit == 1:
                    return UP
                if p[j] == 1 and bit == 0:
                    return DOWN
                return ZERO
            return DOWN if p[j] == 1 else ZERO

        return OpdcInstance(widths=(1,) * self.dims, direction=direction)

    def map_back(self, c: Certificate) -> Certificate:
        src = self.src
        if c.kind == "O1":
            _, dec = self.decode(c.p)
            return _first_verifying(src, [cert("U1", x=dec)])
        if c.kind in ("OV1", "OV2"):
            p, q = tuple(c.p), tuple(c.q)
            bp, bq = self.blocks_of(p), self.blocks_of(q)
            _, dp = self.decode(p)
            _, dq = self.decode(q)
            anchors_p = [dp, src.S(dp)]
            anchors_q = [dq, src.S(dq)]
            diff = [b for b in range(self.n_blocks) if bp[b] != bq[b]]
            if diff:
                b_top = max(diff)
                anchors_p.append(bp[b_top])
                anchors_q.append(bq[b_top])
            cands = []
            for a in anchors_p:
                for b in anchors_q:
                    if a != b:
                        cands.append(cert("UV3", x=a, y=b))
                        cands.append(cert("UV3", x=b, y=a))
            cands += [cert("U1", x=dp), cert("U1", x=dq)]
            return _first_verifying(src, cands)
        raise UnmappableCert("OV3 cannot occur on images of this reduction")


def ueopl_to_opdc(src: LineInstance, n_blocks: int | None = None):
    view = UeoplToOpdc(src, n_blocks=n_blocks)
    return view.opdc_instance(), view

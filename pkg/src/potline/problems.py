"""Search-problem instances, the certificate taxonomy, and exact verifiers.

Instances wrap oracles (explicit tables in tests, lazy reduction views in
production); verifiers accept or reject a candidate certificate using only
oracle queries and exact arithmetic, so they work on instances that are
exponentially large.

Conventions:
  * line-problem vertices are ints in [0, 2^n); a bit-string x with
    S(x) = x is a non-vertex (self-loop) in every flavor;
  * grid points are int tuples; dimensions are 0-based everywhere (the
    level field of a slice certificate counts its free dimensions
    0..level-1);
  * end-of-line conditions are checked in raw form, e.g. U1 is literally
    P(S(x)) != x, which both excludes full self-loops and catches stalled
    vertices whose successor is a self-loop.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .rational import Mat, Vec, frac, frac_str, lp_pow, mat

UP, DOWN, ZERO = "up", "down", "zero"

FLAVORS = ("endofline", "sinkofdag", "eopl", "ueopl", "eoml", "ufeopl", "ufeoplplus1")


class VariantMismatch(ValueError):
    """Certificate kind does not apply to this instance."""


class OffGrid(ValueError):
    """A point lies outside the instance's grid."""


class UnmappableCert(RuntimeError):
    """A verified target certificate could not be mapped back; indicates a
    bug in a reduction (or an instance beyond desk-scale fallbacks)."""


@dataclass(frozen=True)
class Certificate:
    kind: str
    data: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.data[name]
        except KeyError:
            raise AttributeError(name) from None

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self.data.items())
        return f"{self.kind}({inner})"

    def __hash__(self):
        return hash((self.kind, repr(sorted(self.data.items(), key=lambda kv: kv[0]))))

    def __eq__(self, other):
        return (
            isinstance(other, Certificate)
            and self.kind == other.kind
            and self.data == other.data
        )


def cert(kind: str, **data) -> Certificate:
    return Certificate(kind, data)


LINE_KINDS = {
    "endofline": {"E1", "E2"},
    "sinkofdag": {"S1"},
    "eopl": {"R1", "R2"},
    "ueopl": {"U1", "UV1", "UV2", "UV3"},
    "eoml": {"T1", "T2", "T3"},
    "ufeopl": {"UF1", "UFV1"},
    "ufeoplplus1": {"UFP1", "UFPV1"},
}


# ---------------------------------------------------------------------------
# Instances

@dataclass
class LineInstance:
    """Successor/predecessor/potential graph over n-bit strings.

    One type serves every line flavor; `predecessor` may be None for the
    forward-only flavors and `potential` is required for all potential
    flavors.  `vertex_iter` optionally enumerates the (reachable or valid)
    vertex ids for desk-scale brute force when 2^n is too large.
    """

    n: int
    successor: Callable[[int], int]
    potential: Optional[Callable[[int], int]] = None
    predecessor: Optional[Callable[[int], int]] = None
    flavor: str = "eopl"
    m_pot: int = 0
    vertex_iter: Optional[Callable[[], "list[int]"]] = None

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor}")

    def S(self, x: int) -> int:
        return self.successor(x)

    def P(self, x: int) -> int:
        if self.predecessor is None:
            raise VariantMismatch(f"{self.flavor} has no predecessor oracle")
        return self.predecessor(x)

    def V(self, x: int) -> int:
        if self.potential is None:
            raise VariantMismatch(f"{self.flavor} has no potential oracle")
        return self.potential(x)

    @property
    def size(self) -> int:
        return 1 << self.n


def line_from_tables(n, s_table, p_table=None, v_table=None, flavor="eopl", m_pot=None):
    """Explicit-table instance; absent keys default to self-loop / 0."""
    s_table = dict(s_table)
    p_table = dict(p_table) if p_table is not None else None
    v_table = dict(v_table or {})
    if m_pot is None:
        m_pot = max(v_table.values(), default=0).bit_length() or 1
    return LineInstance(
        n=n,
        successor=lambda x: s_table.get(x, x),
        predecessor=(None if p_table is None else (lambda x: p_table.get(x, x))),
        potential=lambda x: v_table.get(x, 0),
        flavor=flavor,
        m_pot=m_pot,
    )


@dataclass
class OpdcInstance:
    """Grid widths (k_0..k_{d-1}) plus direction oracles D_i(p)."""

    widths: tuple
    direction: Callable[[int, tuple], str]

    @property
    def d(self) -> int:
        return len(self.widths)

    def check_point(self, p) -> tuple:
        p = tuple(p)
        if len(p) != self.d or any(not (0 <= p[i] <= self.widths[i]) for i in range(self.d)):
            raise OffGrid(f"{p} not on grid {self.widths}")
        return p

    def D(self, i: int, p) -> str:
        return self.direction(i, self.check_point(p))

    def points(self):
        from itertools import product

        return product(*[range(k + 1) for k in self.widths])


@dataclass
class UsoInstance:
    n: int
    orient: Callable[[int], Optional[int]]  # outmap bits, or None for dash


@dataclass
class LcpInstance:
    M: Mat
    q: Vec

    def __post_init__(self):
        self.M = mat(self.M)
        self.q = [frac(x) for x in self.q]
        if len(self.M) != len(self.q) or any(len(r) != len(self.q) for r in self.M):
            raise ValueError("LCP dimensions disagree")

    @property
    def d(self) -> int:
        return len(self.q)

    def w_of(self, y: Vec) -> Vec:
        return [sum((self.M[i][j] * y[j] for j in range(self.d)), self.q[i]) for i in range(self.d)]


@dataclass
class ContractionInstance:
    """Purported contraction map with factor c under the l_p norm.

    `func` is any exact rational evaluator; `circuit` additionally enables
    the exact grid machinery.  `kappa` overrides the per-dimension grid
    exponents (defaults to the closed-form bound computed from the
    circuit); `eps` is only used in approximate mode.
    """

    d: int
    c: Fraction
    p: int
    func: Callable[[Vec], Vec] = None
    circuit: object = None
    eps: Optional[Fraction] = None
    kappa: Optional[tuple] = None

    def __post_init__(self):
        self.c = frac(self.c)
        if not (0 < self.c < 1):
            raise ValueError("contraction factor must lie in (0, 1)")
        if self.p < 1:
            raise ValueError("norm index must be a positive integer")
        if self.func is None and self.circuit is None:
            raise ValueError("need a circuit or a black-box evaluator")
        if self.func is None:
            from .circuits import evaluate

            self.func = lambda x: evaluate(self.circuit, x)

    def f(self, x: Vec) -> Vec:
        return [Fraction(v) for v in self.func([Fraction(c) for c in x])]

    def effective_kappa(self) -> tuple:
        if self.kappa is not None:
            return tuple(self.kappa)
        if self.circuit is None:
            raise ValueError("kappa unavailable: no circuit and none supplied")
        from .reductions_opdc import compute_kappa

        return compute_kappa(self.circuit)


# ---------------------------------------------------------------------------
# Verifiers

def _in_box(x) -> bool:
    return all(0 <= v <= 1 for v in x)


def verify_line(inst: LineInstance, c: Certificate) -> bool:
    if c.kind not in LINE_KINDS[inst.flavor]:
        raise VariantMismatch(f"{c.kind} does not apply to {inst.flavor}")
    S, V = inst.S, inst.V
    k = c.kind
    if k in ("U1", "E1"):
        x = c.x
        return inst.P(S(x)) != x
    if k == "E2":
        x = c.x
        return x != 0 and S(inst.P(x)) != x
    if k == "R1":
        x = c.x
        return (x != 0 and S(inst.P(x)) != x) or inst.P(S(x)) != x
    if k in ("R2", "UV1"):
        x = c.x
        return x != S(x) and inst.P(S(x)) == x and V(S(x)) - V(x) <= 0
    if k == "UV2":
        x = c.x
        return x != 0 and S(inst.P(x)) != x
    if k in ("UV3", "UFV1"):
        x, y = c.x, c.y
        if x == y or x == S(x) or y == S(y):
            return False
        # Second disjunct read as V(x) < V(y) < V(S(x)).
        return V(x) == V(y) or (V(x) < V(y) < V(S(x)))
    if k in ("S1", "UF1"):
        x = c.x
        return S(x) != x and (S(S(x)) == S(x) or V(S(x)) <= V(x))
    if k == "UFP1":
        x = c.x
        return S(x) != x and (S(S(x)) == S(x) or V(S(x)) != V(x) + 1)
    if k == "UFPV1":
        x, y = c.x, c.y
        return x != y and x != S(x) and y != S(y) and V(x) == V(y)
    if k == "T1":
        x = c.x
        return (x != 0 and S(inst.P(x)) != x) or inst.P(S(x)) != x
    if k == "T2":
        x = c.x
        return x != 0 and V(x) == 1
    if k == "T3":
        x = c.x
        return (V(x) > 0 and V(S(x)) - V(x) != 1) or (
            V(x) > 1 and V(x) - V(inst.P(x)) != 1
        )
    raise VariantMismatch(c.kind)


def _same_slice(p, q, level) -> bool:
    return all(p[j] == q[j] for j in range(level, len(p)))


def verify_opdc(inst: OpdcInstance, c: Certificate) -> bool:
    D = inst.D
    if c.kind == "O1":
        p = inst.check_point(c.p)
        return all(D(i, p) == ZERO for i in range(inst.d))
    if c.kind == "OV1":
        lvl, p, q = c.level, inst.check_point(c.p), inst.check_point(c.q)
        if not (1 <= lvl <= inst.d) or p == q or not _same_slice(p, q, lvl):
            return False
        return all(D(j, p) == ZERO and D(j, q) == ZERO for j in range(lvl))
    if c.kind == "OV2":
        lvl, p, q = c.level, inst.check_point(c.p), inst.check_point(c.q)
        if not (1 <= lvl <= inst.d) or not _same_slice(p, q, lvl):
            return False
        i = lvl - 1
        if p[i] != q[i] + 1:
            return False
        if not all(D(j, p) == ZERO and D(j, q) == ZERO for j in range(i)):
            return False
        return D(i, p) == DOWN and D(i, q) == UP
    if c.kind == "OV3":
        lvl, p = c.level, inst.check_point(c.p)
        if not (1 <= lvl <= inst.d):
            return False
        i = lvl - 1
        if not all(D(j, p) == ZERO for j in range(i)):
            return False
        return (p[i] == 0 and D(i, p) == DOWN) or (p[i] == inst.widths[i] and D(i, p) == UP)
    raise VariantMismatch(c.kind)


def verify_uso(inst: UsoInstance, c: Certificate) -> bool:
    if c.kind == "US1":
        return inst.orient(c.v) == 0
    if c.kind == "USV1":
        return inst.orient(c.v) is None
    if c.kind == "USV2":
        v, u = c.v, c.u
        ov, ou = inst.orient(v), inst.orient(u)
        if v == u or ov is None or ou is None:
            return False
        return (v ^ u) & (ov ^ ou) == 0
    raise VariantMismatch(c.kind)


def verify_lcp(inst: LcpInstance, c: Certificate) -> bool:
    d = inst.d
    if c.kind == "Q1":
        y = [frac(v) for v in c.y]
        if len(y) != d or any(v < 0 for v in y):
            return False
        w = inst.w_of(y)
        return all(v >= 0 for v in w) and all(y[i] * w[i] == 0 for i in range(d))
    if c.kind == "PV1":
        alpha = sorted(set(c.alpha))
        if not alpha or any(not 0 <= i < d for i in alpha):
            return False
        from .rational import determinant

        minor = [[inst.M[i][j] for j in alpha] for i in alpha]
        return determinant(minor) <= 0
    if c.kind == "PV2":
        x = [frac(v) for v in c.x]
        if len(x) != d or all(v == 0 for v in x):
            return False
        mx = [sum((inst.M[i][j] * x[j] for j in range(d)), Fraction(0)) for i in range(d)]
        return all(x[i] * mx[i] <= 0 for i in range(d))
    if c.kind == "PV3":
        from .reductions_lcp import out_map

        alpha, beta = frozenset(c.alpha), frozenset(c.beta)
        if alpha == beta:
            return False
        oa, ob = out_map(inst, alpha), out_map(inst, beta)
        if oa is None or ob is None:
            return False
        chi_a = sum(1 << i for i in alpha)
        chi_b = sum(1 << i for i in beta)
        return (chi_a ^ chi_b) & (oa ^ ob) == 0
    raise VariantMismatch(c.kind)


def verify_contraction(inst: ContractionInstance, c: Certificate) -> bool:
    d = inst.d
    if c.kind == "CM1":
        x = [frac(v) for v in c.x]
        return len(x) == d and _in_box(x) and inst.f(x) == x
    if c.kind == "CMV1":
        x = [frac(v) for v in c.x]
        y = [frac(v) for v in c.y]
        if len(x) != d or len(y) != d or not (_in_box(x) and _in_box(y)):
            return False
        lhs = lp_pow([a - b for a, b in zip(inst.f(x), inst.f(y))], inst.p)
        rhs = (inst.c ** inst.p) * lp_pow([a - b for a, b in zip(x, y)], inst.p)
        return lhs > rhs
    if c.kind == "CMV2":
        x = [frac(v) for v in c.x]
        return len(x) == d and _in_box(x) and not _in_box(inst.f(x))
    if c.kind == "CMV3":
        lvl = c.level
        x = [frac(v) for v in c.x]
        y = [frac(v) for v in c.y]
        if not (1 <= lvl <= d) or not (_in_box(x) and _in_box(y)):
            return False
        if any(x[j] != y[j] for j in range(lvl, d)):
            return False
        i = lvl - 1
        kappa = inst.effective_kappa()
        k_i = 1 << kappa[i]
        if k_i * x[i] != k_i * y[i] + 1:
            return False
        fx, fy = inst.f(x), inst.f(y)
        if any(fx[j] != x[j] or fy[j] != y[j] for j in range(i)):
            return False
        return fx[i] < x[i] and fy[i] > y[i]
    if c.kind == "APPROX_FIX":
        if inst.eps is None:
            raise VariantMismatch("APPROX_FIX needs an approximate-mode instance")
        v = [frac(u) for u in c.v]
        if len(v) != d or not _in_box(v):
            return False
        resid = lp_pow([a - b for a, b in zip(inst.f(v), v)], inst.p)
        return resid <= frac(inst.eps) ** inst.p
    raise VariantMismatch(c.kind)


def explain_rejection(inst, c: Certificate) -> str:
    """Best-effort reason string for a failing certificate (clause level
    for the common kinds, generic otherwise)."""
    try:
        if isinstance(inst, LcpInstance) and c.kind == "Q1":
            y = [frac(v) for v in c.y]
            if len(y) != inst.d:
                return "dimension mismatch"
            for i, v in enumerate(y):
                if v < 0:
                    return f"nonnegativity y_{i + 1} < 0"
            w = inst.w_of(y)
            for i, v in enumerate(w):
                if v < 0:
                    return f"feasibility w_{i + 1} < 0"
            for i in range(inst.d):
                if y[i] * w[i] != 0:
                    return f"complementarity y_{i + 1} w_{i + 1} != 0"
        if isinstance(inst, ContractionInstance) and c.kind == "CM1":
            x = [frac(v) for v in c.x]
            if not _in_box(x):
                return "point outside the unit box"
            fx = inst.f(x)
            for i in range(inst.d):
                if fx[i] != x[i]:
                    return f"f(x)_{i + 1} != x_{i + 1}"
        if isinstance(inst, LineInstance) and c.kind in ("UV3", "UFV1"):
            x, y = c.x, c.y
            if x == y:
                return "points coincide"
            if x == inst.S(x) or y == inst.S(y):
                return "a point is not a vertex"
            if inst.V(x) != inst.V(y) and not (inst.V(x) < inst.V(y) < inst.V(inst.S(x))):
                return "V(y) neither equals V(x) nor lies in (V(x), V(S(x)))"
    except Exception:
        pass
    return "certificate conditions do not hold on this instance"


def verify(inst, c: Certificate) -> bool:
    """Dispatch to the matching verifier by instance type."""
    if isinstance(inst, LineInstance):
        return verify_line(inst, c)
    if isinstance(inst, OpdcInstance):
        return verify_opdc(inst, c)
    if isinstance(inst, UsoInstance):
        return verify_uso(inst, c)
    if isinstance(inst, LcpInstance):
        return verify_lcp(inst, c)
    if isinstance(inst, ContractionInstance):
        return verify_contraction(inst, c)
    raise TypeError(f"no verifier for {type(inst)}")


# ---------------------------------------------------------------------------
# JSON formats

def bits_str(x: int, n: int) -> str:
    return format(x, f"0{n}b")


def line_to_json(inst: LineInstance, ids=None) -> dict:
    ids = list(ids) if ids is not None else list(range(inst.size))
    out = {"flavor": inst.flavor, "n": inst.n, "m": inst.m_pot, "S": {}, "V": {}}
    if inst.predecessor is not None:
        out["P"] = {}
    for x in ids:
        s = inst.S(x)
        if s != x:
            out["S"][bits_str(x, inst.n)] = bits_str(s, inst.n)
        if inst.predecessor is not None:
            p = inst.P(x)
            if p != x:
                out["P"][bits_str(x, inst.n)] = bits_str(p, inst.n)
        if inst.potential is not None:
            v = inst.V(x)
            if v:
                out["V"][bits_str(x, inst.n)] = v
    return out


def line_from_json(data) -> LineInstance:
    if isinstance(data, str):
        data = json.loads(data)
    n = int(data["n"])
    s = {int(k, 2): int(v, 2) for k, v in data.get("S", {}).items()}
    p = {int(k, 2): int(v, 2) for k, v in data["P"].items()} if "P" in data else None
    v = {int(k, 2): int(x) for k, x in data.get("V", {}).items()}
    return line_from_tables(n, s, p, v, flavor=data.get("flavor", "eopl"), m_pot=data.get("m"))


def lcp_to_json(inst: LcpInstance) -> dict:
    return {
        "M": [[frac_str(x) for x in row] for row in inst.M],
        "q": [frac_str(x) for x in inst.q],
    }


def lcp_from_json(data) -> LcpInstance:
    if isinstance(data, str):
        data = json.loads(data)
    return LcpInstance(M=data["M"], q=data["q"])


def opdc_to_json(inst: OpdcInstance) -> dict:
    table = {}
    for p in inst.points():
        table[",".join(map(str, p))] = [inst.D(i, p) for i in range(inst.d)]
    return {"k": list(inst.widths), "D": table}


def opdc_from_json(data) -> OpdcInstance:
    if isinstance(data, str):
        data = json.loads(data)
    widths = tuple(int(k) for k in data["k"])
    table = {tuple(int(t) for t in key.split(",")): dirs for key, dirs in data["D"].items()}

    def direction(i, p):
        return table[p][i]

    return OpdcInstance(widths=widths, direction=direction)


def uso_to_json(inst: UsoInstance) -> dict:
    table = {}
    for v in range(1 << inst.n):
        o = inst.orient(v)
        table[bits_str(v, inst.n)] = "dash" if o is None else bits_str(o, inst.n)
    return {"n": inst.n, "orient": table}


def uso_from_json(data) -> UsoInstance:
    if isinstance(data, str):
        data = json.loads(data)
    n = int(data["n"])
    table = {
        int(k, 2): (None if v == "dash" else int(v, 2)) for k, v in data["orient"].items()
    }
    return UsoInstance(n=n, orient=lambda v: table.get(v))


def contraction_to_json(inst: ContractionInstance) -> dict:
    from .circuits import circuit_to_json

    if inst.circuit is None:
        raise ValueError("only circuit-mode contraction instances serialize")
    out = {
        "circuit": circuit_to_json(inst.circuit),
        "c": frac_str(inst.c),
        "p": inst.p,
    }
    if inst.eps is not None:
        out["eps"] = frac_str(inst.eps)
    if inst.kappa is not None:
        out["kappa"] = list(inst.kappa)
    return out


def contraction_from_json(data) -> ContractionInstance:
    from .circuits import circuit_from_json

    if isinstance(data, str):
        data = json.loads(data)
    circ = circuit_from_json(data["circuit"])
    return ContractionInstance(
        d=circ.d,
        c=frac(data["c"]),
        p=int(data["p"]),
        circuit=circ,
        eps=frac(data["eps"]) if "eps" in data else None,
        kappa=tuple(data["kappa"]) if "kappa" in data else None,
    )


# -- certificate JSON -------------------------------------------------------

def cert_to_json(c: Certificate) -> dict:
    def enc(v):
        if isinstance(v, Fraction):
            return frac_str(v)
        if isinstance(v, (list, tuple)):
            return [enc(x) for x in v]
        if isinstance(v, frozenset):
            return sorted(v)
        return v

    return {"kind": c.kind, **{k: enc(v) for k, v in c.data.items()}}


_FRAC_FIELDS = {"x", "y", "v"}
_POINT_FIELDS = {"p", "q"}
_SET_FIELDS = {"alpha", "beta"}


def cert_from_json(data, problem: str) -> Certificate:
    if isinstance(data, str):
        data = json.loads(data)
    kind = data["kind"]
    payload = {}
    for k, v in data.items():
        if k == "kind":
            continue
        if problem in ("contraction",) and k in _FRAC_FIELDS | {"q"}:
            payload[k] = [frac(t) for t in v]
        elif problem == "plcp" and k in _FRAC_FIELDS:
            payload[k] = [frac(t) for t in v]
        elif problem == "plcp" and k in _SET_FIELDS:
            payload[k] = frozenset(int(t) for t in v)
        elif problem == "opdc" and k in _POINT_FIELDS:
            payload[k] = tuple(int(t) for t in v)
        elif problem in ("uso", "line") and k in ("v", "u", "x", "y"):
            payload[k] = int(v, 2) if isinstance(v, str) and set(v) <= {"0", "1"} else int(v)
        else:
            payload[k] = v
    return Certificate(kind, payload)

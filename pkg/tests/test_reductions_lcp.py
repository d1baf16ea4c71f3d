from fractions import Fraction as F
from itertools import combinations

import pytest

from potline.generators import gen_lcp
from potline.problems import LcpInstance, UnmappableCert, cert, verify
from potline.reductions_lcp import (
    map_back_lcp,
    map_back_uso,
    out_map,
    plcp_to_eopl,
    plcp_to_uso,
)
from potline.solvers import brute_force, follow_line, lemke


WORKED = LcpInstance(M=[[2, 1], [1, 2]], q=[-1, -1])


def test_out_map_examples():
    assert out_map(WORKED, frozenset()) == 0b11
    assert out_map(WORKED, frozenset({0})) == 0b10
    assert out_map(WORKED, frozenset({0, 1})) == 0b00


def test_out_map_dash_on_singular():
    inst = LcpInstance(M=[[0, 1], [1, 2]], q=[-1, -1])
    assert out_map(inst, frozenset({0})) is None


def test_plcp_to_uso_worked():
    uso = plcp_to_uso(WORKED)
    assert uso.orient(0b11) == 0  # sink at 11
    c = cert("US1", v=0b11)
    assert verify(uso, c)
    assert map_back_uso(WORKED, uso, c) == cert("Q1", y=[F(1, 3), F(1, 3)])


def test_plcp_to_uso_trivial_sink():
    inst = LcpInstance(M=[[2, 1], [1, 2]], q=[1, 2])
    uso = plcp_to_uso(inst)
    assert uso.orient(0) == 0


def _szabo_welzl_ok(uso, n):
    for v, u in combinations(range(1 << n), 2):
        ov, ou = uso.orient(v), uso.orient(u)
        if ov is None or ou is None:
            return False
        if (v ^ u) & (ov ^ ou) == 0:
            return False
    return True


def test_plcp_to_uso_p_matrices_are_usos():
    for seed in range(10):
        inst = gen_lcp(3, seed, nondegenerate=True)
        uso = plcp_to_uso(inst)
        assert _szabo_welzl_ok(uso, 3)
        sinks = [v for v in range(8) if uso.orient(v) == 0]
        assert len(sinks) == 1
        q1 = map_back_uso(inst, uso, cert("US1", v=sinks[0]))
        assert q1 == lemke(inst)


def test_plcp_to_uso_non_p_violation():
    # Negative principal minor, all cones nonsingular: some pair fails
    # Szabo-Welzl and maps back to PV3.
    inst = LcpInstance(M=[[-1, 0], [0, 1]], q=[-1, -2])
    uso = plcp_to_uso(inst)
    certs = brute_force(uso)
    usv2 = [c for c in certs if c.kind == "USV2"]
    assert usv2
    pv3 = map_back_uso(inst, uso, usv2[0])
    assert pv3.kind == "PV3" and verify(inst, pv3)


def test_plcp_to_uso_singular_cone_gives_usv1():
    # Zero principal minors make the out-map dash, mapping to PV1.
    inst = LcpInstance(M=[[0, 1], [1, 0]], q=[-1, -1])
    uso = plcp_to_uso(inst)
    certs = brute_force(uso)
    usv1 = [c for c in certs if c.kind == "USV1"]
    assert usv1
    pv1 = map_back_uso(inst, uso, usv1[0])
    assert pv1.kind == "PV1" and verify(inst, pv1)


def test_plcp_to_eopl_worked():
    line, view = plcp_to_eopl(WORKED)
    assert view.delta == 769  # 4! * 2^5 + 1 with I_max = 2
    assert line.V(0) == 0
    c = follow_line(line, 0)
    assert c.kind == "U1"
    assert map_back_lcp(WORKED, view, c) == cert("Q1", y=[F(1, 3), F(1, 3)])


def test_plcp_to_eopl_line_integrity():
    for seed in range(6):
        inst = gen_lcp(2, seed, nondegenerate=True)
        line, view = plcp_to_eopl(inst)
        certs = brute_force(line)
        kinds = sorted(c.kind for c in certs)
        assert kinds == ["U1"], (seed, certs)
        # follow the line and check V strictly increases
        x, vs = 0, [line.V(0)]
        while True:
            nxt = line.S(x)
            if nxt == x or line.P(nxt) != x:
                break
            vs.append(line.V(nxt))
            x = nxt
        assert all(a < b for a, b in zip(vs, vs[1:]))
        assert map_back_lcp(inst, view, certs[0]) == lemke(inst)


def test_plcp_to_eopl_agrees_with_lemke():
    for seed in range(6):
        inst = gen_lcp(3, seed, nondegenerate=True)
        line, view = plcp_to_eopl(inst)
        c = follow_line(line, 0)
        assert map_back_lcp(inst, view, c) == lemke(inst)


def test_plcp_to_eopl_non_p_map_backs():
    planted = [
        LcpInstance(M=[[-1, 0], [0, 1]], q=[-1, -2]),
        LcpInstance(M=[[0, -1], [1, 0]], q=[-1, -1]),
        LcpInstance(M=[[1, -3], [-3, 1]], q=[F(-3, 2), -1]),
    ]
    for inst in planted:
        line, view = plcp_to_eopl(inst)
        certs = brute_force(line)
        assert certs
        for c in certs:
            mb = map_back_lcp(inst, view, c)
            assert verify(inst, mb), (inst.M, c, mb)


def test_plcp_to_eopl_v_separation():
    inst = gen_lcp(2, 3, nondegenerate=True)
    line, view = plcp_to_eopl(inst)
    vals = {}
    for u in range(1 << line.n):
        if u == 0 or view.is_valid(u):
            vals[u] = line.V(u)
    # distinct z values get potentials separated by at least 1
    zs = {}
    for u in vals:
        if u:
            _, _, z = view.etoi(u)
            zs.setdefault(z, set()).add(vals[u])
    seen = sorted((min(vs), z) for z, vs in zs.items())
    for (v1, _), (v2, _) in zip(seen, seen[1:]):
        assert v2 - v1 >= 1


def test_map_back_rejects_r2():
    line, view = plcp_to_eopl(WORKED)
    with pytest.raises(UnmappableCert):
        map_back_lcp(WORKED, view, cert("UV1", x=3))

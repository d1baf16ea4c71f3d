"""End-to-end composition of the whole reduction web.

A P-matrix LCP is pushed through USO -> grid directions -> forward
potential line -> +1 chains -> pebbling (which restores a predecessor)
-> potential normalization.  Following the line of the final instance and
mapping the answer back through every stage must reproduce exactly the
Lemke solution of the original LCP.
"""

from potline.generators import gen_lcp
from potline.problems import verify
from potline.reductions_lcp import map_back_uso, plcp_to_uso
from potline.reductions_line import normalize_potentials, plus1_to_ueopl, ufeopl_to_plus1
from potline.reductions_opdc import map_back_opdc, opdc_to_ufeopl, uso_to_opdc
from potline.reductions_opdc import map_back_uso as map_back_uso_opdc
from potline.solvers import follow_line, lemke


def test_full_chain_round_trip():
    for seed in (0, 1, 2):
        lcp = gen_lcp(2, seed, nondegenerate=True)
        uso = plcp_to_uso(lcp)
        opdc = uso_to_opdc(uso)
        ufeopl, v_opdc = opdc_to_ufeopl(opdc)
        plus1, v_plus1 = ufeopl_to_plus1(ufeopl)
        ueopl, v_peb = plus1_to_ueopl(plus1)
        norm, v_norm = normalize_potentials(ueopl)

        c = follow_line(norm, 0)
        assert c.kind == "U1"

        c = v_norm.map_back(c)
        assert verify(ueopl, c)
        c = v_peb.map_back(c)
        assert verify(plus1, c)
        c = v_plus1.map_back(c)
        assert verify(ufeopl, c)
        c = map_back_opdc(opdc, v_opdc, c)
        assert verify(opdc, c)
        c = map_back_uso_opdc(uso, c)
        assert verify(uso, c)
        c = map_back_uso(lcp, uso, c)
        assert c == lemke(lcp)


def test_full_chain_walk_lengths():
    lcp = gen_lcp(2, 5, nondegenerate=True)
    uso = plcp_to_uso(lcp)
    opdc = uso_to_opdc(uso)
    ufeopl, _ = opdc_to_ufeopl(opdc)
    plus1, _ = ufeopl_to_plus1(ufeopl)
    ueopl, v_peb = plus1_to_ueopl(plus1)
    # the pebbled walk is the strategy prefix ending at the line's end
    x, steps = 0, 0
    while True:
        nxt = ueopl.S(x)
        if nxt == x:
            break
        assert ueopl.P(nxt) == x
        assert ueopl.V(nxt) == ueopl.V(x) + 1
        x, steps = nxt, steps + 1
    assert 0 < steps <= v_peb.total

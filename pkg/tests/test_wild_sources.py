"""Adversarial map-back sweeps: completely unstructured sources, every
certificate of the image mapped back and verified."""

import random
from fractions import Fraction as F

from potline.problems import LcpInstance, OpdcInstance, UsoInstance, verify
from potline.reductions_lcp import map_back_lcp, plcp_to_eopl
from potline.reductions_line import plus1_to_ueopl, ufeopl_to_plus1
from potline.reductions_opdc import map_back_opdc, map_back_uso, opdc_to_ufeopl, uso_to_opdc
from potline.problems import line_from_tables
from potline.solvers import brute_force


def test_wild_lcp_matrices():
    rng = random.Random(0)
    for trial in range(60):
        rng.seed(trial)
        d = 2 + trial % 2
        m = [[F(rng.randrange(-3, 4)) for _ in range(d)] for _ in range(d)]
        q = [F(rng.randrange(-4, 5), rng.randrange(1, 4)) for _ in range(d)]
        if all(v >= 0 for v in q):
            continue
        inst = LcpInstance(M=m, q=q)
        line, view = plcp_to_eopl(inst)
        for c in brute_force(line):
            assert verify(inst, map_back_lcp(inst, view, c)), (trial, c)


def test_wild_orientations():
    rng = random.Random(1)
    for trial in range(60):
        rng.seed(trial)
        n = 2 + trial % 2
        table = {
            v: (None if rng.random() < 0.1 else rng.randrange(1 << n))
            for v in range(1 << n)
        }
        uso = UsoInstance(n=n, orient=table.get)
        opdc = uso_to_opdc(uso)
        for c in brute_force(opdc, max_certs=300):
            assert verify(uso, map_back_uso(uso, c)), (trial, c)


def test_wild_opdc_grids():
    rng = random.Random(2)
    for trial in range(60):
        rng.seed(trial)
        d = 1 + trial % 2
        widths = tuple(rng.choice([1, 2, 3]) for _ in range(d))
        table = {}
        from itertools import product

        for p in product(*[range(k + 1) for k in widths]):
            table[p] = [rng.choice(["up", "down", "zero"]) for _ in range(d)]
        inst = OpdcInstance(widths=widths, direction=lambda i, p, t=table: t[p][i])
        line, view = opdc_to_ufeopl(inst)
        for c in brute_force(line, max_certs=300):
            assert verify(inst, map_back_opdc(inst, view, c)), (trial, widths, c)


def test_wild_forward_lines():
    rng = random.Random(3)
    for trial in range(60):
        rng.seed(trial)
        n = 3
        size = 1 << n
        s = {0: rng.randrange(1, size)}
        v = {0: 0}
        for x in range(1, size):
            if rng.random() < 0.7:
                s[x] = rng.randrange(size)
            v[x] = rng.randrange(8)
        src = line_from_tables(n, s, None, v, flavor="ufeopl")
        plus1, view = ufeopl_to_plus1(src)
        for c in brute_force(plus1, max_certs=300):
            assert verify(src, view.map_back(c)), (trial, c)


def test_wild_plus1_lines():
    rng = random.Random(4)
    for trial in range(40):
        rng.seed(trial)
        n = 3
        size = 1 << n
        s = {0: rng.randrange(1, size)}
        v = {0: 0}
        for x in range(1, size):
            if rng.random() < 0.7:
                s[x] = rng.randrange(size)
            v[x] = rng.randrange(6)
        src = line_from_tables(n, s, None, v, flavor="ufeoplplus1", m_pot=3)
        ueopl, view = plus1_to_ueopl(src)
        for c in brute_force(ueopl, max_certs=300):
            assert verify(src, view.map_back(c)), (trial, c)

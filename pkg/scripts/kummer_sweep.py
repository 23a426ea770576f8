"""Decompose the pushforward of y^n = x over Q(zeta_n) for a range of n and time it."""
import argparse
import time

from covalgebra.algebra.numberfield import cyclotomic_field
from covalgebra.connmod import decompose_pushforward, pushforward
from covalgebra.covers import Kummer, LaurentAlgebra, build_cover, canonical_action
from covalgebra.groups import central_idempotents

ap = argparse.ArgumentParser()
ap.add_argument("--max-n", type=int, default=8)
a = ap.parse_args()

for n in range(2, a.max_n + 1):
    t0 = time.perf_counter()
    K = cyclotomic_field(n)
    A = LaurentAlgebra(K, 1)
    B = build_cover(Kummer(n, A.var(0)), A)
    act = canonical_action(B)
    push = pushforward(B, act)
    D = decompose_pushforward(push, central_idempotents(act.group, K))
    gam = ", ".join(str(s.gamma[0][0][0]) for s in D.summands)
    print(f"n={n:2d} summands={len(D.summands)} invertible={D.invertible} "
          f"t={time.perf_counter() - t0:.2f}s  gamma: {gam}")

#!/usr/bin/env python3
"""How the discrete Weyl HS identity and trace bound behave as the grid is refined.

Prints, for self-dual grids n = 8, 12, 16, the relative HS defect and the
ratio ||W_sigma||_S1 / ||sigma||_1 for the Gaussian symbol and a few seeded
random symbols even in xi.
"""

import numpy as np

from qweyl.fields import random_symbol
from qweyl.grid import Grid2
from qweyl.weyl import WeylSymbol, hs_identity_defect, symbol_grids, trace_bound_check


def gauss(x1, x2, s1, s2):
    out = np.zeros(np.broadcast(x1, x2, s1, s2).shape + (4,))
    out[..., 0] = np.exp(-np.pi * (x1**2 + x2**2 + s1**2 + s2**2))
    return out


def main():
    print(f"{'n':>3} {'symbol':>8} {'hs defect':>11} {'S1/L1':>12}")
    for n in (8, 12, 16):
        grid = Grid2.self_dual(n)
        xg, sg = symbol_grids(grid)
        rng = np.random.default_rng(1)
        symbols = [("gauss", WeylSymbol.from_function(grid, gauss))]
        symbols += [(f"rand{k}", WeylSymbol.from_field(random_symbol(xg, sg, rng), grid)) for k in range(3)]
        for name, s in symbols:
            nuc, l1 = trace_bound_check(s)
            print(f"{n:>3} {name:>8} {hs_identity_defect(s):11.3e} {nuc / l1:12.9f}")


if __name__ == "__main__":
    main()

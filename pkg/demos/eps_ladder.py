"""How fast does the relaxed flow approach the manifold of uniaxial minimisers?

The circle map n = (cos 2 pi x / L, sin 2 pi x / L, 0) is stationary for the
harmonic map flow, so the Q-flow started on it only relaxes its core. The
distance to N should shrink like eps once eps (2 pi / L)^2 is small; on the
unit box the first members of the ladder are not yet in that regime, while
on a box of side 2 they are.

    python3 demos/eps_ladder.py
"""

import math

from qflow import Grid, MaterialParams, SolverConfig, initial_circle_map, initial_from_director, max_stable_dt, simulate
from qflow.manifold import dist_to_N

for length in (1.0, 2.0):
    grid = Grid.uniform(2, 64, length)
    print(f"box side {length:g}")
    print(f"{'eps':>9} {'eps k^2':>8} {'sup dist':>9} {'ratio':>6}")
    previous = None
    for eps in (1e-2, 5e-3, 2.5e-3):
        p = MaterialParams(eps=eps)
        q0 = initial_from_director(initial_circle_map(grid), p)
        run = simulate(q0, p, SolverConfig(dt=max_stable_dt(grid, p, "rk2"), T=0.1, snapshot_every=10**6))
        sup = float(dist_to_N(run.final.matrices(), p).max())
        ratio = "" if previous is None else f"{previous / sup:6.3f}"
        print(f"{eps:9.2e} {eps * (2 * math.pi / length) ** 2:8.3f} {sup:9.4f} {ratio:>6}")
        previous = sup
    print()

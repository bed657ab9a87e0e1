"""Heat-kernel weighted energies along a radius ladder.

Phi(R) weights the energy on the time slice t0 - R^2 and Psi(R) integrates it
over the slab [t0 - 4R^2, t0 - R^2]. Both should grow with R along a smooth
solution. Psi is evaluated twice, by slab quadrature and through the radial
identity Psi = 2 int_R^2R Phi(r) / r dr, as a consistency check.

    python3 demos/monotonicity.py
"""

from qflow import Grid, MaterialParams, SolverConfig, initial_from_director, max_stable_dt, simulate
from qflow.diagnostics import ParabolicPoint, phi_ladder, psi_ladder
from qflow.experiment.runner import default_ladder
from qflow.solver import initial_perturbed_constant

p = MaterialParams(eps=1e-2)
grid = Grid.uniform(2, 64)
q0 = initial_from_director(initial_perturbed_constant(grid, 0.5, seed=3), p)
run = simulate(q0, p, SolverConfig(dt=max_stable_dt(grid, p, "rk2"), T=0.08, snapshot_every=5))

t0 = 0.08
z0 = ParabolicPoint(grid.center, t0)
radii = default_ladder(t0)
phi = phi_ladder(run, z0, radii)
psi = psi_ladder(run, z0, radii)
radial = psi_ladder(run, z0, radii, route="radial")

print(f"{'R':>7} {'Phi':>10} {'Psi (slab)':>11} {'Psi (radial)':>13}")
for row in zip(radii, phi, psi, radial):
    print("{:7.4f} {:10.3e} {:11.3e} {:13.3e}".format(*row))

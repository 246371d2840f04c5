# This example demonstrates how to measure growth along an orbit of a Hamiltonian flow on R^4.
# The system used here is the hyperbolic drift H = y3 + (y2^2 - y4^2)/2, which has a closed-form flow.

# numpy holds every point and matrix.
import numpy as np

# get_system builds a catalog system from its id. Run "hamflow catalog" to list them.
from hamflow.core.catalog import get_system

# IntegratorConfig chooses the integration method and step.
from hamflow.flow import IntegratorConfig

# The cocycle, exponent and domination functions all take a system, a start point, a time and a config.
from hamflow.domination import domination_scan
from hamflow.lyapunov import oseledets_splitting, upper_exponent
from hamflow.poincare import cocycle_blocks

sys = get_system('hyperbolic-drift')
y0 = np.array([0.0, 0.1, 0.0, -0.05])

# "exact" uses the closed-form flow. Systems without one need "implicit-midpoint" or "gauss2" with a small dt.
cfg = IntegratorConfig(dt=1.0, method='exact')

# cocycle_blocks returns one transversal cocycle per unit of time.
# Each block is a 2x2 area preserving matrix acting on the plane transversal to the flow.
# For this system every block is [[cosh 1, -sinh 1], [-sinh 1, cosh 1]].
blocks = cocycle_blocks(sys, y0, 3.0, cfg)
print('First block:')
print(blocks[0].Phi)

# The upper exponent over T = 20 is the growth rate of the norm of the product of the blocks.
# This system stretches one direction by e every unit of time, so this prints a value close to 1.
estimate = upper_exponent(sys, y0, 20.0, cfg)
print('Upper exponent:', estimate.lambda_plus)

# The splitting gives the unstable and stable directions at the start, in the transversal frame.
# Here they are (1, -1)/sqrt(2) and (1, 1)/sqrt(2).
splitting = oseledets_splitting(sys, y0, 20.0, cfg)
print('Unstable direction:', splitting.n_plus)
print('Stable direction:', splitting.n_minus)

# A scan with window m = 1 checks that the stable direction is contracted at least twice as much as the unstable
# one over every unit window.
report = domination_scan(sys, y0, 1, 10.0, cfg)
print('Classification:', report.classification)
print('Worst ratio:', report.worst)

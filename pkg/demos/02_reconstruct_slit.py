"""Reference reconstruction experiment: slit object, two arms versus ghost only.

Simulates one acquisition (1 photon per object pixel, detector efficiencies
0.4, 0.1 noise photons per pixel, 3x binning), reconstructs the object from
both images together ("red") and from the ghost image alone ("red-s") for
several sparsity levels tau, and writes all estimates as PGM images.
"""

from pathlib import Path

import numpy as np

from dualgi import (
    AcquisitionParams,
    DetectorGeometry,
    SimulationConfig,
    build_problems,
    haar_basis,
    linear_reduction,
    project_box,
    simulate_acquisition,
    slit_object,
    sparsity_denoise,
    suppressed_components,
)
from dualgi.io import write_counts_pgm, write_unit_pgm

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)

f = slit_object()  # 24x24, transparent slit of width 4 on a 0.05 background
geom = DetectorGeometry.for_object(24, 24, 3)
params = AcquisitionParams(n=1.0, eta0=0.4, eta1=0.4, n_eps=0.1)

config = SimulationConfig(f=f, geom=geom, params=params, frames=1, seed=4)
frame = simulate_acquisition(config)[0]
write_unit_pgm(out / "object.pgm", f.as_grid())
write_counts_pgm(out / "object_arm.pgm", frame.xi0.reshape(8, 8))
write_counts_pgm(out / "ghost_image.pgm", frame.xi1.reshape(8, 8))
print("acquired one frame; total counts: object arm",
      int(frame.xi0.sum()), "| coincidences", int(frame.xi1.sum()))

problems = build_problems(f, geom, params, frames=1)
basis = haar_basis(24, 24)

print(f"\n{'variant':10s} {'tau':>5s} {'sq. error':>10s} {'zeroed':>7s}")
for name, problem, xi in [
    ("red", problems.combined, frame.stacked()),
    ("red-s", problems.ghost_only, frame.xi1),
]:
    result = linear_reduction(problem, xi)
    for tau in (0.0, 0.1, 0.2):
        estimate = result.estimate if tau == 0.0 else sparsity_denoise(result, basis, tau)
        final = project_box(estimate, result.estimate_cov)
        sq_error = float(np.sum((final - f.values) ** 2))
        zeroed = int(suppressed_components(result, basis, tau).sum())
        write_unit_pgm(out / f"{name}_tau{tau:g}.pgm", final.reshape(24, 24))
        print(f"{name:10s} {tau:5.2f} {sq_error:10.2f} {zeroed:7d}")

print(f"\nimages written to {out}/")
print("the two-image estimate is consistently less noisy than the ghost-only one;")
print("raising tau suppresses more coefficients at the price of detail.")

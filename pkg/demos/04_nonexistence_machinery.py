"""Quantitative ingredients of the nonexistence argument.

The nonexistence route tests the equation against powers of a rescaled
smooth cutoff. This demo shows each computable ingredient: the cutoff and
its flat junctions, the rescaling identity of the fractional Laplacian, the
composite-cutoff (chain-rule type) inequality, the two test-function cost
integrals with their power-law scaling in the radius and horizon, and the
lower bound tying a simulated blow-up trajectory to its slice integrals.

Run:  python demos/04_nonexistence_machinery.py
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from hartreelab import (
    CutoffSpec,
    GaussianData,
    ProblemSpec,
    RieszKernel,
    capacity_functional,
    cutoff_profile,
    frac_lap_scaling_check,
    fractional_chain_rule_margin,
    integrate,
    laplacian_cost_integral,
    make_grid,
    time_derivative_cost_integral,
)
from hartreelab.capacity import fit_loglog_slope

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

cut = CutoffSpec(2.0, 1.0)  # p+q = 3, cutoff power 4
print(f"cutoff power for p+q=3: {cut.exponent}")

# --- the profile ------------------------------------------------------------
r = np.linspace(0, 1.3, 600)
fig, ax = plt.subplots(figsize=(6, 3.5))
ax.plot(r, cutoff_profile(r), label="profile")
ax.plot(r, cutoff_profile(r) ** cut.exponent, label="profile^4")
ax.axvspan(0, 0.5, alpha=0.15, label="plateau")
ax.set_xlabel("r")
ax.legend()
fig.tight_layout()
fig.savefig(out_dir / "cutoff_profile.png", dpi=120)
print(f"wrote {out_dir / 'cutoff_profile.png'}")

# --- rescaling identity and the composite inequality ------------------------
for s in (0.25, 0.5, 0.75):
    dev = frac_lap_scaling_check(cut, s, 2.0)
    print(f"rescaling identity at order {s}: deviation {dev:.2e}")
for beta in (0.5, 1.0, 1.5):
    margin = fractional_chain_rule_margin(cut, beta)
    print(f"composite-cutoff inequality margin at beta={beta}: {margin:+.3e} (>= 0 up to quadrature)")

# --- cost integrals scale as pure powers ------------------------------------
R_grid = np.geomspace(1.0, 100.0, 9)
T_grid = np.geomspace(1.0, 100.0, 9)
lap_R = [laplacian_cost_integral(1, 2.0, 2.0, 1.0, R, 10.0) for R in R_grid]
tim_R = [time_derivative_cost_integral(1, 2.0, 2.0, 1.0, R, 10.0) for R in R_grid]
lap_T = [laplacian_cost_integral(1, 2.0, 2.0, 1.0, 10.0, T) for T in T_grid]
tim_T = [time_derivative_cost_integral(1, 2.0, 2.0, 1.0, 10.0, T) for T in T_grid]
print("fitted scaling exponents (n=1, p+q=3, beta=2):")
print(f"  diffusion cost:  R-slope {fit_loglog_slope(R_grid, lap_R):+.4f} (theory -5/3), "
      f"T-slope {fit_loglog_slope(T_grid, lap_T):+.4f} (theory +1/3)")
print(f"  time-derivative: R-slope {fit_loglog_slope(R_grid, tim_R):+.4f} (theory +1/3), "
      f"T-slope {fit_loglog_slope(T_grid, tim_T):+.4f} (theory -2/3)")

fig, ax = plt.subplots(figsize=(6, 4))
ax.loglog(R_grid, lap_R, "o-", label="diffusion cost vs R")
ax.loglog(R_grid, tim_R, "s-", label="time cost vs R")
ax.set_xlabel("R")
ax.legend()
fig.tight_layout()
fig.savefig(out_dir / "cost_scaling.png", dpi=120)
print(f"wrote {out_dir / 'cost_scaling.png'}")

# --- trajectory lower bound --------------------------------------------------
grid = make_grid(1, 1024, 64.0)
spec = ProblemSpec(
    grid=grid,
    beta=2.0,
    kernel=RieszKernel(0.5, 1),
    p=1.5,
    q=1.0,
    initial=GaussianData(5.0, 1.0),
    horizon=0.03,
    dt_initial=1e-4,
    dt_min=1e-15,
    lebesgue_index=3.0,
)
out = integrate(spec, record_fields_at=list(np.linspace(0.0, 0.03, 25)))
rep = capacity_functional(spec, out, R=16.0, T=0.03)
print(
    "trajectory lower bound on the pre-blow-up window: "
    f"nonlinear integral {rep.nonlinear_integral:.4e} >= "
    f"kernel x slice^2 bound {rep.lower_bound:.4e} (ratio {rep.ratio:.2f})"
)

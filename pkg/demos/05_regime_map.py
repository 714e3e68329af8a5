"""Map of the predicted regimes in the (alpha, p+q) plane.

For the Riesz-kernel problem on the line with beta = 2, the classifier
knows three certainties and one honest gap: below 1+(beta+alpha)/n
positive-mass data cannot be global; above 1+(beta+alpha)/(n-alpha) small
critical-norm data live forever; in between the question is open (the
tail-condition with a rate gamma can bite into the band when the data have
heavy tails).

Run:  python demos/05_regime_map.py
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from hartreelab import RegimeLabel, classify_regime

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

beta, n = 2.0, 1
alphas = np.linspace(0.05, 0.95, 181)
totals = np.linspace(2.05, 8.0, 240)

order = [
    RegimeLabel.NONEXISTENCE_MASS,
    RegimeLabel.OPEN_GAP,
    RegimeLabel.GLOBAL_SMALL_DATA,
]
code = {label: i for i, label in enumerate(order)}
img = np.zeros((totals.size, alphas.size))
for j, alpha in enumerate(alphas):
    for i, total in enumerate(totals):
        label = classify_regime(n, alpha, beta, total - 1.0, 1.0).label
        img[i, j] = code[label]

fig, ax = plt.subplots(figsize=(7, 5))
mesh = ax.pcolormesh(alphas, totals, img, cmap="viridis", shading="auto")
ax.plot(alphas, 1 + (beta + alphas) / n, "w--", label="blow-up threshold")
ax.plot(alphas, 1 + (beta + alphas) / (n - alphas), "w-", label="global threshold")
ax.set_xlabel("alpha (potential order)")
ax.set_ylabel("p + q")
ax.set_title("predicted regimes (beta = 2, n = 1, positive-mass data)")
ax.legend(loc="upper left")
cbar = fig.colorbar(mesh, ticks=range(len(order)))
cbar.ax.set_yticklabels([label.value for label in order])
fig.tight_layout()
fig.savefig(out_dir / "regime_map.png", dpi=120)
print(f"wrote {out_dir / 'regime_map.png'}")

# heavy-tailed data cut into the open band via the tail condition
print("\neffect of a data tail rate gamma at alpha = 0.5 (thresholds 3.5 and 6.0):")
for total in (4.0, 5.0, 5.9):
    for gamma in (0.4, 0.6, 1.0):
        label = classify_regime(n, 0.5, beta, total - 1.0, 1.0, gamma=gamma).label
        print(f"  p+q = {total}, gamma = {gamma}: {label.value}")

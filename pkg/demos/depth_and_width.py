"""How the exact linear-network prior approaches its Gaussian limit.

Prints the exact density next to the infinite-width Gaussian and the
first-order width correction for a few hidden widths, all at fixed
output variance.
"""
import numpy as np

from bnnprior import WidthScaledSpec, density_linear, edgeworth_density, gaussian_limit_density

radii = np.array([0.25, 0.5, 1.0, 2.0, 3.0])

for depth in (2, 3):
    print(f"depth {depth}")
    for width in (2, 10, 50):
        widths = (1,) + (width,) * (depth - 1) + (1,)
        ws = WidthScaledSpec.from_varkappa(widths, 1.0)
        exact = density_linear(ws.base, radii)
        gauss = gaussian_limit_density(ws, radii)
        edge = edgeworth_density(ws, radii)
        print(f"  width {width:3d}")
        for r, p, g, e in zip(radii, exact, gauss, edge):
            print(f"    r={r:4.2f}  exact={p:.6f}  gaussian={g:.6f}  edgeworth={e:.6f}")

# the Gaussian gap shrinks roughly like 1/width
gaps = []
for width in (10, 20, 40, 80):
    ws = WidthScaledSpec.from_varkappa((1, width, width, 1), 1.0)
    gaps.append(np.max(np.abs(density_linear(ws.base, radii) - gaussian_limit_density(ws, radii))))
print("max gap at widths 10, 20, 40, 80:", np.array2string(np.array(gaps), precision=3))

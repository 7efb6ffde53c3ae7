"""Root-moment growth and the fitted tail parameter as depth grows.

The fit uses orders 200 to 400, so moderate widths still sit a little
below the large-order value.
"""
from bnnprior import NetworkSpec, estimate_tail_parameter

for activation in ("linear", "relu"):
    for depth in range(1, 6):
        widths = (1,) + (3,) * (depth - 1) + (1,)
        est = estimate_tail_parameter(NetworkSpec.from_kappa(widths, activation=activation))
        print(f"{activation:6s} depth {depth}  theta_hat={est.theta_hat:.3f}  (large-order limit {depth / 2})")

"""Explicit blow-up family: residual ladder, amplitude condition and gradient growth.

Run with ``python3 demos/explicit_blowup.py``.
"""

from h2maps import experiments

a, b = 1.0, -4.0

print("Residuals of the explicit family on [-2, 2]^2 (dt = 1e-5)")
rep = experiments.explicit_residual_ladder(a, b, 1.0, dt=1e-5)
for name, eq in rep["equations"].items():
    orders = "roundoff" if eq["exact"] else ", ".join(f"{o:.2f}" for o in eq["orders"])
    print(f"  {name:5s} max |R| = {eq['errors'][-1]:.2e}   orders: {orders}")

print("\nWith alpha = 0.9 the first equation keeps a nonzero residual")
lim = experiments.amplitude_limit_check(a, b, 0.9)
print(f"  max |R_q| = {lim['max_residual']:.3f}, closed-form limit {lim['max_limit']:.3f}")

print("\nGradient of the reconstructed spin field as t approaches 0.25")
scan = experiments.blowup_scan(a, b, 1.0, times=(0.0, 0.1, 0.15, 0.2, 0.22))
print("       t   sup|grad S|   lower bound")
for row in scan["rows"]:
    print(f"  {row['t']:6.2f}  {row['sup_gradient']:11.3f}  {row['lower_bound']:12.3f}")

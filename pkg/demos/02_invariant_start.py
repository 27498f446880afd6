# Start the process from its quasi-invariant law and the time to go below
# zero is exactly exponential. Check it with 100k simulated paths.
import numpy as np

from levy_ifpt.levy_model import kou
from levy_ifpt.mc_engine import McParams, ks_distance, simulate_first_passage
from levy_ifpt.qid import build_qid
from levy_ifpt.spectral import lambda_star

model = kou(0.2, -0.3, 1.0, 0.4, 10.0, 5.0)
lam = 0.5 * lambda_star(model)
dist = build_qid(model, lam)
print("rates  ", dist.rates)
print("weights", dist.weights)
print("mass", dist.mass(), " mean", dist.mean())

x = np.linspace(0, 4, 9)
print(np.c_[x, dist.density(x), dist.cdf(x)])

fp = simulate_first_passage(model, dist, McParams(100_000, 4.0, seed=1))
grid = np.linspace(0.5, 4.0, 8)
est = fp.survival(grid)
print("t      mc       exact    z")
for t, s, se in zip(grid, est.survival, est.se):
    print(f"{t:.2f}  {s:.5f}  {np.exp(-lam * t):.5f}  {(s - np.exp(-lam * t)) / se:+.2f}")

# positions of the survivors at t = 1 follow the same law
alive = simulate_first_passage(model, dist, McParams(100_000, 1.0, seed=2))
xs = alive.x_end[~alive.crossed]
print("survivors", xs.size, " KS vs start law", ks_distance(xs, dist.cdf))

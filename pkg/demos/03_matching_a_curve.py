# Pick the start law and the clock so that the default time of
# Y(t) = X(I(t)) has a prescribed survival curve.
import numpy as np

from levy_ifpt.ifpt import solve_rifpt, time_change_general
from levy_ifpt.levy_model import kou
from levy_ifpt.mc_engine import McParams, simulate_time_changed_fp
from levy_ifpt.survival import TableCurve, WeibullCurve

model = kou(0.2, -0.3, 1.0, 0.4, 10.0, 5.0)
curves = {
    "weibull": WeibullCurve(2.0, 1.0),
    "table": TableCurve([0.25, 0.5, 0.75, 1.0], [0.95, 0.88, 0.80, 0.70]),
}
for name, curve in curves.items():
    sol = solve_rifpt(model, curve, lam=0.4)
    fp = simulate_time_changed_fp(sol, McParams(100_000, curve.horizon, seed=3))
    grid = np.linspace(0.1, 1.0, 10)
    est = fp.survival(grid)
    print(name)
    print(np.c_[grid, sol.time_change(grid), curve.survival(grid), est.survival, est.se])

# with a fixed start x0 = 0.5 the clock has to be estimated from simulation
curve = curves["weibull"]
clock = time_change_general(model, 0.5, curve, McParams(100_000, 30.0, seed=4))
t = np.linspace(0.1, 1.0, 10)
print("clock from x0 = 0.5:", np.round(clock(t), 4))

# Two names whose default curves depend on a common two-state factor.
# Given the state each name is built separately; the joint survival is the
# mixture over states.
import numpy as np

from levy_ifpt.ifpt import FrailtyName, FrailtySpec, FrailtyState, simulate_frailty, solve_frailty
from levy_ifpt.levy_model import kou
from levy_ifpt.mc_engine import McParams
from levy_ifpt.survival import ExponentialCurve, WeibullCurve

a = kou(0.2, -0.3, 1.0, 0.4, 10.0, 5.0)
b = kou(0.3, -0.8, 1.5, 0.5, 8.0, 6.0)
good = FrailtyState(0.65, (FrailtyName(a, ExponentialCurve(0.15, 2.0), 0.15),
                           FrailtyName(b, WeibullCurve(1.5, 3.0, 2.0), 0.3)))
bad = FrailtyState(0.35, (FrailtyName(a, WeibullCurve(2.0, 1.2, 2.0), 0.4),
                          FrailtyName(b, ExponentialCurve(0.6, 2.0), 0.6)))
sol = solve_frailty(FrailtySpec((good, bad)))

taus = simulate_frailty(sol, McParams(100_000, 2.0, seed=5))
for t in [0.5, 1.0, 2.0]:
    joint = np.mean(np.all(taus > [t, t], axis=1))
    print(f"t = {t}: mc {joint:.4f}  formula {float(sol.joint_survival([t, t])):.4f}")

# default correlation induced by the common factor
d = taus <= 2.0
print("default correlation by 2y:", np.corrcoef(d[:, 0], d[:, 1])[0, 1])

# CVA of a one-year call sold by a counterparty with 40% default
# probability, when the stock loads on the counterparty's credit driver.
import numpy as np

from levy_ifpt.cva import CvaSpec, cva_value, mc_cva
from levy_ifpt.levy_model import MixedExpLevy, kou
from levy_ifpt.survival import WeibullCurve

X = MixedExpLevy(0.25, -0.3, 1.0, 0.5, ((1.0, 20.0),), ((1.0, 20.0),))
Z = kou(0.2, 0.0, 0.5, 0.4, 10.0, 8.0)
curve = WeibullCurve(1.5, (-np.log(0.6)) ** (-1 / 1.5), 1.0)

for rho in [-0.5, 0.0, 0.5]:
    spec = CvaSpec(100.0, 90.0, 1.0, 0.03, 0.01, rho, X, Z, curve)
    res = cva_value(spec, curve_points=5)
    mc = mc_cva(spec, 200_000, seed=6)
    print(f"rho {rho:+.1f}: Pi {res.pi:.4f}  mc {mc.pi:.4f} +- {mc.se:.4f}"
          f"  call {res.diagnostics['call_price']:.4f}")
    print("   exposure", [round(v, 3) for _, v in res.exposure_curve])

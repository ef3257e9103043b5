# %% [markdown]
# Resolvent of k Delta k against its parametric parametrix.

# %%
import numpy as np

from nctorus.algebra import ThetaMatrix
from nctorus.experiments import kdk_symbol
from nctorus.quantization import quantize
from nctorus.resolvent import minimal_growth_check, parametrix_residual

th = ThetaMatrix.from_angle(0.25)
P = kdk_symbol(th, 0.2)
T = quantize(P, 8)

# %%
for J in range(4):
    print(J, parametrix_residual(P, J, -100.0, 8, margin=6, P=T))

# %%
T1 = quantize(kdk_symbol(th, 0.2, 1.0), 8)
for ray in (np.pi, 3 * np.pi / 4, np.pi / 2):
    fit = minimal_growth_check(T1, ray)
    print(f"arg lambda = {ray:.3f}: exponent {fit.exponent:.4f}")

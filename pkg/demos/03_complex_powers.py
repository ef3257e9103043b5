# %% [markdown]
# Complex powers of Delta + 1 by three routes.

# %%
import numpy as np

from nctorus import symbols as S
from nctorus.algebra import ThetaMatrix
from nctorus.powers import power_contour, power_spectral, power_symbol
from nctorus.quantization import quantize

th = ThetaMatrix.from_angle(0.25)
sym = S.laplacian_symbol(th, 1.0)
T = quantize(sym, 5)

# %%
for z in (-0.5, -1.0, 0.5 + 0.3j):
    A = power_spectral(T, z)
    B = power_contour(T, z)
    print(z, "shift", B.shift, "contour vs spectral", np.max(np.abs(A.matrix - B.matrix)))

# %%
ps = power_symbol(sym, -0.5, J=4)
x = np.array([1.0, 1.0])
print("principal part at (1, 1):", ps.components[0].expr.fn(x), "expected", 2 ** -0.5)

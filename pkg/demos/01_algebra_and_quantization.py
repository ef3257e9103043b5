# %% [markdown]
# Elements of the noncommutative torus, symbols, and their quantization.

# %%
import numpy as np

from nctorus import symbols as S
from nctorus.algebra import NcElement, ThetaMatrix, adjoint, delta, mul, trace
from nctorus.calculus import sharp
from nctorus.dsl import parse_operator
from nctorus.quantization import quantize

th = ThetaMatrix.from_angle(0.25)
U1, U2 = NcElement.generator(th, 1), NcElement.generator(th, 2)

# %%
# U2 U1 = e^{2 pi i theta} U1 U2
print(mul(U2, U1).to_dict(), mul(U1, U2).to_dict())

# %%
a = U1 + adjoint(U1).scale(0.5) + U2.scale(1j)
b = U2 + NcElement.scalar(th, 2.0)
print("tau(ab) - tau(ba) =", abs(trace(mul(a, b)) - trace(mul(b, a))))
print("delta_1(ab) - (delta_1(a) b + a delta_1(b)) =",
      (delta((1, 0), mul(a, b)) - mul(delta((1, 0), a), b) - mul(a, delta((1, 0), b))).norm0())

# %%
# Quantized Laplacian: diagonal with entries |k|^2
L = quantize(S.laplacian_symbol(th), 3)
print(np.round(np.sort(L.eigenvalues().real)[:10], 12))

# %%
# Composition of symbols matches composition of operators away from the box edge
P = parse_operator("U1*d1 + d2^2", th).symbol()
Q = parse_operator("d1 + U2^-1", th).symbol()
A = quantize(P, 6).matrix @ quantize(Q, 6).matrix
B = quantize(sharp(P, Q), 6).matrix
mask = np.abs(quantize(P, 6).box.points).max(axis=1) <= 3
print("interior error:", np.max(np.abs((A - B)[np.ix_(mask, mask)])))

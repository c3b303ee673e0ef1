"""Show the damped rank-one geometry acting on noise predictions.

The guided update deflects a raw noise prediction away from the carried
direction using an exact rank-one solve, then restores its norm.  The
rank-one inverse costs two dot products; no matrix is ever formed.
"""
import numpy as np

from lmlangevin import (
    DampedGeometryConfig,
    GeometryState,
    hs_norm,
    lm_guided_eps,
    sm_apply,
)

# sm_apply(v; e, lam) = lam * (e e^T + lam I)^{-1} v, done with dot products.
e = np.array([1.0, 1.0]) / np.sqrt(2.0)
v = np.array([1.0, 0.0])
print("sm_apply:", sm_apply(e, v, lam=1.0), "(component along e shrinks)")

# Check it against the dense solve.
d = 6
rng = np.random.default_rng(3)
e6, v6 = rng.normal(size=d), rng.normal(size=d)
dense = 1.0 * np.linalg.solve(np.outer(e6, e6) + 1.0 * np.eye(d), v6)
print("dense-solve agreement:", np.abs(sm_apply(e6, v6, 1.0) - dense).max())

# The identity behind it, in Hilbert-Schmidt norm.
lhs = (np.outer(e6, e6) + np.eye(d)) @ (np.eye(d) - np.outer(e6, e6) / (1.0 + e6 @ e6))
print("rank-one inverse identity residual:", hs_norm(lhs - np.eye(d)))

# The guided step: EMA the carried direction, deflect, renormalize.
cfg = DampedGeometryConfig(lam=0.1, kappa=0.1)
state = GeometryState()
cur = np.array([[0.8, 0.6]])
out1, state = lm_guided_eps(cur, state, cfg)
print("first step has no memory yet:", out1)

nxt = np.array([[0.6, 0.8]])
out2, state = lm_guided_eps(nxt, state, cfg)
print("second step deflects away from the carried direction:", out2)
print("norm preserved:", np.linalg.norm(out2), "=", np.linalg.norm(nxt))

# kappa = 0 disables the memory entirely.
state0 = GeometryState()
a, state0 = lm_guided_eps(cur, state0, DampedGeometryConfig(lam=0.1, kappa=0.0))
b, state0 = lm_guided_eps(nxt, state0, DampedGeometryConfig(lam=0.1, kappa=0.0))
print("kappa=0 is the identity:", np.abs(b - nxt).max())

# Huge damping also collapses to the identity: the deflection scales as 1/lam.
big, _ = lm_guided_eps(nxt, GeometryState(prev_eps=cur[0]), DampedGeometryConfig(lam=1e12, kappa=0.1))
print("lam=1e12 deflection:", np.abs(big - nxt).max())

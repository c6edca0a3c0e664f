"""Pilot-based channel estimation quality against pilot power.

Per-entry estimate variance should follow gamma = q tau_p beta^2 /
(q tau_p beta + 1), approaching beta as pilots get strong, and the
estimation error should be orthogonal to the estimate.
"""

import numpy as np

from fhalloc import SystemConfig, RngStream, estimate_channel, gamma_coefficient

M, K, TAU_P = 64, 8, 8
TRIALS = 400

print("pilot q   gamma (model)  var(h_hat)   E[h_hat err*]")
for q in (0.05, 0.2, 1.0, 5.0, 25.0):
    cfg = SystemConfig(M=M, K=K, tau_c=200, tau_p=TAU_P, total_power=1.0, pilot_power=q)
    gamma = gamma_coefficient(q, TAU_P, 1.0)
    acc_var = 0.0
    acc_cross = 0.0
    for t in range(TRIALS):
        cs = estimate_channel(cfg, RngStream(7, (0, t)), RngStream(7, (1, t)))
        err = cs.H - cs.H_hat
        acc_var += np.mean(np.abs(cs.H_hat) ** 2)
        acc_cross += np.mean(cs.H_hat * np.conj(err))
    print(
        f"{q:7.2f}   {gamma:.6f}       {acc_var / TRIALS:.6f}     "
        f"{abs(acc_cross / TRIALS):.2e}"
    )

print("\nvariance tracks gamma and the cross moment stays at the noise floor,")
print("so downstream code can treat h_hat entries as CN(0, gamma).")

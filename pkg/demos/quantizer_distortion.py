"""Distortion factor table and an empirical check of the quantizer model.

The quantizer is modeled as a gain (1 - eta) plus uncorrelated additive
noise of variance eta (1 - eta) E|x|^2.  This script prints eta against
bit depth and verifies the output second moment on Gaussian input.
"""

import numpy as np

from fhalloc import AqnmQuantizer, RngStream, aqnm_quantize, draw_complex_gaussian, eta_of_bits

N = 200_000
VAR = 1.0

print("bits  eta           model E|x_Q|^2   empirical")
for bits in range(1, 11):
    eta = eta_of_bits(bits)
    x = draw_complex_gaussian(RngStream(0, (bits,)), N, 1, variance=VAR)
    out = aqnm_quantize(x, AqnmQuantizer.from_bits(bits), VAR, RngStream(1, (bits,)))
    model = (1.0 - eta) * VAR
    emp = float(np.mean(np.abs(out.value) ** 2))
    print(f"{bits:4d}  {eta:.6e}  {model:.6f}        {emp:.6f}")

# noise should be uncorrelated with the input
x = draw_complex_gaussian(RngStream(2), N, 1, variance=VAR)
out = aqnm_quantize(x, AqnmQuantizer.from_bits(2), VAR, RngStream(3))
rho = np.mean(out.noise * np.conj(x)) / VAR
print(f"\ninput/noise correlation at B=2: {abs(float(np.abs(rho))):.2e} (should be ~0)")

"""Fit a cooling model to four measured dissipation times.

The times are for the same object warmed to four different temperatures.
The fit recovers a time constant and a detection threshold; the predicted
times must keep the measured order.
"""
from thermprint.simulate import fit_cooling

minutes = [3.33, 3.73, 4.23, 4.34]
excess_c = [13.0, 14.0, 15.0, 16.0]  # hand at 36..39 degC over a 23 degC room
times_s = [m * 60 for m in minutes]

fit = fit_cooling(times_s, excess_c)
print(f"tau {fit.tau_s:.1f} s, threshold {fit.threshold_c:.2f} degC")
for e, t, p in zip(excess_c, times_s, fit.predicted_s):
    print(f"  excess {e:4.1f} degC  measured {t:6.1f} s  predicted {p:6.1f} s  residual {p - t:+6.1f} s")
print(f"worst residual {fit.max_abs_residual_s:.1f} s")

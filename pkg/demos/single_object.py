"""Watch one thermal fingerprint fade and time it.

A warm spot is rendered on a plastic sample, turned into a dissipation
vector, and the measured dissipation time is compared with the closed-form
value for the same cooling constant.
"""
from thermprint.fingerprint import FingerprintConfig, dissipation_time
from thermprint.pipeline import effective_threshold_c, sequence_vector
from thermprint.preprocess import PreprocessConfig
from thermprint.simulate import PLASTICS, analytic_dissipation_time, render_scene, single_object_scene

material = PLASTICS[3]  # PS
spec = single_object_scene(material, initial_excess_c=13.0, duration_s=60.0)
seq = render_scene(spec)
print(f"{material.name}: tau {material.tau_s:.2f} s, {len(seq)} frames of {seq.width}x{seq.height}")

# Without sensor noise the median filter is unnecessary.
pre = PreprocessConfig(denoise_window=1)
fp = FingerprintConfig(vector_len=spec.n_frames)
vec = sequence_vector(seq, pre, fp)

# Remaining hot-area fraction, sampled every 5 seconds.
for second in range(0, 60, 5):
    i = second * spec.fps_millihz // 1000
    print(f"  t={second:2d} s  remaining {vec.values[i]:.3f}  " + "#" * int(40 * vec.values[i]))

measured = dissipation_time(vec, fp.dissipated_epsilon)
theta = effective_threshold_c(seq, pre, fp)
expected = analytic_dissipation_time(material, 13.0, theta)
print(f"measured dissipation time {measured.seconds:.3f} s, closed form {expected:.3f} s")
print(f"difference {abs(measured.seconds - expected):.3f} s (one frame is {spec.frame_period_s} s)")

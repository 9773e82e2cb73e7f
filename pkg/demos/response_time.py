"""How long the whole pipeline takes as videos get longer and busier.

Scenes at 30 fps with one (A) or four (D) objects are timed end to end.
Absolute numbers depend on the machine; only the trends matter.
"""
from thermprint.bench import BenchConfig, cost_slope, format_table, run_bench

cfg = BenchConfig(video_lengths_s=(15, 30, 60), arrangements=("A", "D"), modes=("dispersed",))
rows = run_bench(cfg)
print(format_table(rows), end="")
for arr in cfg.arrangements:
    slope = cost_slope([r for r in rows if r.arrangement == arr])
    print(f"arrangement {arr}: {slope * 1000:.1f} ms per 1000 frames")

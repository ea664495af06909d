"""Record an episode to a trajectory file and render it as SVG frames.

Writes demos/out/trace.jsonl and demos/out/frames/frame_*.svg: brown VIP,
blue bodyguards, red bystanders, gray landmarks, green goal landmark.

Run:  python demos/04_record_and_render.py
"""

from pathlib import Path

from vipguard import (
    ScenarioConfig,
    cumulative_threat,
    make_baseline,
    read_trajectory,
    render_trace,
    run_episode,
    write_trajectory,
)

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

scenario = ScenarioConfig()  # the full mall: 3 bodyguards, 10 bystanders, 12 landmarks
controller = make_baseline("scripted-ring", scenario)
trace = run_episode(scenario, controller, seed=42)
print("episode of", trace.horizon, "steps, cumulative threat",
      round(cumulative_threat(trace), 3))

trace_path = out / "trace.jsonl"
write_trajectory(trace, trace_path)
print("trajectory:", trace_path)

# The file round-trips exactly.
assert read_trajectory(trace_path) == trace

frames = render_trace(trace, out / "frames", stride=1)
print(f"{len(frames)} frames in {out / 'frames'}")
print("open them in any browser; the escort ring forms around the brown VIP")

"""SVG frame rendering of world states.

One frame per state: every entity is a filled circle at its world position,
mapped through a fixed world-to-canvas transform (world origin at the canvas
center, y up). The palette separates the roles: brown VIP, blue bodyguards,
red bystanders, gray landmarks, with the VIP's goal landmark in green.
Output is plain SVG text and byte-identical for identical states.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

from .scenario import EpisodeTrace, RoleAssignment

if TYPE_CHECKING:
    from .world import WorldState


@dataclass(frozen=True)
class RenderStyle:
    """Canvas geometry and role colors."""

    canvas_size: int = 600
    view_extent: float = 2.0  # world units from the center to each canvas edge
    vip_color: str = "brown"
    bodyguard_color: str = "blue"
    bystander_color: str = "red"
    landmark_color: str = "gray"
    goal_color: str = "green"
    background: str = "white"


def _circle(x: float, y: float, r: float, color: str) -> str:
    return f'<circle cx="{x:.3f}" cy="{y:.3f}" r="{r:.3f}" fill="{color}"/>'


def render_frame(
    state: "WorldState", roles: RoleAssignment, style: RenderStyle = RenderStyle()
) -> str:
    """One SVG document for one state; exactly N+M circle elements.

    Canvas coordinates: sx = (x + view_extent) * scale, sy flipped so world
    +y points up; scale = canvas_size / (2 * view_extent). An entity at the
    world origin lands at the canvas center.
    """
    size = style.canvas_size
    scale = size / (2.0 * style.view_extent)

    def to_canvas(pos) -> tuple[float, float]:
        return (pos[0] + style.view_extent) * scale, size - (pos[1] + style.view_extent) * scale

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="{style.background}"/>',
    ]
    for j, landmark in enumerate(state.landmarks):
        color = style.goal_color if j == roles.vip_goal_landmark else style.landmark_color
        x, y = to_canvas(landmark.position)
        lines.append(_circle(x, y, landmark.radius * scale, color))
    for i, agent in enumerate(state.agents):
        if i == roles.vip_index:
            color = style.vip_color
        elif i in roles.bodyguard_indices:
            color = style.bodyguard_color
        else:
            color = style.bystander_color
        x, y = to_canvas(agent.position)
        lines.append(_circle(x, y, agent.radius * scale, color))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_trace(
    trace: EpisodeTrace,
    out_dir: str | Path,
    stride: int = 1,
    style: RenderStyle = RenderStyle(),
) -> list[Path]:
    """Write one frame file per selected step; returns the written paths.

    Frames are named frame_<step_index>.svg with zero-padded indices, taking
    every `stride`-th record starting from the first.
    """
    if stride < 1:
        raise ValueError(f"stride must be positive, got {stride}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for record in trace.records[::stride]:
        path = out / f"frame_{record.state.step_index:04d}.svg"
        path.write_text(render_frame(record.state, trace.roles, style))
        paths.append(path)
    return paths

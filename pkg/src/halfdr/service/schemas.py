from __future__ import annotations

from pydantic import BaseModel, Field

from halfdr.pipeline import PipelineStats


class StatsModel(BaseModel):
    """Wire form of :class:`PipelineStats` served at ``/stats``."""

    frames_in: int = Field(ge=0)
    frames_out: int = Field(ge=0)
    wall_fps: float = Field(ge=0)
    threads_used: int = Field(ge=1)
    warmup_frames: int = Field(ge=0)
    per_stage_ms: dict[str, float]

    @classmethod
    def from_stats(cls, stats: PipelineStats) -> StatsModel:
        return cls(**stats.as_dict())

    def to_text(self) -> str:
        """One ``key=value`` per line; stage timings as ``per_stage_ms.<stage>``."""
        lines = [
            f"frames_in={self.frames_in}",
            f"frames_out={self.frames_out}",
            f"wall_fps={self.wall_fps:.3f}",
            f"threads_used={self.threads_used}",
            f"warmup_frames={self.warmup_frames}",
        ]
        lines += [f"per_stage_ms.{k}={v:.3f}" for k, v in self.per_stage_ms.items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse_text(cls, text: str) -> StatsModel:
        fields: dict = {"per_stage_ms": {}}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, value = line.split("=", 1)
            if key.startswith("per_stage_ms."):
                fields["per_stage_ms"][key.split(".", 1)[1]] = float(value)
            else:
                fields[key] = value
        return cls(**fields)

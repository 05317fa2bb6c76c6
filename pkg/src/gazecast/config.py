"""One run configuration shared by the CLI and the service.

Defaults are the published training recipe: attention lr 1e-3 for 100
epochs with beta 0.5; predictor lr 1e-4 for 200 epochs, batch 64, alpha
0.001; 120-degree visual field; 20 evaluation samples. Unknown keys are
rejected so config typos fail loudly.
"""

from __future__ import annotations

import json

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import ConfigError


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: str = ""
    data_dir: str | None = None
    sessions_dir: str | None = None
    out_dir: str | None = None
    held_out: str = "ETH"
    arm: str = "AVGCN"
    gaze_source: str = "synthetic"

    attention_lr: float = Field(default=1e-3, gt=0.0)
    attention_epochs: int = Field(default=100, ge=1)
    attention_batch_size: int = Field(default=32, ge=1)
    beta: float = Field(default=0.5, ge=0.0)

    predictor_lr: float = Field(default=1e-4, gt=0.0)
    predictor_epochs: int = Field(default=200, ge=1)
    batch_size: int = Field(default=64, ge=1)
    alpha: float = Field(default=0.001, ge=0.0)

    field_angle: float = Field(default=120.0, gt=0.0, le=360.0)
    k: int = Field(default=20, ge=1)
    seed: int = 0
    validation_fraction: float = Field(default=0.1, ge=0.0, lt=1.0)
    frame_stride: int = Field(default=10, ge=1)
    max_scene_pedestrians: int = Field(default=30, ge=1)

    attention_checkpoint: str | None = None
    predictor_checkpoint: str | None = None

    host: str = "127.0.0.1"
    port: int = 8000

    @classmethod
    def from_file(cls, path):
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
        return cls.from_dict(payload)

    @classmethod
    def from_dict(cls, payload):
        try:
            return cls.model_validate(payload)
        except ValidationError as err:
            raise ConfigError(str(err)) from err

    def persist(self, path):
        """Write the resolved config next to an output artifact."""
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(self.model_dump_json(indent=2) + "\n")

"""Service configuration: hint penalties, reward policy, solver knobs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .mdp import RewardPolicy

# penalty points per employed hint, inversely proportional to difficulty
DEFAULT_PENALTIES = {"easy": 5, "moderate": 3, "difficult": 2}


@dataclass
class ServiceConfig:
    penalty_per_hint: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_PENALTIES))
    pass_threshold: float = 95.0
    fail_reward: float = -100.0
    epsilon: float = 1e-6
    max_iter: int | None = None
    cache_size: int = 64
    listen_addr: str = "127.0.0.1:8000"

    @property
    def reward_policy(self) -> RewardPolicy:
        return RewardPolicy(pass_threshold=self.pass_threshold, fail_reward=self.fail_reward)

    @classmethod
    def load(cls, path: str | Path) -> "ServiceConfig":
        data = json.loads(Path(path).read_text())
        cfg = cls()
        if "penalty_per_hint" in data:
            cfg.penalty_per_hint = {k: int(v) for k, v in data["penalty_per_hint"].items()}
        for key in ("pass_threshold", "fail_reward", "epsilon"):
            if key in data:
                setattr(cfg, key, float(data[key]))
        for key in ("max_iter", "cache_size"):
            if key in data and data[key] is not None:
                setattr(cfg, key, int(data[key]))
        if "listen_addr" in data:
            cfg.listen_addr = str(data["listen_addr"])
        return cfg

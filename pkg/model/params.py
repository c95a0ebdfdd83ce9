"""
Validated hyperparameters and training schedules.
"""
from typing import Any, Dict, List, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from errors import ConfigError


def _as_list(value: Union[float, int, List]) -> List:
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def _per_layer(values: List, t: int):
    """Value for layer t (1-based); the last entry repeats for deeper layers."""
    return values[min(t, len(values)) - 1]


class Hyperparams(BaseModel):
    """Model hyperparameters, width/depth budgets and iteration schedules."""
    model_config = ConfigDict(frozen=True)

    eta: List[float] = Field(default_factory=lambda: [0.05])
    a0: float = Field(0.01, gt=0)
    b0: float = Field(0.01, gt=0)
    e0: float = Field(1.0, gt=0)
    f0: float = Field(1.0, gt=0)
    gamma0: float = Field(1.0, gt=0)
    c0: float = Field(1.0, gt=0)
    k1_max: int = Field(100, ge=1)
    t_max: int = Field(1, ge=1)
    b_iters: List[int] = Field(default_factory=lambda: [1000])
    c_iters: List[int] = Field(default_factory=lambda: [500])

    @field_validator("eta", "b_iters", "c_iters", mode="before")
    @classmethod
    def _broadcast(cls, value):
        return _as_list(value)

    @field_validator("eta")
    @classmethod
    def _eta_positive(cls, value: List[float]) -> List[float]:
        if not value or any(v <= 0 for v in value):
            raise ValueError("every eta must be > 0")
        return value

    @field_validator("b_iters")
    @classmethod
    def _burn_positive(cls, value: List[int]) -> List[int]:
        if not value or any(v < 1 for v in value):
            raise ValueError("every B_t must be >= 1")
        return value

    @field_validator("c_iters")
    @classmethod
    def _collect_nonnegative(cls, value: List[int]) -> List[int]:
        if not value or any(v < 0 for v in value):
            raise ValueError("every C_t must be >= 0")
        return value

    def eta_for(self, t: int) -> float:
        return float(_per_layer(self.eta, t))

    def schedule(self, **options) -> "TrainSchedule":
        defaults = {"burn": self.b_iters, "collect": self.c_iters, "k1_max": self.k1_max, "t_max": self.t_max}
        return TrainSchedule(**{**defaults, **options})

    @classmethod
    def from_mapping(cls, values: Dict[str, Any]) -> "Hyperparams":
        try:
            return cls(**values)
        except ValidationError as e:
            raise ConfigError(f"invalid hyperparameters: {e}") from e


class TrainSchedule(BaseModel):
    """Per-layer (B_T, C_T) iteration counts plus width/depth budgets."""
    model_config = ConfigDict(frozen=True)

    burn: List[int] = Field(default_factory=lambda: [1000])
    collect: List[int] = Field(default_factory=lambda: [500])
    k1_max: int = Field(100, ge=1)
    t_max: int = Field(1, ge=1)
    layer1_sampler: Literal["collapsed", "blocked"] = "collapsed"
    network_output: Literal["last", "mean"] = "last"
    workers: int = Field(1, ge=1)
    log_every: int = Field(50, ge=1)

    @field_validator("burn", "collect", mode="before")
    @classmethod
    def _broadcast(cls, value):
        return _as_list(value)

    @model_validator(mode="after")
    def _check_iterations(self) -> "TrainSchedule":
        if any(b < 1 for b in self.burn):
            raise ValueError("every B_T must be >= 1")
        if any(c < 0 for c in self.collect):
            raise ValueError("every C_T must be >= 0")
        return self

    def burn_for(self, t: int) -> int:
        return int(_per_layer(self.burn, t))

    def collect_for(self, t: int) -> int:
        return int(_per_layer(self.collect, t))

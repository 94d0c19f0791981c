"""Request/response models for the live-play HTTP API."""
from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class CreateSessionRequest(BaseModel):
    condition: str
    config_overrides: dict | None = None


class InterventionView(BaseModel):
    recommended: str
    feature: str
    text: str


class PositionsView(BaseModel):
    agent: list[int]
    team: list[int]


class View(BaseModel):
    session_id: str
    trial: int
    training: bool
    score: float
    bombs_remaining: int
    bombs_handled: int
    time_remaining: float
    bomb_type: int | None = None
    distance_bin: int | None = None
    positions: PositionsView | None = None
    payoff: dict[str, float] | None = None
    intervention: InterventionView | None = None
    tip: str | None = None
    grid_size: int = 14
    done: bool = False


class CreateSessionResponse(BaseModel):
    session_id: str
    view: View


class ActionRequest(BaseModel):
    action: Literal["Solo", "Call"]


class ActionResponse(BaseModel):
    reward: float
    time_cost: float
    done: bool
    next_view: View


class ErrorResponse(BaseModel):
    detail: str = Field(description="human-readable failure reason")

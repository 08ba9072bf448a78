"""
Schemas do resumo JSON de uma execução.

O formato está documentado em docs/CLI.md.
"""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class TaskStatus(str, Enum):
    OK = "ok"
    FAILED_CHECK = "failed_check"
    ERROR = "error"


class TaskSummary(BaseModel):
    """Resultado de uma tarefa."""

    index: int = Field(ge=0)
    type: str
    name: Optional[str] = None
    status: TaskStatus = TaskStatus.OK
    wall_time: float = Field(default=0.0, ge=0.0, description="Segundos")
    outputs: List[str] = Field(default_factory=list, description="Arquivos escritos, relativos ao diretório de saída")
    results: Dict[str, Any] = Field(default_factory=dict)
    error: Optional[str] = None


class CloudSummary(BaseModel):
    label: str
    n_points: int
    dim_ambient: int
    resolution: float


class RunSummary(BaseModel):
    """Resumo de uma execução: eco da configuração, versões, sementes e tempos."""

    config: Dict[str, Any]
    config_hash: str
    versions: Dict[str, str]
    seed: Optional[int] = None
    started_at: str
    wall_time: float = Field(ge=0.0)
    cloud: Optional[CloudSummary] = None
    tasks: List[TaskSummary] = Field(default_factory=list)
    exit_code: int

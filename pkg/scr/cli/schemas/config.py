"""
Schema da configuração de execução em lote.

Um único arquivo JSON descreve o gerador da nuvem e a lista ordenada de
tarefas; as tarefas formam uma união discriminada pelo campo `type`.
"""

from enum import Enum
from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from scr.core.model.cloud import GeneratorSpec
from scr.core.model.projection import EstimatorKind, EstimatorSpec
from scr.core.model.reports import ExampleId, SpectrumKind, Tolerances

DEFAULT_THETA_GRID = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


class _Task(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = Field(default=None, description="Rótulo livre usado nos nomes de arquivo")

    @property
    def uses_randomness(self) -> bool:
        return False


class BoxTask(_Task):
    """Dimensões de caixa e curva de contagem."""

    type: Literal["box"] = "box"
    write_cloud: bool = Field(default=False, description="Grava também os pontos da nuvem")


class AssouadTask(_Task):
    """Espectro de Assouad, quase-Assouad e dimensão de Assouad."""

    type: Literal["assouad"] = "assouad"
    thetas: Optional[List[float]] = Field(default=None, description="Grade de θ; padrão theta_grid")
    reference: Optional[ExampleId] = None
    p: Optional[float] = Field(default=None, gt=0.0)


class IntermediateTask(_Task):
    """Curva de dimensões intermediárias."""

    type: Literal["intermediate"] = "intermediate"
    thetas: Optional[List[float]] = None
    reference: Optional[ExampleId] = None
    p: Optional[float] = Field(default=None, gt=0.0)


class CapacityTask(_Task):
    """
    Perfil por capacidades.

    Com `s` calcula o perfil de caixa dim_B^s; com `theta` e `k` o perfil
    intermediário dim_θ^k.
    """

    type: Literal["capacity"] = "capacity"
    s: Optional[float] = Field(default=None, gt=0.0)
    theta: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    k: Optional[int] = Field(default=None, ge=1)
    max_support: int = Field(default=2048, ge=2)

    @model_validator(mode="after")
    def check_profile(self) -> "CapacityTask":
        if self.s is None and (self.theta is None or self.k is None):
            raise ValueError("capacity exige s, ou theta e k")
        if self.s is not None and self.theta is not None:
            raise ValueError("capacity aceita s ou (theta, k), não ambos")
        return self


class FourierMeasure(str, Enum):
    """Medida cujo espectro de Fourier é estimado."""
    UNIFORM = "uniform"
    EQUILIBRIUM = "equilibrium"
    # máximo sobre a família de testemunhas (cota do espectro do conjunto)
    FAMILY = "family"


class FourierTask(_Task):
    """Espectro de Fourier de uma medida suportada na nuvem."""

    type: Literal["fourier"] = "fourier"
    measure: FourierMeasure = FourierMeasure.UNIFORM
    # núcleo da medida de equilíbrio
    r: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    s: Optional[float] = Field(default=None, ge=0.0)
    thetas: Optional[List[float]] = None
    z_max: Optional[float] = Field(default=None, gt=0.0)
    samples_per_shell: int = Field(default=512, ge=8)
    shells_theta: Optional[float] = Field(
        default=None, gt=0.0, le=1.0, description="Grava as energias por casca neste θ"
    )
    reference: Optional[ExampleId] = None
    p: Optional[float] = Field(default=None, gt=0.0)

    @model_validator(mode="after")
    def check_measure(self) -> "FourierTask":
        if self.measure == FourierMeasure.EQUILIBRIUM and (self.r is None or self.s is None):
            raise ValueError("measure=equilibrium exige r e s")
        return self

    @property
    def uses_randomness(self) -> bool:
        return True


class SweepTask(_Task):
    """Varredura de direções em G(d, k)."""

    type: Literal["sweep"] = "sweep"
    k: int = Field(default=1, ge=1)
    estimator: EstimatorKind = EstimatorKind.BOX
    theta: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    n_dirs: int = Field(default=257, ge=1)
    angle_grid: bool = True
    include_axes: bool = True
    workers: Optional[int] = Field(default=None, ge=1)
    exceptional_u: List[float] = Field(default_factory=list, description="Limiares u das frações excepcionais")

    @model_validator(mode="after")
    def check_estimator(self) -> "SweepTask":
        self.estimator_spec()
        return self

    def estimator_spec(self) -> EstimatorSpec:
        return EstimatorSpec(kind=self.estimator, theta=self.theta)

    @property
    def uses_randomness(self) -> bool:
        return True


class BoundId(str, Enum):
    """Checagens disponíveis na tarefa check."""
    CHAIN = "chain"
    ASSOUAD_SPECTRUM_BOUND = "assouad_spectrum_bound"
    THETA_ZERO_LIMIT = "theta_zero_limit"
    FOURIER_LIPSCHITZ = "fourier_lipschitz"
    FOURIER_CONCAVITY = "fourier_concavity"
    BOXAPP_LOWER = "boxapp_lower"
    PROFILE_RANGE = "profile_range"
    EXCEPTIONAL = "exceptional"
    CONTINUITY = "continuity"


# checagens que são desigualdades; as demais só registram cotas ou critérios
INEQUALITY_CHECKS = {
    BoundId.CHAIN,
    BoundId.ASSOUAD_SPECTRUM_BOUND,
    BoundId.THETA_ZERO_LIMIT,
    BoundId.FOURIER_LIPSCHITZ,
    BoundId.FOURIER_CONCAVITY,
    BoundId.BOXAPP_LOWER,
    BoundId.PROFILE_RANGE,
}

_RANDOM_CHECKS = {
    BoundId.CHAIN,
    BoundId.FOURIER_LIPSCHITZ,
    BoundId.FOURIER_CONCAVITY,
    BoundId.EXCEPTIONAL,
    BoundId.CONTINUITY,
}


class CheckTask(_Task):
    """Avalia desigualdades e cotas sobre estimativas da própria nuvem."""

    type: Literal["check"] = "check"
    bounds: List[BoundId] = Field(default_factory=lambda: [BoundId.CHAIN], min_length=1)
    k: int = Field(default=1, ge=1, description="Dimensão dos subespaços/perfil")
    u: List[float] = Field(default_factory=list, description="Limiares das cotas excepcionais")

    @property
    def uses_randomness(self) -> bool:
        return any(b in _RANDOM_CHECKS for b in self.bounds)


class ReferenceTask(_Task):
    """Curvas das fórmulas fechadas de um exemplo canônico."""

    type: Literal["reference"] = "reference"
    example: ExampleId
    p: Optional[float] = Field(default=None, gt=0.0)
    kinds: List[SpectrumKind] = Field(
        default_factory=lambda: [SpectrumKind.FOURIER_SET, SpectrumKind.INTERMEDIATE, SpectrumKind.ASSOUAD]
    )
    thetas: Optional[List[float]] = None


Task = Annotated[
    Union[BoxTask, AssouadTask, IntermediateTask, CapacityTask, FourierTask, SweepTask, CheckTask, ReferenceTask],
    Field(discriminator="type"),
]


class RunConfig(BaseModel):
    """
    Configuração completa de uma execução.

    `seed` é obrigatório quando alguma tarefa usa sorteios (fourier, sweep
    e checagens que estimam o espectro de Fourier).
    """

    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={
            "example": {
                "generator": {
                    "kind": "product",
                    "delta": 0.0009765625,
                    "factors": [
                        {"kind": "sequence_set", "p": 1.0, "delta": 0.0009765625},
                        {"kind": "segment", "delta": 0.0009765625},
                    ],
                },
                "tasks": [
                    {"type": "fourier", "reference": "seq_times_segment"},
                    {"type": "intermediate", "reference": "seq_times_segment"},
                    {"type": "assouad", "reference": "seq_times_segment"},
                ],
                "seed": 42,
            }
        },
    )

    generator: GeneratorSpec
    tasks: List[Task] = Field(min_length=1)
    theta_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_THETA_GRID))
    seed: Optional[int] = Field(default=None, ge=0)
    output_dir: Optional[str] = None
    tolerances: Tolerances = Field(default_factory=Tolerances)

    @model_validator(mode="after")
    def check_run(self) -> "RunConfig":
        if any(not 0.0 < t <= 1.0 for t in self.theta_grid):
            raise ValueError("theta_grid deve conter valores em (0, 1]")
        if self.seed is None and any(task.uses_randomness for task in self.tasks):
            raise ValueError("seed é obrigatório quando alguma tarefa usa sorteios")
        return self

"""
Curvas de referência, relatórios de cotas e estimativas agregadas.
"""

from enum import Enum
from typing import Any, Dict, Optional

import numpy as np
from pydantic import Field, field_serializer, field_validator, model_serializer, model_validator

from scr.core.model.base import FrozenModel, array_to_list, as_float_array


class ExampleId(str, Enum):
    """Exemplos canônicos com fórmulas fechadas."""
    SEQ_TIMES_SEGMENT = "seq_times_segment"
    F_P = "f_p"
    F_P_PRODUCT = "f_p_product"
    SEGMENT = "segment"
    SQUARE = "square"


class SpectrumKind(str, Enum):
    """Espectros de interpolação."""
    ASSOUAD = "assouad"
    INTERMEDIATE = "intermediate"
    FOURIER_SET = "fourier_set"


class ReferenceCurve(FrozenModel):
    """Fórmula fechada de um espectro avaliada numa grade de θ."""

    example_id: ExampleId
    kind: SpectrumKind
    p: Optional[float] = Field(default=None, gt=0.0)
    dim_ambient: int = Field(ge=1)
    thetas: np.ndarray
    values: np.ndarray

    @field_validator("thetas", "values", mode="before")
    @classmethod
    def to_float(cls, v) -> np.ndarray:
        return as_float_array(v)

    @model_validator(mode="after")
    def check_curve(self) -> "ReferenceCurve":
        if self.thetas.shape != self.values.shape:
            raise ValueError("thetas e values com tamanhos diferentes")
        if np.any(self.values < 0) or np.any(self.values > self.dim_ambient + 1e-12):
            raise ValueError(f"Valores de referência fora de [0, {self.dim_ambient}]")
        return self

    @field_serializer("thetas", "values", when_used="json")
    def serialize_arrays(self, v: np.ndarray):
        return array_to_list(v)


class BoundReport(FrozenModel):
    """
    Veredito de uma desigualdade.

    Para cotas inferiores sobre conjuntos excepcionais, measured fica vazio
    e passed é verdadeiro (o relatório só registra o valor da cota).
    """

    bound_id: str
    inputs: Dict[str, Any] = Field(default_factory=dict)
    bound: float
    measured: Optional[float] = None
    slack: float = Field(default=0.0, ge=0.0)
    passed: bool = True
    detail: str = ""

    @model_serializer
    def serialize(self) -> Dict[str, Any]:
        return {
            "bound_id": self.bound_id,
            "inputs": {k: _plain(v) for k, v in self.inputs.items()},
            "bound": float(self.bound),
            "measured": None if self.measured is None else float(self.measured),
            "slack": float(self.slack),
            "pass": bool(self.passed),
            "detail": self.detail,
        }


def _plain(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Enum):
        return value.value
    return value


class DimensionEstimates(FrozenModel):
    """
    Estimativas por noção de dimensão para uma mesma nuvem.

    Campos ausentes são ignorados pela checagem da cadeia.
    """

    dim_ambient: int = Field(ge=1)
    fourier: Optional[float] = None
    hausdorff: Optional[float] = None
    lower_box: Optional[float] = None
    upper_box: Optional[float] = None
    quasi_assouad: Optional[float] = None
    assouad: Optional[float] = None

    def chain(self) -> Dict[str, float]:
        """Valores presentes, na ordem 0 ≤ F ≤ H ≤ B_ ≤ B¯ ≤ qA ≤ A ≤ d."""
        ordered = {"zero": 0.0}
        for name in ("fourier", "hausdorff", "lower_box", "upper_box", "quasi_assouad", "assouad"):
            value = getattr(self, name)
            if value is not None:
                ordered[name] = float(value)
        ordered["ambient"] = float(self.dim_ambient)
        return ordered


class Tolerances(FrozenModel):
    """Folgas padrão por família de estimador."""

    box: float = Field(default=0.05, ge=0.0)
    assouad: float = Field(default=0.15, ge=0.0)
    fourier: float = Field(default=0.15, ge=0.0)
    chain: float = Field(default=0.1, ge=0.0)
    intermediate: float = Field(default=0.07, ge=0.0)

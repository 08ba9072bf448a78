"""
Curvas amostradas e ajustes produzidos pelos estimadores.

Todas as curvas são imutáveis e exportáveis para CSV (ver scr.core.export).
"""

from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import Field, field_serializer, field_validator, model_validator

from scr.core.model.base import FrozenModel, array_to_list, as_float_array, as_int_array

# folga numérica dos limites [0, d]
BOUND_EPS = 1e-9


class CountKind(str, Enum):
    """Tipo de contagem: global ou local numa bola B(x, R)."""
    GLOBAL = "global"
    LOCAL = "local"


class CountCurve(FrozenModel):
    """Números de cobertura N_r por escala, com r decrescente."""

    scales: np.ndarray
    counts: np.ndarray
    kind: CountKind = CountKind.GLOBAL
    center: Optional[Tuple[float, ...]] = None
    radius: Optional[float] = None
    resolution: Optional[float] = None

    @field_validator("scales", mode="before")
    @classmethod
    def to_float(cls, v) -> np.ndarray:
        return as_float_array(v)

    @field_validator("counts", mode="before")
    @classmethod
    def to_int(cls, v) -> np.ndarray:
        return as_int_array(v)

    @model_validator(mode="after")
    def check_curve(self) -> "CountCurve":
        if self.scales.shape != self.counts.shape:
            raise ValueError("scales e counts devem ter o mesmo tamanho")
        if self.scales.size == 0:
            raise ValueError("Curva de contagem vazia")
        if np.any(self.scales <= 0) or np.any(np.diff(self.scales) >= 0):
            raise ValueError("Escalas devem ser positivas e estritamente decrescentes")
        if np.any(self.counts < 1):
            raise ValueError("Contagens devem ser inteiros positivos")
        if np.any(np.diff(self.counts) < 0):
            raise ValueError("Contagens devem ser não decrescentes quando r decresce")
        if self.resolution is not None and self.scales.min() < self.resolution * (1 - 1e-12):
            raise ValueError("Escalas abaixo da resolução da nuvem")
        if self.kind == CountKind.LOCAL and (self.center is None or self.radius is None):
            raise ValueError("Contagem local exige center e radius")
        return self

    @field_serializer("scales", "counts", when_used="json")
    def serialize_arrays(self, v: np.ndarray):
        return array_to_list(v)

    def rows(self) -> List[Tuple[float, int]]:
        return [(float(r), int(n)) for r, n in zip(self.scales, self.counts)]


class SlopeFit(FrozenModel):
    """
    Ajuste linear de log N contra −log r.

    chord_min/chord_max guardam os extremos das inclinações de corda numa
    janela deslizante, usados como estimativas inferior/superior.
    """

    slope: float
    intercept: float
    r_squared: float = Field(ge=0.0, le=1.0)
    scale_range: Tuple[float, float]
    n_points: int = Field(ge=2)
    chord_min: Optional[float] = None
    chord_max: Optional[float] = None

    @model_validator(mode="after")
    def check_range(self) -> "SlopeFit":
        r_min, r_max = self.scale_range
        if not r_min < r_max:
            raise ValueError(f"scale_range inválido: ({r_min}, {r_max})")
        return self


class TwoScaleSample(FrozenModel):
    """Contagem N_r(B(x, R) ∩ X) numa célula âncora."""

    center: Tuple[float, ...]
    R: float = Field(gt=0.0)
    r: float = Field(gt=0.0)
    count: int = Field(ge=1)

    @model_validator(mode="after")
    def check_scales(self) -> "TwoScaleSample":
        if not self.r < self.R:
            raise ValueError("TwoScaleSample exige r < R")
        return self

    @property
    def normalized_exponent(self) -> float:
        return float(np.log(self.count) / np.log(self.R / self.r))


class SpectrumCurve(FrozenModel):
    """
    Mapa θ → estimativa de dimensão, com diagnósticos por θ.

    fit_r2 e n_anchors acompanham cada valor; skipped lista os θ que a
    resolução não comporta; adjustment é a maior correção aplicada pela
    projeção isotônica (0 quando não aplicada).
    """

    thetas: np.ndarray
    values: np.ndarray
    fit_r2: np.ndarray
    n_anchors: np.ndarray
    dim_ambient: int = Field(ge=1)
    kind: str = ""
    skipped: List[float] = Field(default_factory=list)
    adjustment: float = Field(default=0.0, ge=0.0)

    @field_validator("thetas", "values", "fit_r2", mode="before")
    @classmethod
    def to_float(cls, v) -> np.ndarray:
        return as_float_array(v)

    @field_validator("n_anchors", mode="before")
    @classmethod
    def to_int(cls, v) -> np.ndarray:
        return as_int_array(v)

    @model_validator(mode="after")
    def check_curve(self) -> "SpectrumCurve":
        n = self.thetas.shape[0]
        if n == 0:
            raise ValueError("Curva de espectro vazia")
        if not (self.values.shape[0] == self.fit_r2.shape[0] == self.n_anchors.shape[0] == n):
            raise ValueError("Campos da curva com tamanhos diferentes")
        if np.any(np.diff(self.thetas) <= 0):
            raise ValueError("thetas devem ser estritamente crescentes")
        if self.thetas[0] <= 0 or self.thetas[-1] > 1:
            raise ValueError("thetas devem estar em (0, 1]")
        if np.any(self.values < -BOUND_EPS) or np.any(self.values > self.dim_ambient + BOUND_EPS):
            raise ValueError(f"Valores do espectro fora de [0, {self.dim_ambient}]")
        return self

    @field_serializer("thetas", "values", "fit_r2", "n_anchors", when_used="json")
    def serialize_arrays(self, v: np.ndarray):
        return array_to_list(v)

    def value_at(self, theta: float) -> float:
        """Valor no θ da grade mais próximo."""
        idx = int(np.argmin(np.abs(self.thetas - theta)))
        return float(self.values[idx])


class CoverCost(FrozenModel):
    """Custo mínimo Σ|U_i|^s de uma cobertura diádica admissível."""

    r: float = Field(gt=0.0)
    theta: float = Field(gt=0.0, le=1.0)
    s: float = Field(ge=0.0)
    cost: float = Field(gt=0.0)
    j_top: int = Field(ge=0)
    j_bot: int = Field(ge=0)
    witness_levels: Dict[int, int]

    @model_validator(mode="after")
    def check_levels(self) -> "CoverCost":
        if self.j_bot < self.j_top:
            raise ValueError("j_bot deve ser ≥ j_top")
        for level in self.witness_levels:
            if not self.j_top <= level <= self.j_bot:
                raise ValueError(f"Nível {level} fora da janela [{self.j_top}, {self.j_bot}]")
        return self


class IntermediateEstimate(FrozenModel):
    """Dimensão intermediária num θ: raiz central, extremos de corda e testemunha."""

    theta: float = Field(gt=0.0, le=1.0)
    estimate: float = Field(ge=0.0)
    lower: float = Field(ge=0.0)
    upper: float = Field(ge=0.0)
    fit: SlopeFit
    witness: CoverCost


class IntermediateCurve(SpectrumCurve):
    """
    Curva de dimensões intermediárias.

    values passa pela projeção isotônica; lower e upper são as raízes das
    inclinações de corda mínima e máxima, sem projeção. witnesses guarda a
    cobertura ótima de cada θ na escala mais fina.
    """

    lower: np.ndarray
    upper: np.ndarray
    witnesses: List[CoverCost] = Field(default_factory=list)

    @field_validator("lower", "upper", mode="before")
    @classmethod
    def to_bounds(cls, v) -> np.ndarray:
        return as_float_array(v)

    @model_validator(mode="after")
    def check_bounds(self) -> "IntermediateCurve":
        n = self.thetas.shape[0]
        if not self.lower.shape[0] == self.upper.shape[0] == n:
            raise ValueError("lower e upper devem acompanhar thetas")
        if self.witnesses and len(self.witnesses) != n:
            raise ValueError("Uma testemunha por θ")
        return self

    @field_serializer("lower", "upper", when_used="json")
    def serialize_bounds(self, v: np.ndarray):
        return array_to_list(v)


class CapacityCurve(FrozenModel):
    """Capacidades C_r por escala diádica, com o ajuste de log C contra −log r."""

    scales: np.ndarray
    capacities: np.ndarray
    gaps: np.ndarray
    support_sizes: np.ndarray
    family: str
    s: float = Field(ge=0.0)
    fit: Optional[SlopeFit] = None

    @field_validator("scales", "capacities", "gaps", mode="before")
    @classmethod
    def to_float(cls, v) -> np.ndarray:
        return as_float_array(v)

    @field_validator("support_sizes", mode="before")
    @classmethod
    def to_int(cls, v) -> np.ndarray:
        return as_int_array(v)

    @model_validator(mode="after")
    def check_curve(self) -> "CapacityCurve":
        if not (self.scales.shape == self.capacities.shape == self.gaps.shape == self.support_sizes.shape):
            raise ValueError("Campos da curva de capacidade com tamanhos diferentes")
        if np.any(self.capacities <= 0):
            raise ValueError("Capacidades devem ser positivas")
        return self

    @field_serializer("scales", "capacities", "gaps", "support_sizes", when_used="json")
    def serialize_arrays(self, v: np.ndarray):
        return array_to_list(v)


class ShellEnergyCurve(FrozenModel):
    """
    Energias por casca diádica [R, 2R) de frequências.

    theta = 0 indica o envelope de máximos sup|μ̂|² por casca, usado na
    dimensão de Fourier; caso contrário values = média de |μ̂|^{2/θ} · R^d.
    """

    radii: np.ndarray
    values: np.ndarray
    n_samples: np.ndarray
    theta: float = Field(ge=0.0, le=1.0)
    cutoff: float = Field(gt=0.0)
    dim_ambient: int = Field(ge=1)

    @field_validator("radii", "values", mode="before")
    @classmethod
    def to_float(cls, v) -> np.ndarray:
        return as_float_array(v)

    @field_validator("n_samples", mode="before")
    @classmethod
    def to_int(cls, v) -> np.ndarray:
        return as_int_array(v)

    @model_validator(mode="after")
    def check_curve(self) -> "ShellEnergyCurve":
        if not (self.radii.shape == self.values.shape == self.n_samples.shape):
            raise ValueError("Campos da curva de cascas com tamanhos diferentes")
        if np.any(self.values < 0):
            raise ValueError("Energias de casca devem ser não negativas")
        if np.any(np.diff(self.radii) <= 0):
            raise ValueError("Raios das cascas devem ser crescentes")
        return self

    @field_serializer("radii", "values", "n_samples", when_used="json")
    def serialize_arrays(self, v: np.ndarray):
        return array_to_list(v)


class FourierCurve(FrozenModel):
    """Espectro de Fourier θ → dim_F^θ, incluindo θ = 0 e θ = 1."""

    thetas: np.ndarray
    values: np.ndarray
    rho: np.ndarray
    fit_r2: np.ndarray
    dim_ambient: int = Field(ge=1)
    witness: str = ""

    @field_validator("thetas", "values", "rho", "fit_r2", mode="before")
    @classmethod
    def to_float(cls, v) -> np.ndarray:
        return as_float_array(v)

    @model_validator(mode="after")
    def check_curve(self) -> "FourierCurve":
        n = self.thetas.shape[0]
        if not (self.values.shape[0] == self.rho.shape[0] == self.fit_r2.shape[0] == n):
            raise ValueError("Campos da curva de Fourier com tamanhos diferentes")
        if n == 0 or np.any(np.diff(self.thetas) <= 0):
            raise ValueError("thetas devem ser estritamente crescentes")
        if self.thetas[0] < 0 or self.thetas[-1] > 1:
            raise ValueError("thetas devem estar em [0, 1]")
        if np.any(self.values < 0):
            raise ValueError("Valores do espectro de Fourier devem ser ≥ 0")
        return self

    @field_serializer("thetas", "values", "rho", "fit_r2", when_used="json")
    def serialize_arrays(self, v: np.ndarray):
        return array_to_list(v)

    def value_at(self, theta: float) -> float:
        idx = int(np.argmin(np.abs(self.thetas - theta)))
        return float(self.values[idx])

    @property
    def sobolev(self) -> float:
        return float(self.values[-1])

    @property
    def fourier_dimension(self) -> float:
        return float(self.values[0])

"""
Medidas discretas de probabilidade e especificação de kernels de energia.
"""

from enum import Enum
from typing import Optional

import numpy as np
from pydantic import Field, field_serializer, field_validator, model_validator

from scr.core.model.base import FrozenModel, array_to_list, as_float_array
from scr.core.model.cloud import PointCloud

# tolerância da soma dos pesos
WEIGHT_SUM_TOL = 1e-12


class DiscreteMeasure(FrozenModel):
    """
    Medida de probabilidade com suporte finito.

    Os pesos seguem a ordem (lexicográfica) dos pontos do suporte.
    """

    support: PointCloud
    weights: np.ndarray

    @field_validator("weights", mode="before")
    @classmethod
    def normalize_weights(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=np.float64).reshape(-1)
        if np.any(arr < 0):
            if arr.min() < -WEIGHT_SUM_TOL:
                raise ValueError("Pesos devem ser não negativos")
            arr = np.clip(arr, 0.0, None)
        return as_float_array(arr)

    @model_validator(mode="after")
    def check_mass(self) -> "DiscreteMeasure":
        if self.weights.shape[0] != self.support.size:
            raise ValueError(
                f"Número de pesos ({self.weights.shape[0]}) difere do número de pontos ({self.support.size})"
            )
        total = float(self.weights.sum())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"Pesos devem somar 1, soma atual {total:.15g}")
        return self

    @field_serializer("weights", when_used="json")
    def serialize_weights(self, v: np.ndarray):
        return array_to_list(v)

    @property
    def points(self) -> np.ndarray:
        return self.support.points

    @classmethod
    def from_points(
        cls,
        points,
        weights,
        resolution: float,
        label: str = "",
    ) -> "DiscreteMeasure":
        """
        Cria medida a partir de pontos possivelmente repetidos.

        Pontos coincidentes são fundidos com soma dos pesos, e a massa total
        é renormalizada para 1.

        Args:
            points: Array (n, d) de posições
            weights: Pesos não negativos de cada posição
            resolution: Resolução δ do suporte
            label: Rótulo da nuvem de suporte

        Returns:
            DiscreteMeasure com suporte sem duplicatas
        """
        pts = np.array(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        w = np.array(weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != pts.shape[0]:
            raise ValueError("Número de pesos difere do número de pontos")
        if np.any(w < 0):
            raise ValueError("Pesos devem ser não negativos")
        total = w.sum()
        if total <= 0:
            raise ValueError("Massa total deve ser positiva")
        unique, inverse = np.unique(pts + 0.0, axis=0, return_inverse=True)
        merged = np.bincount(inverse.reshape(-1), weights=w, minlength=unique.shape[0])
        merged = merged / merged.sum()
        support = PointCloud(points=unique, resolution=resolution, label=label)
        return cls(support=support, weights=merged)


class KernelFamily(str, Enum):
    """Famílias de kernels de energia."""
    BOX_PROFILE = "box_profile"
    INTERMEDIATE_PROFILE = "intermediate_profile"


class KernelSpec(FrozenModel):
    """
    Parâmetros de um kernel φ.

    box_profile: min{1, (r/|x|)^s}.
    intermediate_profile: 1 se |x| < r; (r/|x|)^s se r ≤ |x| < r^θ;
    r^{θ(k−s)+s}/|x|^k se |x| ≥ r^θ.
    """

    family: KernelFamily
    r: float = Field(gt=0.0, lt=1.0)
    s: float = Field(ge=0.0)
    k: Optional[int] = Field(default=None, ge=1)
    theta: Optional[float] = Field(default=None, gt=0.0, le=1.0)

    @model_validator(mode="after")
    def check_family(self) -> "KernelSpec":
        if self.family == KernelFamily.INTERMEDIATE_PROFILE:
            if self.k is None or self.theta is None:
                raise ValueError("Kernel intermediate_profile exige k e theta")
            if self.s > self.k:
                raise ValueError(f"Kernel intermediate_profile exige s ≤ k (s={self.s}, k={self.k})")
        return self

    @classmethod
    def box(cls, r: float, s: float) -> "KernelSpec":
        return cls(family=KernelFamily.BOX_PROFILE, r=r, s=s)

    @classmethod
    def intermediate(cls, r: float, s: float, k: int, theta: float) -> "KernelSpec":
        return cls(family=KernelFamily.INTERMEDIATE_PROFILE, r=r, s=s, k=k, theta=theta)


class EquilibriumSolution(FrozenModel):
    """
    Medida de equilíbrio com diagnósticos do Frank–Wolfe.

    gap é o gap de dualidade final; kkt_verified indica que o sistema de
    igualdade no suporte foi resolvido com pesos positivos e potencial
    ≥ energia − tolerância fora do suporte.
    """

    measure: DiscreteMeasure
    energy: float = Field(gt=0.0)
    gap: float
    iterations: int = Field(ge=0)
    converged: bool
    kkt_verified: bool = False

    @property
    def capacity(self) -> float:
        return 1.0 / self.energy

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.measure.weights > 0))

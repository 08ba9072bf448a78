"""
Subespaços da grassmanniana G(d, k) e resultados de varreduras de direções.
"""

import hashlib
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import Field, field_serializer, field_validator, model_validator

from scr.core.model.base import FrozenModel, array_to_list

# tolerância de ortonormalidade do referencial
ORTHONORMAL_TOL = 1e-12


class Subspace(FrozenModel):
    """
    Elemento V de G(d, k) dado por um k-referencial ortonormal.

    frame tem forma (k, d); P_V(x) = frame · x em coordenadas de R^k.
    """

    d: int = Field(ge=2)
    k: int = Field(ge=1)
    frame: np.ndarray
    angle: Optional[float] = Field(default=None, description="Ângulo da reta em G(2,1)")

    @field_validator("frame", mode="before")
    @classmethod
    def to_frame(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_frame(self) -> "Subspace":
        if not 1 <= self.k < self.d:
            raise ValueError(f"Subespaço exige 1 ≤ k < d (k={self.k}, d={self.d})")
        if self.frame.shape != (self.k, self.d):
            raise ValueError(f"Referencial deve ter forma ({self.k}, {self.d}), recebido {self.frame.shape}")
        residual = np.abs(self.frame @ self.frame.T - np.eye(self.k)).max()
        if residual > ORTHONORMAL_TOL:
            raise ValueError(f"Referencial não ortonormal (resíduo {residual:.3g})")
        return self

    @field_serializer("frame", when_used="json")
    def serialize_frame(self, v: np.ndarray):
        return array_to_list(v)

    def project(self, points: np.ndarray) -> np.ndarray:
        """Coordenadas de P_V(x) no referencial, forma (n, k)."""
        return np.asarray(points, dtype=np.float64) @ self.frame.T

    def embed(self, y: np.ndarray) -> np.ndarray:
        """Mergulha y ∈ R^k em V ⊆ R^d (y ↦ y_V)."""
        return np.asarray(y, dtype=np.float64) @ self.frame

    def frame_hash(self) -> str:
        """Hash curto e estável do referencial."""
        return hashlib.sha256(np.ascontiguousarray(self.frame).tobytes()).hexdigest()[:12]

    def label(self) -> str:
        if self.angle is not None:
            return repr(float(self.angle))
        return self.frame_hash()


class EstimatorKind(str, Enum):
    """Estimadores aplicáveis a nuvens projetadas."""
    BOX = "box"
    ASSOUAD = "assouad"
    ASSOUAD_SPECTRUM = "assouad_spectrum"
    INTERMEDIATE = "intermediate"
    FOURIER = "fourier"


# estimadores que exigem θ
_THETA_ESTIMATORS = {
    EstimatorKind.ASSOUAD_SPECTRUM,
    EstimatorKind.INTERMEDIATE,
    EstimatorKind.FOURIER,
}


class EstimatorSpec(FrozenModel):
    """Estimador nomeado com parâmetro θ opcional."""

    kind: EstimatorKind
    theta: Optional[float] = Field(default=None, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def check_theta(self) -> "EstimatorSpec":
        if self.kind in _THETA_ESTIMATORS and self.theta is None:
            raise ValueError(f"Estimador {self.kind.value} exige theta")
        if self.kind in {EstimatorKind.ASSOUAD_SPECTRUM} and not 0.0 < self.theta < 1.0:
            raise ValueError("assouad_spectrum exige theta em (0, 1)")
        if self.kind == EstimatorKind.INTERMEDIATE and self.theta == 0.0:
            raise ValueError("intermediate exige theta em (0, 1]")
        return self

    @property
    def estimator_id(self) -> str:
        if self.theta is None:
            return self.kind.value
        return f"{self.kind.value}({self.theta:g})"


class SweepResult(FrozenModel):
    """
    Estimativas por direção de uma varredura em G(d, k).

    Direções cujo estimador falhou têm estimativa NaN e a mensagem em errors.
    """

    d: int = Field(ge=2)
    k: int = Field(ge=1)
    estimator: EstimatorSpec
    directions: List[Subspace]
    estimates: np.ndarray
    is_axis: List[bool]
    errors: List[Optional[str]]

    @field_validator("estimates", mode="before")
    @classmethod
    def to_estimates(cls, v) -> np.ndarray:
        arr = np.array(v, dtype=np.float64).reshape(-1)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_sweep(self) -> "SweepResult":
        n = len(self.directions)
        if not (self.estimates.shape[0] == len(self.is_axis) == len(self.errors) == n):
            raise ValueError("Campos da varredura com tamanhos diferentes")
        finite = self.estimates[np.isfinite(self.estimates)]
        if np.any(finite < -1e-9) or np.any(finite > self.k + 1e-9):
            raise ValueError(f"Estimativas fora de [0, {self.k}]")
        return self

    @field_serializer("estimates", when_used="json")
    def serialize_estimates(self, v: np.ndarray):
        return [None if not np.isfinite(x) else float(x) for x in v]

    @property
    def estimator_id(self) -> str:
        return self.estimator.estimator_id

    def valid_estimates(self, generic_only: bool = False) -> np.ndarray:
        """Estimativas finitas, opcionalmente excluindo direções de eixo."""
        mask = np.isfinite(self.estimates)
        if generic_only:
            mask &= ~np.array(self.is_axis, dtype=bool)
        return self.estimates[mask]

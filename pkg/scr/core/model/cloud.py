"""
Nuvens de pontos, cubos diádicos e especificações de geradores.

Uma PointCloud é a δ-aproximação finita de um conjunto ideal X ⊆ R^d:
todo ponto de X está a distância ≤ δ de algum ponto armazenado, medida
na norma do máximo (a mesma das células da grade).
"""

from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import Field, computed_field, field_serializer, field_validator, model_validator

from scr.core.model.base import FrozenModel, array_to_list


class PointCloud(FrozenModel):
    """
    Conjunto finito de pontos em R^d com resolução declarada.

    Os pontos são normalizados na criação: float64, sem duplicatas
    (igualdade exata de coordenadas) e em ordem lexicográfica.
    """

    points: np.ndarray
    resolution: float = Field(gt=0.0, description="Resolução δ da δ-rede")
    label: str = ""

    @field_validator("points", mode="before")
    @classmethod
    def normalize_points(cls, v) -> np.ndarray:
        """Converte para (n, d), funde duplicatas e ordena lexicograficamente."""
        arr = np.array(v, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise ValueError("Nuvem deve conter ao menos um ponto com d ≥ 1 coordenadas")
        if not np.all(np.isfinite(arr)):
            raise ValueError("Nuvem contém coordenadas não finitas")
        # -0.0 + 0.0 == +0.0, evita duplicatas por bit de sinal
        arr = np.unique(arr + 0.0, axis=0)
        arr.setflags(write=False)
        return arr

    @field_serializer("points", when_used="json")
    def serialize_points(self, v: np.ndarray):
        return array_to_list(v)

    @computed_field
    @property
    def dim_ambient(self) -> int:
        return int(self.points.shape[1])

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def finest_level(self) -> int:
        """Maior nível diádico j com 2^-j ≥ resolução."""
        return int(np.floor(-np.log2(self.resolution) + 1e-9))


class DyadicCube(FrozenModel):
    """
    Cubo diádico semiaberto [a, a + 2^-j)^d.

    O canto é guardado como índices inteiros, portanto é sempre múltiplo
    exato do lado.
    """

    level: int = Field(ge=0)
    index: Tuple[int, ...]

    @computed_field
    @property
    def side(self) -> float:
        return 2.0 ** (-self.level)

    @computed_field
    @property
    def corner(self) -> Tuple[float, ...]:
        return tuple(i * self.side for i in self.index)


class GeneratorKind(str, Enum):
    """Famílias de conjuntos canônicos."""
    SEQUENCE_SET = "sequence_set"
    SEGMENT = "segment"
    GRID_SQUARE = "grid_square"
    CANTOR = "cantor"
    PRODUCT = "product"
    EXPLICIT_POINTS = "explicit_points"


class GeneratorSpec(FrozenModel):
    """
    Especificação serializável de um gerador de nuvem.

    JSON: {"kind": "sequence_set", "p": 1.0, "delta": 0.0009765625}
    """

    kind: GeneratorKind
    delta: float = Field(gt=0.0, description="Resolução δ alvo")
    p: Optional[float] = None
    c: Optional[float] = None
    m: Optional[int] = None
    factors: Optional[List["GeneratorSpec"]] = None
    points: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def check_parameters(self) -> "GeneratorSpec":
        """Valida parâmetros exigidos por cada família."""
        if self.kind == GeneratorKind.SEQUENCE_SET:
            if self.p is None or self.p <= 0:
                raise ValueError("sequence_set exige p > 0")
        elif self.kind == GeneratorKind.CANTOR:
            if self.m is None or self.m < 2:
                raise ValueError("cantor exige m ≥ 2 cópias")
            if self.c is None or not 0.0 < self.c < 1.0:
                raise ValueError("cantor exige 0 < c < 1")
            if self.m * self.c > 1.0 + 1e-12:
                raise ValueError("cantor exige m·c ≤ 1")
        elif self.kind == GeneratorKind.PRODUCT:
            if not self.factors or len(self.factors) != 2:
                raise ValueError("product exige exatamente dois fatores")
        elif self.kind == GeneratorKind.EXPLICIT_POINTS:
            if not self.points:
                raise ValueError("explicit_points exige ao menos um ponto")
            dims = {len(pt) for pt in self.points}
            if len(dims) != 1 or 0 in dims:
                raise ValueError("explicit_points exige pontos com a mesma dimensão")
        return self

    @property
    def dim_ambient(self) -> int:
        """Dimensão ambiente da nuvem gerada."""
        if self.kind == GeneratorKind.GRID_SQUARE:
            return 2
        if self.kind == GeneratorKind.PRODUCT:
            return sum(f.dim_ambient for f in self.factors)
        if self.kind == GeneratorKind.EXPLICIT_POINTS:
            return len(self.points[0])
        return 1

    def to_json(self) -> str:
        return self.model_dump_json(exclude_none=True)

    @classmethod
    def from_json(cls, data: str) -> "GeneratorSpec":
        return cls.model_validate_json(data)


def uniform_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Grade k·step em [start, stop], incluindo stop quando múltiplo exato."""
    n = int(np.floor((stop - start) / step + 1e-9))
    return start + step * np.arange(n + 1, dtype=np.float64)


__all__ = [
    "PointCloud",
    "DyadicCube",
    "GeneratorKind",
    "GeneratorSpec",
    "uniform_grid",
]

"""
Base comum dos modelos de domínio.

Modelos imutáveis com suporte a campos numpy (normalizados para float64,
somente leitura) e serialização JSON como listas.
"""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict


class FrozenModel(BaseModel):
    """Modelo pydantic imutável que aceita arrays numpy."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    def __hash__(self) -> int:
        # arrays não são hashable; identidade basta para cache local
        return id(self)


def as_float_array(value: Any, ndim: int = 1) -> np.ndarray:
    """
    Converte entrada em array float64 somente leitura.

    Args:
        value: Sequência ou array
        ndim: Número de eixos esperado (1 ou 2)

    Returns:
        Array float64 com flag de escrita desligada

    Raises:
        ValueError: Se a forma ou os valores forem inválidos
    """
    arr = np.array(value, dtype=np.float64)
    if ndim == 2 and arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != ndim:
        raise ValueError(f"Esperado array com {ndim} eixo(s), recebido {arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("Array contém valores não finitos")
    arr.setflags(write=False)
    return arr


def as_int_array(value: Any) -> np.ndarray:
    """Converte entrada em array int64 unidimensional somente leitura."""
    arr = np.array(value, dtype=np.int64).reshape(-1)
    arr.setflags(write=False)
    return arr


def array_to_list(value: Any) -> Any:
    """Serializa arrays numpy como listas Python."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value

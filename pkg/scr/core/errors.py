"""
Hierarquia de exceções do dimlab.

Todas derivam de ValueError para que validadores pydantic possam levantá-las
e para que chamadores possam capturar o contrato genérico de ValueError.
"""


class DimlabError(ValueError):
    """Erro base de todos os estimadores."""


class ParameterDomainError(DimlabError):
    """Parâmetro fora do domínio permitido."""


class ResolutionExceededError(DimlabError):
    """Escala pedida abaixo da resolução δ da nuvem."""

    def __init__(self, scale: float, resolution: float):
        self.scale = scale
        self.resolution = resolution
        super().__init__(f"Escala {scale:.6g} abaixo da resolução {resolution:.6g}")


class InsufficientScalesError(DimlabError):
    """Não há níveis diádicos suficientes para um ajuste."""


class NoValidScalePairsError(DimlabError):
    """Nenhum par de escalas (R, r) compatível com θ e δ."""


class InsufficientTailError(DimlabError):
    """Curva sem pontos suficientes com θ próximo de 1."""


class InsufficientSmallThetaError(DimlabError):
    """Curva sem valores de θ pequenos o bastante."""


class CutoffExceedsResolutionError(DimlabError):
    """Frequência de corte acima de 1/(4δ)."""


class DimensionMismatchError(DimlabError):
    """Dimensões ambientes incompatíveis."""


class UnknownExampleError(DimlabError):
    """Exemplo ou combinação exemplo/espectro desconhecida."""

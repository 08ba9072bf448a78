"""
Números de cobertura por contagem de grade e ajustes log-log.

Contagens usam cubos diádicos de nível ⌈log2(1/r)⌉ no lugar de coberturas
mínimas por conjuntos de diâmetro r; constantes multiplicativas somem nas
inclinações.
"""

from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.spatial import cKDTree

from scr.core.errors import InsufficientScalesError, ParameterDomainError, ResolutionExceededError
from scr.core.geometry import cell_codes, dyadic_codes, grid_indices
from scr.core.model.cloud import PointCloud
from scr.core.model.curves import CountCurve, CountKind, SlopeFit

# janela (em níveis) das inclinações de corda
CHORD_WINDOW = 4
# número mínimo de níveis para estimar dimensão de caixa
MIN_BOX_LEVELS = 4


def scale_level(r: float) -> int:
    """Nível diádico ⌈log2(1/r)⌉."""
    return int(np.ceil(-np.log2(r) - 1e-9))


def box_count(cloud: PointCloud, r: float) -> int:
    """
    Conta cubos diádicos ocupados no nível ⌈log2(1/r)⌉.

    Args:
        cloud: Nuvem de pontos
        r: Escala de cobertura

    Returns:
        Número de cubos ocupados (≥ 1)

    Raises:
        ResolutionExceededError: Se r < resolução da nuvem
    """
    if r < cloud.resolution:
        raise ResolutionExceededError(r, cloud.resolution)
    return int(np.unique(dyadic_codes(cloud, scale_level(r))).size)


def local_box_count(cloud: PointCloud, center: Sequence[float], R: float, r: float) -> int:
    """
    Contagem de grade dos pontos a distância ≤ R do centro, na escala r.

    Args:
        cloud: Nuvem de pontos
        center: Ponto da nuvem
        R: Raio da bola
        r: Escala de cobertura (r < R)

    Returns:
        Número de cubos diádicos ocupados pelos pontos da bola

    Raises:
        ResolutionExceededError: Se r < resolução
        ParameterDomainError: Se r ≥ R ou o centro não pertence à nuvem
    """
    if r < cloud.resolution:
        raise ResolutionExceededError(r, cloud.resolution)
    if not r < R:
        raise ParameterDomainError(f"Contagem local exige r < R (r={r}, R={R})")
    center = np.asarray(center, dtype=np.float64).reshape(-1)
    if center.shape[0] != cloud.dim_ambient:
        raise ParameterDomainError("Centro com dimensão diferente da nuvem")
    tree = cKDTree(cloud.points)
    dist, _ = tree.query(center)
    if dist > 0:
        raise ParameterDomainError("Centro da bola deve ser um ponto da nuvem")
    inside = np.asarray(tree.query_ball_point(center, R), dtype=np.int64)
    idx = grid_indices(
        cloud.points[inside],
        2.0 ** (-scale_level(r)),
        top=cloud.points.max(axis=0),
        bottom=cloud.points.min(axis=0),
    )
    return int(np.unique(cell_codes(idx)).size)


def count_curve(cloud: PointCloud, levels: Iterable[int]) -> CountCurve:
    """CountCurve global nos níveis diádicos dados (ordem crescente de nível)."""
    levels = sorted(set(int(j) for j in levels))
    scales = [2.0 ** (-j) for j in levels]
    counts = [box_count(cloud, r) for r in scales]
    return CountCurve(scales=scales, counts=counts, kind=CountKind.GLOBAL, resolution=cloud.resolution)


def fit_arrays(scales: Sequence[float], values: Sequence[float], window: int = CHORD_WINDOW) -> SlopeFit:
    """
    Ajuste por mínimos quadrados de log(values) contra −log(scales).

    Também calcula os extremos das inclinações de corda numa janela
    deslizante de `window` pontos.

    Args:
        scales: Escalas (positivas, distintas)
        values: Valores positivos
        window: Tamanho da janela das cordas

    Returns:
        SlopeFit; valores todos iguais dão inclinação 0 e r² = 1

    Raises:
        InsufficientScalesError: Com menos de duas escalas
    """
    r = np.asarray(scales, dtype=np.float64)
    y = np.log(np.asarray(values, dtype=np.float64))
    if r.size < 2:
        raise InsufficientScalesError(f"Ajuste exige ao menos 2 escalas, recebidas {r.size}")
    x = -np.log(r)
    order = np.argsort(x)
    x, y = x[order], y[order]
    scale_range = (float(r.min()), float(r.max()))

    if np.ptp(y) == 0:
        return SlopeFit(
            slope=0.0,
            intercept=float(y[0]),
            r_squared=1.0,
            scale_range=scale_range,
            n_points=int(r.size),
            chord_min=0.0,
            chord_max=0.0,
        )

    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - float(np.sum(residual ** 2)) / ss_tot
    width = min(window, x.size) - 1
    chords = (y[width:] - y[:-width]) / (x[width:] - x[:-width])
    return SlopeFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=float(np.clip(r_squared, 0.0, 1.0)),
        scale_range=scale_range,
        n_points=int(r.size),
        chord_min=float(chords.min()),
        chord_max=float(chords.max()),
    )


def fit_loglog(curve: CountCurve) -> SlopeFit:
    """
    Ajusta log N contra −log r numa CountCurve.

    Raises:
        InsufficientScalesError: Com menos de 3 escalas
    """
    if curve.scales.size < 3:
        raise InsufficientScalesError(f"Ajuste log-log exige ≥ 3 escalas, recebidas {curve.scales.size}")
    return fit_arrays(curve.scales, curve.counts)


def box_levels(cloud: PointCloud) -> range:
    """Níveis j = 2 .. ⌊log2(1/δ)⌋ − 1 usados na dimensão de caixa."""
    return range(2, cloud.finest_level())


def estimate_box_dimension(cloud: PointCloud) -> Tuple[float, float, SlopeFit]:
    """
    Estima as dimensões de caixa inferior e superior.

    Args:
        cloud: Nuvem com ao menos 4 níveis diádicos úteis

    Returns:
        (inferior, superior, ajuste central), todos em [0, d]

    Raises:
        InsufficientScalesError: Se a resolução não comporta 4 níveis
    """
    levels = box_levels(cloud)
    if len(levels) < MIN_BOX_LEVELS:
        raise InsufficientScalesError(
            f"Dimensão de caixa exige ≥ {MIN_BOX_LEVELS} níveis, resolução {cloud.resolution:.6g} "
            f"comporta {len(levels)}"
        )
    fit = fit_loglog(count_curve(cloud, levels))
    d = cloud.dim_ambient
    lower = float(np.clip(fit.chord_min, 0.0, d))
    upper = float(np.clip(fit.chord_max, 0.0, d))
    central = float(np.clip(fit.slope, 0.0, d))
    fit = fit.model_copy(update={"slope": central})
    logger.info(f"Dimensão de caixa de {cloud.label or 'nuvem'}: {central:.4f} [{lower:.4f}, {upper:.4f}]")
    return lower, upper, fit


def box_estimate(cloud: PointCloud, default: Optional[float] = None) -> float:
    """
    Inclinação central da dimensão de caixa.

    Com `default` definido, devolve-o quando faltam níveis em vez de levantar.
    """
    try:
        return estimate_box_dimension(cloud)[2].slope
    except InsufficientScalesError:
        if default is None:
            raise
        logger.warning(f"Níveis insuficientes para dimensão de caixa de {cloud.label}; usando {default}")
        return default

"""
Geometria básica: geradores de nuvens, decomposição diádica e subconjuntos separados.

Convenção de células: índice floor(x / lado) por coordenada (cubos
semiabertos [a, a + lado)), exceto que uma coordenada igual ao máximo da
nuvem naquele eixo e exatamente sobre uma linha da grade vai para a célula
de baixo (face superior fechada). Assim a δ-grade de [0, 1] ocupa
exatamente 2^j cubos no nível j e a relação pai = floor(índice / 2) vale
entre níveis.
"""

from typing import List, Optional, Tuple

import numpy as np
from loguru import logger
from scipy.spatial import cKDTree

from scr.core.errors import ParameterDomainError, ResolutionExceededError
from scr.core.model.cloud import DyadicCube, GeneratorKind, GeneratorSpec, PointCloud, uniform_grid

# limite de pontos gerados por uma especificação
MAX_POINTS = 5_000_000


def generate(spec: GeneratorSpec) -> PointCloud:
    """
    Gera a δ-aproximação do conjunto descrito por spec.

    Args:
        spec: Especificação validada do gerador

    Returns:
        PointCloud determinística para a mesma especificação

    Raises:
        ParameterDomainError: Se a nuvem excederia MAX_POINTS pontos
    """
    points, resolution = _generate_points(spec)
    label = generator_label(spec)
    cloud = PointCloud(points=points, resolution=resolution, label=label)
    logger.debug(f"Gerada nuvem {label} com {cloud.size} pontos (δ={resolution:.6g})")
    return cloud


def generator_label(spec: GeneratorSpec) -> str:
    """Rótulo legível do conjunto ideal, ex.: '{1/n}x[0,1]'."""
    if spec.kind == GeneratorKind.SEQUENCE_SET:
        return "{1/n}" if spec.p == 1 else f"{{n^-{spec.p:g}}}"
    if spec.kind == GeneratorKind.SEGMENT:
        return "[0,1]"
    if spec.kind == GeneratorKind.GRID_SQUARE:
        return "[0,1]^2"
    if spec.kind == GeneratorKind.CANTOR:
        return f"C({spec.c:g},{spec.m})"
    if spec.kind == GeneratorKind.PRODUCT:
        return "x".join(generator_label(f) for f in spec.factors)
    return "explicit"


def _generate_points(spec: GeneratorSpec) -> Tuple[np.ndarray, float]:
    delta = spec.delta
    if spec.kind == GeneratorKind.SEGMENT:
        return _segment(delta).reshape(-1, 1), delta
    if spec.kind == GeneratorKind.GRID_SQUARE:
        axis = _segment(delta)
        _check_size(axis.size ** 2)
        return _cartesian(axis.reshape(-1, 1), axis.reshape(-1, 1)), delta
    if spec.kind == GeneratorKind.SEQUENCE_SET:
        return _sequence_set(spec.p, delta).reshape(-1, 1), delta
    if spec.kind == GeneratorKind.CANTOR:
        return _cantor(spec.c, spec.m, delta).reshape(-1, 1), delta
    if spec.kind == GeneratorKind.PRODUCT:
        parts = []
        resolutions = []
        for factor in spec.factors:
            effective = factor.model_copy(update={"delta": min(factor.delta, delta)})
            pts, res = _generate_points(effective)
            parts.append(pts)
            resolutions.append(res)
        _check_size(parts[0].shape[0] * parts[1].shape[0])
        # na norma do máximo o produto de δ_i-redes é uma max(δ_i)-rede;
        # na euclidiana o raio seria √2·max(δ_i)
        return _cartesian(parts[0], parts[1]), max(resolutions)
    return np.array(spec.points, dtype=np.float64), delta


def _segment(delta: float) -> np.ndarray:
    pts = uniform_grid(0.0, 1.0, delta)
    _check_size(pts.size)
    if pts[-1] < 1.0:
        pts = np.append(pts, 1.0)
    return pts


def _sequence_set(p: float, delta: float) -> np.ndarray:
    """
    Pontos n^-p enquanto o espaçamento até o anterior é ≥ δ, seguidos de
    uma δ-grade na cauda [0, n0^-p).
    """
    n_max = int(np.ceil((p / delta) ** (1.0 / (p + 1.0)))) * 2 + 2
    _check_size(n_max)
    n = np.arange(1, n_max + 1, dtype=np.float64)
    values = n ** (-p)
    gaps = values[:-1] - values[1:]
    n0 = 1 + int(np.count_nonzero(gaps >= delta))
    head = values[:n0]
    tail = np.arange(0.0, head[-1], delta)
    _check_size(head.size + tail.size)
    return np.concatenate([head, tail])


def _cantor(c: float, m: int, delta: float) -> np.ndarray:
    """Extremos esquerdos dos intervalos do nível L com c^L ≤ δ."""
    depth = max(0, int(np.ceil(np.log(delta) / np.log(c) - 1e-12)))
    _check_size(m ** depth)
    offsets = np.linspace(0.0, 1.0 - c, m)
    points = np.zeros(1)
    scale = 1.0
    for _ in range(depth):
        points = (points[:, None] + scale * offsets[None, :]).reshape(-1)
        scale *= c
    return points


def _cartesian(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    left = np.repeat(a, b.shape[0], axis=0)
    right = np.tile(b, (a.shape[0], 1))
    return np.hstack([left, right])


def _check_size(n: int) -> None:
    if n > MAX_POINTS:
        raise ParameterDomainError(f"Nuvem com {n} pontos excede o limite de {MAX_POINTS}")


def grid_indices(
    points: np.ndarray,
    side: float,
    top: Optional[np.ndarray] = None,
    bottom: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Índices inteiros das células de lado `side` que contêm cada ponto.

    Args:
        points: Array (n, d)
        side: Lado da célula (diádico ou não)
        top: Máximo da nuvem por eixo; pontos nesse máximo e sobre uma
            linha da grade vão para a célula de baixo
        bottom: Mínimo da nuvem por eixo; eixos degenerados não sofrem o ajuste

    Returns:
        Array int64 (n, d)
    """
    scaled = points / side
    idx = np.floor(scaled)
    top = points.max(axis=0) if top is None else top
    bottom = points.min(axis=0) if bottom is None else bottom
    on_top = (points == top) & (scaled == idx) & (top > bottom)
    idx = idx.astype(np.int64)
    idx[on_top] -= 1
    return idx


def cell_codes(idx: np.ndarray) -> np.ndarray:
    """
    Código inteiro único por célula, crescente na ordem lexicográfica dos índices.

    Args:
        idx: Índices inteiros (n, d)

    Returns:
        Array int64 (n,) com códigos comparáveis entre si
    """
    shifted = idx - idx.min(axis=0)
    dims = shifted.max(axis=0) + 1
    if float(np.prod(dims.astype(np.float64))) < 2.0 ** 62:
        return np.ravel_multi_index(tuple(shifted.T), tuple(int(x) for x in dims))
    _, inverse = np.unique(shifted, axis=0, return_inverse=True)
    return inverse.reshape(-1).astype(np.int64)


def dyadic_codes(cloud: PointCloud, level: int) -> np.ndarray:
    """Código da célula diádica de nível `level` de cada ponto da nuvem."""
    side = 2.0 ** (-level)
    return cell_codes(grid_indices(cloud.points, side))


def dyadic_decompose(cloud: PointCloud, level: int) -> List[Tuple[DyadicCube, np.ndarray]]:
    """
    Atribui cada ponto ao cubo diádico de nível `level` que o contém.

    Args:
        cloud: Nuvem de pontos
        level: Nível j ≥ 0 (lado 2^-j)

    Returns:
        Lista (cubo, índices dos pontos) só com cubos não vazios, ordenada pelo canto

    Raises:
        ParameterDomainError: Se level < 0
    """
    if level < 0:
        raise ParameterDomainError(f"Nível diádico deve ser ≥ 0, recebido {level}")
    idx = grid_indices(cloud.points, 2.0 ** (-level))
    cubes, inverse = np.unique(idx, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    order = np.argsort(inverse, kind="stable")
    bounds = np.cumsum(np.bincount(inverse, minlength=cubes.shape[0]))[:-1]
    members = np.split(order, bounds)
    return [
        (DyadicCube(level=level, index=tuple(int(v) for v in cube)), pts)
        for cube, pts in zip(cubes, members)
    ]


def maximal_separated_subset(cloud: PointCloud, r: float) -> PointCloud:
    """
    Subconjunto r-separado maximal por inserção gulosa em ordem lexicográfica.

    Pontos aceitos estão a distância > r entre si e todo ponto da nuvem está
    a distância ≤ r de algum ponto aceito. O subconjunto herda rótulo e
    resolução da nuvem.

    Args:
        cloud: Nuvem de origem
        r: Escala de separação

    Returns:
        PointCloud com os pontos aceitos

    Raises:
        ResolutionExceededError: Se r < resolução da nuvem
    """
    if r < cloud.resolution:
        raise ResolutionExceededError(r, cloud.resolution)
    points = cloud.points
    tree = cKDTree(points)
    covered = np.zeros(cloud.size, dtype=bool)
    chosen = []
    for i in range(cloud.size):
        if covered[i]:
            continue
        chosen.append(i)
        covered[tree.query_ball_point(points[i], r)] = True
    logger.debug(f"Subconjunto {r:.4g}-separado com {len(chosen)} de {cloud.size} pontos")
    return PointCloud(points=points[chosen], resolution=cloud.resolution, label=cloud.label)

"""
Dimensões intermediárias por coberturas diádicas ótimas.

A árvore de cubos ocupados é construída uma vez por nuvem; cada custo
mínimo Σ|U_i|^s com diâmetros em [r^{1/θ}, r] sai de uma programação
dinâmica de baixo para cima: custo(Q) = min(lado(Q)^s, Σ custo(filhos)),
com cubos do nível mais fino forçados a usar o próprio custo. O lado do
cubo faz o papel do diâmetro (o fator √d^s some nas inclinações).
"""

from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.optimize import bisect, isotonic_regression

from scr.core.covering import fit_arrays
from scr.core.errors import (
    InsufficientScalesError,
    ParameterDomainError,
    ResolutionExceededError,
)
from scr.core.geometry import grid_indices
from scr.core.model.cloud import PointCloud
from scr.core.model.curves import CoverCost, IntermediateCurve, IntermediateEstimate, SlopeFit, SpectrumCurve

# tolerância da bisseção em s
BISECT_TOL = 1e-3
# mínimo de escalas no ajuste do custo
MIN_COST_SCALES = 3
# grade padrão de θ
DEFAULT_THETAS = tuple(round(0.05 * k, 2) for k in range(1, 21))


class CubeTree:
    """
    Árvore dos cubos diádicos ocupados de nível 0 até o nível mais fino.

    parents[j][c] é o índice, no nível j−1, do pai do cubo c do nível j.
    """

    def __init__(self, cloud: PointCloud, max_level: Optional[int] = None):
        self.cloud = cloud
        self.max_level = cloud.finest_level() if max_level is None else max_level
        if self.max_level < 0:
            raise ParameterDomainError("Resolução maior que 1 não comporta árvore diádica")
        finest = np.unique(grid_indices(cloud.points, 2.0 ** (-self.max_level)), axis=0)
        self.cells: List[np.ndarray] = [finest]
        self.parents: List[Optional[np.ndarray]] = [None]
        for _ in range(self.max_level):
            cells, inverse = np.unique(self.cells[0] >> 1, axis=0, return_inverse=True)
            self.parents[0] = inverse.reshape(-1)
            self.cells.insert(0, cells)
            self.parents.insert(0, None)
        logger.debug(
            f"Árvore diádica com {self.max_level + 1} níveis e {finest.shape[0]} folhas"
        )

    def count(self, level: int) -> int:
        """Cubos ocupados no nível."""
        return int(self.cells[level].shape[0])

    def solve(self, j_top: int, j_bot: int, s: float) -> Tuple[float, Dict[int, int]]:
        """
        Custo ótimo e histograma de níveis da cobertura ótima.

        Empates entre o próprio cubo e os filhos ficam com o próprio cubo.
        """
        costs = {j_bot: np.full(self.count(j_bot), 2.0 ** (-j_bot * s))}
        own_choice = {j_bot: np.ones(self.count(j_bot), dtype=bool)}
        for j in range(j_bot - 1, j_top - 1, -1):
            children = np.bincount(self.parents[j + 1], weights=costs[j + 1], minlength=self.count(j))
            own = 2.0 ** (-j * s)
            own_choice[j] = own <= children
            costs[j] = np.where(own_choice[j], own, children)

        histogram: Dict[int, int] = {}
        active = np.ones(self.count(j_top), dtype=bool)
        for j in range(j_top, j_bot + 1):
            chosen = active & own_choice[j]
            if chosen.any():
                histogram[j] = int(np.count_nonzero(chosen))
            if j < j_bot:
                descend = active & ~own_choice[j]
                active = descend[self.parents[j + 1]]
        return float(costs[j_top].sum()), histogram


def _dyadic_level(r: float) -> int:
    level = -np.log2(r)
    rounded = int(round(level))
    if rounded < 0 or abs(level - rounded) > 1e-9:
        raise ParameterDomainError(f"Escala r={r} não é diádica")
    return rounded


def bottom_level(j_top: int, theta: float) -> int:
    """Nível j_bot = ⌈j_top / θ⌉ correspondente a r^{1/θ}."""
    return int(np.ceil(j_top / theta - 1e-9))


def optimal_cover_cost(
    cloud: PointCloud,
    r: float,
    theta: float,
    s: float,
    tree: Optional[CubeTree] = None,
) -> CoverCost:
    """
    Custo mínimo de coberturas por cubos diádicos com lados em [r^{1/θ}, r].

    Args:
        cloud: Nuvem de pontos
        r: Escala grossa diádica 2^-j_top
        theta: θ em (0, 1]
        s: Expoente em [0, d]
        tree: Árvore pré-construída (reutilizada entre chamadas)

    Returns:
        CoverCost com custo e histograma de níveis da cobertura ótima

    Raises:
        ParameterDomainError: Se r não é diádica, θ ∉ (0, 1] ou s ∉ [0, d]
        ResolutionExceededError: Se r^{1/θ} < resolução
    """
    if not 0.0 < theta <= 1.0:
        raise ParameterDomainError(f"θ deve estar em (0, 1], recebido {theta}")
    if not 0.0 <= s <= cloud.dim_ambient:
        raise ParameterDomainError(f"s deve estar em [0, {cloud.dim_ambient}], recebido {s}")
    j_top = _dyadic_level(r)
    j_bot = bottom_level(j_top, theta)
    tree = tree if tree is not None else CubeTree(cloud)
    if j_bot > tree.max_level:
        raise ResolutionExceededError(2.0 ** (-j_bot), cloud.resolution)
    cost, histogram = tree.solve(j_top, j_bot, s)
    return CoverCost(r=r, theta=theta, s=s, cost=cost, j_top=j_top, j_bot=j_bot, witness_levels=histogram)


def _cost_levels(tree: CubeTree, theta: float) -> List[int]:
    top = int(np.floor(theta * tree.max_level + 1e-9))
    return [j for j in range(2, top + 1) if bottom_level(j, theta) <= tree.max_level]


def _cost_fit(tree: CubeTree, levels: Sequence[int], theta: float, s: float) -> SlopeFit:
    costs = [tree.solve(j, bottom_level(j, theta), s)[0] for j in levels]
    return fit_arrays([2.0 ** (-j) for j in levels], costs)


def _slope_root(h: Callable[[float], float], d: float, tol: float, label: str) -> float:
    """Raiz de h em [0, d] por bisseção; sem troca de sinal devolve o extremo."""
    h_low, h_high = h(0.0), h(d)
    if h_low <= 0.0:
        return 0.0
    if h_high >= 0.0:
        logger.warning(f"{label} sem troca de sinal; usando extremo s={d:g}")
        return d
    return float(bisect(h, 0.0, d, xtol=tol))


def intermediate_dimension(
    cloud: PointCloud,
    theta: float,
    tree: Optional[CubeTree] = None,
    tol: float = BISECT_TOL,
) -> IntermediateEstimate:
    """
    Estima a dimensão intermediária em θ.

    A estimativa central é a raiz de g(s) = inclinação de log custo(r, θ, s)
    contra −log r, por bisseção em [0, d]. As raízes das inclinações de
    corda mínima e máxima dão as estimativas inferior e superior. A
    testemunha é a cobertura ótima na escala admissível mais fina com
    s = estimativa central.

    Returns:
        IntermediateEstimate com estimativa, extremos de corda, ajuste e testemunha

    Raises:
        ParameterDomainError: Se θ ∉ (0, 1]
        InsufficientScalesError: Com menos de 3 escalas admissíveis
    """
    if not 0.0 < theta <= 1.0:
        raise ParameterDomainError(f"θ deve estar em (0, 1], recebido {theta}")
    tree = tree if tree is not None else CubeTree(cloud)
    levels = _cost_levels(tree, theta)
    if len(levels) < MIN_COST_SCALES:
        raise InsufficientScalesError(
            f"Dimensão intermediária em θ={theta:g} exige ≥ {MIN_COST_SCALES} escalas, "
            f"resolução comporta {len(levels)}"
        )
    d = float(cloud.dim_ambient)
    fits: Dict[float, SlopeFit] = {}

    def fit_at(s: float) -> SlopeFit:
        if s not in fits:
            fits[s] = _cost_fit(tree, levels, theta, s)
        return fits[s]

    estimate = _slope_root(lambda s: fit_at(s).slope, d, tol, f"g(s) em θ={theta:g}")
    lower = _slope_root(lambda s: fit_at(s).chord_min, d, tol, f"corda mínima em θ={theta:g}")
    upper = _slope_root(lambda s: fit_at(s).chord_max, d, tol, f"corda máxima em θ={theta:g}")
    witness = optimal_cover_cost(cloud, 2.0 ** (-levels[-1]), theta, estimate, tree)
    logger.debug(
        f"Dimensão intermediária θ={theta:g}: {estimate:.4f} "
        f"[{lower:.4f}, {upper:.4f}] ({len(levels)} escalas)"
    )
    return IntermediateEstimate(
        theta=theta, estimate=estimate, lower=lower, upper=upper, fit=fit_at(estimate), witness=witness
    )


def intermediate_curve(
    cloud: PointCloud,
    thetas: Sequence[float] = DEFAULT_THETAS,
    tree: Optional[CubeTree] = None,
) -> IntermediateCurve:
    """
    Curva θ → dimensão intermediária com projeção isotônica.

    θ sem escalas suficientes são pulados e registrados; a maior correção
    feita pela projeção fica em `adjustment`. Os extremos de corda e as
    testemunhas acompanham cada θ sem a projeção.

    Raises:
        InsufficientScalesError: Se nenhum θ da grade tiver escalas suficientes
    """
    tree = tree if tree is not None else CubeTree(cloud)
    kept: List[IntermediateEstimate] = []
    skipped: List[float] = []
    for theta in sorted(float(t) for t in thetas):
        try:
            kept.append(intermediate_dimension(cloud, theta, tree))
        except InsufficientScalesError as e:
            logger.warning(f"θ={theta:g} pulado: {e}")
            skipped.append(theta)
    if not kept:
        raise InsufficientScalesError(f"Nenhum θ da grade comporta a resolução {cloud.resolution:.6g}")
    raw = np.array([e.estimate for e in kept])
    monotone = isotonic_regression(raw, increasing=True).x
    monotone = np.clip(monotone, 0.0, cloud.dim_ambient)
    adjustment = float(np.abs(monotone - raw).max())
    logger.info(
        f"Curva intermediária de {cloud.label or 'nuvem'} em {len(kept)} valores de θ "
        f"(ajuste isotônico {adjustment:.4f})"
    )
    return IntermediateCurve(
        thetas=[e.theta for e in kept],
        values=monotone,
        fit_r2=[e.fit.r_squared for e in kept],
        n_anchors=[e.fit.n_points for e in kept],
        lower=[e.lower for e in kept],
        upper=[e.upper for e in kept],
        witnesses=[e.witness for e in kept],
        dim_ambient=cloud.dim_ambient,
        kind="intermediate",
        skipped=skipped,
        adjustment=adjustment,
    )


def hausdorff_proxy(curve: SpectrumCurve) -> float:
    """
    Extrapolação linear θ → 0 pelos dois menores θ da curva.

    Limitada a [0, menor valor da curva]; é uma cota superior para o
    comportamento de dim_H, não um estimador dele.
    """
    values = curve.values
    if values.size == 1:
        return float(np.clip(values[0], 0.0, values[0]))
    t1, t2 = curve.thetas[0], curve.thetas[1]
    v1, v2 = values[0], values[1]
    extrapolated = v1 - t1 * (v2 - v1) / (t2 - t1)
    return float(np.clip(extrapolated, 0.0, values.min()))

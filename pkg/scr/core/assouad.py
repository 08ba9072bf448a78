"""
Dimensão de Assouad, espectro de Assouad, espectro superior e quasi-Assouad.

As contagens em duas escalas usam cubos âncora diádicos de lado R = 2^-i
no lugar das bolas B(x, R). Cada âncora é dividida em m^d subcubos de lado
r = R/m, com m = ⌊R/R^{1/θ}⌋, de modo que r ≥ R^{1/θ} fica o mais perto
possível de R^{1/θ} e a grade fina encaixa na grade das âncoras. Conta-se o
número de subcubos ocupados em cada âncora; o máximo sobre todas as âncoras
ocupadas forma o envelope cujo crescimento em log m estima o expoente.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from scr.core.covering import box_estimate, estimate_box_dimension, fit_arrays
from scr.core.errors import (
    InsufficientScalesError,
    InsufficientTailError,
    NoValidScalePairsError,
    ParameterDomainError,
    ResolutionExceededError,
)
from scr.core.geometry import cell_codes, grid_indices
from scr.core.model.cloud import PointCloud
from scr.core.model.curves import SpectrumCurve, TwoScaleSample

# máximo de amostras devolvidas por two_scale_samples
MAX_CENTERS = 4096
# θ a partir do qual a cauda entra na extrapolação quasi-Assouad
TAIL_THETA = 0.7
MIN_TAIL_POINTS = 3
# níveis mínimos para a dimensão de Assouad
MIN_ASSOUAD_LEVELS = 5
# separação mínima j - i dos pares da estimativa estabilizada
STABLE_GAP = 4


def _subdivisions(R: float, r: float) -> int:
    """Maior m com R/m ≥ r."""
    return int(np.floor(R / r * (1.0 + 1e-12)))


def _anchor_counts(cloud: PointCloud, R: float, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Subcubos de lado R/m ocupados em cada cubo âncora de lado R.

    Returns:
        (contagens, índice do primeiro ponto de cada âncora), uma entrada por
        âncora ocupada, na ordem lexicográfica das âncoras
    """
    points = cloud.points
    top, bottom = points.max(axis=0), points.min(axis=0)
    anchor_idx = grid_indices(points, R, top, bottom)
    # posição relativa dentro da âncora; a face superior fechada cai em m - 1
    sub = np.floor((points / R - anchor_idx) * m).astype(np.int64)
    np.clip(sub, 0, m - 1, out=sub)
    _, first, inverse = np.unique(cell_codes(anchor_idx), return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    fine = cell_codes(sub)
    order = np.lexsort((fine, inverse))
    owner, fine = inverse[order], fine[order]
    new = np.ones(owner.size, dtype=bool)
    new[1:] = (owner[1:] != owner[:-1]) | (fine[1:] != fine[:-1])
    counts = np.bincount(owner[new], minlength=first.size)
    return counts, first


def two_scale_samples(
    cloud: PointCloud,
    R: float,
    r: float,
    max_centers: int = MAX_CENTERS,
) -> List[TwoScaleSample]:
    """
    Amostras N_r(Q ∩ X) para os cubos âncora Q de lado R.

    A escala fina é arredondada para R/⌊R/r⌋. Quando há mais de
    `max_centers` âncoras ficam as de maior contagem (empates pela ordem
    das âncoras). O centro registrado de cada amostra é o primeiro ponto
    (lexicográfico) da nuvem dentro da âncora.

    Raises:
        ResolutionExceededError: Se r < resolução
        ParameterDomainError: Se R/r < 2
    """
    if r < cloud.resolution:
        raise ResolutionExceededError(r, cloud.resolution)
    m = _subdivisions(R, r)
    if m < 2:
        raise ParameterDomainError(f"Amostra em duas escalas exige r < R e R/r ≥ 2 (r={r}, R={R})")
    counts, first = _anchor_counts(cloud, R, m)
    order = np.argsort(-counts, kind="stable")[:max_centers]
    return [
        TwoScaleSample(center=tuple(float(v) for v in cloud.points[first[k]]), R=R, r=R / m, count=int(counts[k]))
        for k in order
    ]


def _anchor_levels(theta: float, resolution: float) -> List[int]:
    """Níveis i com r = 2^{-i/θ} ≥ δ e R/r ≥ 2."""
    finest = -np.log2(resolution)
    i_min = max(1, int(np.ceil(theta / (1.0 - theta) - 1e-9)))
    i_max = int(np.floor(theta * finest + 1e-9))
    return list(range(i_min, i_max + 1))


def assouad_spectrum_point(
    cloud: PointCloud,
    theta: float,
    box: Optional[float] = None,
) -> Tuple[float, float, int]:
    """
    Estimativa do espectro de Assouad num θ.

    Usa todos os níveis âncora admissíveis e o máximo sobre todas as
    âncoras ocupadas em cada nível.

    Args:
        cloud: Nuvem de pontos
        theta: θ em (0, 1)
        box: Estimativa de caixa usada como piso (calculada se ausente)

    Returns:
        (valor em [box, d], r² do ajuste, número de escalas âncora)

    Raises:
        ParameterDomainError: Se θ ∉ (0, 1)
        NoValidScalePairsError: Se nenhum par (R, R^{1/θ}) respeita δ
    """
    if not 0.0 < theta < 1.0:
        raise ParameterDomainError(f"θ deve estar em (0, 1), recebido {theta}")
    levels = _anchor_levels(theta, cloud.resolution)
    if not levels:
        raise NoValidScalePairsError(
            f"Nenhum par de escalas para θ={theta:g} com resolução {cloud.resolution:.6g}"
        )
    d = cloud.dim_ambient
    if box is None:
        box = box_estimate(cloud, default=0.0)

    spans, maxima = [], []
    for i in levels:
        R = 2.0 ** (-i)
        m = max(2, _subdivisions(R, R ** (1.0 / theta)))
        counts, _ = _anchor_counts(cloud, R, m)
        spans.append(np.log(m))
        maxima.append(int(counts.max()))
        logger.debug(f"θ={theta:g} R=2^-{i} m={m}: máximo {maxima[-1]} de {m ** d} subcubos")

    spans = np.asarray(spans)
    if np.ptp(spans) == 0:
        value, r_squared = float(np.mean(np.log(maxima) / spans)), 0.0
    else:
        # exp(−span) faz o papel da escala em fit_arrays
        fit = fit_arrays(np.exp(-spans), maxima)
        value, r_squared = fit.slope, fit.r_squared
    value = float(np.clip(value, min(box, d), d))
    return value, float(r_squared), len(levels)


def assouad_spectrum(cloud: PointCloud, thetas: Sequence[float]) -> SpectrumCurve:
    """
    Espectro de Assouad numa grade de θ.

    θ ≥ 1 (fora do domínio do espectro) e θ sem pares de escala válidos são
    pulados e registrados em `skipped`.

    Raises:
        NoValidScalePairsError: Se todos os θ forem pulados
    """
    box = box_estimate(cloud, default=0.0)
    kept, values, r2, anchors, skipped = [], [], [], [], []
    for theta in sorted(float(t) for t in thetas):
        if theta >= 1.0:
            logger.warning(f"θ={theta:g} pulado: espectro de Assouad definido apenas em (0, 1)")
            skipped.append(theta)
            continue
        try:
            value, fit_r2, n = assouad_spectrum_point(cloud, theta, box)
        except NoValidScalePairsError as e:
            logger.warning(f"θ={theta:g} pulado: {e}")
            skipped.append(theta)
            continue
        kept.append(theta)
        values.append(value)
        r2.append(fit_r2)
        anchors.append(n)
    if not kept:
        raise NoValidScalePairsError(f"Nenhum θ da grade comporta a resolução {cloud.resolution:.6g}")
    logger.info(f"Espectro de Assouad de {cloud.label or 'nuvem'} em {len(kept)} valores de θ")
    return SpectrumCurve(
        thetas=kept,
        values=values,
        fit_r2=r2,
        n_anchors=anchors,
        dim_ambient=cloud.dim_ambient,
        kind="assouad",
        skipped=skipped,
    )


def upper_assouad_spectrum(curve: SpectrumCurve) -> SpectrumCurve:
    """Supremo acumulado em θ' ≤ θ; não decrescente e idempotente."""
    return curve.model_copy(
        update={"values": _readonly(np.maximum.accumulate(curve.values)), "kind": "upper_assouad"}
    )


def quasi_assouad(curve: SpectrumCurve) -> float:
    """
    Extrapola o espectro superior para θ → 1.

    Ajusta a reta a(θ) = a₁ − b(1 − θ) nos pontos com θ ≥ 0.7 e devolve a₁
    limitado a [max da curva, d].

    Raises:
        InsufficientTailError: Com menos de 3 pontos em θ ≥ 0.7
    """
    upper = upper_assouad_spectrum(curve)
    tail = upper.thetas >= TAIL_THETA
    if np.count_nonzero(tail) < MIN_TAIL_POINTS:
        raise InsufficientTailError(
            f"quasi-Assouad exige ≥ {MIN_TAIL_POINTS} pontos com θ ≥ {TAIL_THETA}, "
            f"encontrados {int(np.count_nonzero(tail))}"
        )
    x = 1.0 - upper.thetas[tail]
    y = upper.values[tail]
    if np.ptp(y) == 0:
        limit = float(y[0])
    else:
        _, limit = np.polyfit(x, y, 1)
    top = float(upper.values.max())
    return float(np.clip(limit, top, curve.dim_ambient))


def assouad_dimension(cloud: PointCloud) -> float:
    """
    Dimensão de Assouad por contagem de filhos diádicos.

    Para cada par de níveis i < j com j − i ≥ 2 calcula o expoente
    log(máx filhos ocupados) / ((j − i) log 2) sobre os cubos do nível i.
    A estimativa estabilizada é o máximo nos pares com j − i ≥ 4, limitado a
    [caixa superior, d].

    Raises:
        InsufficientScalesError: Com menos de 5 níveis diádicos
    """
    finest = cloud.finest_level()
    if finest < MIN_ASSOUAD_LEVELS:
        raise InsufficientScalesError(
            f"Dimensão de Assouad exige ≥ {MIN_ASSOUAD_LEVELS} níveis, resolução comporta {finest}"
        )
    d = cloud.dim_ambient
    top, bottom = cloud.points.max(axis=0), cloud.points.min(axis=0)
    raw = stable = 0.0
    for j in range(2, finest + 1):
        idx = grid_indices(cloud.points, 2.0 ** (-j), top, bottom)
        cells = np.unique(idx, axis=0)
        for i in range(0, j - 1):
            parents = cell_codes(cells >> (j - i))
            children = np.unique(parents, return_counts=True)[1]
            exponent = np.log(children.max()) / ((j - i) * np.log(2.0))
            raw = max(raw, exponent)
            if j - i >= STABLE_GAP:
                stable = max(stable, exponent)
    try:
        upper_box = estimate_box_dimension(cloud)[1]
    except InsufficientScalesError:
        upper_box = 0.0
    value = float(np.clip(stable, min(upper_box, d), d))
    logger.info(f"Dimensão de Assouad de {cloud.label or 'nuvem'}: {value:.4f} (bruta {raw:.4f})")
    return value


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr

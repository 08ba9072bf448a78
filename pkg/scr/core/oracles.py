"""
Fórmulas fechadas dos exemplos canônicos e desigualdades como checagens.

As cotas são avaliadores puros: recebem números já estimados e devolvem
BoundReport, sem chamar estimadores.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from scr.core.errors import InsufficientSmallThetaError, ParameterDomainError, UnknownExampleError
from scr.core.model.curves import FourierCurve, SpectrumCurve
from scr.core.model.reports import BoundReport, DimensionEstimates, ExampleId, ReferenceCurve, SpectrumKind

DEFAULT_CHAIN_SLACK = 0.1
# maior θ aceito como "pequeno" no critério de continuidade
SMALL_THETA = 0.1

_AMBIENT = {
    ExampleId.SEQ_TIMES_SEGMENT: 2,
    ExampleId.F_P: 1,
    ExampleId.F_P_PRODUCT: 2,
    ExampleId.SEGMENT: 1,
    ExampleId.SQUARE: 2,
}


def example_ambient(example_id: ExampleId) -> int:
    return _AMBIENT[ExampleId(example_id)]


def _require_p(example_id: ExampleId, p: Optional[float]) -> float:
    if p is None or p <= 0:
        raise UnknownExampleError(f"Exemplo {example_id.value} exige p > 0")
    return float(p)


def reference_spectrum(
    example_id: ExampleId,
    kind: SpectrumKind,
    theta: float,
    p: Optional[float] = None,
) -> float:
    """
    Valor exato do espectro de um exemplo canônico em θ.

    θ = 1 é aceito como limite (Assouad → quase-Assouad, intermediária →
    caixa, Fourier → Sobolev).

    Args:
        example_id: Exemplo canônico
        kind: Espectro pedido
        theta: θ ∈ (0, 1]
        p: Expoente de F_p (exemplos f_p e f_p_product)

    Raises:
        ParameterDomainError: Se θ ∉ (0, 1]
        UnknownExampleError: Combinação exemplo/espectro sem fórmula
    """
    example_id = ExampleId(example_id)
    kind = SpectrumKind(kind)
    if not 0.0 < theta <= 1.0:
        raise ParameterDomainError(f"θ deve estar em (0, 1], recebido {theta}")

    if example_id == ExampleId.SEGMENT:
        return 1.0
    if example_id == ExampleId.SQUARE:
        return 2.0
    if example_id == ExampleId.SEQ_TIMES_SEGMENT:
        if kind == SpectrumKind.FOURIER_SET:
            return float(theta)
        if kind == SpectrumKind.INTERMEDIATE:
            return (1.0 + 2.0 * theta) / (1.0 + theta)
        if theta >= 0.5:
            return 2.0
        return min((1.5 - theta) / (1.0 - theta), 2.0)

    p = _require_p(example_id, p)
    if example_id == ExampleId.F_P:
        if kind == SpectrumKind.FOURIER_SET:
            return 0.0
        if kind == SpectrumKind.INTERMEDIATE:
            return theta / (theta + p)
        if theta == 1.0:
            return 1.0
        return min(1.0 / ((1.0 + p) * (1.0 - theta)), 1.0)

    # produto F_p × F_p: só o espectro de Fourier (enumerável) tem forma fechada
    if kind == SpectrumKind.FOURIER_SET:
        return 0.0
    raise UnknownExampleError(
        f"Sem fórmula fechada para ({example_id.value}, {kind.value})"
    )


def reference_curve(
    example_id: ExampleId,
    kind: SpectrumKind,
    thetas: Sequence[float],
    p: Optional[float] = None,
) -> ReferenceCurve:
    """Avalia reference_spectrum numa grade de θ."""
    example_id = ExampleId(example_id)
    values = [reference_spectrum(example_id, kind, float(t), p) for t in thetas]
    return ReferenceCurve(
        example_id=example_id,
        kind=kind,
        p=p,
        dim_ambient=example_ambient(example_id),
        thetas=np.asarray(thetas, dtype=np.float64),
        values=values,
    )


def reference_dimensions(example_id: ExampleId, p: Optional[float] = None) -> DimensionEstimates:
    """Dimensões clássicas exatas: Fourier, Hausdorff, caixa, quase-Assouad e Assouad."""
    example_id = ExampleId(example_id)
    d = example_ambient(example_id)
    if example_id in (ExampleId.SEGMENT, ExampleId.SQUARE):
        v = float(d)
        return DimensionEstimates(
            dim_ambient=d, fourier=v, hausdorff=v, lower_box=v, upper_box=v, quasi_assouad=v, assouad=v
        )
    if example_id == ExampleId.SEQ_TIMES_SEGMENT:
        return DimensionEstimates(
            dim_ambient=d, fourier=0.0, hausdorff=1.0, lower_box=1.5, upper_box=1.5, quasi_assouad=2.0, assouad=2.0
        )
    p = _require_p(example_id, p)
    box = d / (1.0 + p)
    return DimensionEstimates(
        dim_ambient=d,
        fourier=0.0,
        hausdorff=0.0,
        lower_box=box,
        upper_box=box,
        quasi_assouad=float(d),
        assouad=float(d),
    )


def reference_projection_box(p: float) -> float:
    """Dimensão de caixa das projeções genéricas de F_p × F_p em retas."""
    if p <= 0:
        raise ParameterDomainError(f"p deve ser > 0, recebido {p}")
    return 1.0 - (p / (p + 1.0)) ** 2


def chain_check(estimates: DimensionEstimates, slack: float = DEFAULT_CHAIN_SLACK) -> BoundReport:
    """
    Verifica 0 ≤ dim_F ≤ dim_H ≤ dim_B_ ≤ dim_B¯ ≤ dim_qA ≤ dim_A ≤ d.

    Todos os pares (a, b) com a antes de b na cadeia são comparados; o
    relatório traz o par de pior inversão (bound = b, measured = a).
    """
    chain = estimates.chain()
    names = list(chain)
    values = np.array([chain[n] for n in names])
    worst, pair = -np.inf, (names[0], names[-1])
    violations = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            excess = values[i] - values[j]
            if excess > slack:
                violations.append(f"{names[i]}>{names[j]}")
            if excess > worst:
                worst, pair = excess, (names[i], names[j])
    passed = not violations
    if not passed:
        logger.warning(f"Cadeia de dimensões violada: {', '.join(violations)}")
    return BoundReport(
        bound_id="chain",
        inputs={name: chain[name] for name in names},
        bound=chain[pair[1]],
        measured=chain[pair[0]],
        slack=slack,
        passed=passed,
        detail=f"pior par {pair[0]} ≤ {pair[1]}" + (f"; violações: {', '.join(violations)}" if violations else ""),
    )


def _check_u(u: float, k: int) -> None:
    if not 0.0 <= u <= k:
        raise ParameterDomainError(f"Limiar u deve estar em [0, {k}], recebido {u}")


def grassmannian_dimension(d: int, k: int) -> int:
    """dim G(d, k) = k(d − k)."""
    if not 1 <= k < d:
        raise ParameterDomainError(f"G(d, k) exige 1 ≤ k < d (k={k}, d={d})")
    return k * (d - k)


def peres_schlag_bound(u: float, dim_h: float, d: int, k: int) -> float:
    """max{0, k(d−k) + u − dim_H}, limitada a k(d−k)."""
    _check_u(u, k)
    top = grassmannian_dimension(d, k)
    return float(np.clip(top + u - dim_h, 0.0, top))


def ren_wang_bound(u: float, dim_h: float) -> float:
    """
    max{0, 2u − dim_H} para projeções do plano em retas.

    Raises:
        ParameterDomainError: Se u ∉ [dim_H/2, min{dim_H, 1}]
    """
    if not dim_h / 2.0 <= u <= min(dim_h, 1.0):
        raise ParameterDomainError(
            f"Cota de Ren–Wang exige dim_H/2 ≤ u ≤ min{{dim_H, 1}} (u={u}, dim_H={dim_h})"
        )
    return max(0.0, 2.0 * u - dim_h)


def fourier_exceptional_bound(u: float, value: float, theta: float, d: int, k: int) -> float:
    """
    Cota para um θ fixo: max{0, k(d−k) + (u − dim_F^θ μ)/θ}.

    Raises:
        ParameterDomainError: Se θ ∉ (0, 1] ou u ∉ [0, min{k, dim_F^θ μ}]
    """
    if not 0.0 < theta <= 1.0:
        raise ParameterDomainError(f"Cota de Fourier exige θ ∈ (0, 1], recebido {theta}")
    if not 0.0 <= u <= min(k, value):
        raise ParameterDomainError(
            f"Cota de Fourier exige 0 ≤ u ≤ min{{k, dim_F^θ}} (u={u}, dim_F^θ={value})"
        )
    return max(0.0, grassmannian_dimension(d, k) + (u - value) / theta)


def _fourier_infimum(u: float, curve: FourierCurve, d: int, k: int) -> BoundReport:
    mask = curve.thetas > 0
    thetas, values = curve.thetas[mask], curve.values[mask]
    if thetas.size == 0:
        raise InsufficientSmallThetaError("Curva de Fourier sem θ > 0")
    quotients = (u - values) / thetas
    idx = int(np.argmin(quotients))
    bound = max(0.0, grassmannian_dimension(d, k) + float(quotients[idx]))
    return BoundReport(
        bound_id="fourier_spectrum",
        inputs={"u": u, "d": d, "k": k, "theta": float(thetas[idx]), "witness": curve.witness},
        bound=bound,
        detail=f"ínfimo na grade de {thetas.size} valores de θ",
    )


def exceptional_bounds(
    u: float,
    dim_h: float,
    d: int,
    k: int,
    fourier_curve: Optional[FourierCurve] = None,
) -> List[BoundReport]:
    """
    Cotas superiores para a dimensão de {V ∈ G(d, k): dim P_V X < u}.

    Avalia Peres–Schlag sempre, Ren–Wang quando d = 2, k = 1 e u está na
    faixa de validade, e a cota via espectro de Fourier quando há curva.
    O último relatório ("exceptional_min") traz a menor cota aplicável.

    Raises:
        ParameterDomainError: Se u ∉ [0, k] ou k ∉ [1, d)
    """
    _check_u(u, k)
    reports = [
        BoundReport(
            bound_id="peres_schlag",
            inputs={"u": u, "dim_h": dim_h, "d": d, "k": k},
            bound=peres_schlag_bound(u, dim_h, d, k),
        )
    ]
    if d == 2 and k == 1 and dim_h / 2.0 <= u <= min(dim_h, 1.0):
        reports.append(
            BoundReport(bound_id="ren_wang", inputs={"u": u, "dim_h": dim_h}, bound=ren_wang_bound(u, dim_h))
        )
    else:
        logger.debug(f"Cota de Ren–Wang não aplicável (d={d}, k={k}, u={u}, dim_H={dim_h})")
    if fourier_curve is not None:
        reports.append(_fourier_infimum(u, fourier_curve, d, k))
    best = min(reports, key=lambda r: r.bound)
    reports.append(
        BoundReport(
            bound_id="exceptional_min",
            inputs={"u": u, "d": d, "k": k, "source": best.bound_id},
            bound=best.bound,
        )
    )
    return reports


def salem_exceptional_bound(u: float, fourier_dim: float, k: int) -> BoundReport:
    """
    Para u ≤ min{k, dim_F X} o conjunto excepcional é vazio.

    Raises:
        ParameterDomainError: Se u ∉ [0, min{k, dim_F X}]
    """
    if not 0.0 <= u <= min(k, fourier_dim):
        raise ParameterDomainError(
            f"Cota de Salem exige 0 ≤ u ≤ min{{k, dim_F}} (u={u}, dim_F={fourier_dim})"
        )
    return BoundReport(
        bound_id="salem",
        inputs={"u": u, "fourier_dim": fourier_dim, "k": k},
        bound=0.0,
        detail="conjunto excepcional vazio",
    )


def profile_exceptional_bound(d: int, k: int, s: float) -> float:
    """k(d−k) − (k − s): dimensão máxima de {V: dim_B P_V X < dim_B^s X}."""
    if not 0.0 <= s <= k:
        raise ParameterDomainError(f"s deve estar em [0, {k}], recebido {s}")
    return float(grassmannian_dimension(d, k) - (k - s))


def continuity_criterion(
    fourier_curve: FourierCurve,
    d: int,
    k: int,
    max_theta: float = SMALL_THETA,
) -> BoundReport:
    """
    Critério de continuidade em θ = 0 via quociente de diferenças.

    D = (dim_F^θ − dim_F)/θ no menor θ > 0 da grade; o critério vale
    quando D ≥ k(d − k).

    Raises:
        InsufficientSmallThetaError: Se a curva não tem θ = 0 ou θ ∈ (0, max_theta]
    """
    thetas = fourier_curve.thetas
    if thetas[0] != 0.0:
        raise InsufficientSmallThetaError("Critério de continuidade exige o valor em θ = 0")
    small = thetas[(thetas > 0) & (thetas <= max_theta)]
    if small.size == 0:
        raise InsufficientSmallThetaError(f"Nenhum θ em (0, {max_theta}] na curva")
    theta = float(small[0])
    quotient = (fourier_curve.value_at(theta) - fourier_curve.fourier_dimension) / theta
    target = grassmannian_dimension(d, k)
    holds = quotient >= target - 1e-12
    return BoundReport(
        bound_id="fourier_continuity",
        inputs={"d": d, "k": k, "theta": theta, "witness": fourier_curve.witness},
        bound=float(target),
        measured=float(quotient),
        passed=holds,
        detail="espectro contínuo sob projeções" if holds else "critério não garante continuidade",
    )


def boxapp_lower_bound(
    box: float,
    thetas: Sequence[float],
    spectrum: Sequence[float],
    assouad_dim: float,
    s: float,
    quasi: Optional[float] = None,
    measured: Optional[float] = None,
    slack: float = 0.05,
) -> BoundReport:
    """
    Cota inferior do perfil dim_B^s via espectro de Assouad.

    Maximiza box − max{0, A^θ − s, (A − s)(1 − θ)} na grade de θ e, com
    o quase-Assouad, compara com box − max{0, qA − s}. A cota reportada é a
    maior das duas; inputs traz o θ testemunha.

    Args:
        box: Dimensão de caixa superior
        thetas: Grade de θ do espectro
        spectrum: Espectro de Assouad superior na grade
        assouad_dim: Dimensão de Assouad
        s: Parâmetro do perfil (k para projeções)
        quasi: Dimensão quase-Assouad, opcional
        measured: Perfil medido, para o veredito
        slack: Folga do veredito
    """
    thetas = np.asarray(thetas, dtype=np.float64)
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if thetas.shape != spectrum.shape or thetas.size == 0:
        raise ParameterDomainError("thetas e spectrum devem ter o mesmo tamanho não nulo")
    penalty = np.maximum.reduce(
        [np.zeros_like(thetas), spectrum - s, (assouad_dim - s) * (1.0 - thetas)]
    )
    candidates = box - penalty
    idx = int(np.argmax(candidates))
    bound = float(candidates[idx])
    inputs: Dict[str, object] = {"box": box, "assouad": assouad_dim, "s": s, "theta": float(thetas[idx])}
    if quasi is not None:
        quasi_bound = box - max(0.0, quasi - s)
        inputs["quasi"] = quasi
        inputs["quasi_bound"] = quasi_bound
        bound = max(bound, quasi_bound)
    passed = measured is None or measured >= bound - slack
    return BoundReport(
        bound_id="boxapp_lower",
        inputs=inputs,
        bound=bound,
        measured=measured,
        slack=slack,
        passed=passed,
    )


def boxdim_profile_bounds(upper_box: float, d: int, k: int) -> Tuple[float, float]:
    """Faixa geral B/(1 + (1/k − 1/d)B) ≤ dim_B^k ≤ min{k, B}."""
    if not 1 <= k <= d:
        raise ParameterDomainError(f"Perfil exige 1 ≤ k ≤ d (k={k}, d={d})")
    lower = upper_box / (1.0 + (1.0 / k - 1.0 / d) * upper_box)
    return float(lower), float(min(k, upper_box))


def corollary_box_equality(quasi: float, box: float, k: int, tol: float = 0.0) -> bool:
    """qA ≤ k força dim_B P_V X = min{k, dim_B X} para quase todo V."""
    return quasi <= k + tol


def intermediate_continuity_projection(hausdorff: float, k: int) -> bool:
    """
    Com dimensões intermediárias contínuas em 0, dim_B P_V X = k quase
    sempre se e somente se dim_H X ≥ k.
    """
    return hausdorff >= k


def projection_box_criterion(hausdorff: float, k: int) -> BoundReport:
    """Relatório de intermediate_continuity_projection (registro, não desigualdade)."""
    holds = intermediate_continuity_projection(hausdorff, k)
    return BoundReport(
        bound_id="intermediate_continuity_projection",
        inputs={"k": k},
        bound=float(k),
        measured=float(hausdorff),
        passed=holds,
        detail="dim_B P_V X = k quase sempre" if holds else "dim_B P_V X < k num conjunto de medida positiva",
    )


def assouad_bound_check(
    curve: SpectrumCurve,
    box: float,
    quasi: float,
    slack: float = 0.15,
) -> BoundReport:
    """dim_A^θ ≤ min{box/(1 − θ), qA, d} + folga em todo θ < 1 da curva."""
    mask = curve.thetas < 1.0
    thetas, values = curve.thetas[mask], curve.values[mask]
    if thetas.size == 0:
        raise InsufficientSmallThetaError("Curva sem θ < 1")
    caps = np.minimum.reduce([box / (1.0 - thetas), np.full_like(thetas, quasi), np.full_like(thetas, curve.dim_ambient)])
    excess = values - caps
    idx = int(np.argmax(excess))
    return BoundReport(
        bound_id="assouad_spectrum_bound",
        inputs={"box": box, "quasi": quasi, "theta": float(thetas[idx])},
        bound=float(caps[idx]),
        measured=float(values[idx]),
        slack=slack,
        passed=bool(excess[idx] <= slack),
    )


def theta_zero_check(curve: SpectrumCurve, upper_box: float, slack: float = 0.15) -> BoundReport:
    """O espectro no menor θ da grade se aproxima da dimensão de caixa superior."""
    value = float(curve.values[0])
    return BoundReport(
        bound_id="theta_zero_limit",
        inputs={"theta": float(curve.thetas[0]), "kind": curve.kind},
        bound=upper_box,
        measured=value,
        slack=slack,
        passed=abs(value - upper_box) <= slack,
    )


def fourier_lipschitz_check(curve: FourierCurve, slack: float = 0.15) -> BoundReport:
    """dim_F^θ ≤ dim_F + dθ + folga."""
    caps = curve.fourier_dimension + curve.dim_ambient * curve.thetas
    excess = curve.values - caps
    idx = int(np.argmax(excess))
    return BoundReport(
        bound_id="fourier_lipschitz",
        inputs={"theta": float(curve.thetas[idx]), "witness": curve.witness},
        bound=float(caps[idx]),
        measured=float(curve.values[idx]),
        slack=slack,
        passed=bool(excess[idx] <= slack),
    )


def fourier_concavity_check(curve: FourierCurve, slack: float = 0.15) -> BoundReport:
    """Cada valor interior fica acima da corda dos vizinhos, com folga."""
    t, v = curve.thetas, curve.values
    if t.size < 3:
        return BoundReport(bound_id="fourier_concavity", bound=0.0, measured=0.0, slack=slack)
    w = (t[1:-1] - t[:-2]) / (t[2:] - t[:-2])
    chord = (1.0 - w) * v[:-2] + w * v[2:]
    deficit = chord - v[1:-1]
    idx = int(np.argmax(deficit))
    return BoundReport(
        bound_id="fourier_concavity",
        inputs={"theta": float(t[idx + 1]), "witness": curve.witness},
        bound=float(chord[idx]),
        measured=float(v[idx + 1]),
        slack=slack,
        passed=bool(deficit[idx] <= slack),
    )


def profile_bound_check(profile: float, upper_box: float, d: int, k: int, slack: float = 0.05) -> BoundReport:
    """Perfil medido dentro da faixa geral de boxdim_profile_bounds."""
    lower, upper = boxdim_profile_bounds(upper_box, d, k)
    passed = lower - slack <= profile <= upper + slack
    return BoundReport(
        bound_id="profile_range",
        inputs={"upper_box": upper_box, "d": d, "k": k, "upper": upper},
        bound=lower,
        measured=profile,
        slack=slack,
        passed=passed,
    )

"""
Testes para o módulo assouad.

Valida amostras em duas escalas, o espectro de Assouad, o espectro
superior, a extrapolação quasi-Assouad e a dimensão de Assouad.
"""

import numpy as np
import pytest

from scr.core.assouad import (
    assouad_dimension,
    assouad_spectrum,
    assouad_spectrum_point,
    quasi_assouad,
    two_scale_samples,
    upper_assouad_spectrum,
)
from scr.core.covering import box_estimate
from scr.core.errors import (
    InsufficientScalesError,
    InsufficientTailError,
    NoValidScalePairsError,
    ParameterDomainError,
)
from scr.core.geometry import generate
from scr.core.model.cloud import GeneratorKind, GeneratorSpec
from scr.core.model.curves import SpectrumCurve
from scr.core.model.reports import ExampleId, SpectrumKind
from scr.core.oracles import reference_spectrum


def _segment(delta: float):
    return generate(GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=delta))


@pytest.fixture(scope="module")
def seq_times_segment():
    """{1/n}×[0,1] com δ = 2^-10."""
    delta = 2.0 ** -10
    return generate(GeneratorSpec(
        kind=GeneratorKind.PRODUCT,
        delta=delta,
        factors=[
            GeneratorSpec(kind=GeneratorKind.SEQUENCE_SET, delta=delta, p=1.0),
            GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=delta),
        ],
    ))


def _curve(thetas, values, d=2):
    n = len(thetas)
    return SpectrumCurve(
        thetas=thetas, values=values, fit_r2=[1.0] * n, n_anchors=[3] * n, dim_ambient=d,
    )


class TestTwoScaleSamples:
    """Testes das amostras N_r(B(x, R) ∩ X)."""

    def test_segment_anchors(self):
        """Segmento: 4 âncoras de lado 1/4, cada uma com 8 células de lado 1/32."""
        samples = two_scale_samples(_segment(2.0 ** -6), 0.25, 2.0 ** -5)
        assert len(samples) == 4
        assert all(s.count == 8 for s in samples)
        assert samples[0].center == (0.0,)
        assert samples[0].normalized_exponent == pytest.approx(1.0)

    def test_requires_r_below_R(self):
        """r ≥ R é inválido."""
        with pytest.raises(ParameterDomainError, match="r < R"):
            two_scale_samples(_segment(2.0 ** -6), 0.25, 0.25)

    def test_max_centers(self):
        """Limite de âncoras é respeitado."""
        samples = two_scale_samples(_segment(2.0 ** -6), 2.0 ** -3, 2.0 ** -6, max_centers=3)
        assert len(samples) == 3


class TestAssouadSpectrum:
    """Testes do espectro de Assouad."""

    def test_segment_is_flat(self):
        """Segmento tem espectro constante 1."""
        curve = assouad_spectrum(_segment(2.0 ** -10), [0.2, 0.4, 0.6])
        assert np.allclose(curve.values, 1.0)
        assert curve.kind == "assouad"

    def test_theta_domain(self):
        """θ = 1 não pertence ao domínio do espectro."""
        with pytest.raises(ParameterDomainError, match="θ deve estar em"):
            assouad_spectrum_point(_segment(2.0 ** -10), 1.0)

    def test_theta_one_skipped(self):
        """θ = 1 na grade é pulado com aviso, sem abortar a curva."""
        curve = assouad_spectrum(_segment(2.0 ** -10), [0.5, 1.0])
        assert curve.thetas.tolist() == [0.5]
        assert curve.skipped == [1.0]

    def test_unreachable_theta_skipped(self):
        """θ sem pares de escala é pulado e registrado."""
        curve = assouad_spectrum(_segment(2.0 ** -4), [0.5, 0.9])
        assert curve.thetas.tolist() == [0.5]
        assert curve.skipped == [0.9]
        assert curve.values[0] == pytest.approx(1.0)

    def test_all_skipped(self):
        """Nenhum θ válido levanta NoValidScalePairsError."""
        with pytest.raises(NoValidScalePairsError):
            assouad_spectrum(_segment(2.0 ** -4), [0.9])

    def test_product_bounds(self, seq_times_segment):
        """{1/n}×[0,1]: valores entre a dimensão de caixa e 2."""
        box = box_estimate(seq_times_segment)
        curve = assouad_spectrum(seq_times_segment, [0.2, 0.5, 0.7])
        assert box == pytest.approx(1.5, abs=0.15)
        assert np.all(curve.values >= box - 1e-9)
        assert np.all(curve.values <= 2.0)


class TestUpperSpectrum:
    """Testes do espectro superior e do quasi-Assouad."""

    def test_running_maximum(self):
        """Espectro superior é o supremo acumulado."""
        upper = upper_assouad_spectrum(_curve([0.2, 0.4, 0.6], [1.0, 0.8, 1.2]))
        assert upper.values.tolist() == [1.0, 1.0, 1.2]
        assert upper.kind == "upper_assouad"

    def test_idempotent(self):
        """Aplicar duas vezes não muda o resultado."""
        curve = _curve([0.2, 0.4, 0.6], [1.3, 0.9, 1.1])
        once = upper_assouad_spectrum(curve)
        twice = upper_assouad_spectrum(once)
        assert np.array_equal(once.values, twice.values)

    def test_quasi_assouad_extrapolation(self):
        """Reta pelos pontos da cauda extrapolada para θ = 1."""
        curve = _curve([0.7, 0.8, 0.9], [1.0, 1.2, 1.4])
        assert quasi_assouad(curve) == pytest.approx(1.6)

    def test_quasi_assouad_clipped_to_dimension(self):
        """Extrapolação limitada à dimensão ambiente."""
        curve = _curve([0.7, 0.8, 0.9], [1.4, 1.7, 1.95])
        assert quasi_assouad(curve) == 2.0

    def test_quasi_assouad_needs_tail(self):
        """Menos de 3 pontos com θ ≥ 0.7 levanta InsufficientTailError."""
        with pytest.raises(InsufficientTailError):
            quasi_assouad(_curve([0.1, 0.5, 0.8], [1.0, 1.1, 1.2]))


class TestAssouadDimension:
    """Testes da dimensão de Assouad."""

    def test_segment(self):
        """Segmento tem dimensão de Assouad 1."""
        assert assouad_dimension(_segment(2.0 ** -10)) == pytest.approx(1.0)

    def test_sequence_set_is_full(self):
        """{1/n} tem dimensão de Assouad 1 (acúmulo em 0)."""
        cloud = generate(GeneratorSpec(kind=GeneratorKind.SEQUENCE_SET, delta=2.0 ** -12, p=1.0))
        assert assouad_dimension(cloud) == pytest.approx(1.0)

    def test_product(self, seq_times_segment):
        """{1/n}×[0,1] tem dimensão de Assouad 2."""
        assert assouad_dimension(seq_times_segment) == pytest.approx(2.0)

    def test_insufficient_levels(self):
        """Menos de 5 níveis levanta InsufficientScalesError."""
        with pytest.raises(InsufficientScalesError):
            assouad_dimension(_segment(2.0 ** -4))


@pytest.mark.slow
class TestSeqTimesSegment:
    """{1/n}×[0,1] em δ = 2^-12 contra as fórmulas fechadas."""

    @pytest.fixture(scope="class")
    def fine_cloud(self):
        delta = 2.0 ** -12
        return generate(GeneratorSpec(
            kind=GeneratorKind.PRODUCT,
            delta=delta,
            factors=[
                GeneratorSpec(kind=GeneratorKind.SEQUENCE_SET, delta=delta, p=1.0),
                GeneratorSpec(kind=GeneratorKind.SEGMENT, delta=delta),
            ],
        ))

    def test_spectrum_matches_formula(self, fine_cloud):
        """min{(3/2 − θ)/(1 − θ), 2} em θ = 0,1, ..., 0,9 com folga 0,15."""
        thetas = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
        curve = assouad_spectrum(fine_cloud, thetas)
        assert curve.skipped == []
        expected = [reference_spectrum(ExampleId.SEQ_TIMES_SEGMENT, SpectrumKind.ASSOUAD, t) for t in thetas]
        assert np.allclose(curve.values, expected, atol=0.15)

    def test_assouad_dimension(self, fine_cloud):
        assert assouad_dimension(fine_cloud) == pytest.approx(2.0, abs=0.15)

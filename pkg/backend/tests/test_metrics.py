import pytest

from app.core.scalars import I
from app.models.exterior import Form, hermitian_of_11, hermitian_of_n1n1, phi, phibar
from app.models.structeq import parse_manifold, validate
from app.services import metrics
from app.services.metrics import Certificate, MetricKind, Verdict

BUDGET = 10_000
SEED = 42


@pytest.fixture(scope="module")
def iwasawa_classification(iwasawa):
    return metrics.classify(iwasawa, budget=BUDGET, seed=SEED)


@pytest.fixture(scope="module")
def ab_classification(ab_tenth):
    return metrics.classify(ab_tenth, budget=BUDGET, seed=SEED, kinds=["balanced", "sg"])


def test_iwasawa_verdicts(iwasawa_classification):
    c = iwasawa_classification
    assert c.verdict("kahler") == Verdict.CERTIFICATE
    assert c.verdict("balanced") == Verdict.WITNESS
    assert c.verdict("sg") == Verdict.WITNESS
    assert c.verdict("gauduchon") == Verdict.WITNESS
    assert c.has_metric("balanced") is True
    assert c.has_metric("kahler") is False
    assert "no witness/certificate conflicts" in c.audit


def test_iwasawa_reports_are_verified(iwasawa, iwasawa_classification):
    for kind, report in iwasawa_classification.reports.items():
        assert report.verified
        assert report.invariant_level
        if report.verdict == Verdict.WITNESS:
            assert metrics.verify_witness(iwasawa, kind, report.witness)
        else:
            assert metrics.verify_certificate(iwasawa, kind, report.certificate)


def test_iwasawa_balanced_uses_explicit_construction(iwasawa, iwasawa_classification):
    report = iwasawa_classification.reports[MetricKind.BALANCED]
    assert report.stats.strategy == "parallelisable"
    omega = metrics.parallelisable_balanced_witness(iwasawa)
    assert report.witness == omega
    assert hermitian_of_n1n1(omega).is_positive_definite()
    assert iwasawa.algebra.d(omega).is_zero()


def test_deformed_fibre_verdicts(ab_tenth, ab_classification):
    balanced = ab_classification.reports[MetricKind.BALANCED]
    sg = ab_classification.reports[MetricKind.SG]
    assert balanced.verdict == Verdict.CERTIFICATE
    assert sg.verdict == Verdict.WITNESS
    assert metrics.verify_witness(ab_tenth, "sg", sg.witness)


def test_deformed_balanced_certificate_shape(ab_tenth, ab_classification):
    cert = ab_classification.reports[MetricKind.BALANCED].certificate
    assert cert.style == "geometric"
    rows = hermitian_of_11(cert.positive_part).rows()
    assert rows[1][1].re > 0
    assert all(not rows[j][k] for j in range(3) for k in range(3) if (j, k) != (1, 1))
    # (d alpha)^{2,0} does not vanish, so the same alpha is no sG obstruction
    assert not metrics.verify_certificate(ab_tenth, "sg", cert)


def test_soundness_pairing(ab_tenth, ab_classification, iwasawa):
    sg_witness = ab_classification.reports[MetricKind.SG].witness
    cert = ab_classification.reports[MetricKind.BALANCED].certificate
    assert metrics.soundness_pairing(ab_tenth, "sg", sg_witness, cert) == 0

    positive = phi(3, 2).wedge(phibar(3, 2)).scale(I)
    probe = Certificate(style="dual_psd", positive_part=positive, matrix=hermitian_of_11(positive))
    omega = metrics.parallelisable_balanced_witness(iwasawa)
    assert metrics.soundness_pairing(iwasawa, "balanced", omega, probe).re > 0


def test_torus_has_every_metric(torus3):
    classification = metrics.classify(torus3, budget=BUDGET, seed=SEED)
    assert all(r.verdict == Verdict.WITNESS for r in classification.reports.values())
    assert "kahler witness ^ (n-1) verifies as balanced" in classification.audit


def test_kodaira_thurston_is_not_kahler(kodaira_thurston):
    report = metrics.find_witness(kodaira_thurston, "kahler", budget=BUDGET, seed=SEED)
    assert report.verdict != Verdict.WITNESS


def test_non_unimodular_disables_certificates():
    affine = validate(parse_manifold("dim 2\nd phi1 = 0\nd phi2 = phi1 ^ phi2"))
    for kind in MetricKind:
        assert metrics.find_witness(affine, kind, budget=500, seed=SEED).verdict != Verdict.CERTIFICATE


def test_verify_witness_rejects_bad_forms(iwasawa):
    omega = metrics.parallelisable_balanced_witness(iwasawa)
    assert not metrics.verify_witness(iwasawa, "balanced", omega.scale(-1))
    assert not metrics.verify_witness(iwasawa, "balanced", omega.scale(I))
    standard = Form.zero(3)
    for j in range(1, 4):
        standard = standard + phi(3, j).wedge(phibar(3, j)).scale(I)
    # positive but not closed: d phi3 ^ conj(phi3) terms survive
    assert hermitian_of_11(standard).is_positive_definite()
    assert not metrics.verify_witness(iwasawa, "kahler", standard)


def test_gauduchon_from_sg(iwasawa, iwasawa_classification):
    sg = iwasawa_classification.reports[MetricKind.SG].witness
    part, ok = metrics.gauduchon_from_sg(iwasawa, sg)
    assert ok
    assert part.bidegrees() == [(2, 2)]


def test_search_is_deterministic(ab_tenth):
    first = metrics.find_witness(ab_tenth, "sg", budget=BUDGET, seed=7)
    second = metrics.find_witness(ab_tenth, "sg", budget=BUDGET, seed=7)
    assert first.verdict == second.verdict
    assert first.witness == second.witness
    assert first.stats == second.stats


def test_condition_subspace_members_satisfy_condition(iwasawa):
    subspace = metrics.condition_subspace(iwasawa, "kahler")
    assert subspace.dimension > 0
    for form in subspace.forms:
        assert form.is_real()
        assert iwasawa.algebra.d(form).is_zero()


def test_gauduchon_witness_on_every_unimodular_entry(corpus_manifold):
    assert corpus_manifold.flags.unimodular
    report = metrics.find_witness(corpus_manifold, "gauduchon", budget=2000, seed=SEED)
    assert report.verdict == Verdict.WITNESS
    assert metrics.verify_witness(corpus_manifold, "gauduchon", report.witness)


def test_gauduchon_witness_on_deformed_fibre(ab_tenth):
    report = metrics.find_witness(ab_tenth, MetricKind.GAUDUCHON, budget=2000, seed=SEED)
    assert report.verdict == Verdict.WITNESS
    assert metrics.verify_witness(ab_tenth, MetricKind.GAUDUCHON, report.witness)

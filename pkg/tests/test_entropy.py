import numpy as np
import pytest

from iumps import (
    I_TH,
    KrausSet,
    NotHermitian,
    RandomStream,
    RegionSpec,
    TooLarge,
    benchmark_kraus,
    brute_force_density,
    brute_force_entropy,
    build_instance,
    build_iumps,
    materialize_isometry,
    projected_density,
    purified_spectrum,
    qcmi,
    qmi,
    region_entropy,
    rho_disjoint,
    site_products,
    support_decomposition,
)
from iumps.entropy import entropy_from_eigenvalues


def product_state_mps(d_s=3):
    amps = np.array([0.5, 0.5j, np.sqrt(0.5)], dtype=complex)[:d_s]
    amps = amps / np.linalg.norm(amps)
    ks = KrausSet(d_s=d_s, d_M=1, matrices=amps.reshape(d_s, 1, 1), case_tag="explicit")
    ks.validate()
    return build_iumps(ks)


@pytest.fixture(scope="module")
def golden_mps():
    return build_iumps(benchmark_kraus())


def test_support_identity_channel():
    u = np.eye(2, dtype=complex)
    ks = KrausSet(d_s=1, d_M=2, matrices=u[None], case_tag="explicit")
    mps = build_iumps(ks)
    sp = support_decomposition(mps.transfer, 1)
    # a single Kraus operator leaves a rank-one support Gram matrix
    assert sp.support_dim == 1
    assert abs(sp.sigma_diag[0] - 2.0) <= 1e-12


def test_support_gram_is_psd(golden_mps, case1_instance):
    for mps, n in ((golden_mps, 2), (case1_instance, 3)):
        sp = support_decomposition(mps.transfer, n)
        assert sp.sigma_diag.min() >= -1e-12
        assert sp.support_dim <= 16
        assert np.abs(sp.w.conj().T @ sp.w - np.eye(16)).max() <= 1e-12
        assert np.all(np.diff(sp.sigma_diag) <= 0)
        assert np.all(sp.sigma_diag[: sp.support_dim] > 0)


def test_support_rejects_broken_index_convention():
    rng = np.random.default_rng(0)
    z = rng.standard_normal((16, 16))
    from iumps.mps import TransferMatrix
    from iumps import eig_general

    fake = TransferMatrix(
        e=z.astype(complex),
        spectrum=eig_general(z),
        peripheral_indices=np.array([0]),
        nu_gap=0.5,
        peripheral_tol=1e-8,
    )
    with pytest.raises(NotHermitian):
        support_decomposition(fake, 1)


def test_projected_density_trace_and_psd(case1_instance):
    sp = support_decomposition(case1_instance.transfer, 4)
    rho = projected_density(sp, case1_instance.sigma)
    assert abs(np.trace(rho).real - 1.0) <= 1e-9
    assert np.abs(rho - rho.conj().T).max() <= 1e-10
    assert np.linalg.eigvalsh(rho).min() >= -1e-10


@pytest.mark.parametrize("case,n", [("case1", 2), ("case1", 4), ("case2", 3), ("case3", 4)])
def test_projected_density_matches_brute_force(case, n):
    mps = build_instance(case, 3, 4, RandomStream(515, hash(case) % 100 + n))
    sp = support_decomposition(mps.transfer, n)
    rho_p = projected_density(sp, mps.sigma)
    support_spec = np.sort(np.linalg.eigvalsh(rho_p))[::-1]
    brute_spec = np.sort(np.linalg.eigvalsh(brute_force_density(mps, n)))[::-1]
    m = len(support_spec)
    assert np.abs(support_spec - brute_spec[:m]).max() <= 1e-10
    assert np.abs(brute_spec[m:]).max(initial=0.0) <= 1e-10


def test_region_entropy_product_state():
    mps = product_state_mps()
    for n in (1, 2, 5):
        assert abs(region_entropy(mps, n).entropy) <= 1e-12
    assert abs(brute_force_entropy(mps, 3)) <= 1e-12


def test_region_entropy_golden_instance_single_site(golden_mps):
    report = region_entropy(golden_mps, 1)
    lam = np.array([0.25, 0.375, 0.375])
    expected_entropy = entropy_from_eigenvalues(lam)
    assert abs(report.entropy - expected_entropy) <= 1e-12
    assert np.abs(np.sort(report.eigenvalues)[::-1][:3] - np.sort(lam)[::-1]).max() <= 1e-12
    assert abs(report.eigenvalues.sum() - 1.0) <= 1e-9


def test_region_entropy_matches_brute_force_n5(case1_instance):
    ent = region_entropy(case1_instance, 5).entropy
    assert abs(ent - brute_force_entropy(case1_instance, 5)) <= 1e-9


def test_entropy_report_normalization(case2_instance, case3_instance):
    for mps in (case2_instance, case3_instance):
        for n in (1, 3, 6):
            report = region_entropy(mps, n)
            assert abs(report.eigenvalues.sum() - 1.0) <= 1e-9
            assert 0.0 <= report.entropy <= np.log(report.eigenvalues.size) + 1e-12
            assert report.clipped_weight <= 1e-10


def test_qcmi_product_state_zero():
    mps = product_state_mps()
    assert abs(qcmi(mps, RegionSpec(1, 3, 1))) <= 1e-12


def test_qcmi_nonnegative(case1_instance, case3_instance):
    for mps in (case1_instance, case3_instance):
        for b in (2, 6, 12):
            assert qcmi(mps, RegionSpec(1, b, 1)) >= -1e-9


def test_qcmi_matches_brute_force(golden_mps):
    # |A| = |C| = 1, |B| = 2: brute-force over the explicit four-site state.
    # Composite basis index runs (s4, s3, s2, s1) with the first-applied site
    # fastest, so A = site 1 (fastest axis) and C = site 4 (slowest axis).
    rho4 = brute_force_density(golden_mps, 4)
    full = rho4.reshape((3,) * 8)
    rho_ab = np.einsum("pijkplmn->ijklmn", full).reshape(27, 27)  # trace site 4
    rho_bc = np.einsum("ijkplmnp->ijklmn", full).reshape(27, 27)  # trace site 1
    rho_b = np.einsum("pijqplmq->ijlm", full).reshape(9, 9)  # trace sites 4 and 1

    ent = lambda r: entropy_from_eigenvalues(np.clip(np.linalg.eigvalsh(r), 0, None))
    brute = ent(rho_ab) + ent(rho_bc) - ent(rho4) - ent(rho_b)
    fast = qcmi(golden_mps, RegionSpec(1, 2, 1))
    assert abs(fast - brute) <= 1e-9


def test_qmi_golden_instance_plateau(golden_mps):
    val = qmi(golden_mps, RegionSpec(1, 26, 1))
    assert abs(val - I_TH) <= 1e-12


def test_qmi_limit_from_reference_marginal():
    from iumps import reference_rho_a, reference_rho_ac

    rho_ac = reference_rho_ac()
    t = rho_ac.reshape(3, 3, 3, 3)
    rho_a = np.einsum("acbc->ab", t)
    rho_c = np.einsum("acad->cd", t)
    ent = lambda r: entropy_from_eigenvalues(np.clip(np.linalg.eigvalsh(r), 0, None))
    assert abs(ent(rho_a) + ent(rho_c) - ent(rho_ac) - I_TH) <= 1e-14
    assert np.abs(rho_a - reference_rho_a()).max() <= 1e-15


def test_qmi_product_state_zero():
    mps = product_state_mps()
    assert abs(qmi(mps, RegionSpec(1, 20, 1))) <= 1e-12


def test_rho_disjoint_multisite_regions(case1_instance):
    # |A| = 2, |B| = 1, |C| = 2: entrywise against the traced five-site state.
    # Composite row ordering: A sites slow (later-applied slowest), then C.
    full = brute_force_density(case1_instance, 5).reshape((3,) * 10)
    brute = np.einsum("cdpabhipfg->abcdfghi", full).reshape(81, 81)
    mine = rho_disjoint(case1_instance, RegionSpec(2, 1, 2))
    assert np.abs(mine - brute).max() <= 1e-12
    brute_asym = np.einsum("cdpqahipqf->acdfhi", full).reshape(27, 27)
    mine_asym = rho_disjoint(case1_instance, RegionSpec(1, 2, 2))
    assert np.abs(mine_asym - brute_asym).max() <= 1e-12


def test_qcmi_multisite_a_matches_brute_force(case1_instance):
    full = brute_force_density(case1_instance, 5).reshape((3,) * 10)
    ent = lambda r: entropy_from_eigenvalues(np.clip(np.linalg.eigvalsh(r), 0, None))
    rho_ab = np.einsum("pijklpmnab->ijklmnab", full).reshape(81, 81)
    rho_bc = np.einsum("ijkpqlmnpq->ijklmn", full).reshape(27, 27)
    rho_b = np.einsum("pijqrpmnqr->ijmn", full).reshape(9, 9)
    rho_abc = full.reshape(243, 243)
    brute = ent(rho_ab) + ent(rho_bc) - ent(rho_abc) - ent(rho_b)
    assert abs(qcmi(case1_instance, RegionSpec(2, 2, 1)) - brute) <= 1e-9


def test_rho_disjoint_cap():
    mps = product_state_mps()
    with pytest.raises(TooLarge):
        rho_disjoint(mps, RegionSpec(7, 2, 7))


def test_brute_force_density_golden_instance(golden_mps):
    rho1 = brute_force_density(golden_mps, 1)
    assert np.abs(rho1 - np.diag([2.0, 3.0, 3.0]) / 8).max() <= 1e-12
    rho2 = brute_force_density(golden_mps, 2)
    assert abs(np.trace(rho2).real - 1.0) <= 1e-12


def test_brute_force_subadditivity(case1_instance):
    s1 = brute_force_entropy(case1_instance, 1)
    s2 = brute_force_entropy(case1_instance, 2)
    assert 2 * s1 >= s2 - 1e-10


def test_brute_force_cap():
    mps = product_state_mps()
    with pytest.raises(TooLarge):
        brute_force_density(mps, 8)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_isometry_orthonormal(case1_instance, n):
    sp = support_decomposition(case1_instance.transfer, n)
    p = materialize_isometry(sp, case1_instance.kraus, n)
    dev = np.abs(p.conj().T @ p - np.eye(sp.support_dim)).max()
    assert dev <= 1e-10


def test_isometry_projects_density(case2_instance):
    n = 3
    sp = support_decomposition(case2_instance.transfer, n)
    p = materialize_isometry(sp, case2_instance.kraus, n)
    rho = brute_force_density(case2_instance, n)
    projected = p.conj().T @ rho @ p
    assert np.abs(projected - projected_density(sp, case2_instance.sigma)).max() <= 1e-10


def test_purification_symmetry(case1_instance, case3_instance):
    for mps in (case1_instance, case3_instance):
        for n in (1, 3, 5):
            report = region_entropy(mps, n)
            alt = np.clip(purified_spectrum(mps, n), 0.0, None)
            assert abs(entropy_from_eigenvalues(alt) - report.entropy) <= 1e-9
            m = report.eigenvalues.size
            assert np.abs(np.sort(alt)[::-1][:m] - report.eigenvalues).max() <= 1e-9


def test_qcmi_via_purification_route(case2_instance):
    # the same conditional mutual information assembled from the
    # complement-side spectra, a fully independent contraction path
    s = lambda n: entropy_from_eigenvalues(np.clip(purified_spectrum(case2_instance, n), 0, None))
    for b in (2, 8, 14):
        alt = s(1 + b) + s(b + 1) - s(b + 2) - s(b)
        assert abs(alt - qcmi(case2_instance, RegionSpec(1, b, 1))) <= 1e-9


def test_site_products_ordering(case1_instance):
    m = case1_instance.kraus.matrices
    prods = site_products(case1_instance.kraus, 2)
    # composite index (s2, s1) with s2 slowest; entry is M^{s2} @ M^{s1}
    assert np.allclose(prods[1 * 3 + 2], m[1] @ m[2])

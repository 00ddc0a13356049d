"""Two-slit extended densities, Simpson binning, resolution sweep."""
import numpy as np
import pytest

from ephist import (
    DimensionMismatch,
    InvariantViolation,
    TwoSlitConfig,
    arrival_density,
    binned_extended_probabilities,
    deepest_fringe_location,
    default_config,
    delta_sweep,
    extended_density,
    extended_density_from_amplitudes,
    integrate_density,
    interference_integral,
    self_convergence,
    with_bins,
)
from ephist.twoslit import _simpson_nodes_weights


# -------------------------------------------------------------- configuration

def test_config_validation():
    for bad in (dict(k=0.0), dict(d=-1.0), dict(D=0.0)):
        with pytest.raises(InvariantViolation):
            TwoSlitConfig(**bad)
    with pytest.raises(InvariantViolation):
        TwoSlitConfig(y_range=(10.0, -10.0))
    with pytest.raises(InvariantViolation):
        TwoSlitConfig(bins=0)


def test_default_config_tiling():
    assert default_config(k_delta=5.0).bins == 32
    assert default_config(k_delta=20.0).bins == 8
    assert default_config(k_delta=1.0).bins == 160
    with pytest.raises(InvariantViolation) as exc:
        default_config(k_delta=7.0)    # does not divide 160
    assert exc.value.name == "bin-tiling"


def test_config_derived_quantities():
    cfg = default_config(k_delta=5.0)
    assert cfg.width == 160.0
    assert cfg.bin_width == 5.0
    assert cfg.k_delta == 5.0
    edges = cfg.bin_edges()
    assert len(edges) == cfg.bins + 1
    assert edges[0] == cfg.y_range[0] and edges[-1] == cfg.y_range[1]

    rebinned = with_bins(cfg, 8)
    assert rebinned.bins == 8 and rebinned.d == cfg.d
    assert rebinned.k_delta == 20.0


# ------------------------------------------------------------------ densities

def test_density_code_paths_agree():
    cfg = default_config()
    y = np.linspace(-80.0, 80.0, 401)
    for slit in ("U", "L"):
        a = extended_density(cfg, y, slit)
        b = extended_density_from_amplitudes(cfg, y, slit)
        assert np.abs(a - b).max() < 1e-16


def test_densities_sum_to_arrival():
    cfg = default_config()
    y = np.linspace(-80.0, 80.0, 401)
    total = extended_density(cfg, y, "U") + extended_density(cfg, y, "L")
    assert np.abs(total - arrival_density(cfg, y)).max() < 1e-16


def test_negative_bins_sit_beyond_saturation_radius():
    cfg = default_config()
    y = np.linspace(-80.0, 80.0, 16001)
    assert extended_density(cfg, y, "U").min() < 0.0

    loc = deepest_fringe_location(cfg)
    assert abs(loc - np.sqrt(cfg.D ** 2 + cfg.d ** 2 / 4.0)) < 1e-12
    # binning keeps only the widened fringes past the saturation radius
    edges = cfg.bin_edges()
    u, l = binned_extended_probabilities(cfg)
    for i in np.flatnonzero(u < 0):
        assert min(abs(edges[i]), abs(edges[i + 1])) >= loc
    for i in np.flatnonzero(l < 0):
        assert min(abs(edges[i]), abs(edges[i + 1])) >= loc


def test_unknown_slit_rejected():
    cfg = default_config()
    with pytest.raises(InvariantViolation):
        extended_density(cfg, 0.0, "X")
    with pytest.raises(InvariantViolation):
        extended_density_from_amplitudes(cfg, 0.0, "sideways")


# ------------------------------------------------------------------ quadrature

def test_simpson_exact_on_cubics():
    nodes, weights = _simpson_nodes_weights(0.0, 3.0, 2)
    f = nodes ** 3 - 2.0 * nodes ** 2 + 1.0
    exact = 3.0 ** 4 / 4.0 - 2.0 * 3.0 ** 3 / 3.0 + 3.0
    assert abs(weights @ f - exact) < 1e-12


def test_simpson_panel_validation():
    with pytest.raises(InvariantViolation) as exc:
        _simpson_nodes_weights(0.0, 1.0, 3)
    assert exc.value.name == "even-panels"
    with pytest.raises(InvariantViolation):
        _simpson_nodes_weights(0.0, 1.0, 0)
    cfg = default_config()
    with pytest.raises(InvariantViolation):
        integrate_density(cfg, 0.0, 1.0, panels=5)


def test_bin_integrals_decompose():
    """upper bin = integral of |psi_U|^2 plus the cross-term integral, and
    upper + lower = the arrival integral, all on the same Simpson nodes."""
    from ephist import amplitude_upper

    cfg = default_config(k_delta=20.0)
    upper, lower = binned_extended_probabilities(cfg)
    edges = cfg.bin_edges()
    for i in range(cfg.bins):
        nodes, weights = _simpson_nodes_weights(edges[i], edges[i + 1], 128)
        own = weights @ (np.abs(amplitude_upper(cfg, nodes)) ** 2)
        cross = interference_integral(cfg, i)
        assert abs(upper[i] - (own + cross)) < 1e-16
        arrive = weights @ arrival_density(cfg, nodes)
        assert abs((upper[i] + lower[i]) - arrive) < 1e-16


def test_interference_bin_range_checked():
    cfg = default_config()
    with pytest.raises(DimensionMismatch):
        interference_integral(cfg, cfg.bins)


def test_self_convergence_is_tiny():
    assert self_convergence(default_config(), 128, 512) < 1e-10


# ------------------------------------------------------------------- the knob

def test_fine_bins_show_negativity_coarse_bins_do_not():
    fine = default_config(k_delta=5.0)
    u, l = binned_extended_probabilities(fine)
    assert np.flatnonzero(u < 0).tolist() == [0]
    assert np.flatnonzero(l < 0).tolist() == [fine.bins - 1]

    coarse = default_config(k_delta=20.0)
    u, l = binned_extended_probabilities(coarse)
    assert u.min() > 0.0 and l.min() > 0.0


def test_mirror_symmetry():
    cfg = default_config(k_delta=5.0)
    u, l = binned_extended_probabilities(cfg)
    assert np.abs(u - l[::-1]).max() < 1e-15


def test_delta_sweep_negativity_fades():
    rows = delta_sweep()
    by_kd = {row.k_delta: row for row in rows}
    assert [len(by_kd[kd].negative_upper) for kd in (1.0, 2.0, 5.0, 10.0, 20.0, 40.0)] \
        == [20, 7, 1, 0, 0, 0]
    for row in rows:
        assert row.bins == round(160.0 / row.k_delta)
        assert row.max_cross_ratio > 0.0
        # mirror symmetry again, at the sweep level
        assert row.negative_lower == tuple(sorted(row.bins - 1 - i for i in row.negative_upper))
        if row.k_delta <= 5.0:
            assert row.min_upper < 0.0
        else:
            assert row.min_upper > 0.0

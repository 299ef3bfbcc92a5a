import pytest

import tracematch as tm


@pytest.fixture(scope="module")
def dataset():
    pop = tm.SyntheticPopulationConfig()
    pop.num_users = 300
    pop.num_sites = 1000
    pop.events_per_user_mean = 40.0
    pop.seed = 12
    dcfg = tm.DiscretizationConfig()
    return tm.generate_synthetic(pop, dcfg, workers=4)


def test_generate_and_inspect(dataset):
    assert len(dataset) == 300
    assert dataset.raw_event_count() > 0
    assert dataset.user_id(0).startswith("u")
    tuples = dataset.trace_tuples(0)
    assert len(tuples) >= 1
    assert len(tuples[0]) == 3


def test_estimate_rho_deterministic(dataset):
    a = tm.estimate_rho(dataset, k=3, sample_size=100, seed=5, workers=1)
    b = tm.estimate_rho(dataset, k=3, sample_size=100, seed=5, workers=4)
    assert [r.nu for r in a.records] == [r.nu for r in b.records]
    assert 0.0 <= a.rho_by_k[3].rho <= 1.0


def test_strategies_agree(dataset):
    naive = tm.estimate_rho(dataset, k=2, sample_size=80, seed=1,
                            strategy="naive")
    indexed = tm.estimate_rho(dataset, k=2, sample_size=80, seed=1,
                              strategy="indexed")
    assert [r.nu for r in naive.records] == [r.nu for r in indexed.records]


def test_uniqueness_bounds(dataset):
    strict = tm.estimate_trace_uniqueness(dataset, mode="strict",
                                          exhaustive=True, sample_size=100,
                                          seed=2)
    relaxed = tm.estimate_trace_uniqueness(dataset, mode="relaxed",
                                           exhaustive=True, sample_size=100,
                                           seed=2)
    assert strict.probability_unique >= relaxed.probability_unique


def test_sweep_monotone_in_k(dataset):
    grid = tm.sweep(dataset, k_list=[1, 2, 3], delta_t_list=[300, 900],
                    delta_xy_list=[200.0, 1000.0], sample_size=80, seed=3)
    for it in range(2):
        for ix in range(2):
            rho = grid.rho[it][ix]
            assert rho == sorted(rho)


def test_profiles_and_stats(dataset):
    report = tm.estimate_rho(dataset, k=3, sample_size=150, seed=4)
    profile = tm.popularity_profile(dataset, report, bins=10)
    if profile:
        assert abs(sum(profile) - 1.0) <= 1e-9
    tod = tm.time_of_day_profile(report, dataset.cfg)
    if tod:
        assert abs(sum(tod) - 1.0) <= 1e-9
    stats = tm.mobility_stats(dataset, 0)
    assert stats.num_unique_locations >= 1


def test_save_load_roundtrip(dataset, tmp_path):
    p = tmp_path / "ds.bin"
    dataset.save(p)
    loaded = tm.Dataset.load(p)
    assert len(loaded) == len(dataset)
    assert loaded.trace_tuples(5) == dataset.trace_tuples(5)


def test_config_errors(dataset):
    with pytest.raises(ValueError):
        tm.estimate_rho(dataset, k=0)
    with pytest.raises(ValueError):
        tm.sweep(dataset, k_list=[1], delta_t_list=[450],
                 delta_xy_list=[200.0])

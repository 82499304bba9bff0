"""Smoke test for the ambc extension module.

Build and install first:  pip install --no-build-isolation -e crates/python
"""

import math

import ambc


def main():
    # closed-form receiver
    e = ambc.optimal_threshold(3.0, 59)
    assert 1.0 < e < 4.0
    p_fa, p_md, p_e = ambc.ber_closed_form(3.0, 59, e)
    assert math.isclose(p_e, 0.5 * (p_fa + p_md))
    assert math.isclose(p_e, ambc.min_ber_single(3.0, 59))
    mu0, var0, mu1, var1 = ambc.statistic_moments(3.0, 59)
    assert (mu0, mu1) == (1.0, 4.0)
    assert math.isclose(ambc.q_function(0.0), 0.5)

    # combining
    w = ambc.optimal_weights([10.0, 0.1], 59, 0.01)
    assert math.isclose(sum(t * t for t in w), 1.0)
    mrc = ambc.conventional_weights("mrc", [10.0, 0.1])
    assert ambc.min_ber_multi(w, [10.0, 0.1], 59) <= ambc.min_ber_multi(mrc, [10.0, 0.1], 59) * (1 + 1e-6)

    assert abs(ambc.pathloss_gain(0.5, 900e6) - 3.537e-2) < 1e-4
    assert round(ambc.bd_rate(10e6, 512, 64, 1), 1) == 17361.1

    # Monte Carlo harness
    cfg = ambc.Config(trials=2000, snr_grid=[0.0, 10.0], analytic_draws=2000, seed=4)
    res = ambc.ber_sweep(cfg)
    assert len(res) == 2 and res.x_unit == "dB"
    for emp, ana, ci in zip(res.values, res.analytic, res.ci_halfwidth):
        assert abs(emp - ana) < 3 * ci + 0.02, (emp, ana, ci)
    assert res.values[1] < res.values[0]
    assert res.to_csv().startswith("x_value,x_unit,ber_empirical")
    assert ambc.ber_sweep(cfg).values == res.values

    sent, detected, gamma = ambc.run_trial(cfg, float("inf"), seed=1)
    assert sent == detected and len(gamma) == 1

    s = ambc.run_sync(cfg.replace(sync_mode="estimated"), 30.0, seed=2)
    assert s["l_hat"] >= 1 and s["sigma_u2_hat"] > 0

    mse = ambc.mse_sweep(cfg.replace(trials=50, snr_grid=[20.0]), "l")
    assert mse.metric == "mse"

    multi = ambc.combiner_sweep(cfg.replace(antennas=2, trials=200, grid_step=0.05))
    assert [r.combiner for r in multi] == ["optimal", "mrc", "egc", "sc"]

    dist = ambc.distance_sweep(cfg.replace(trials=200), [0.5, 10.0])
    assert dist.x_unit == "m"

    checks = ambc.selftest()
    assert all(ok for _, ok, _ in checks), checks

    try:
        ambc.Config(trials=0)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid config accepted")

    print(f"smoke test passed ({len(checks)} self-checks, BER {res.values})")


if __name__ == "__main__":
    main()

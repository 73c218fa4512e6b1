#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pathsens/experiment.hpp"
#include "pathsens/sensitivity.hpp"

using namespace pathsens;

namespace {

InverseDiffusion unit_inv(int n, double beta = 1.0, double gamma = 1.0) {
    InverseDiffusion inv;
    inv.d.assign(n, beta / (2.0 * gamma));
    return inv;
}

} // namespace

TEST_CASE("zero perturbation gives exactly zero RER") {
    const std::vector<Vec3> f{{1, 2, 3}, {-4, 0, 2}};
    CHECK(rer_sample(f, f, unit_inv(2)) == 0.0);
}

TEST_CASE("RER non-negativity on arbitrary force pairs") {
    for (int t = 0; t < 50; ++t) {
        std::vector<Vec3> a(5), b(5);
        for (int i = 0; i < 5; ++i) {
            a[i] = rng::gaussian3(7, t, i, rng::stream_init_misc);
            b[i] = rng::gaussian3(8, t, i, rng::stream_init_misc);
        }
        CHECK(rer_sample(a, b, unit_inv(5)) >= 0.0);
    }
}

TEST_CASE("dimension mismatch is a contract error") {
    const std::vector<Vec3> a(3), b(4);
    CHECK_THROWS_AS(rer_sample(a, b, unit_inv(3)), ContractError);
}

TEST_CASE("OU oracle: RER and FIM against the analytic values") {
    // V = k q^2/2: RER = delta^2/(4 gamma k), FIM = 1/(2 gamma k) per dof
    ExperimentConfig cfg = preset_ou_oracle();
    cfg.seed = 11;
    cfg.n_atoms = 64;
    cfg.n_steps = 20000;
    cfg.n_equil = 500;
    cfg.dt = 0.01;
    cfg.perturbations = {{"k", 0.10}};
    cfg.fim = true;
    cfg.sens_stride = 5;
    const SweepResult res = run_sensitivity(cfg);
    const double dof = 3.0 * cfg.n_atoms;
    const double target_rer = 0.01 / 4.0;  // delta = 0.1, gamma = k = 1
    const double rer = res.directions[0].rer.mean / dof;
    const double se = res.directions[0].rer.se / dof;
    CHECK(std::abs(rer - target_rer) < 3.0 * se + 0.02 * target_rer);
    REQUIRE(res.fim.has_value());
    const double fim = res.fim->fim[0] / dof;
    CHECK(fim == doctest::Approx(0.5).epsilon(0.05));

    // linear-in-parameter force: quadratic FIM prediction equals the direct
    // estimator in expectation; here both derive from E[q^2]
    const double quad = fim_quadratic_for(*res.fim, res.theta_diff, "k", 0.10) / dof;
    CHECK(quad == doctest::Approx(rer).epsilon(1e-9));
}

TEST_CASE("fim_accumulate: zero Jacobian gives the zero matrix") {
    FimAccumulator acc(2);
    ParamJacobian jac;
    jac.n_atoms = 3;
    jac.n_params = 2;
    jac.m.assign(18, 0.0);
    acc.add(jac, unit_inv(3));
    for (double v : acc.mean()) CHECK(v == 0.0);
}

TEST_CASE("fim quadratic landmarks") {
    CHECK(fim_quadratic_rer({1, 0, 0, 1}, 2, {0, 0}) == 0.0);
    CHECK(fim_quadratic_rer({1, 0, 0, 1}, 2, {0.1, 0}) == doctest::Approx(0.005));
}

TEST_CASE("log-scale FIM") {
    const std::vector<double> f{1, 0, 0, 1};
    CHECK(log_scale_fim(f, 2, {1, 1}) == f);
    const auto g = log_scale_fim(f, 2, {2, 3});
    CHECK(g[0] == doctest::Approx(4.0));
    CHECK(g[3] == doctest::Approx(9.0));
    CHECK_THROWS_AS(log_scale_fim(f, 2, {1, -1}), ConfigError);

    // argmax of diagonal relative sensitivity is invariant under uniform
    // rescaling theta -> c theta applied to both theta and the FIM
    for (int t = 0; t < 30; ++t) {
        std::vector<double> m(9), th(3);
        for (int i = 0; i < 3; ++i) th[i] = 0.5 + rng::uniform(13, t, i, rng::stream_init_misc);
        std::vector<double> a(9);
        for (int i = 0; i < 9; ++i) a[i] = rng::gaussian3(14, t, i, rng::stream_init_misc).x;
        // symmetrize A^T A
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                m[r * 3 + c] = 0;
                for (int k = 0; k < 3; ++k) m[r * 3 + c] += a[k * 3 + r] * a[k * 3 + c];
            }
        auto argmax_diag = [&](const std::vector<double>& fm) {
            int best = 0;
            for (int i = 1; i < 3; ++i)
                if (fm[i * 3 + i] > fm[best * 3 + best]) best = i;
            return best;
        };
        const int base = argmax_diag(log_scale_fim(m, 3, th));
        const double c = 3.7;
        std::vector<double> th2 = th, m2 = m;
        for (auto& x : th2) x *= c;
        for (auto& x : m2) x /= (c * c);  // F(theta) -> F(c theta) for f(theta/c) models
        CHECK(argmax_diag(log_scale_fim(m2, 3, th2)) == base);
    }
}

TEST_CASE("inverse-temperature closed forms") {
    CHECK(inverse_temp_rer(0.0, 123.4) == 0.0);
    // d=3, N=2, m=1, beta=1, gamma=1 (sigma^2=2), eps=0.1 -> 0.015
    CHECK(inverse_temp_rer_closed(0.1, 2.0, 3, 2, 1.0, 1.0) == doctest::Approx(0.015));
    CHECK(log_beta_fim_closed(1.0, 1.0, 3, 2) == doctest::Approx(3.0));

    // momentum estimator over exact Gibbs momenta matches the closed form
    const int n_atoms = 2;
    const std::int64_t n_samples = 200000;
    std::vector<double> masses(n_atoms, 1.0), s2(n_atoms, 2.0);
    std::vector<Vec3> p(n_atoms);
    double acc = 0.0;
    for (std::int64_t s = 0; s < n_samples; ++s) {
        for (int i = 0; i < n_atoms; ++i)
            p[i] = rng::gaussian3(4242, s + 1, i, rng::stream_init_momentum);
        acc += inverse_temp_momentum_sample(p, masses, s2);
    }
    const double rer = inverse_temp_rer(0.1, acc / n_samples);
    CHECK(rer == doctest::Approx(0.015).epsilon(0.01));
}

TEST_CASE("discrete estimators: zero perturbation and OU consistency") {
    ScalarAccumulator acc;
    const std::vector<Vec3> zero(4, Vec3{});
    discrete_rer_accumulate(acc, zero, zero, 1e-3, unit_inv(4));
    CHECK(acc.mean() == 0.0);

    // OU at dt = 1e-3: (1/dt) discrete RER within 1% of delta^2/(4 gamma k)
    ExperimentConfig cfg = preset_ou_oracle();
    cfg.seed = 19;
    cfg.n_atoms = 64;
    cfg.dt = 1e-3;
    cfg.n_steps = 30000;
    cfg.n_equil = 2000;
    const BuiltSystem b = build_system(cfg);
    BuiltSystem run = b;
    run.lcfg.seed = cfg.seed;
    SystemState state = make_initial_state(run, cfg.seed);
    ForceEngine engine(run.model.topology, run.model.parameters);
    const InverseDiffusion inv = InverseDiffusion::from(run.beta, run.lcfg, cfg.n_atoms);
    auto dir = make_direction(run.model.parameters, "k", 0.10, run.model.topology);
    DiscreteSensitivitySink disc(dir, inv, cfg.dt, 2, false);
    std::vector<Sink*> sinks{&disc};
    run_trajectory(state, engine, run.lcfg, sinks);
    const double rate = disc.rate_estimate().mean / (3.0 * cfg.n_atoms);
    CHECK(rate == doctest::Approx(0.0025).epsilon(0.01));
}

TEST_CASE("discrete FIM: zero Jacobian and OU consistency") {
    FimAccumulator zero(1);
    ParamJacobian jz;
    jz.n_atoms = 2;
    jz.n_params = 1;
    jz.m.assign(6, 0.0);
    discrete_fim_accumulate(zero, jz, jz, 1e-3, unit_inv(2));
    CHECK(zero.mean()[0] == 0.0);

    // OU chain: (1/dt)-normalized discrete FIM approaches 1/(2 gamma k)
    ExperimentConfig cfg = preset_ou_oracle();
    cfg.seed = 77;
    cfg.n_atoms = 48;
    cfg.dt = 2e-3;
    cfg.n_steps = 20000;
    cfg.n_equil = 1000;
    const BuiltSystem b0 = build_system(cfg);
    BuiltSystem run = b0;
    run.lcfg.seed = cfg.seed;
    SystemState state = make_initial_state(run, cfg.seed);
    ForceEngine engine = make_engine(run);
    const InverseDiffusion inv = InverseDiffusion::from(run.beta, run.lcfg, cfg.n_atoms);
    auto dir = make_direction(run.model.parameters, "k", 0.10, run.model.topology);
    DiscreteSensitivitySink disc(dir, inv, cfg.dt, 4, true);
    std::vector<Sink*> sinks{&disc};
    run_trajectory(state, engine, run.lcfg, sinks);
    const double fim_rate = disc.fim_rate_mean()[0] / (3.0 * cfg.n_atoms);
    CHECK(fim_rate == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("discrete and continuous FIM diagonals agree at small dt (LJ)") {
    ExperimentConfig cfg = preset_lj_desk();
    cfg.seed = 21;
    cfg.n_atoms = 125;
    cfg.box_length = std::cbrt(125 / 0.7);
    cfg.param_overrides["rcut"] = 2.5;
    cfg.dt = 1e-3;
    cfg.n_steps = 4000;
    cfg.n_equil = 2000;
    const BuiltSystem b0 = build_system(cfg);
    BuiltSystem run = b0;
    run.lcfg.seed = cfg.seed;
    SystemState state = make_initial_state(run, cfg.seed);
    ForceEngine engine = make_engine(run);
    const InverseDiffusion inv = InverseDiffusion::from(run.beta, run.lcfg, cfg.n_atoms);
    auto dir = make_direction(run.model.parameters, "epsilon", 0.05, run.model.topology);
    SensitivitySink cont({dir}, inv, 5, true);
    DiscreteSensitivitySink disc(dir, inv, cfg.dt, 5, true);
    std::vector<Sink*> sinks{&cont, &disc};
    run_trajectory(state, engine, run.lcfg, sinks);
    const auto c = cont.fim().mean();
    const auto d = disc.fim_rate_mean();
    // same trajectory, interleaved sample sets: diagonals within a few percent
    for (std::size_t i = 0; i < 2; ++i) {
        const std::size_t diag = i * 2 + i;
        CHECK(d[diag] == doctest::Approx(c[diag]).epsilon(0.05));
    }
}

TEST_CASE("inverse-temperature sink along an equilibrium run") {
    ExperimentConfig cfg = preset_ou_oracle();
    cfg.seed = 31;
    cfg.n_atoms = 64;
    cfg.dt = 0.01;
    cfg.n_steps = 20000;
    cfg.n_equil = 500;
    const BuiltSystem b0 = build_system(cfg);
    BuiltSystem run = b0;
    run.lcfg.seed = cfg.seed;
    SystemState state = make_initial_state(run, cfg.seed);
    ForceEngine engine = make_engine(run);
    const double sigma2 = 2.0 * run.lcfg.gamma_of(0) / run.beta;
    InverseTempSink sink(std::vector<double>(cfg.n_atoms, sigma2), 5);
    std::vector<Sink*> sinks{&sink};
    run_trajectory(state, engine, run.lcfg, sinks);
    const double avg = sink.momentum_average().mean;
    const double rer = inverse_temp_rer(0.1, avg);
    const double target = inverse_temp_rer_closed(0.1, sigma2, 3, cfg.n_atoms, run.beta, 1.0);
    CHECK(rer == doctest::Approx(target).epsilon(0.02));
}

TEST_CASE("pinsker bound: landmarks and monotonicity") {
    CHECK(pinsker_bound(0.0, 10.0, 1.0) == 0.0);
    CHECK(pinsker_bound(2.0, 4.0, 0.5) == doctest::Approx(0.5 * 4.0));
    CHECK(pinsker_bound(1.0, 2.0, 1.0) < pinsker_bound(1.0, 3.0, 1.0));
    CHECK(pinsker_bound(1.0, 2.0, 1.0) < pinsker_bound(2.0, 2.0, 1.0));
    CHECK_THROWS_AS(pinsker_bound(-1.0, 1.0, 1.0), ConfigError);
}

TEST_CASE("pinsker inequality on the exhaustively enumerated two-state chain") {
    // stationary two-state chains, all 2^(T+1) paths enumerated exactly
    for (double a : {0.6, 0.7, 0.8}) {
        for (double b : {0.5, 0.65, 0.8}) {
            for (double eps : {0.02, 0.05, 0.10}) {
                const double a2 = a + eps, b2 = b - eps;
                const int T = 12;
                const double pi0 = (1 - b) / ((1 - a) + (1 - b));
                const double pi0p = (1 - b2) / ((1 - a2) + (1 - b2));
                const double P[2][2] = {{a, 1 - a}, {1 - b, b}};
                const double Q[2][2] = {{a2, 1 - a2}, {1 - b2, b2}};
                double rer = 0.0;
                for (int s = 0; s < 2; ++s) {
                    const double pis = s == 0 ? pi0 : 1 - pi0;
                    for (int t = 0; t < 2; ++t) rer += pis * P[s][t] * std::log(P[s][t] / Q[s][t]);
                }
                double eg = 0.0, egp = 0.0;
                for (long m = 0; m < (1L << (T + 1)); ++m) {
                    double pp = (m & 1) ? 1 - pi0 : pi0;
                    double qq = (m & 1) ? 1 - pi0p : pi0p;
                    int prev = static_cast<int>(m & 1);
                    int cnt = (prev == 0);
                    for (int i = 1; i <= T; ++i) {
                        const int s = static_cast<int>((m >> i) & 1);
                        pp *= P[prev][s];
                        qq *= Q[prev][s];
                        cnt += (s == 0);
                        prev = s;
                    }
                    const double g = static_cast<double>(cnt) / (T + 1);  // bounded by 1
                    eg += pp * g;
                    egp += qq * g;
                }
                CHECK(std::abs(egp - eg) <= pinsker_bound(rer, T, 1.0));
            }
        }
    }
}

TEST_CASE("jacobi eigensolver") {
    // identity
    const auto id = jacobi_eigen({1, 0, 0, 1}, 2);
    CHECK(id.values[0] == doctest::Approx(1.0));
    CHECK(id.values[1] == doctest::Approx(1.0));
    // hand-computed 2x2
    const auto e = jacobi_eigen({2, 1, 1, 2}, 2);
    CHECK(e.values[0] == doctest::Approx(3.0));
    CHECK(e.values[1] == doctest::Approx(1.0));
    // non-symmetric input rejected
    CHECK_THROWS_AS(jacobi_eigen({1, 2, 3, 4}, 2), ContractError);

    // random symmetric matrices: residuals and orthonormality
    for (int t = 0; t < 20; ++t) {
        const std::size_t k = 5;
        std::vector<double> m(k * k, 0.0);
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = r; c < k; ++c) {
                const double v = rng::gaussian3(77, t, static_cast<std::uint32_t>(r * k + c),
                                                rng::stream_init_misc)
                                     .x;
                m[r * k + c] = v;
                m[c * k + r] = v;
            }
        const auto dec = jacobi_eigen(m, k);
        for (std::size_t col = 0; col < k; ++col) {
            // A v = lambda v
            for (std::size_t r = 0; r < k; ++r) {
                double av = 0.0;
                for (std::size_t c = 0; c < k; ++c) av += m[r * k + c] * dec.vectors[c * k + col];
                CHECK(av == doctest::Approx(dec.values[col] * dec.vectors[r * k + col])
                                .epsilon(1e-8)
                                .scale(std::abs(dec.values[col]) + 1.0));
            }
            // orthonormal columns to 1e-10
            for (std::size_t col2 = 0; col2 <= col; ++col2) {
                double d = 0.0;
                for (std::size_t r = 0; r < k; ++r)
                    d += dec.vectors[r * k + col] * dec.vectors[r * k + col2];
                CHECK(std::abs(d - (col == col2 ? 1.0 : 0.0)) < 1e-10);
            }
        }
        // descending order
        for (std::size_t col = 1; col < k; ++col) CHECK(dec.values[col - 1] >= dec.values[col]);
    }
}

TEST_CASE("FIM estimates are positive semidefinite") {
    FimAccumulator acc(3);
    for (int t = 0; t < 40; ++t) {
        ParamJacobian jac;
        jac.n_atoms = 4;
        jac.n_params = 3;
        jac.m.resize(36);
        for (auto& v : jac.m)
            v = rng::gaussian3(91, t, static_cast<std::uint32_t>(&v - jac.m.data()),
                               rng::stream_init_misc)
                    .x;
        acc.add(jac, unit_inv(4));
    }
    const auto dec = jacobi_eigen(acc.mean(), 3);
    CHECK(dec.values.back() >= -1e-8 * dec.values.front());
}

TEST_CASE("asymmetry diagnostic: exact symmetry for linear parameters") {
    // identical +/- estimates: odd term zero, not significant
    const EstimateWithError plus{0.020, 0.001, 100};
    const EstimateWithError minus{0.020, 0.001, 100};
    const auto rep = asymmetry_diagnostic(plus, minus, 0.019);
    CHECK(rep.odd == doctest::Approx(0.0));
    CHECK_FALSE(rep.significant);
    CHECK(rep.even_residual == doctest::Approx(0.001));

    const EstimateWithError p2{0.360, 0.010, 100};
    const EstimateWithError m2{0.101, 0.010, 100};
    const auto rep2 = asymmetry_diagnostic(p2, m2, 0.196);
    CHECK(rep2.odd == doctest::Approx(0.1295));
    CHECK(rep2.significant);
}

TEST_CASE("odd (third-order) RER term scales as |eps0|^3" * doctest::timeout(300)) {
    // sigma perturbations of the desk LJ fluid at 2.5%, 5%, 10%: the odd
    // combination (R+ - R-)/2 follows a log-log slope of 3 +/- 0.3
    ExperimentConfig cfg = preset_lj_desk();
    cfg.seed = 41;
    cfg.n_steps = 12000;
    cfg.n_equil = 4000;
    cfg.sens_stride = 10;
    cfg.perturbations = {{"sigma", 0.025}, {"sigma", -0.025}, {"sigma", 0.05},
                         {"sigma", -0.05}, {"sigma", 0.10},  {"sigma", -0.10}};
    const SweepResult res = run_sensitivity(cfg);
    std::vector<double> eps{0.025, 0.05, 0.10}, odd(3);
    for (int i = 0; i < 3; ++i) {
        odd[i] = 0.5 * (res.directions[2 * i].rer.mean - res.directions[2 * i + 1].rer.mean);
        CHECK(odd[i] > 0.0);
    }
    // least-squares slope of log(odd) vs log(eps)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < 3; ++i) {
        const double x = std::log(eps[i]), y = std::log(odd[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
    CHECK(slope == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("accumulators merge associatively") {
    ScalarAccumulator a, b, whole;
    for (int i = 0; i < 100; ++i) {
        const double x = rng::gaussian3(101, i, 0, rng::stream_init_misc).x;
        whole.add(x);
        (i < 50 ? a : b).add(x);
    }
    a.merge(b);
    CHECK(a.count() == whole.count());
    CHECK(a.mean() == doctest::Approx(whole.mean()).epsilon(1e-14));
    CHECK(a.stderr_blocked() == doctest::Approx(whole.stderr_blocked()).epsilon(1e-12));
}

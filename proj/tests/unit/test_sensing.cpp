#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ftn/errors.hpp"
#include "ftn/sensing.hpp"

using namespace ftn;

namespace {

FtnConfig sensing_config(double tau, Index N)
{
    FtnConfig cfg;
    cfg.pulse = make_pulse(PulseKind::RootRaisedCosine, 0.5, 1.0, 8, 20);
    cfg.tau = tau;
    cfg.N = N;
    cfg.constellation = Modulation::QPSK;
    return cfg;
}

VectorXd linspace(double a, double b, Index n) { return VectorXd::LinSpaced(n, a, b); }

} // namespace

TEST_CASE("fft and direct doppler transforms agree")
{
    Rng rng(2);
    VectorXcd r(300);
    for (auto& v : r) v = complex_gaussian(rng, 1.0);
    const double dt = 0.05;
    const VectorXd aligned = linspace(-2.0, 2.0, 401);          // step 0.01, 1/(step dt) = 2000 bins
    const VectorXd shifted = aligned.array() + 0.003;            // not on FFT bins
    const VectorXcd a = doppler_transform(r, -3.0, dt, aligned);
    for (Index j = 0; j < aligned.size(); j += 37) {
        cd ref{0.0, 0.0};
        for (Index i = 0; i < r.size(); ++i)
            ref += r(i) * std::polar(dt, -2.0 * std::numbers::pi * aligned(j) * (-3.0 + dt * static_cast<double>(i)));
        CHECK(std::abs(a(j) - ref) < 1e-9);
    }
    const VectorXcd b = doppler_transform(r, -3.0, dt, shifted);
    for (Index j = 0; j < shifted.size(); j += 41) {
        cd ref{0.0, 0.0};
        for (Index i = 0; i < r.size(); ++i)
            ref += r(i) * std::polar(dt, -2.0 * std::numbers::pi * shifted(j) * (-3.0 + dt * static_cast<double>(i)));
        CHECK(std::abs(b(j) - ref) < 1e-9);
    }
}

TEST_CASE("expected ambiguity function normalization and symmetry")
{
    const auto cfg = sensing_config(0.8, 32);
    VectorXd delay(3);
    delay << -0.5, 0.0, 0.5;
    const VectorXd dop = linspace(-1.0, 1.0, 41);
    const auto g = expected_af(cfg, delay, dop, 200, 9);
    CHECK(g.value(1, 20) == doctest::Approx(1.0));
    CHECK(g.value.minCoeff() >= 0.0);
    CHECK(g.value.maxCoeff() == doctest::Approx(1.0));
    CHECK(g.std_err(1, 20) > 0.0);
    // E|A(d, nu)|^2 = E|A(-d, -nu)|^2 within Monte-Carlo error.
    for (Index j = 0; j < dop.size(); ++j) {
        const double diff = std::abs(g.value(0, j) - g.value(2, dop.size() - 1 - j));
        CHECK(diff <= 4.0 * (g.std_err(0, j) + g.std_err(2, dop.size() - 1 - j)) + 1e-12);
    }
    const auto again = expected_af(cfg, delay, dop, 200, 9, 3);
    CHECK(again.value == g.value);
}

TEST_CASE("expected ambiguity function argument checks")
{
    const auto cfg = sensing_config(0.8, 16);
    VectorXd d0 = VectorXd::Zero(1);
    CHECK_THROWS_AS(expected_af(cfg, d0, linspace(-1, 1, 5), 50, 1), InvalidArgument);
    VectorXd bad(1);
    bad << 0.013;
    CHECK_THROWS_AS(expected_af(cfg, bad, linspace(-1, 1, 5), 100, 1), InvalidArgument);
}

TEST_CASE("peak report finds exactly an injected spike")
{
    AmbiguityGrid g;
    g.delay = VectorXd::Zero(1);
    g.doppler = linspace(-2.0, 2.0, 401);
    g.value = MatrixXd::Constant(1, 401, 1e-3);
    g.value(0, 200) = 1.0;
    g.value(0, 330) = 5e-3;
    auto peaks = af_peak_report(g);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0].doppler == doctest::Approx(1.3));
    CHECK(peaks[0].local_median == doctest::Approx(1e-3));
    g.value(0, 330) = 2.5e-3;
    CHECK(af_peak_report(g).empty());
}

TEST_CASE("alias peaks follow the symbol rate")
{
    const VectorXd dop = linspace(-2.0, 2.0, 1601);
    const VectorXd delay = VectorXd::Zero(1);
    auto near = [](const std::vector<AfPeak>& peaks, double nu) {
        for (const auto& p : peaks)
            if (std::abs(p.doppler - nu) < 0.006) return true;
        return false;
    };
    const auto g1 = expected_af(sensing_config(1.0, 64), delay, dop, 100, 4);
    CHECK(near(af_peak_report(g1), 1.0));
    const auto g6 = expected_af(sensing_config(0.6, 64), delay, dop, 100, 4);
    CHECK_FALSE(near(af_peak_report(g6), 1.0 / 0.6));
}

TEST_CASE("steering vectors equal matched-filter samples of a shifted echo")
{
    SensingScene sc;
    sc.frame = sensing_config(0.6, 40);
    sc.targets = {{0.37, {0.6, -0.2}}};
    Rng rng(3);
    const auto fr = random_frame(sc.frame, rng).frame;
    const VectorXcd y = sense_echo(sc, fr, 1);
    const VectorXcd u = doppler_steering(sc.frame, fr, 0.37) * sc.targets[0].reflectivity;
    CHECK((y - u).norm() < 1e-10 * y.norm());
}

TEST_CASE("noiseless single target is recovered exactly")
{
    SensingScene sc;
    sc.frame = sensing_config(0.6, 64);
    sc.targets = {{0.5, {0.8, 0.3}}};
    Rng rng(4);
    const auto fr = random_frame(sc.frame, rng).frame;
    const VectorXcd y = sense_echo(sc, fr, 1);
    const auto est = ml_doppler(sc, fr, y, linspace(-1.0, 1.0, 201));
    REQUIRE(est.doppler.size() == 1);
    CHECK(std::abs(est.doppler[0] - 0.5) < 1e-6);
    CHECK(std::abs(est.amplitude[0] - cd(0.8, 0.3)) < 1e-6);
    CHECK(est.residual < 1e-12 * y.squaredNorm());
}

TEST_CASE("noiseless two-target scene")
{
    SensingScene sc;
    sc.frame = sensing_config(0.6, 64);
    sc.targets = {{0.5, {1.0, 0.0}}, {-0.4, {0.15, 0.0}}};
    Rng rng(5);
    const auto fr = random_frame(sc.frame, rng).frame;
    const VectorXcd y = sense_echo(sc, fr, 1);
    const auto est = ml_doppler(sc, fr, y, linspace(-1.0, 1.0, 201));
    const auto hit = recovered_targets(sc.targets, est, 1e-6);
    CHECK(hit[0]);
    CHECK(hit[1]);
}

TEST_CASE("collinear candidates are reported")
{
    SensingScene sc;
    sc.frame = sensing_config(0.6, 16);
    sc.targets = {{0.1, {1.0, 0.0}}, {0.2, {0.5, 0.0}}};
    Rng rng(6);
    const auto fr = random_frame(sc.frame, rng).frame;
    const VectorXcd y = sense_echo(sc, fr, 1);
    CHECK_THROWS_AS(ml_doppler(sc, fr, y, VectorXd::Constant(6, 0.1)), IllConditioned);
    sc.targets.clear();
    CHECK_THROWS_AS(sc.validate(), InvalidArgument);
}

TEST_CASE("recovery matching pairs strongest with strongest")
{
    std::vector<Target> truth{{0.5, {1.0, 0.0}}, {-0.4, {0.15, 0.0}}};
    DopplerEstimate est;
    est.doppler = {0.548, 0.5};
    est.amplitude = {{0.1, 0.0}, {0.98, 0.0}};
    const auto hit = recovered_targets(truth, est, 0.005);
    CHECK(hit[0]);
    CHECK_FALSE(hit[1]);
}

TEST_CASE("matched-filter receiver locks onto the Nyquist alias ghost")
{
    // Noiseless: the strong echo at 0.5 leaves a ghost at 0.5 - 1/(tau T).
    auto run = [](double tau, Index N) {
        SensingScene sc;
        sc.frame = sensing_config(tau, N);
        sc.targets = {{0.5, {1.0, 0.0}}, {-0.4, {0.15, 0.0}}};
        Rng rng(7);
        const auto fr = random_frame(sc.frame, rng).frame;
        const VectorXcd y = sense_echo(sc, fr, 1);
        DopplerOptions opt;
        opt.method = DopplerMethod::MatchedFilter;
        return ml_doppler(sc, fr, y, linspace(-1.0, 1.0, 201), opt);
    };
    const auto nyq = run(1.0, 256);
    CHECK(std::abs(nyq.doppler[0] - 0.5) < 1e-9);
    CHECK(std::abs(nyq.doppler[1] + 0.5) < 0.006);
    const auto ftn = run(0.6, 1024);
    CHECK(std::abs(ftn.doppler[0] - 0.5) < 1e-9);
    CHECK(std::abs(ftn.doppler[1] + 0.4) < 0.005);
}

#include <doctest.h>

#include <cmath>
#include <limits>

#include "ftn/eq_time.hpp"
#include "ftn/errors.hpp"
#include "oracles.hpp"

using namespace ftn;
using oracle::enumerate;
using oracle::lse;

namespace {

struct Case {
    TrellisSpec spec;
    Observation obs;
    std::vector<double> priors;
    VectorXcd x;
};

Case random_case(Rng& rng, TrellisMetric metric, Modulation m, Index N, Index L, bool with_priors)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Case c;
    c.spec.constellation = m;
    c.spec.metric = metric;
    c.spec.taps.resize(L + 1);
    if (metric == TrellisMetric::Euclidean) {
        for (Index i = 0; i <= L; ++i) c.spec.taps(i) = cd(u(rng), m == Modulation::QPSK ? u(rng) : 0.0);
        c.spec.taps(0) += 1.5;
    }
    else {
        // Autocorrelation of a random causal filter keeps G positive semidefinite.
        VectorXd h(L + 1);
        for (auto& v : h) v = u(rng);
        h(0) += 1.5;
        for (Index k = 0; k <= L; ++k) c.spec.taps(k) = h.head(L + 1 - k).dot(h.tail(L + 1 - k));
    }
    const auto alph = alphabet(m);
    c.x.resize(N);
    for (Index j = 0; j < N; ++j) c.x(j) = alph[rng() % alph.size()];
    c.obs.N0 = 0.3 + 0.7 * std::abs(u(rng));
    if (metric == TrellisMetric::Euclidean) {
        c.obs.model = ObservationModel::Forney;
        c.obs.taps = c.spec.taps;
        c.obs.y = convolve<cd, cd>(c.spec.taps, c.x);
    }
    else {
        c.obs.model = ObservationModel::Ungerboeck;
        c.obs.y = hermitian_toeplitz(c.spec.taps, N) * c.x;
    }
    for (Index i = 0; i < c.obs.y.size(); ++i) c.obs.y(i) += complex_gaussian(rng, c.obs.N0);
    if (with_priors) {
        c.priors.resize(N * bits_per_symbol(m));
        for (auto& p : c.priors) p = 3.0 * u(rng);
    }
    return c;
}

} // namespace

TEST_CASE("viterbi and bcjr match exhaustive enumeration")
{
    Rng rng(2024);
    int cases = 0;
    for (auto metric : {TrellisMetric::Euclidean, TrellisMetric::Ungerboeck}) {
        for (auto m : {Modulation::BPSK, Modulation::QPSK}) {
            for (Index L = 0; L <= 3; ++L) {
                for (int rep = 0; rep < 6; ++rep) {
                    const Index N = m == Modulation::BPSK ? 1 + static_cast<Index>(rng() % 10) : 1 + static_cast<Index>(rng() % 5);
                    const auto c = random_case(rng, metric, m, N, L, rep % 2 == 1);
                    const auto e = enumerate(c.spec, c.obs, c.priors);
                    const auto alph = alphabet(m);

                    const std::size_t best = e.best();
                    const VectorXcd xhat = viterbi_mlse(c.spec, c.obs, c.priors);
                    for (Index j = 0; j < N; ++j) CHECK(std::abs(xhat(j) - alph[e.seqs[best][j]]) < 1e-12);

                    const auto soft = bcjr_full(c.spec, c.obs, c.priors);
                    const int bps = bits_per_symbol(m);
                    for (Index j = 0; j < N; ++j)
                        for (int b = 0; b < bps; ++b)
                            CHECK(soft.posterior[j * bps + b] == doctest::Approx(e.posterior(j, b)).epsilon(1e-6).scale(1.0));
                    ++cases;
                }
            }
        }
    }
    CHECK(cases == 96);
}

TEST_CASE("m-bcjr with every state kept equals full bcjr")
{
    Rng rng(77);
    for (auto metric : {TrellisMetric::Euclidean, TrellisMetric::Ungerboeck}) {
        for (Index L = 0; L <= 3; ++L) {
            const auto c = random_case(rng, metric, Modulation::BPSK, 30, L, true);
            const auto full = bcjr_full(c.spec, c.obs, c.priors);
            const auto reduced = mbcjr(c.spec, c.obs, c.priors, c.spec.state_count());
            for (std::size_t i = 0; i < full.llr.size(); ++i)
                CHECK(reduced.llr[i] == doctest::Approx(full.llr[i]).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("memoryless bpsk llr is 4 Re(y) / N0")
{
    Observation obs;
    obs.model = ObservationModel::Forney;
    obs.N0 = 0.8;
    obs.taps = VectorXcd::Ones(1);
    obs.y.resize(3);
    obs.y << cd(0.3, 0.1), cd(-1.2, 0.4), cd(2.0, -1.0);
    TrellisSpec spec;
    spec.taps = VectorXcd::Ones(1);
    const auto soft = bcjr_full(spec, obs);
    for (Index j = 0; j < 3; ++j) CHECK(soft.llr[j] == doctest::Approx(4.0 * obs.y(j).real() / 0.8));
}

TEST_CASE("symbol posteriors are normalized and extrinsic excludes the prior")
{
    Rng rng(5);
    const auto c = random_case(rng, TrellisMetric::Euclidean, Modulation::QPSK, 12, 2, true);
    const auto soft = bcjr_full(c.spec, c.obs, c.priors);
    for (Index j = 0; j < soft.symbol_app.rows(); ++j) CHECK(soft.symbol_app.row(j).sum() == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t i = 0; i < soft.llr.size(); ++i) {
        const double expect = std::clamp(soft.posterior[i] - c.priors[i], -kLlrClamp, kLlrClamp);
        CHECK(soft.llr[i] == doctest::Approx(expect));
    }
}

TEST_CASE("state budget is enforced")
{
    TrellisSpec spec;
    spec.taps = VectorXcd::Ones(22);
    CHECK_THROWS_AS(spec.state_count(), StateExplosion);
    spec.budget = Index{1} << 21;
    CHECK(spec.state_count() == (Index{1} << 21));
}

TEST_CASE("survivor cancellation recovers symbols on a long channel")
{
    Rng rng(12);
    VectorXd f(12);
    for (Index i = 0; i < f.size(); ++i) f(i) = std::pow(0.6, static_cast<double>(i)) * (i % 2 ? -1.0 : 1.0);
    f /= f.norm();
    IsiChannel ch;
    ch.g = VectorXd::Ones(1);
    ch.f = f;
    VectorXcd x(400);
    for (Index j = 0; j < x.size(); ++j) x(j) = rng() & 1 ? -1.0 : 1.0;
    const auto obs = forney_observation(ch, x, 0.02, rng);
    TrellisSpec spec;
    spec.taps = f.head(3).cast<cd>();
    spec.survivor_taps = f.tail(9).cast<cd>();
    const VectorXcd xhat = viterbi_mlse(spec, obs);
    CHECK((xhat - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("m-bcjr keeps working far beyond the state budget")
{
    Rng rng(3);
    VectorXd f = VectorXd::Zero(24);
    f(0) = 0.9;
    f(1) = 0.4;
    f(23) = 0.05;
    f /= f.norm();
    IsiChannel ch;
    ch.g = VectorXd::Ones(1);
    ch.f = f;
    VectorXcd x(200);
    for (Index j = 0; j < x.size(); ++j) x(j) = rng() & 1 ? -1.0 : 1.0;
    const auto obs = forney_observation(ch, x, 0.05, rng);
    TrellisSpec spec;
    spec.taps = f.cast<cd>();
    CHECK_THROWS_AS(bcjr_full(spec, obs), StateExplosion);
    const auto soft = mbcjr(spec, obs, {}, 16);
    const auto bits = hard_bits_from_llr(soft.llr);
    int errors = 0;
    for (Index j = 0; j < x.size(); ++j) errors += bits[j] != (x(j).real() < 0 ? 1 : 0);
    CHECK(errors == 0);
}

TEST_CASE("ungerboeck trellis truncation keeps the dominant taps")
{
    IsiChannel ch;
    ch.g.resize(5);
    ch.g << 1.0, 0.5, 0.2, 0.001, 0.0001;
    const auto spec = ungerboeck_trellis(ch, Modulation::BPSK, 0.99);
    CHECK(spec.memory() == 2);
    CHECK(spec.metric == TrellisMetric::Ungerboeck);
}

TEST_CASE("forward evidence equals the enumerated partition sum")
{
    Rng rng(41);
    for (Index L = 0; L <= 2; ++L) {
        const auto c = random_case(rng, TrellisMetric::Euclidean, Modulation::QPSK, 5, L, false);
        const auto e = enumerate(c.spec, c.obs, {});
        double total = -std::numeric_limits<double>::infinity();
        for (double v : e.logp) total = lse(total, v);
        total -= static_cast<double>(c.x.size()) * std::log(4.0);
        CHECK(sequence_log_evidence(c.spec, c.obs) == doctest::Approx(total).epsilon(1e-10));
    }
}

TEST_CASE("ungerboeck and forney metrics give the same posteriors")
{
    // y = F^H z links the two factorizations of one likelihood when G = F^H F.
    Rng rng(8);
    for (int rep = 0; rep < 5; ++rep) {
        const Index N = 40, L = 3;
        const auto c = random_case(rng, TrellisMetric::Euclidean, Modulation::BPSK, N, L, rep % 2 == 0);
        VectorXcd g(L + 1);
        for (Index k = 0; k <= L; ++k) g(k) = c.spec.taps.tail(L + 1 - k).dot(c.spec.taps.head(L + 1 - k));
        MatrixXcd F = MatrixXcd::Zero(N + L, N);
        for (Index j = 0; j < N; ++j) F.block(j, j, L + 1, 1) = c.spec.taps;
        Observation ung;
        ung.model = ObservationModel::Ungerboeck;
        ung.N0 = c.obs.N0;
        ung.y = F.adjoint() * c.obs.y;
        TrellisSpec spec_u = c.spec;
        spec_u.metric = TrellisMetric::Ungerboeck;
        spec_u.taps = g;
        const auto a = bcjr_full(c.spec, c.obs, c.priors);
        const auto b = bcjr_full(spec_u, ung, c.priors);
        for (std::size_t i = 0; i < a.posterior.size(); ++i)
            CHECK(a.posterior[i] == doctest::Approx(b.posterior[i]).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("symmetric input gives zero llr")
{
    Observation obs;
    obs.model = ObservationModel::Ungerboeck;
    obs.N0 = 1.0;
    obs.y = VectorXcd::Zero(6);
    TrellisSpec spec;
    spec.metric = TrellisMetric::Ungerboeck;
    spec.taps.resize(2);
    spec.taps << 1.0, 0.4;
    for (double v : bcjr_full(spec, obs).llr) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("reduced-state trellis splits the factor between state and survivors")
{
    auto p = make_pulse(PulseKind::Sinc, 0.0);
    const auto ch = whiten_forney(isi_taps(p, 0.85), kDefaultNullRegularizer);
    const auto spec = forney_trellis_reduced(ch, Modulation::BPSK, 6, 0.9999);
    const VectorXd full = truncate_energy(*ch.f, 0.9999);
    CHECK(spec.memory() == 6);
    REQUIRE(spec.taps.size() + spec.survivor_taps.size() == full.size());
    CHECK((spec.taps.real() - full.head(7)).norm() == 0.0);
    CHECK((spec.survivor_taps.real() - full.tail(full.size() - 7)).norm() == 0.0);
}

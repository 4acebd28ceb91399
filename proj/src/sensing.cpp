#include "ftn/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <unsupported/Eigen/FFT>

#include "ftn/errors.hpp"
#include "ftn/parallel.hpp"

namespace ftn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr Index kTrialBlock = 16;

bool near_integer(double v, double tol = 1e-9) { return std::abs(v - std::round(v)) <= tol * std::max(1.0, std::abs(v)); }

/// FFT size and first bin when the grid is uniform and lands on DFT bins.
struct FftPlan {
    bool usable = false;
    Index size = 0;
    Index first = 0;
};

FftPlan plan_fft(const VectorXd& grid, double dt, Index length)
{
    FftPlan plan;
    if (grid.size() < 2) return plan;
    const double step = (grid(grid.size() - 1) - grid(0)) / static_cast<double>(grid.size() - 1);
    if (!(step > 0.0)) return plan;
    for (Index i = 1; i < grid.size(); ++i)
        if (std::abs(grid(i) - grid(0) - static_cast<double>(i) * step) > 1e-9 * step) return plan;
    const double P = 1.0 / (step * dt);
    if (!near_integer(P) || !near_integer(grid(0) / step)) return plan;
    plan.size = static_cast<Index>(std::llround(P));
    if (plan.size < length) return plan;
    plan.first = static_cast<Index>(std::llround(grid(0) / step));
    plan.usable = true;
    return plan;
}

VectorXcd transform_with(const FftPlan& plan, Eigen::FFT<double>& fft, const VectorXcd& r, double t0, double dt,
                         const VectorXd& grid)
{
    VectorXcd out(grid.size());
    if (plan.usable) {
        std::vector<cd> in(plan.size, cd{0.0, 0.0}), spec;
        std::copy(r.data(), r.data() + r.size(), in.begin());
        fft.fwd(spec, in);
        for (Index j = 0; j < grid.size(); ++j) {
            Index k = (plan.first + j) % plan.size;
            if (k < 0) k += plan.size;
            out(j) = spec[k] * std::polar(dt, -kTwoPi * grid(j) * t0);
        }
        return out;
    }
    for (Index j = 0; j < grid.size(); ++j) {
        const cd w = std::polar(1.0, -kTwoPi * grid(j) * dt);
        cd acc{0.0, 0.0};
        cd ph{1.0, 0.0};
        for (Index i = 0; i < r.size(); ++i) {
            // Reseed the phasor periodically so rounding does not accumulate.
            if ((i & 1023) == 0) ph = std::polar(1.0, -kTwoPi * grid(j) * dt * static_cast<double>(i));
            acc += r(i) * ph;
            ph *= w;
        }
        out(j) = acc * std::polar(dt, -kTwoPi * grid(j) * t0);
    }
    return out;
}

struct AfBlock {
    MatrixXd sum;
    MatrixXd sumsq;
    double energy_sq = 0.0;
};

double median(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2) return *mid;
    const double hi = *mid;
    return 0.5 * (hi + *std::max_element(v.begin(), mid));
}

} // namespace

VectorXcd doppler_transform(const VectorXcd& r, double t0, double dt, const VectorXd& grid)
{
    Eigen::FFT<double> fft;
    return transform_with(plan_fft(grid, dt, r.size()), fft, r, t0, dt, grid);
}

AmbiguityGrid expected_af(const FtnConfig& cfg, const VectorXd& delay_grid, const VectorXd& doppler_grid, Index trials,
                          std::uint64_t seed, int threads)
{
    cfg.validate();
    if (trials < 100) throw InvalidArgument("expected_af: trials must be >= 100");
    if (delay_grid.size() < 1 || doppler_grid.size() < 1) throw InvalidArgument("expected_af: empty grid");
    const double dt = cfg.pulse.dt();
    std::vector<Index> lags(delay_grid.size());
    for (Index i = 0; i < delay_grid.size(); ++i) {
        const double k = delay_grid(i) / dt;
        if (!near_integer(k)) throw InvalidArgument("expected_af: delays must be multiples of the pulse sample spacing");
        lags[i] = static_cast<Index>(std::llround(k));
    }

    const Index blocks = (trials + kTrialBlock - 1) / kTrialBlock;
    std::vector<AfBlock> partial(blocks);
    parallel_for(blocks, threads, [&](Index b) {
        AfBlock& acc = partial[b];
        acc.sum = MatrixXd::Zero(delay_grid.size(), doppler_grid.size());
        acc.sumsq = acc.sum;
        Eigen::FFT<double> fft;
        FftPlan plan;
        bool planned = false;
        for (Index t = b * kTrialBlock; t < std::min(trials, (b + 1) * kTrialBlock); ++t) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
            const Waveform w = modulate(cfg, random_frame(cfg, rng).frame);
            const Index M = w.samples.size();
            if (!planned) {
                plan = plan_fft(doppler_grid, dt, M);
                planned = true;
            }
            const double t0 = -static_cast<double>(w.origin) * dt;
            const double energy = w.samples.squaredNorm() * dt;
            acc.energy_sq += energy * energy;
            for (Index i = 0; i < delay_grid.size(); ++i) {
                const Index k = lags[i];
                VectorXcd r = VectorXcd::Zero(M);
                for (Index n = std::max<Index>(0, k); n < std::min(M, M + k); ++n)
                    r(n) = w.samples(n) * std::conj(w.samples(n - k));
                const ArrayXd a2 = transform_with(plan, fft, r, t0, dt, doppler_grid).array().abs2();
                acc.sum.row(i) += a2.matrix().transpose();
                acc.sumsq.row(i) += a2.square().matrix().transpose();
            }
        }
    });

    MatrixXd sum = MatrixXd::Zero(delay_grid.size(), doppler_grid.size());
    MatrixXd sumsq = sum;
    double energy_sq = 0.0;
    for (const auto& p : partial) {
        sum += p.sum;
        sumsq += p.sumsq;
        energy_sq += p.energy_sq;
    }
    const double n = static_cast<double>(trials);
    const double ref = energy_sq / n;
    AmbiguityGrid g;
    g.delay = delay_grid;
    g.doppler = doppler_grid;
    g.trials = trials;
    g.seed = seed;
    const MatrixXd mean = sum / n;
    const MatrixXd var = ((sumsq / n - mean.cwiseAbs2()) * (n / (n - 1.0))).cwiseMax(0.0);
    g.value = mean / ref;
    g.std_err = var.cwiseSqrt() / (std::sqrt(n) * ref);
    return g;
}

std::vector<AfPeak> af_peak_report(const AmbiguityGrid& grid, const PeakOptions& opt)
{
    if (grid.value.rows() != grid.delay.size() || grid.value.cols() != grid.doppler.size())
        throw InvalidArgument("af_peak_report: grid is not populated");
    std::vector<AfPeak> peaks;
    const Index nd = grid.doppler.size();
    for (Index i = 0; i < grid.delay.size(); ++i) {
        for (Index j = 1; j + 1 < nd; ++j) {
            const double v = grid.value(i, j);
            if (std::abs(grid.doppler(j)) <= opt.exclusion_radius) continue;
            if (!(v > grid.value(i, j - 1) && v >= grid.value(i, j + 1))) continue;
            std::vector<double> hood;
            for (Index k = 0; k < nd; ++k)
                if (k != j && std::abs(grid.doppler(k) - grid.doppler(j)) <= opt.neighborhood)
                    hood.push_back(grid.value(i, k));
            const double med = median(std::move(hood));
            if (v > opt.threshold * med) peaks.push_back({grid.delay(i), grid.doppler(j), v, med});
        }
    }
    return peaks;
}

void SensingScene::validate() const
{
    frame.validate();
    if (targets.empty()) throw InvalidArgument("SensingScene: need at least one target");
    for (const auto& t : targets)
        if (std::abs(t.reflectivity) == 0.0) throw InvalidArgument("SensingScene: reflectivities must be nonzero");
    if (!(N0 >= 0.0)) throw InvalidArgument("SensingScene: N0 must be >= 0");
    if (frame.cp_len != 0) throw InvalidArgument("SensingScene: sensing frames carry no cyclic prefix");
}

VectorXcd sense_echo(const SensingScene& scene, const SymbolFrame& frame, std::uint64_t noise_seed)
{
    scene.validate();
    const Waveform w = modulate(scene.frame, frame);
    Waveform echo = w;
    echo.samples.setZero();
    for (Index i = 0; i < w.samples.size(); ++i) {
        const double t = static_cast<double>(i - w.origin) * w.dt;
        for (const auto& tg : scene.targets) echo.samples(i) += tg.reflectivity * w.samples(i) * std::polar(1.0, kTwoPi * tg.doppler * t);
    }
    if (scene.N0 > 0.0) echo = awgn(echo, scene.N0, noise_seed);
    VectorXcd y(frame.size());
    for (Index n = 0; n < frame.size(); ++n) y(n) = matched_filter_sample(scene.frame.pulse, echo, n);
    return y;
}

VectorXcd doppler_steering(const FtnConfig& cfg, const SymbolFrame& frame, double doppler)
{
    const PulseShape& p = cfg.pulse;
    const Index step = cfg.step();
    const Index len = p.samples.size();
    const Index K = (len - 1) / step;
    const double dt = p.dt();
    // a[k] = sum_i p_i p_{i + k step} exp(j 2 pi nu u_i) dt, u_i relative to the pulse center.
    VectorXcd a = VectorXcd::Zero(2 * K + 1);
    for (Index k = -K; k <= K; ++k) {
        cd acc{0.0, 0.0};
        for (Index i = std::max<Index>(0, -k * step); i < std::min(len, len - k * step); ++i)
            acc += p.samples(i) * p.samples(i + k * step) * std::polar(1.0, kTwoPi * doppler * static_cast<double>(i - p.center()) * dt);
        a(k + K) = acc * dt;
    }
    const Index N = frame.size();
    const double sym_dt = static_cast<double>(step) * dt;
    VectorXcd u = VectorXcd::Zero(N);
    for (Index n = 0; n < N; ++n) {
        cd acc{0.0, 0.0};
        for (Index m = std::max<Index>(0, n - K); m <= std::min(N - 1, n + K); ++m) acc += frame.symbols(m) * a(n - m + K);
        u(n) = acc * std::polar(1.0, kTwoPi * doppler * static_cast<double>(n) * sym_dt);
    }
    return u;
}

namespace {

struct PairFit {
    double gain = -1.0;
    bool ok = false;
};

/// Captured energy c^H G^{-1} c of the two-column fit.
PairFit pair_gain(cd c1, cd c2, double g11, double g22, cd g12)
{
    const double det = g11 * g22 - std::norm(g12);
    if (!(det > 1e-10 * g11 * g22)) return {};
    const double num = g22 * std::norm(c1) + g11 * std::norm(c2) - 2.0 * (std::conj(c1) * g12 * c2).real();
    return {num / det, true};
}

double parabolic_offset(double left, double mid, double right)
{
    const double den = left - 2.0 * mid + right;
    if (!(den < 0.0)) return 0.0;
    return std::clamp(0.5 * (left - right) / den, -0.5, 0.5);
}

/// Least-squares amplitudes and captured energy for a set of steering vectors.
std::pair<std::vector<cd>, double> ls_fit(const std::vector<VectorXcd>& cols, const VectorXcd& y)
{
    MatrixXcd U(y.size(), static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) U.col(static_cast<Index>(i)) = cols[i];
    const VectorXcd amp = U.colPivHouseholderQr().solve(y);
    const double captured = y.squaredNorm() - (y - U * amp).squaredNorm();
    return {std::vector<cd>(amp.data(), amp.data() + amp.size()), captured};
}

} // namespace

DopplerEstimate ml_doppler(const SensingScene& scene, const SymbolFrame& frame, const VectorXcd& received,
                           const VectorXd& candidates, const DopplerOptions& opt)
{
    scene.validate();
    const Index order = static_cast<Index>(scene.targets.size());
    if (order > 2) throw InvalidArgument("ml_doppler: at most two targets are supported");
    if (received.size() != frame.size()) throw InvalidArgument("ml_doppler: received length must equal the frame length");
    const Index G = candidates.size();
    if (G < order + 2) throw InvalidArgument("ml_doppler: candidate grid too small");
    const double step = (candidates(G - 1) - candidates(0)) / static_cast<double>(G - 1);

    MatrixXcd U(frame.size(), G);
    for (Index g = 0; g < G; ++g) U.col(g) = doppler_steering(scene.frame, frame, candidates(g));
    const VectorXcd c = U.adjoint() * received;
    const MatrixXcd gram = U.adjoint() * U;

    DopplerEstimate est;
    auto refine = [&](double nu, double left, double mid, double right, const std::vector<double>& others) {
        const double cand = nu + parabolic_offset(left, mid, right) * step;
        if (cand == nu) return nu;
        std::vector<VectorXcd> cols{doppler_steering(scene.frame, frame, cand)};
        std::vector<VectorXcd> base{doppler_steering(scene.frame, frame, nu)};
        for (double o : others) {
            cols.push_back(doppler_steering(scene.frame, frame, o));
            base.push_back(cols.back());
        }
        return ls_fit(cols, received).second > ls_fit(base, received).second ? cand : nu;
    };

    auto J1 = [&](Index g) { return std::norm(c(g)) / gram(g, g).real(); };
    auto refine_single = [&](Index g) {
        double nu = candidates(g);
        if (g == 0 || g + 1 == G) return nu;
        const double cand = nu + parabolic_offset(J1(g - 1), J1(g), J1(g + 1)) * step;
        const VectorXcd u = doppler_steering(scene.frame, frame, cand);
        return std::norm(u.dot(received)) / u.squaredNorm() > J1(g) ? cand : nu;
    };

    if (order == 1 || opt.method == DopplerMethod::MatchedFilter) {
        std::vector<Index> peaks;
        for (Index g = 0; g < G; ++g)
            if ((g == 0 || J1(g) > J1(g - 1)) && (g + 1 == G || J1(g) >= J1(g + 1))) peaks.push_back(g);
        std::stable_sort(peaks.begin(), peaks.end(), [&](Index a, Index b) { return J1(a) > J1(b); });
        const double cell = 1.0 / (static_cast<double>(frame.size()) * scene.frame.tau * scene.frame.pulse.T);
        std::vector<Index> picked;
        for (Index g : peaks) {
            if (static_cast<Index>(picked.size()) == order) break;
            bool masked = false;
            for (Index p : picked) masked |= std::abs(candidates(g) - candidates(p)) < opt.mainlobe_cells * cell;
            if (!masked) picked.push_back(g);
        }
        if (static_cast<Index>(picked.size()) < order)
            throw IllConditioned("ml_doppler: matched-filter response has fewer separated peaks than targets");
        for (Index g : picked) est.doppler.push_back(refine_single(g));
    }
    else {
        Index bi = -1, bj = -1;
        double best_gain = -1.0;
        auto J = [&](Index i, Index j) {
            return pair_gain(c(i), c(j), gram(i, i).real(), gram(j, j).real(), gram(i, j));
        };
        for (Index i = 0; i < G; ++i) {
            for (Index j = i + 1; j < G; ++j) {
                const PairFit f = J(i, j);
                if (!f.ok) {
                    ++est.skipped_pairs;
                    continue;
                }
                if (f.gain > best_gain) {
                    best_gain = f.gain;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi < 0) throw IllConditioned("ml_doppler: every candidate pair is collinear");
        auto grid_gain = [&](Index i, Index j) {
            const PairFit f = J(i, j);
            return f.ok ? f.gain : 0.0;
        };
        double nu1 = candidates(bi), nu2 = candidates(bj);
        if (bi > 0 && bi + 1 < G && bi + 1 != bj)
            nu1 = refine(nu1, grid_gain(bi - 1, bj), grid_gain(bi, bj), grid_gain(bi + 1, bj), {nu2});
        if (bj > 0 && bj + 1 < G && bj - 1 != bi)
            nu2 = refine(nu2, grid_gain(bi, bj - 1), grid_gain(bi, bj), grid_gain(bi, bj + 1), {nu1});
        est.doppler = {nu1, nu2};
    }

    std::vector<VectorXcd> cols;
    for (double nu : est.doppler) cols.push_back(doppler_steering(scene.frame, frame, nu));
    const auto [amp, captured] = ls_fit(cols, received);
    est.amplitude = amp;
    est.residual = std::max(0.0, received.squaredNorm() - captured);
    return est;
}

std::vector<bool> recovered_targets(const std::vector<Target>& truth, const DopplerEstimate& est, double tolerance)
{
    // Strongest estimate goes to the strongest target, and so on down.
    auto order = [](std::size_t n, auto&& magnitude) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return magnitude(a) > magnitude(b); });
        return idx;
    };
    const auto ti = order(truth.size(), [&](std::size_t i) { return std::abs(truth[i].reflectivity); });
    const auto ei = order(est.doppler.size(), [&](std::size_t i) {
        return i < est.amplitude.size() ? std::abs(est.amplitude[i]) : 0.0;
    });
    std::vector<bool> hit(truth.size(), false);
    for (std::size_t r = 0; r < ti.size() && r < ei.size(); ++r)
        hit[ti[r]] = std::abs(est.doppler[ei[r]] - truth[ti[r]].doppler) < tolerance;
    return hit;
}

} // namespace ftn

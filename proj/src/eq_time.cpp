#include "ftn/eq_time.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ftn/errors.hpp"

namespace ftn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double lse(double a, double b)
{
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

/// Shared branch-metric machinery. States are packed base-|A| digits with
/// q = log2|A| bits per digit; digit i holds x_{j-1-i} at time j.
class Trellis {
public:
    Trellis(const TrellisSpec& spec, const Observation& obs, Priors priors, bool tables)
        : spec_(spec), obs_(obs), priors_(priors)
    {
        const auto alph = alphabet(spec.constellation);
        for (const auto& a : alph) symbols_.push_back(a * spec.amplitude);
        A_ = static_cast<Index>(symbols_.size());
        q_ = A_ == 2 ? 1 : 2;
        bps_ = bits_per_symbol(spec.constellation);
        L_ = spec.memory();
        if (L_ < 0) throw InvalidArgument("trellis needs at least one tap");
        N_ = frame_symbols(obs);
        if (!priors.empty() && static_cast<Index>(priors.size()) != N_ * bps_)
            throw InvalidArgument("prior length must equal N * bits_per_symbol");
        if (obs.N0 <= 0.0) throw InvalidArgument("N0 must be positive");
        inv_n0_ = 1.0 / obs.N0;
        if (q_ * L_ >= 62) tables = false;
        if (tables) {
            S_ = spec.state_count();
            isi_tab_.resize(S_);
            for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(S_); ++s) isi_tab_[s] = isi(s, L_);
        }
        else {
            S_ = spec.raw_state_count();
        }
        mask_ = q_ * L_ >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << (q_ * L_)) - 1;
    }

    Index N() const { return N_; }
    Index A() const { return A_; }
    Index L() const { return L_; }
    Index S() const { return S_; }
    int bps() const { return bps_; }
    const std::vector<cd>& symbols() const { return symbols_; }

    int digit(std::uint64_t s, Index i) const { return static_cast<int>((s >> (q_ * i)) & (A_ - 1)); }
    std::uint64_t next(std::uint64_t s, int a) const { return ((s << q_) | static_cast<std::uint64_t>(a)) & mask_; }
    std::uint64_t prev(std::uint64_t ns, int dropped) const
    {
        if (L_ == 0) return 0;
        return (ns >> q_) | (static_cast<std::uint64_t>(dropped) << (q_ * (L_ - 1)));
    }
    int oldest(std::uint64_t s) const { return L_ == 0 ? 0 : digit(s, L_ - 1); }

    /// sum_{i=1}^{min(L, avail)} taps[i] x_{j-i}
    cd isi(std::uint64_t s, Index avail) const
    {
        cd acc = 0.0;
        const Index top = std::min(L_, avail);
        for (Index i = 1; i <= top; ++i) acc += spec_.taps(i) * symbols_[digit(s, i - 1)];
        return acc;
    }

    cd isi_at(std::uint64_t s, Index j) const
    {
        if (j >= L_ && !isi_tab_.empty()) return isi_tab_[s];
        return isi(s, j);
    }

    double log_prior(Index j, int a) const
    {
        if (priors_.empty()) return 0.0;
        double acc = 0.0;
        for (int b = 0; b < bps_; ++b) {
            const double l = priors_[j * bps_ + b];
            acc += symbol_bit(a, b) ? -0.5 * l : 0.5 * l;
        }
        return acc;
    }

    double prior_llr(Index j, int b) const { return priors_.empty() ? 0.0 : priors_[j * bps_ + b]; }

    /// Channel log-likelihood increment with an extra known interference term.
    double branch(Index j, std::uint64_t s, int a, cd extra = 0.0) const
    {
        const cd x = symbols_[a];
        const cd isi_v = isi_at(s, j) + extra;
        const cd y = j < obs_.y.size() ? obs_.y(j) : cd{0.0};
        if (spec_.metric == TrellisMetric::Euclidean) {
            return -std::norm(y - spec_.taps(0) * x - isi_v) * inv_n0_;
        }
        return (2.0 * std::real(std::conj(x) * (y - isi_v)) - spec_.taps(0).real() * std::norm(x)) * inv_n0_;
    }

    /// Euclidean log-likelihood of y_N .. y_{N+L-1} given the final state.
    double terminal(std::uint64_t s) const
    {
        if (spec_.metric != TrellisMetric::Euclidean) return 0.0;
        double acc = 0.0;
        for (Index t = 0; t < L_; ++t) {
            const Index row = N_ + t;
            if (row >= obs_.y.size()) break;
            cd pred = 0.0;
            for (Index i = t + 1; i <= L_; ++i) {
                if (row - i < 0) continue;
                pred += spec_.taps(i) * symbols_[digit(s, i - t - 1)];
            }
            acc -= std::norm(obs_.y(row) - pred) * inv_n0_;
        }
        return acc;
    }

    const TrellisSpec& spec() const { return spec_; }
    const Observation& obs() const { return obs_; }

private:
    const TrellisSpec& spec_;
    const Observation& obs_;
    Priors priors_;
    std::vector<cd> symbols_;
    std::vector<cd> isi_tab_;
    Index A_ = 2, L_ = 0, N_ = 0, S_ = 1;
    int q_ = 1, bps_ = 1;
    double inv_n0_ = 1.0;
    std::uint64_t mask_ = 0;
};

void finish_llrs(SoftInfo& out, const Trellis& t)
{
    out.llr.resize(out.posterior.size());
    for (std::size_t i = 0; i < out.posterior.size(); ++i) {
        const Index j = static_cast<Index>(i) / t.bps();
        const int b = static_cast<int>(i % t.bps());
        out.llr[i] = clamp_llr(out.posterior[i] - t.prior_llr(j, b));
        out.posterior[i] = clamp_llr(out.posterior[i]);
    }
    out.extrinsic = true;
}

} // namespace

double clamp_llr(double v)
{
    if (std::isnan(v)) return 0.0;
    return std::clamp(v, -kLlrClamp, kLlrClamp);
}

Index TrellisSpec::raw_state_count() const
{
    const Index L = memory();
    const int q = alphabet_size() == 2 ? 1 : 2;
    if (q * L >= 63) return std::numeric_limits<Index>::max();
    return Index{1} << (q * L);
}

Index TrellisSpec::state_count() const
{
    const Index S = raw_state_count();
    if (S > budget)
        throw StateExplosion("trellis needs " + std::to_string(memory()) + " symbols of memory, over the state budget of " +
                             std::to_string(budget) + "; use mbcjr or a frequency-domain equalizer");
    return S;
}

Index frame_symbols(const Observation& obs)
{
    if (obs.model == ObservationModel::Forney || obs.model == ObservationModel::OrthoBasis)
        return obs.y.size() - std::max<Index>(obs.taps.size() - 1, 0);
    return obs.y.size();
}

TrellisSpec forney_trellis(const IsiChannel& whitened, Modulation m, double energy_fraction)
{
    if (!whitened.f) throw InvalidArgument("channel has no Forney factor; call whiten_forney first");
    TrellisSpec spec;
    const VectorXd f = truncate_energy(*whitened.f, energy_fraction);
    spec.taps = f.cast<cd>();
    spec.constellation = m;
    spec.metric = TrellisMetric::Euclidean;
    return spec;
}

TrellisSpec forney_trellis_reduced(const IsiChannel& whitened, Modulation m, Index memory, double survivor_fraction)
{
    if (!whitened.f) throw InvalidArgument("channel has no Forney factor; call whiten_forney first");
    if (memory < 0) throw InvalidArgument("forney_trellis_reduced: memory must be >= 0");
    const VectorXd f = truncate_energy(*whitened.f, survivor_fraction);
    const Index kept = std::min<Index>(memory + 1, f.size());
    TrellisSpec spec;
    spec.taps = f.head(kept).cast<cd>();
    spec.survivor_taps = f.tail(f.size() - kept).cast<cd>();
    spec.constellation = m;
    spec.metric = TrellisMetric::Euclidean;
    return spec;
}

TrellisSpec ungerboeck_trellis(const IsiChannel& ch, Modulation m, double abs_fraction)
{
    const double total = std::abs(ch.g(0)) + 2.0 * ch.g.tail(ch.K()).cwiseAbs().sum();
    double acc = std::abs(ch.g(0));
    Index L = 0;
    while (L < ch.K() && acc < abs_fraction * total) {
        ++L;
        acc += 2.0 * std::abs(ch.g(L));
    }
    TrellisSpec spec;
    spec.taps = ch.g.head(L + 1).cast<cd>();
    spec.constellation = m;
    spec.metric = TrellisMetric::Ungerboeck;
    return spec;
}

TrellisSpec observation_trellis(const Observation& obs, Modulation m, double energy_fraction)
{
    if (obs.model != ObservationModel::Forney && obs.model != ObservationModel::OrthoBasis)
        throw InvalidArgument("observation_trellis needs a white-noise observation");
    TrellisSpec spec;
    const double total = obs.taps.squaredNorm();
    double acc = 0.0;
    Index keep = obs.taps.size();
    for (Index i = 0; i < obs.taps.size(); ++i) {
        acc += std::norm(obs.taps(i));
        if (acc >= energy_fraction * total) {
            keep = i + 1;
            break;
        }
    }
    spec.taps = obs.taps.head(keep);
    spec.constellation = m;
    spec.metric = TrellisMetric::Euclidean;
    return spec;
}

VectorXcd viterbi_mlse(const TrellisSpec& spec, const Observation& obs, Priors priors)
{
    const Trellis t(spec, obs, priors, true);
    const Index N = t.N(), S = t.S(), A = t.A(), L = t.L();
    const Index Lt = spec.survivor_taps.size();
    if (Lt > 0 && spec.metric != TrellisMetric::Euclidean)
        throw InvalidArgument("survivor taps need the Euclidean metric");

    std::vector<double> cur(S, kNegInf), nxt(S);
    std::vector<std::uint64_t> from(S);
    std::vector<cd> hist(S * Lt, 0.0), hist_next(S * Lt, 0.0);
    // Per (j, next state): dropped digit in the low nibble, input in the high nibble.
    std::vector<std::uint8_t> decision(static_cast<std::size_t>(N * S));
    cur[0] = 0.0;
    const auto& sym = t.symbols();

    for (Index j = 0; j < N; ++j) {
        std::fill(nxt.begin(), nxt.end(), kNegInf);
        for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(S); ++s) {
            if (cur[s] == kNegInf) continue;
            cd extra = 0.0;
            for (Index k = 0; k < Lt; ++k) extra += spec.survivor_taps(k) * hist[s * Lt + k];
            for (int a = 0; a < A; ++a) {
                const std::uint64_t ns = t.next(s, a);
                const double m = cur[s] + t.branch(j, s, a, extra) + t.log_prior(j, a);
                if (m > nxt[ns]) {
                    nxt[ns] = m;
                    from[ns] = s;
                    decision[j * S + ns] = static_cast<std::uint8_t>(t.oldest(s) | (a << 4));
                }
            }
        }
        if (Lt > 0) {
            for (std::uint64_t ns = 0; ns < static_cast<std::uint64_t>(S); ++ns) {
                if (nxt[ns] == kNegInf) continue;
                const std::uint64_t s = from[ns];
                // Symbol leaving the L-window: x_{j-L}.
                const Index leaving = j - L;
                cd x = 0.0;
                if (leaving >= 0) x = L == 0 ? sym[decision[j * S + ns] >> 4] : sym[t.oldest(s)];
                hist_next[ns * Lt] = x;
                for (Index k = 1; k < Lt; ++k) hist_next[ns * Lt + k] = hist[s * Lt + k - 1];
            }
            std::swap(hist, hist_next);
        }
        std::swap(cur, nxt);
    }

    // Terminal metric over the tail rows, with survivor history when present.
    const VectorXcd& y = obs.y;
    VectorXcd full(L + 1 + Lt);
    full.head(L + 1) = spec.taps;
    if (Lt > 0) full.tail(Lt) = spec.survivor_taps;
    double best = kNegInf;
    std::uint64_t best_s = 0;
    std::vector<cd> past(L + Lt);
    for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(S); ++s) {
        if (cur[s] == kNegInf) continue;
        double m = cur[s];
        if (spec.metric == TrellisMetric::Euclidean) {
            // past[m] = x_{N-1-m}
            for (Index i = 0; i < L; ++i) past[i] = N - 1 - i >= 0 ? sym[t.digit(s, i)] : cd{0.0};
            for (Index k = 0; k < Lt; ++k) past[L + k] = hist[s * Lt + k];
            for (Index r = 0; r < L + Lt; ++r) {
                const Index row = N + r;
                if (row >= y.size()) break;
                cd pred = 0.0;
                for (Index i = r + 1; i <= L + Lt; ++i) pred += full(i) * past[i - r - 1];
                m -= std::norm(y(row) - pred) / obs.N0;
            }
        }
        if (m > best) {
            best = m;
            best_s = s;
        }
    }

    VectorXcd xhat(N);
    std::uint64_t s = best_s;
    for (Index j = N - 1; j >= 0; --j) {
        const std::uint8_t d = decision[j * S + s];
        const int a = d >> 4;
        xhat(j) = sym[a];
        s = t.prev(s, d & 0x0f);
    }
    return xhat;
}

SoftInfo bcjr_full(const TrellisSpec& spec, const Observation& obs, Priors priors)
{
    const Trellis t(spec, obs, priors, true);
    const Index N = t.N(), S = t.S(), A = t.A();
    const int bps = t.bps();

    std::vector<double> alpha(static_cast<std::size_t>((N + 1) * S), kNegInf);
    alpha[0] = 0.0;
    for (Index j = 0; j < N; ++j) {
        const double* a_cur = &alpha[j * S];
        double* a_next = &alpha[(j + 1) * S];
        for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(S); ++s) {
            if (a_cur[s] == kNegInf) continue;
            for (int a = 0; a < A; ++a) {
                const std::uint64_t ns = t.next(s, a);
                a_next[ns] = lse(a_next[ns], a_cur[s] + t.branch(j, s, a) + t.log_prior(j, a));
            }
        }
        const double mx = *std::max_element(a_next, a_next + S);
        for (Index s = 0; s < S; ++s) a_next[s] -= mx;
    }

    SoftInfo out;
    out.posterior.assign(static_cast<std::size_t>(N * bps), 0.0);
    out.symbol_app.resize(N, A);
    std::vector<double> beta(S), beta_prev(S);
    for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(S); ++s) beta[s] = t.terminal(s);

    std::vector<double> sym_acc(A);
    for (Index j = N - 1; j >= 0; --j) {
        const double* a_cur = &alpha[j * S];
        std::fill(beta_prev.begin(), beta_prev.end(), kNegInf);
        std::fill(sym_acc.begin(), sym_acc.end(), kNegInf);
        for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(S); ++s) {
            for (int a = 0; a < A; ++a) {
                const std::uint64_t ns = t.next(s, a);
                if (beta[ns] == kNegInf) continue;
                const double g = t.branch(j, s, a) + t.log_prior(j, a);
                beta_prev[s] = lse(beta_prev[s], g + beta[ns]);
                if (a_cur[s] != kNegInf) sym_acc[a] = lse(sym_acc[a], a_cur[s] + g + beta[ns]);
            }
        }
        double norm = kNegInf;
        for (int a = 0; a < A; ++a) norm = lse(norm, sym_acc[a]);
        for (int a = 0; a < A; ++a) out.symbol_app(j, a) = std::exp(sym_acc[a] - norm);
        for (int b = 0; b < bps; ++b) {
            double l0 = kNegInf, l1 = kNegInf;
            for (int a = 0; a < A; ++a) (symbol_bit(a, b) ? l1 : l0) = lse(symbol_bit(a, b) ? l1 : l0, sym_acc[a]);
            out.posterior[j * bps + b] = l0 - l1;
        }
        const double mx = *std::max_element(beta_prev.begin(), beta_prev.end());
        for (auto& v : beta_prev) v -= mx;
        std::swap(beta, beta_prev);
    }
    finish_llrs(out, t);
    return out;
}

double sequence_log_evidence(const TrellisSpec& spec, const Observation& obs)
{
    const Trellis t(spec, obs, {}, true);
    const Index N = t.N(), S = t.S(), A = t.A();
    const double log_uniform = -std::log(static_cast<double>(A));
    std::vector<double> cur(S, kNegInf), nxt(S);
    cur[0] = 0.0;
    double offset = 0.0;
    for (Index j = 0; j < N; ++j) {
        std::fill(nxt.begin(), nxt.end(), kNegInf);
        for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(S); ++s) {
            if (cur[s] == kNegInf) continue;
            for (int a = 0; a < A; ++a) {
                const std::uint64_t ns = t.next(s, a);
                nxt[ns] = lse(nxt[ns], cur[s] + t.branch(j, s, a) + log_uniform);
            }
        }
        const double mx = *std::max_element(nxt.begin(), nxt.end());
        for (auto& v : nxt) v -= mx;
        offset += mx;
        std::swap(cur, nxt);
    }
    double total = kNegInf;
    for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(S); ++s)
        if (cur[s] != kNegInf) total = lse(total, cur[s] + t.terminal(s));
    return total + offset;
}

namespace {

struct Layer {
    std::vector<std::uint64_t> states; // sorted
    std::vector<double> metric;

    Index find(std::uint64_t s) const
    {
        const auto it = std::lower_bound(states.begin(), states.end(), s);
        if (it == states.end() || *it != s) return -1;
        return it - states.begin();
    }
};

double lookahead_bonus(const Trellis& t, std::uint64_t s, Index j, Index depth)
{
    if (depth == 0 || j >= t.N()) return 0.0;
    double best = kNegInf;
    for (int a = 0; a < t.A(); ++a) {
        const double m = t.branch(j, s, a) + t.log_prior(j, a) + lookahead_bonus(t, t.next(s, a), j + 1, depth - 1);
        best = std::max(best, m);
    }
    return best;
}

} // namespace

SoftInfo mbcjr(const TrellisSpec& spec, const Observation& obs, Priors priors, Index M, Index lookahead)
{
    if (M < 1) throw InvalidArgument("M must be at least 1");
    const bool tables = spec.raw_state_count() <= spec.budget;
    const Trellis t(spec, obs, priors, tables);
    const Index N = t.N(), A = t.A();
    const int bps = t.bps();
    const bool use_bonus = spec.metric == TrellisMetric::Ungerboeck && lookahead > 0;

    std::vector<Layer> layers(N + 1);
    layers[0].states = {0};
    layers[0].metric = {0.0};

    struct Cand {
        std::uint64_t s;
        double m;
    };
    std::vector<Cand> cand;
    std::vector<std::pair<double, Index>> rank;
    for (Index j = 0; j < N; ++j) {
        const Layer& cur = layers[j];
        cand.clear();
        for (std::size_t i = 0; i < cur.states.size(); ++i) {
            for (int a = 0; a < A; ++a) {
                const std::uint64_t s = cur.states[i];
                cand.push_back({t.next(s, a), cur.metric[i] + t.branch(j, s, a) + t.log_prior(j, a)});
            }
        }
        std::sort(cand.begin(), cand.end(), [](const Cand& x, const Cand& y) { return x.s < y.s; });
        std::vector<Cand> merged;
        for (const auto& c : cand) {
            if (!merged.empty() && merged.back().s == c.s) merged.back().m = lse(merged.back().m, c.m);
            else merged.push_back(c);
        }
        if (static_cast<Index>(merged.size()) > M) {
            rank.clear();
            for (std::size_t i = 0; i < merged.size(); ++i) {
                const double bonus = use_bonus ? lookahead_bonus(t, merged[i].s, j + 1, lookahead) : 0.0;
                rank.emplace_back(merged[i].m + bonus, static_cast<Index>(i));
            }
            std::nth_element(rank.begin(), rank.begin() + (M - 1), rank.end(),
                             [](const auto& x, const auto& y) { return x.first > y.first; });
            rank.resize(M);
            std::sort(rank.begin(), rank.end(), [](const auto& x, const auto& y) { return x.second < y.second; });
            std::vector<Cand> kept;
            kept.reserve(M);
            for (const auto& r : rank) kept.push_back(merged[r.second]);
            merged.swap(kept);
        }
        Layer& nxt = layers[j + 1];
        double mx = kNegInf;
        for (const auto& c : merged) mx = std::max(mx, c.m);
        for (const auto& c : merged) {
            nxt.states.push_back(c.s);
            nxt.metric.push_back(c.m - mx);
        }
    }

    SoftInfo out;
    out.posterior.assign(static_cast<std::size_t>(N * bps), 0.0);
    std::vector<double> beta(layers[N].states.size());
    for (std::size_t i = 0; i < beta.size(); ++i) beta[i] = t.terminal(layers[N].states[i]);
    std::vector<double> sym_acc(A);
    for (Index j = N - 1; j >= 0; --j) {
        const Layer& cur = layers[j];
        const Layer& nxt = layers[j + 1];
        std::vector<double> beta_prev(cur.states.size(), kNegInf);
        std::fill(sym_acc.begin(), sym_acc.end(), kNegInf);
        for (std::size_t i = 0; i < cur.states.size(); ++i) {
            const std::uint64_t s = cur.states[i];
            for (int a = 0; a < A; ++a) {
                const Index k = nxt.find(t.next(s, a));
                if (k < 0 || beta[k] == kNegInf) continue;
                const double g = t.branch(j, s, a) + t.log_prior(j, a);
                beta_prev[i] = lse(beta_prev[i], g + beta[k]);
                sym_acc[a] = lse(sym_acc[a], cur.metric[i] + g + beta[k]);
            }
        }
        for (int b = 0; b < bps; ++b) {
            double l0 = kNegInf, l1 = kNegInf;
            for (int a = 0; a < A; ++a) {
                double& dst = symbol_bit(a, b) ? l1 : l0;
                dst = lse(dst, sym_acc[a]);
            }
            double v;
            if (l0 == kNegInf && l1 == kNegInf) v = 0.0;
            else if (l1 == kNegInf) v = kLlrClamp;
            else if (l0 == kNegInf) v = -kLlrClamp;
            else v = l0 - l1;
            out.posterior[j * bps + b] = v;
        }
        double mx = kNegInf;
        for (double v : beta_prev) mx = std::max(mx, v);
        if (mx != kNegInf)
            for (auto& v : beta_prev) v -= mx;
        beta.swap(beta_prev);
    }
    finish_llrs(out, t);
    return out;
}

} // namespace ftn

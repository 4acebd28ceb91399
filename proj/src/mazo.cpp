#include "ftn/mazo.hpp"

#include <algorithm>
#include <cmath>

#include "ftn/errors.hpp"
#include "ftn/model.hpp"

namespace ftn {

namespace {

class DistanceSearcher {
public:
    DistanceSearcher(const IsiChannel& ch, Index max_len, bool bound) : ch_(ch), max_len_(max_len), bound_(bound)
    {
        e_.assign(max_len, 0);
        if (bound_) {
            const IsiChannel w = whiten_forney(ch, -1.0);
            f_ = *w.f;
            // Worst autocorrelation mismatch over the lags a sequence can span.
            double err = 0.0;
            for (Index k = 0; k < max_len; ++k) {
                double acc = 0.0;
                for (Index i = k; i < f_.size(); ++i) acc += f_(i) * f_(i - k);
                const double target = ch.tap(k) + (k == 0 ? w.epsilon : 0.0);
                err = std::max(err, std::abs(acc - target));
            }
            const double L = static_cast<double>(max_len);
            margin_ = w.epsilon * L + err * L * L;
            z_.assign(max_len, 0.0);
        }
    }

    DistanceReport run()
    {
        best_ = ch_.g(0);
        best_e_ = {1};
        e_[0] = 1;
        if (bound_) z_[0] = f_(0);
        const double partial = bound_ ? f_(0) * f_(0) : 0.0;
        visit(1, ch_.g(0), partial);
        DistanceReport r;
        r.tau = ch_.tau;
        r.d2min = 2.0 * best_ / ch_.g(0);
        r.argmin = best_e_;
        r.depth = max_len_;
        r.nodes = nodes_;
        return r;
    }

private:
    double f_at(Index k) const { return k < f_.size() ? f_(k) : 0.0; }

    void visit(Index n, double q, double partial)
    {
        ++nodes_;
        if (e_[n - 1] != 0 && q < best_ - 1e-12) {
            best_ = q;
            best_e_.assign(e_.begin(), e_.begin() + n);
        }
        if (n == max_len_) return;
        for (int v : {0, -1, 1}) {
            e_[n] = v;
            double add = 0.0;
            if (v != 0) {
                add = ch_.g(0);
                for (Index j = 0; j < n; ++j)
                    if (e_[j] != 0) add += 2.0 * v * e_[j] * ch_.tap(n - j);
            }
            double p = partial;
            if (bound_) {
                double z = 0.0;
                for (Index j = 0; j <= n; ++j)
                    if (e_[j] != 0) z += e_[j] * f_at(n - j);
                z_[n] = z;
                p += z * z;
                if (p - margin_ >= best_) continue;
            }
            visit(n + 1, q + add, p);
        }
        e_[n] = 0;
    }

    const IsiChannel& ch_;
    Index max_len_;
    bool bound_;
    VectorXd f_;
    double margin_ = 0.0;
    std::vector<int> e_;
    std::vector<double> z_;
    double best_ = 0.0;
    std::vector<int> best_e_;
    long long nodes_ = 0;
};

} // namespace

DistanceReport min_distance(const IsiChannel& ch, Modulation m, Index max_len, DistanceSearch search)
{
    if (m != Modulation::BPSK) throw InvalidArgument("min_distance: only BPSK error events are searched");
    if (max_len < 1) throw InvalidArgument("min_distance: max_len must be >= 1");
    if (search == DistanceSearch::Auto)
        search = max_len <= 12 ? DistanceSearch::Exhaustive : DistanceSearch::BranchAndBound;
    if (search == DistanceSearch::Exhaustive && max_len > 16)
        throw InvalidArgument("min_distance: exhaustive search is limited to max_len <= 16");
    DistanceSearcher s(ch, max_len, search == DistanceSearch::BranchAndBound);
    return s.run();
}

MazoTable mazo_scan(const PulseShape& p, const std::vector<double>& tau_grid, Modulation m, Index max_len, double tol,
                    bool stop_at_limit)
{
    if (!std::is_sorted(tau_grid.begin(), tau_grid.end(), std::greater<>()))
        throw InvalidArgument("mazo_scan: tau grid must be sorted in descending order");
    MazoTable table;
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        auto r = min_distance(isi_taps(p, tau_grid[i]), m, max_len);
        const bool lost = r.d2min < 2.0 - tol;
        table.rows.push_back(std::move(r));
        if (lost && !table.limit) {
            if (i > 0) table.limit = tau_grid[i - 1];
            if (stop_at_limit) break;
        }
    }
    return table;
}

std::vector<double> descending_grid(double hi, double lo, double step)
{
    if (!(step > 0.0) || hi < lo) throw InvalidArgument("descending_grid: need hi >= lo and step > 0");
    std::vector<double> out;
    const auto n = static_cast<Index>(std::floor((hi - lo) / step + 1e-9));
    for (Index i = 0; i <= n; ++i) out.push_back(std::round((hi - static_cast<double>(i) * step) * 1e9) / 1e9);
    return out;
}

} // namespace ftn

#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>

#include "ftn/capacity.hpp"
#include "ftn/coded.hpp"
#include "ftn/eq_freq.hpp"
#include "ftn/eq_time.hpp"
#include "ftn/errors.hpp"
#include "ftn/mazo.hpp"
#include "ftn/model.hpp"
#include "ftn/parallel.hpp"
#include "ftn/sensing.hpp"

namespace ftn::lab {

namespace {

using I64 = std::int64_t;

std::uint64_t point_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
{
    return derive_seed(derive_seed(seed, a), b);
}

double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }

std::string modulation_name(Modulation m) { return m == Modulation::BPSK ? "bpsk" : "qpsk"; }

double median(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Index count_errors(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b)
{
    Index e = 0;
    for (std::size_t i = 0; i < a.size(); ++i) e += a[i] != b[i];
    return e;
}

std::vector<std::uint8_t> random_bits(Index n, Rng& rng)
{
    std::vector<std::uint8_t> bits(n);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1);
    return bits;
}

std::vector<CsvTable> run_spectrum(const ExperimentConfig& cfg, const SpectrumParams& p)
{
    CsvTable spec{"spectrum", {"pulse", "beta", "tau", "xi", "folded", "folded_from_taps"}, {}};
    CsvTable taps{"taps", {"pulse", "beta", "tau", "k", "g"}, {}};
    const PulseShape pulse = cfg.pulse.make();
    for (double tau : p.tau) {
        const FoldedSpectrum direct = folded_spectrum(pulse, tau, p.points);
        const IsiChannel ch = isi_taps(pulse, tau);
        const FoldedSpectrum from_taps = folded_from_taps(ch, direct.xi);
        for (Index i = 0; i < direct.size(); ++i)
            spec.add({cfg.pulse.label(), pulse.beta, tau, direct.xi(i), direct.values(i), from_taps.values(i)});
        for (Index k = 0; k <= ch.K(); ++k) taps.add({cfg.pulse.label(), pulse.beta, tau, I64{k}, ch.g(k)});
    }
    return {spec, taps};
}

std::vector<CsvTable> run_capacity(const ExperimentConfig& cfg, const CapacityParams& p, int threads)
{
    struct Task {
        std::string method;
        double tau;
        bool fixed_power;
        double x;
    };
    std::vector<Task> tasks;
    for (const auto& m : p.methods)
        for (double tau : p.tau) {
            for (double e : p.EbN0_dB) tasks.push_back({m, tau, false, e});
            for (double e : p.PTN0_dB) tasks.push_back({m, tau, true, e});
        }
    const PulseShape pulse = cfg.pulse.make();
    std::vector<RatePoint> out(tasks.size());
    parallel_for(static_cast<Index>(tasks.size()), threads, [&](Index i) {
        const Task& t = tasks[i];
        const bool wf = t.method == "waterfill";
        out[i] = t.fixed_power ? gaussian_rate_at_power(pulse, t.tau, t.x, wf, p.grid)
                               : gaussian_rate_at_ebn0(pulse, t.tau, t.x, wf, p.grid);
    });
    CsvTable table{"capacity",
                   {"pulse", "beta", "tau", "EbN0_dB", "EsN0_dB", "PTN0_dB", "rate", "bits_per_symbol", "method"},
                   {}};
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const RatePoint& r = out[i];
        table.add({cfg.pulse.label(), pulse.beta, r.tau, r.EbN0_dB, r.EsN0_dB, r.EsN0_dB - 10.0 * std::log10(r.tau),
                   r.rate, r.bits_per_symbol, std::string(to_string(r.method))});
    }
    return {table};
}

std::vector<CsvTable> run_rates(const ExperimentConfig& cfg, const RatesParams& p, int threads)
{
    struct Task {
        Index tau_index;
        bool fixed_es;
        double x;
    };
    std::vector<Task> tasks;
    for (Index i = 0; i < static_cast<Index>(p.tau.size()); ++i) {
        for (double e : p.EbN0_dB) tasks.push_back({i, false, e});
        for (double e : p.EsN0_dB) tasks.push_back({i, true, e});
    }
    const PulseShape pulse = cfg.pulse.make();
    std::vector<RatePoint> out(tasks.size());
    parallel_for(static_cast<Index>(tasks.size()), threads, [&](Index k) {
        const Task& t = tasks[k];
        const double tau = p.tau[t.tau_index];
        InfoRateOptions opt;
        opt.n_symbols = p.n_symbols;
        opt.n_trials = p.n_trials;
        opt.energy_fraction = p.energy_fraction;
        opt.seed = point_seed(cfg.seed, static_cast<std::uint64_t>(t.tau_index), static_cast<std::uint64_t>(k));
        if (!t.fixed_es) {
            out[k] = al_rate_at_ebn0(pulse, tau, p.modulation, t.x, opt);
            return;
        }
        const IsiChannel w = whiten_forney(isi_taps(pulse, tau), -1.0);
        const InfoRate ir = info_rate_arnold_loeliger(w, p.modulation, t.x, opt);
        RatePoint r;
        r.tau = tau;
        r.beta = pulse.beta;
        r.EsN0_dB = t.x;
        r.bits_per_symbol = ir.bits_per_symbol;
        r.rate = ir.bits_per_symbol / (tau * pulse.T);
        r.EbN0_dB = ir.bits_per_symbol > 0.0 ? t.x - 10.0 * std::log10(ir.bits_per_symbol)
                                             : std::numeric_limits<double>::infinity();
        r.method = RateMethod::ArnoldLoeliger;
        r.mc_std_err = ir.std_err;
        out[k] = r;
    });
    CsvTable table{"rates",
                   {"pulse", "beta", "tau", "modulation", "EbN0_dB", "EsN0_dB", "rate", "bits_per_symbol", "std_err",
                    "method", "seed"},
                   {}};
    for (const RatePoint& r : out)
        table.add({cfg.pulse.label(), pulse.beta, r.tau, modulation_name(p.modulation), r.EbN0_dB, r.EsN0_dB, r.rate,
                   r.bits_per_symbol, r.mc_std_err, std::string(to_string(r.method)), static_cast<I64>(cfg.seed)});
    return {table};
}

std::vector<CsvTable> run_mazo(const ExperimentConfig& cfg, const MazoParams& p, int threads)
{
    std::vector<PulseParams> pulses;
    if (p.pulses.empty()) pulses.push_back(cfg.pulse);
    for (const auto& name : p.pulses) {
        PulseParams pp = cfg.pulse;
        pp.kind = name == "sinc" ? PulseKind::Sinc : PulseKind::RootRaisedCosine;
        pp.beta = name == "sinc" ? 0.0 : std::stod(name.substr(4));
        pulses.push_back(pp);
    }
    const std::vector<double> grid = descending_grid(p.tau_hi, p.tau_lo, p.step);
    std::vector<MazoTable> out(pulses.size());
    parallel_for(static_cast<Index>(pulses.size()), threads, [&](Index i) {
        out[i] = mazo_scan(pulses[i].make(), grid, Modulation::BPSK, p.max_len, p.tolerance, p.stop_at_limit);
    });
    CsvTable rows{"mazo", {"pulse", "beta", "tau", "d2min", "depth", "nodes", "error_sequence"}, {}};
    CsvTable limits{"limits", {"pulse", "beta", "tau_limit", "max_len", "step"}, {}};
    for (std::size_t i = 0; i < pulses.size(); ++i) {
        for (const auto& r : out[i].rows) {
            std::string seq;
            for (int e : r.argmin) seq += (seq.empty() ? "" : " ") + std::to_string(e);
            rows.add({pulses[i].label(), pulses[i].beta, r.tau, r.d2min, I64{r.depth}, I64{r.nodes}, seq});
        }
        limits.add({pulses[i].label(), pulses[i].beta,
                    out[i].limit ? *out[i].limit : std::numeric_limits<double>::quiet_NaN(), I64{p.max_len}, p.step});
    }
    return {rows, limits};
}

std::string equalizer_label(const std::string& name, Index memory)
{
    if (name == "mlse" && memory >= 0) return "mlse-rsse";
    return name;
}

/// Time-domain equalizer decisions on a Forney observation.
std::vector<std::uint8_t> td_decide(const std::string& eq, const TrellisSpec& spec, const Observation& obs, Modulation m,
                                    Index M)
{
    if (eq == "mlse") return hard_bits(m, viterbi_mlse(spec, obs));
    if (eq == "mbcjr") return hard_bits_from_llr(mbcjr(spec, obs, {}, M).llr);
    return hard_bits_from_llr(bcjr_full(spec, obs).llr);
}

TrellisSpec td_trellis(const IsiChannel& whitened, Modulation m, double energy_fraction, Index memory)
{
    if (memory >= 0) return forney_trellis_reduced(whitened, m, memory);
    return forney_trellis(whitened, m, energy_fraction);
}

CsvTable ber_table()
{
    return {"ber",
            {"pulse", "beta", "tau", "EbN0_dB", "modulation", "equalizer", "frames", "bits", "errors", "BER", "seed"},
            {}};
}

std::vector<CsvTable> run_ber_td(const ExperimentConfig& cfg, const BerTdParams& p, int threads)
{
    const PulseShape pulse = cfg.pulse.make();
    const int bps = bits_per_symbol(p.modulation);
    CsvTable table = ber_table();
    for (std::size_t i = 0; i < p.tau.size(); ++i) {
        const IsiChannel w = whiten_forney(isi_taps(pulse, p.tau[i]), -1.0);
        const TrellisSpec spec = td_trellis(w, p.modulation, p.energy_fraction, p.memory);
        spec.state_count();
        for (std::size_t j = 0; j < p.EbN0_dB.size(); ++j) {
            const double N0 = 1.0 / (bps * db_to_lin(p.EbN0_dB[j]));
            std::vector<Index> errors(p.frames);
            parallel_for(p.frames, threads, [&](Index f) {
                Rng rng(point_seed(cfg.seed, i * 1000 + j, static_cast<std::uint64_t>(f)));
                const auto bits = random_bits(p.frame_len * bps, rng);
                const VectorXcd x = map_bits(p.modulation, bits);
                const Observation obs = forney_observation(w, x, N0, rng);
                errors[f] = count_errors(td_decide(p.equalizer, spec, obs, p.modulation, p.M), bits);
            });
            Index total = 0;
            for (Index e : errors) total += e;
            const Index nbits = p.frames * p.frame_len * bps;
            table.add({cfg.pulse.label(), pulse.beta, p.tau[i], p.EbN0_dB[j], modulation_name(p.modulation),
                       equalizer_label(p.equalizer, p.memory), I64{p.frames}, I64{nbits}, I64{total},
                       static_cast<double>(total) / static_cast<double>(nbits), static_cast<I64>(cfg.seed)});
        }
    }
    return {table};
}

std::vector<CsvTable> run_ber_fd(const ExperimentConfig& cfg, const BerFdParams& p, int threads)
{
    const PulseShape pulse = cfg.pulse.make();
    const int bps = bits_per_symbol(p.modulation);
    CsvTable table = ber_table();
    for (std::size_t i = 0; i < p.tau.size(); ++i) {
        const IsiChannel ch = isi_taps(pulse, p.tau[i]);
        const Index cp = p.cp_len < 0 ? 2 * ch.K() : p.cp_len;
        std::optional<IsiChannel> w;
        std::optional<TrellisSpec> spec;
        if (!p.td_reference.empty()) {
            w = whiten_forney(ch, -1.0);
            spec = forney_trellis(*w, p.modulation, p.energy_fraction);
            spec->state_count();
        }
        for (std::size_t j = 0; j < p.EbN0_dB.size(); ++j) {
            const double N0 = 1.0 / (bps * db_to_lin(p.EbN0_dB[j]));
            const FdeSetting s = fde_setting(ch, p.N, cp, N0);
            std::vector<Index> fd_errors(p.frames), td_errors(p.frames);
            parallel_for(p.frames, threads, [&](Index f) {
                Rng rng(point_seed(cfg.seed, i * 1000 + j, static_cast<std::uint64_t>(f)));
                const auto bits = random_bits(p.N * bps, rng);
                const VectorXcd x = map_bits(p.modulation, bits);
                Rng fd_rng(derive_seed(rng(), 1));
                Rng td_rng(derive_seed(rng(), 2));
                const Observation obs = circulant_observation(s, ch, x, N0, fd_rng);
                fd_errors[f] = count_errors(hard_bits_from_llr(fde_mmse(obs, s, p.modulation).soft.llr), bits);
                if (spec) {
                    const Observation fo = forney_observation(*w, x, N0, td_rng);
                    td_errors[f] = count_errors(td_decide(p.td_reference, *spec, fo, p.modulation, p.M), bits);
                }
            });
            const Index nbits = p.frames * p.N * bps;
            auto emit = [&](const std::string& name, const std::vector<Index>& errors) {
                Index total = 0;
                for (Index e : errors) total += e;
                table.add({cfg.pulse.label(), pulse.beta, p.tau[i], p.EbN0_dB[j], modulation_name(p.modulation), name,
                           I64{p.frames}, I64{nbits}, I64{total}, static_cast<double>(total) / static_cast<double>(nbits),
                           static_cast<I64>(cfg.seed)});
            };
            emit("fde-mmse", fd_errors);
            if (spec) emit(p.td_reference, td_errors);
        }
    }
    return {table};
}

std::vector<CsvTable> run_coded(const ExperimentConfig& cfg, const CodedParams& p, int threads)
{
    const PulseShape pulse = cfg.pulse.make();
    TurboConfig tc;
    tc.iterations = static_cast<int>(p.iterations);
    tc.M = p.M;
    tc.equalizer = p.equalizer == "fde" ? EqualizerKind::Fde
                   : p.equalizer == "mbcjr" ? EqualizerKind::MBcjr
                                            : EqualizerKind::BcjrFull;
    const Index coded_len = 2 * (p.info_len + tc.code.memory());
    const Interleaver pi(coded_len, derive_seed(cfg.seed, 0x1ea7));
    const double rate = tc.code.rate(p.info_len);

    CsvTable table{"coded",
                   {"pulse", "beta", "tau", "EbN0_dB", "equalizer", "info_len", "iteration", "frames", "bit_errors",
                    "BER", "median_BER", "FER", "seed"},
                   {}};
    CsvTable thr{"throughput", {"pulse", "beta", "tau", "code_rate", "modulation", "N", "cp_len", "spectral_efficiency"}, {}};

    for (std::size_t i = 0; i < p.tau.size(); ++i) {
        const double tau = p.tau[i];
        const IsiChannel ch = isi_taps(pulse, tau);
        std::optional<IsiChannel> w;
        std::optional<TrellisSpec> spec;
        if (tc.equalizer != EqualizerKind::Fde) {
            w = whiten_forney(ch, -1.0);
            spec = forney_trellis(*w, Modulation::BPSK, p.energy_fraction);
            if (tc.equalizer == EqualizerKind::BcjrFull) spec->state_count();
        }
        const Index cp = tc.equalizer == EqualizerKind::Fde ? 2 * ch.K() : 0;
        const auto tr = coded_throughput_report(rate, Modulation::BPSK, tau, pulse.beta,
                                                tc.equalizer == EqualizerKind::Fde ? coded_len : 1, cp);
        thr.add({cfg.pulse.label(), pulse.beta, tau, rate, std::string("bpsk"),
                 I64{tc.equalizer == EqualizerKind::Fde ? coded_len : 0}, I64{cp}, tr.spectral_efficiency});

        for (std::size_t j = 0; j < p.EbN0_dB.size(); ++j) {
            // Eb is the transmitted energy per information bit (Es = 1 per symbol).
            const double N0 = static_cast<double>(coded_len) / (static_cast<double>(p.info_len) * db_to_lin(p.EbN0_dB[j]));
            std::optional<FdeSetting> s;
            if (tc.equalizer == EqualizerKind::Fde) s = fde_setting(ch, coded_len, cp, N0);
            std::vector<std::vector<Index>> errors(p.frames);
            parallel_for(p.frames, threads, [&](Index f) {
                Rng rng(point_seed(cfg.seed, i * 1000 + j, static_cast<std::uint64_t>(f)));
                const auto info = random_bits(p.info_len, rng);
                const CodedFrame frame = encode_frame(info, tc, pi);
                TurboResult r;
                if (s) {
                    const Observation obs = circulant_observation(*s, ch, frame.symbols, N0, rng);
                    r = turbo_equalize(obs, *s, tc, pi, p.info_len, &frame.info);
                }
                else {
                    const Observation obs = forney_observation(*w, frame.symbols, N0, rng);
                    r = turbo_equalize(obs, *spec, tc, pi, p.info_len, &frame.info);
                }
                errors[f] = r.errors;
            });
            for (Index it = 0; it < p.iterations; ++it) {
                Index total = 0, failed = 0;
                std::vector<double> per_frame;
                for (const auto& e : errors) {
                    total += e[it];
                    failed += e[it] > 0;
                    per_frame.push_back(static_cast<double>(e[it]) / static_cast<double>(p.info_len));
                }
                const double nbits = static_cast<double>(p.frames * p.info_len);
                table.add({cfg.pulse.label(), pulse.beta, tau, p.EbN0_dB[j], p.equalizer, I64{p.info_len}, I64{it + 1},
                           I64{p.frames}, I64{total}, static_cast<double>(total) / nbits, median(per_frame),
                           static_cast<double>(failed) / static_cast<double>(p.frames), static_cast<I64>(cfg.seed)});
            }
        }
    }
    return {table, thr};
}

VectorXd uniform_grid(double lo, double hi, Index n)
{
    VectorXd g(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (Index i = 0; i < n; ++i) g(i) = lo + step * static_cast<double>(i);
    return g;
}

std::vector<CsvTable> run_sense_af(const ExperimentConfig& cfg, const SenseAfParams& p, int threads)
{
    const PulseShape pulse = cfg.pulse.make();
    CsvTable af{"af", {"pulse", "beta", "tau", "N", "trials", "delay", "doppler", "value", "stderr", "seed"}, {}};
    CsvTable peaks{"peaks", {"pulse", "beta", "tau", "delay", "doppler", "value", "local_median", "ratio"}, {}};
    const VectorXd doppler = uniform_grid(p.doppler_min, p.doppler_max, p.doppler_points);
    const VectorXd delay = Eigen::Map<const VectorXd>(p.delay.data(), static_cast<Index>(p.delay.size()));
    for (std::size_t i = 0; i < p.tau.size(); ++i) {
        FtnConfig fc;
        fc.pulse = pulse;
        fc.tau = p.tau[i];
        fc.N = p.N;
        fc.constellation = p.modulation;
        const AmbiguityGrid g = expected_af(fc, delay, doppler, p.trials, derive_seed(cfg.seed, i), threads);
        for (Index d = 0; d < delay.size(); ++d)
            for (Index k = 0; k < doppler.size(); ++k)
                af.add({cfg.pulse.label(), pulse.beta, fc.tau, I64{p.N}, I64{p.trials}, delay(d), doppler(k),
                        g.value(d, k), g.std_err(d, k), static_cast<I64>(cfg.seed)});
        PeakOptions po;
        po.threshold = p.threshold;
        po.exclusion_radius = p.exclusion;
        po.neighborhood = p.neighborhood;
        for (const AfPeak& pk : af_peak_report(g, po))
            peaks.add({cfg.pulse.label(), pulse.beta, fc.tau, pk.delay, pk.doppler, pk.value, pk.local_median,
                       pk.local_median > 0.0 ? pk.value / pk.local_median : std::numeric_limits<double>::infinity()});
    }
    return {af, peaks};
}

std::vector<CsvTable> run_sense_ml(const ExperimentConfig& cfg, const SenseMlParams& p, int threads)
{
    const PulseShape pulse = cfg.pulse.make();
    const VectorXd grid = uniform_grid(p.grid_min, p.grid_max, p.grid_points);
    const double tolerance = p.tolerance > 0.0 ? p.tolerance : 0.5 * (p.grid_max - p.grid_min) / static_cast<double>(p.grid_points - 1);
    CsvTable summary{"ml_summary",
                     {"pulse", "beta", "tau", "N", "N0", "method", "runs", "target", "doppler", "amplitude",
                      "recovered", "rate", "tolerance", "seed"},
                     {}};
    CsvTable runs{"ml_runs", {"tau", "method", "run", "k", "doppler", "amp_re", "amp_im"}, {}};
    for (double tau : p.tau) {
        SensingScene scene;
        scene.frame.pulse = pulse;
        scene.frame.tau = tau;
        scene.frame.N = p.N;
        scene.frame.constellation = p.modulation;
        scene.N0 = p.N0;
        for (std::size_t k = 0; k < p.dopplers.size(); ++k) scene.targets.push_back({p.dopplers[k], {p.amplitudes[k], 0.0}});
        scene.validate();
        for (const auto& method : p.methods) {
            DopplerOptions opt;
            opt.method = method == "least-squares" ? DopplerMethod::LeastSquares : DopplerMethod::MatchedFilter;
            opt.mainlobe_cells = p.mainlobe_cells;
            std::vector<DopplerEstimate> est(p.runs);
            parallel_for(p.runs, threads, [&](Index r) {
                // Symbols and noise depend only on the run index, so every tau and method sees the same draws.
                Rng rng(point_seed(cfg.seed, 0x5e45, static_cast<std::uint64_t>(r)));
                const SymbolFrame frame = random_frame(scene.frame, rng).frame;
                const VectorXcd y = sense_echo(scene, frame, point_seed(cfg.seed, 0x9015e, static_cast<std::uint64_t>(r)));
                est[r] = ml_doppler(scene, frame, y, grid, opt);
            });
            std::vector<Index> hits(scene.targets.size(), 0);
            Index all = 0;
            for (Index r = 0; r < p.runs; ++r) {
                const auto hit = recovered_targets(scene.targets, est[r], tolerance);
                bool every = true;
                for (std::size_t k = 0; k < hit.size(); ++k) {
                    hits[k] += hit[k];
                    every = every && hit[k];
                }
                all += every;
                for (std::size_t k = 0; k < est[r].doppler.size(); ++k)
                    runs.add({tau, method, I64{r}, static_cast<I64>(k + 1), est[r].doppler[k], est[r].amplitude[k].real(),
                              est[r].amplitude[k].imag()});
            }
            const double n = static_cast<double>(p.runs);
            for (std::size_t k = 0; k < scene.targets.size(); ++k)
                summary.add({cfg.pulse.label(), pulse.beta, tau, I64{p.N}, p.N0, method, I64{p.runs},
                             std::to_string(k + 1), p.dopplers[k], p.amplitudes[k], I64{hits[k]},
                             static_cast<double>(hits[k]) / n, tolerance, static_cast<I64>(cfg.seed)});
            summary.add({cfg.pulse.label(), pulse.beta, tau, I64{p.N}, p.N0, method, I64{p.runs}, std::string("all"),
                         std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), I64{all},
                         static_cast<double>(all) / n, tolerance, static_cast<I64>(cfg.seed)});
        }
    }
    return {summary, runs};
}

} // namespace

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void CsvTable::add(std::initializer_list<Cell> cells)
{
    if (cells.size() != header.size()) throw std::logic_error("CsvTable " + name + ": row width does not match header");
    std::vector<std::string> row;
    row.reserve(cells.size());
    for (const Cell& c : cells) {
        if (const double* d = std::get_if<double>(&c))
            row.push_back(format_number(*d));
        else if (const I64* i = std::get_if<I64>(&c))
            row.push_back(std::to_string(*i));
        else
            row.push_back(std::get<std::string>(c));
    }
    rows.push_back(std::move(row));
}

std::string CsvTable::render() const
{
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            const std::string& c = cells[i];
            if (c.find_first_of(",\"\n") != std::string::npos) {
                os << '"';
                for (char ch : c) os << (ch == '"' ? "\"\"" : std::string(1, ch));
                os << '"';
            }
            else {
                os << c;
            }
        }
        os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return os.str();
}

std::vector<CsvTable> run_experiment(const ExperimentConfig& cfg, int threads)
{
    return std::visit(
        [&](const auto& p) -> std::vector<CsvTable> {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, SpectrumParams>) return run_spectrum(cfg, p);
            else if constexpr (std::is_same_v<P, CapacityParams>) return run_capacity(cfg, p, threads);
            else if constexpr (std::is_same_v<P, RatesParams>) return run_rates(cfg, p, threads);
            else if constexpr (std::is_same_v<P, MazoParams>) return run_mazo(cfg, p, threads);
            else if constexpr (std::is_same_v<P, BerTdParams>) return run_ber_td(cfg, p, threads);
            else if constexpr (std::is_same_v<P, BerFdParams>) return run_ber_fd(cfg, p, threads);
            else if constexpr (std::is_same_v<P, CodedParams>) return run_coded(cfg, p, threads);
            else if constexpr (std::is_same_v<P, SenseAfParams>) return run_sense_af(cfg, p, threads);
            else return run_sense_ml(cfg, p, threads);
        },
        cfg.params);
}

} // namespace ftn::lab

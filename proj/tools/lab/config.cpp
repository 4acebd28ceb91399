#include "config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "ftn/errors.hpp"

namespace ftn::lab {

namespace {

constexpr std::string_view kKindNames[] = {"spectrum", "capacity", "rates",    "mazo",    "ber-td",
                                           "ber-fd",   "coded",    "sense-af", "sense-ml"};

std::string location(const std::string& source, const toml::source_region& r)
{
    std::ostringstream os;
    os << source;
    if (r.begin.line > 0) os << ':' << r.begin.line << ':' << r.begin.column;
    return os.str();
}

struct Range {
    double lo;
    double hi;
    bool lo_open = false;
    bool hi_open = false;

    bool contains(double v) const
    {
        return (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
    }
    std::string text() const
    {
        std::ostringstream os;
        os << (lo_open ? '(' : '[') << lo << ", " << hi << (hi_open ? ')' : ']');
        return os.str();
    }
};

constexpr double kInf = std::numeric_limits<double>::infinity();
const Range kAny{-kInf, kInf};
const Range kTau{0.0, 1.0, true, false};
const Range kFraction{0.0, 1.0, true, false};
const Range kPositive{0.0, kInf, true, false};
const Range kDb{-50.0, 60.0};

/// Typed reader over one TOML table that remembers which keys were consumed.
class Section {
public:
    Section(const toml::table* table, std::string name, const std::string& source, nlohmann::ordered_json& echo)
        : table_(table), name_(std::move(name)), source_(source), echo_(echo)
    {
    }

    double number(const std::string& key, double def, const Range& range = kAny)
    {
        const toml::node* n = find(key);
        double v = def;
        if (n) {
            const auto got = n->value<double>();
            if (!got) fail(n, key, "expected a number");
            v = *got;
            check(n, key, v, range);
        }
        echo_[key] = v;
        return v;
    }

    std::int64_t integer(const std::string& key, std::int64_t def, const Range& range = kAny)
    {
        const toml::node* n = find(key);
        std::int64_t v = def;
        if (n) {
            if (!n->is_integer()) fail(n, key, "expected an integer");
            v = *n->value<std::int64_t>();
            check(n, key, static_cast<double>(v), range);
        }
        echo_[key] = v;
        return v;
    }

    bool flag(const std::string& key, bool def)
    {
        const toml::node* n = find(key);
        bool v = def;
        if (n) {
            if (!n->is_boolean()) fail(n, key, "expected true or false");
            v = *n->value<bool>();
        }
        echo_[key] = v;
        return v;
    }

    std::string text(const std::string& key, const std::string& def, const std::vector<std::string>& choices = {})
    {
        const toml::node* n = find(key);
        std::string v = def;
        if (n) {
            if (!n->is_string()) fail(n, key, "expected a string");
            v = *n->value<std::string>();
            check_choice(n, key, v, choices);
        }
        echo_[key] = v;
        return v;
    }

    std::vector<double> numbers(const std::string& key, const std::vector<double>& def, const Range& range,
                                bool required = false)
    {
        const toml::node* n = find(key);
        std::vector<double> v = def;
        if (!n && required && def.empty()) fail(nullptr, key, "is required");
        if (n) {
            const toml::array* arr = n->as_array();
            v.clear();
            if (!arr) {
                const auto one = n->value<double>();
                if (!one) fail(n, key, "expected a number or an array of numbers");
                v.push_back(*one);
                check(n, key, v.back(), range);
            }
            else {
                for (const auto& item : *arr) {
                    const auto got = item.value<double>();
                    if (!got) fail(&item, key, "expected an array of numbers");
                    check(&item, key, *got, range);
                    v.push_back(*got);
                }
            }
            if (required && v.empty()) fail(n, key, "must not be empty");
        }
        echo_[key] = v;
        return v;
    }

    std::vector<std::string> texts(const std::string& key, const std::vector<std::string>& def,
                                   const std::vector<std::string>& choices = {})
    {
        const toml::node* n = find(key);
        std::vector<std::string> v = def;
        if (n) {
            v.clear();
            auto take = [&](const toml::node& item) {
                if (!item.is_string()) fail(&item, key, "expected a string or an array of strings");
                v.push_back(*item.value<std::string>());
                check_choice(&item, key, v.back(), choices);
            };
            if (const toml::array* arr = n->as_array())
                for (const auto& item : *arr) take(item);
            else
                take(*n);
            if (v.empty()) fail(n, key, "must not be empty");
        }
        echo_[key] = v;
        return v;
    }

    Modulation modulation(const std::string& key, Modulation def)
    {
        const std::string name = text(key, std::string(ftn::to_string(def)) == "BPSK" ? "bpsk" : "qpsk", {"bpsk", "qpsk"});
        return parse_modulation(name);
    }

    void mark(const std::string& key) { used_.insert(key); }

    /// Rejects keys that no reader asked for.
    void finish() const
    {
        if (!table_) return;
        for (const auto& [k, node] : *table_) {
            const std::string key(k.str());
            if (!used_.count(key)) fail(&node, key, "unknown key");
        }
    }

    [[noreturn]] void fail(const toml::node* n, const std::string& key, const std::string& message) const
    {
        const std::string where = n ? location(source_, n->source())
                                    : (table_ ? location(source_, table_->source()) : source_);
        throw ConfigError(where, field(key), message);
    }

    void check(const toml::node* n, const std::string& key, double v, const Range& range) const
    {
        if (!range.contains(v)) {
            std::ostringstream os;
            os << "value " << v << " outside " << range.text();
            fail(n, key, os.str());
        }
    }

private:
    const toml::node* find(const std::string& key)
    {
        used_.insert(key);
        return table_ ? table_->get(key) : nullptr;
    }

    void check_choice(const toml::node* n, const std::string& key, const std::string& v,
                      const std::vector<std::string>& choices) const
    {
        if (choices.empty()) return;
        for (const auto& c : choices)
            if (c == v) return;
        std::string list;
        for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
        fail(n, key, "'" + v + "' is not one of: " + list);
    }

    std::string field(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

    const toml::table* table_;
    std::string name_;
    const std::string& source_;
    nlohmann::ordered_json& echo_;
    std::set<std::string> used_;
};

PulseParams read_pulse(Section& s)
{
    PulseParams p;
    const std::string kind = s.text("kind", "rrc", {"rrc", "sinc"});
    p.kind = kind == "sinc" ? PulseKind::Sinc : PulseKind::RootRaisedCosine;
    p.beta = s.number("beta", kind == "sinc" ? 0.0 : 0.3, Range{0.0, 1.0});
    if (p.kind == PulseKind::Sinc) p.beta = 0.0;
    p.span = static_cast<int>(s.integer("span", 16, Range{2, 512}));
    p.samples_per_T = static_cast<int>(s.integer("samples_per_T", 16, Range{1, 256}));
    return p;
}

SpectrumParams read_spectrum(Section& s)
{
    SpectrumParams p;
    p.tau = s.numbers("tau", {}, kTau, true);
    p.points = s.integer("points", 512, Range{256, 1 << 20});
    if ((p.points & (p.points - 1)) != 0) s.fail(nullptr, "points", "must be a power of two");
    return p;
}

CapacityParams read_capacity(Section& s)
{
    CapacityParams p;
    p.tau = s.numbers("tau", {}, kTau, true);
    p.EbN0_dB = s.numbers("EbN0_dB", {}, kDb);
    p.PTN0_dB = s.numbers("PTN0_dB", {}, kDb);
    if (p.EbN0_dB.empty() && p.PTN0_dB.empty()) s.fail(nullptr, "EbN0_dB", "need EbN0_dB and/or PTN0_dB");
    p.methods = s.texts("method", {"flat"}, {"flat", "waterfill"});
    p.grid = s.integer("grid", 4096, Range{64, 1 << 20});
    return p;
}

RatesParams read_rates(Section& s)
{
    RatesParams p;
    p.tau = s.numbers("tau", {}, kTau, true);
    p.EbN0_dB = s.numbers("EbN0_dB", {}, kDb);
    p.EsN0_dB = s.numbers("EsN0_dB", {}, kDb);
    if (p.EbN0_dB.empty() && p.EsN0_dB.empty()) s.fail(nullptr, "EbN0_dB", "need EbN0_dB and/or EsN0_dB");
    p.modulation = s.modulation("modulation", Modulation::QPSK);
    p.n_symbols = s.integer("n_symbols", 10000, Range{100, 1e8});
    p.n_trials = s.integer("n_trials", 10, Range{2, 1e6});
    p.energy_fraction = s.number("energy_fraction", 0.999, kFraction);
    return p;
}

MazoParams read_mazo(Section& s)
{
    MazoParams p;
    p.pulses = s.texts("pulses", {});
    for (const auto& name : p.pulses) {
        if (name == "sinc") continue;
        bool ok = name.rfind("rrc:", 0) == 0;
        if (ok) {
            try {
                const double b = std::stod(name.substr(4));
                ok = b >= 0.0 && b <= 1.0;
            }
            catch (const std::exception&) {
                ok = false;
            }
        }
        if (!ok) s.fail(nullptr, "pulses", "entry '" + name + "' must be \"sinc\" or \"rrc:<beta>\" with beta in [0, 1]");
    }
    p.tau_hi = s.number("tau_hi", 1.0, kTau);
    p.tau_lo = s.number("tau_lo", 0.6, kTau);
    if (p.tau_lo >= p.tau_hi) s.fail(nullptr, "tau_lo", "must be below tau_hi");
    p.step = s.number("step", 0.002, Range{1e-5, 0.5});
    p.max_len = s.integer("max_len", 14, Range{1, 40});
    p.tolerance = s.number("tolerance", 0.01, Range{0.0, 1.0});
    p.stop_at_limit = s.flag("stop_at_limit", true);
    return p;
}

BerTdParams read_ber_td(Section& s)
{
    BerTdParams p;
    p.tau = s.numbers("tau", {}, kTau, true);
    p.EbN0_dB = s.numbers("EbN0_dB", {}, kDb, true);
    p.modulation = s.modulation("modulation", Modulation::BPSK);
    p.equalizer = s.text("equalizer", "mlse", {"mlse", "bcjr", "mbcjr"});
    p.frame_len = s.integer("frame_len", 1000, Range{8, 1e7});
    p.frames = s.integer("frames", 100, Range{1, 1e9});
    p.energy_fraction = s.number("energy_fraction", 0.999, kFraction);
    p.memory = s.integer("memory", -1, Range{-1, 40});
    p.M = s.integer("M", 64, Range{1, 1 << 20});
    return p;
}

BerFdParams read_ber_fd(Section& s)
{
    BerFdParams p;
    p.tau = s.numbers("tau", {}, kTau, true);
    p.EbN0_dB = s.numbers("EbN0_dB", {}, kDb, true);
    p.modulation = s.modulation("modulation", Modulation::BPSK);
    p.N = s.integer("N", 256, Range{8, 1 << 22});
    p.cp_len = s.integer("cp_len", -1, Range{-1, 1 << 20});
    p.frames = s.integer("frames", 100, Range{1, 1e9});
    p.td_reference = s.text("td_reference", "", {"", "mlse", "bcjr", "mbcjr"});
    p.energy_fraction = s.number("energy_fraction", 0.999, kFraction);
    p.M = s.integer("M", 64, Range{1, 1 << 20});
    return p;
}

CodedParams read_coded(Section& s)
{
    CodedParams p;
    p.tau = s.numbers("tau", {}, kTau, true);
    p.EbN0_dB = s.numbers("EbN0_dB", {}, kDb, true);
    p.info_len = s.integer("info_len", 8192, Range{8, 1 << 22});
    p.iterations = s.integer("iterations", 10, Range{1, 100});
    p.frames = s.integer("frames", 24, Range{1, 1e7});
    p.equalizer = s.text("equalizer", "bcjr", {"bcjr", "mbcjr", "fde"});
    p.M = s.integer("M", 64, Range{1, 1 << 20});
    p.energy_fraction = s.number("energy_fraction", 0.99, kFraction);
    return p;
}

SenseAfParams read_sense_af(Section& s)
{
    SenseAfParams p;
    p.tau = s.numbers("tau", {}, kTau, true);
    p.N = s.integer("N", 256, Range{2, 1 << 20});
    p.trials = s.integer("trials", 500, Range{100, 1e7});
    p.modulation = s.modulation("modulation", Modulation::QPSK);
    p.delay = s.numbers("delay", {0.0}, kAny, true);
    p.doppler_min = s.number("doppler_min", -2.5);
    p.doppler_max = s.number("doppler_max", 2.5);
    if (p.doppler_max <= p.doppler_min) s.fail(nullptr, "doppler_max", "must exceed doppler_min");
    p.doppler_points = s.integer("doppler_points", 2001, Range{3, 1 << 20});
    p.threshold = s.number("threshold", 3.0, kPositive);
    p.exclusion = s.number("exclusion", 0.1, Range{0.0, kInf});
    p.neighborhood = s.number("neighborhood", 0.25, kPositive);
    return p;
}

SenseMlParams read_sense_ml(Section& s)
{
    SenseMlParams p;
    p.tau = s.numbers("tau", {}, kTau, true);
    p.N = s.integer("N", 1024, Range{4, 1 << 20});
    p.N0 = s.number("N0", 0.5, Range{0.0, kInf});
    p.dopplers = s.numbers("dopplers", {0.5, -0.4}, kAny, true);
    p.amplitudes = s.numbers("amplitudes", {1.0, 0.15}, kPositive, true);
    if (p.dopplers.size() != p.amplitudes.size()) s.fail(nullptr, "amplitudes", "needs one entry per Doppler");
    if (p.dopplers.size() > 2) s.fail(nullptr, "dopplers", "at most two targets are supported");
    p.runs = s.integer("runs", 100, Range{1, 1e7});
    p.modulation = s.modulation("modulation", Modulation::QPSK);
    p.grid_min = s.number("grid_min", -1.0);
    p.grid_max = s.number("grid_max", 1.0);
    if (p.grid_max <= p.grid_min) s.fail(nullptr, "grid_max", "must exceed grid_min");
    p.grid_points = s.integer("grid_points", 201, Range{4, 100000});
    p.methods = s.texts("method", {"matched-filter", "least-squares"}, {"matched-filter", "least-squares"});
    p.mainlobe_cells = s.number("mainlobe_cells", 4.0, Range{0.0, kInf});
    p.tolerance = s.number("tolerance", 0.0, Range{0.0, kInf});
    return p;
}

} // namespace

ConfigError::ConfigError(std::string where, std::string field, const std::string& message)
    : std::runtime_error(where + ": " + field + ": " + message), where_(std::move(where)), field_(std::move(field))
{
}

std::string_view to_string(ExperimentKind k) { return kKindNames[static_cast<int>(k)]; }

ExperimentKind parse_kind(std::string_view name)
{
    for (std::size_t i = 0; i < std::size(kKindNames); ++i)
        if (kKindNames[i] == name) return static_cast<ExperimentKind>(i);
    throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

const std::vector<ExperimentKind>& all_kinds()
{
    static const std::vector<ExperimentKind> kinds = [] {
        std::vector<ExperimentKind> v;
        for (std::size_t i = 0; i < std::size(kKindNames); ++i) v.push_back(static_cast<ExperimentKind>(i));
        return v;
    }();
    return kinds;
}

PulseShape PulseParams::make() const { return make_pulse(kind, beta, 1.0, span, samples_per_T); }

std::string PulseParams::label() const
{
    if (kind == PulseKind::Sinc) return "sinc";
    std::ostringstream os;
    os << "rrc:" << beta;
    return os.str();
}

bool ExperimentConfig::stochastic() const
{
    switch (kind) {
    case ExperimentKind::Spectrum:
    case ExperimentKind::Capacity:
    case ExperimentKind::Mazo:
        return false;
    default:
        return true;
    }
}

ExperimentConfig parse_config(std::string_view text, const std::string& source)
{
    toml::table root;
    try {
        root = toml::parse(text, source);
    }
    catch (const toml::parse_error& e) {
        throw ConfigError(location(source, e.source()), "syntax", std::string(e.description()));
    }

    ExperimentConfig cfg;
    cfg.echo = nlohmann::ordered_json::object();
    nlohmann::ordered_json top = nlohmann::ordered_json::object();
    Section s(&root, "", source, top);
    const std::string kind = s.text("experiment", "", [] {
        std::vector<std::string> v;
        for (auto k : kKindNames) v.emplace_back(k);
        return v;
    }());
    if (kind.empty()) s.fail(nullptr, "experiment", "is required");
    cfg.kind = parse_kind(kind);
    cfg.description = s.text("description", "");
    const std::int64_t seed = s.integer("seed", 1, Range{0, 9.2e18});
    cfg.seed = static_cast<std::uint64_t>(seed);

    auto sub_table = [&](const std::string& name) -> const toml::table* {
        const toml::node* n = root.get(name);
        if (n && !n->is_table()) s.fail(n, name, "expected a table");
        return n ? n->as_table() : nullptr;
    };
    // Mark the tables as known before the unknown-key sweep.
    const toml::table* pulse_table = sub_table("pulse");
    s.mark("pulse");
    const toml::table* params_table = sub_table(kind);
    s.mark(kind);
    s.finish();
    if (!params_table) throw ConfigError(location(source, root.source()), kind, "missing [" + kind + "] table");

    nlohmann::ordered_json pulse_echo = nlohmann::ordered_json::object();
    Section ps(pulse_table, "pulse", source, pulse_echo);
    cfg.pulse = read_pulse(ps);
    ps.finish();

    nlohmann::ordered_json params_echo = nlohmann::ordered_json::object();
    Section as(params_table, kind, source, params_echo);
    switch (cfg.kind) {
    case ExperimentKind::Spectrum: cfg.params = read_spectrum(as); break;
    case ExperimentKind::Capacity: cfg.params = read_capacity(as); break;
    case ExperimentKind::Rates: cfg.params = read_rates(as); break;
    case ExperimentKind::Mazo: cfg.params = read_mazo(as); break;
    case ExperimentKind::BerTd: cfg.params = read_ber_td(as); break;
    case ExperimentKind::BerFd: cfg.params = read_ber_fd(as); break;
    case ExperimentKind::Coded: cfg.params = read_coded(as); break;
    case ExperimentKind::SenseAf: cfg.params = read_sense_af(as); break;
    case ExperimentKind::SenseMl: cfg.params = read_sense_ml(as); break;
    }
    as.finish();

    // Cross-field checks that need the pulse.
    if (const auto* af = std::get_if<SenseAfParams>(&cfg.params)) {
        for (double tau : af->tau)
            if (std::abs(tau * cfg.pulse.samples_per_T - std::round(tau * cfg.pulse.samples_per_T)) > 1e-9)
                throw ConfigError(location(source, params_table->source()), kind + ".tau",
                                  "tau * pulse.samples_per_T must be an integer");
    }
    if (const auto* ml = std::get_if<SenseMlParams>(&cfg.params)) {
        for (double tau : ml->tau)
            if (std::abs(tau * cfg.pulse.samples_per_T - std::round(tau * cfg.pulse.samples_per_T)) > 1e-9)
                throw ConfigError(location(source, params_table->source()), kind + ".tau",
                                  "tau * pulse.samples_per_T must be an integer");
    }

    cfg.echo = top;
    cfg.echo["pulse"] = pulse_echo;
    cfg.echo[kind] = params_echo;
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, "file", "cannot open config");
    std::ostringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg = parse_config(ss.str(), path);
    cfg.name = std::filesystem::path(path).stem().string();
    return cfg;
}

} // namespace ftn::lab

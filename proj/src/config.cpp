#include "cbsim/config.hpp"

#include "cbsim/csv.hpp"
#include "cbsim/rng.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace cbsim {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

struct Entry {
    std::string value;
    std::size_t line;
    bool used = false;
};

// key -> value with line numbers; every key must be consumed exactly once.
class KeyValues {
public:
    KeyValues(std::string_view text, std::string origin) : origin_(std::move(origin))
    {
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto end = std::min(text.find('\n', pos), text.size());
            auto line = text.substr(pos, end - pos);
            pos = end + 1;
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) {
                if (end == text.size()) break;
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
            const auto key = std::string(trim(line.substr(0, eq)));
            const auto value = std::string(trim(line.substr(eq + 1)));
            if (key.empty()) fail(line_no, "empty key");
            if (entries_.count(key)) fail(line_no, "repeated key '" + key + "'");
            entries_.emplace(key, Entry{value, line_no});
            if (end == text.size()) break;
        }
    }

    const Entry* find(const std::string& key)
    {
        auto it = entries_.find(key);
        if (it == entries_.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    std::optional<std::string> text(const std::string& key)
    {
        const auto* e = find(key);
        return e ? std::optional<std::string>(e->value) : std::nullopt;
    }

    template <class T>
    std::optional<T> number(const std::string& key)
    {
        const auto* e = find(key);
        if (!e) return std::nullopt;
        T v{};
        const auto& s = e->value;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
            fail(e->line, "key '" + key + "': not a valid number '" + s + "'");
        if constexpr (std::is_floating_point_v<T>)
            if (!std::isfinite(v)) fail(e->line, "key '" + key + "' must be finite");
        return v;
    }

    std::optional<bool> boolean(const std::string& key)
    {
        const auto* e = find(key);
        if (!e) return std::nullopt;
        if (e->value == "true" || e->value == "1") return true;
        if (e->value == "false" || e->value == "0") return false;
        fail(e->line, "key '" + key + "' must be true or false");
    }

    std::optional<Date> date(const std::string& key)
    {
        const auto* e = find(key);
        if (!e) return std::nullopt;
        const auto d = parse_iso_date(e->value);
        if (!d) fail(e->line, "key '" + key + "': not an ISO date '" + e->value + "'");
        return d;
    }

    std::vector<std::string> keys_with_prefix(std::string_view prefix) const
    {
        std::vector<std::string> out;
        for (const auto& [k, e] : entries_)
            if (k.starts_with(prefix)) out.push_back(k);
        return out;
    }

    std::size_t line_of(const std::string& key) const { return entries_.at(key).line; }

    void finish() const
    {
        for (const auto& [k, e] : entries_)
            if (!e.used) fail(e.line, "unknown or inapplicable key '" + k + "'");
    }

    [[noreturn]] void fail(std::size_t line, const std::string& msg) const
    {
        throw std::invalid_argument(origin_ + ":" + std::to_string(line) + ": " + msg);
    }

private:
    std::map<std::string, Entry> entries_;
    std::string origin_;
};

void read_input(KeyValues& kv, const std::string& name, InputFile& f)
{
    if (auto v = kv.text(name + ".path")) f.path = *v;
    if (auto v = kv.text(name + ".date_column")) f.date_column = *v;
    if (auto v = kv.text(name + ".value_column")) f.value_column = *v;
}

void write_input(std::ostream& os, const std::string& name, const InputFile& f)
{
    os << name << ".path = " << f.path << '\n';
    os << name << ".date_column = " << f.date_column << '\n';
    os << name << ".value_column = " << f.value_column << '\n';
}

std::vector<double> parse_list(const std::string& s, KeyValues& kv, const std::string& key)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto t = trim(item);
        double v{};
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
            kv.fail(kv.line_of(key), "key '" + key + "': bad list element '" + std::string(t) + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

std::filesystem::path RunConfig::resolve(const std::string& p) const
{
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir)
{
    KeyValues kv(text, "config");
    RunConfig c;
    c.base_dir = base_dir;
    read_input(kv, "cases", c.cases);
    read_input(kv, "search", c.search);
    read_input(kv, "rt", c.rt);
    read_input(kv, "survey", c.survey);
    if (auto d = kv.date("window.start")) c.window.first = *d;
    if (auto d = kv.date("window.end")) c.window.last = *d;

    const auto kind = kv.text("network.kind").value_or("watts_strogatz");
    if (kind == "complete") {
        c.network = Complete{};
    } else if (kind == "erdos_renyi") {
        c.network = ErdosRenyi{kv.number<double>("network.p").value_or(0.01)};
    } else if (kind == "watts_strogatz") {
        c.network = WattsStrogatz{kv.number<int>("network.k").value_or(10), kv.number<double>("network.beta").value_or(0.1)};
    } else if (kind == "barabasi_albert") {
        c.network = BarabasiAlbert{kv.number<int>("network.m").value_or(2)};
    } else {
        throw std::invalid_argument("config: unknown network.kind '" + kind + "'");
    }
    if (auto v = kv.number<std::size_t>("network.agents")) c.agents = *v;
    if (auto v = kv.text("network.edges")) c.network_edges = *v;

    for (const auto& key : kv.keys_with_prefix("prior.")) {
        const auto name = key.substr(6);
        const auto value = *kv.text(key);
        std::istringstream ss(value);
        double lo{}, hi{};
        std::string rest;
        if (!(ss >> lo)) kv.fail(kv.line_of(key), "key '" + key + "': expected 'lo hi' or a single value");
        if (!(ss >> hi)) hi = lo;
        if (ss >> rest) kv.fail(kv.line_of(key), "key '" + key + "': trailing text '" + rest + "'");
        try {
            c.prior.set(name, lo, hi);
        } catch (const std::invalid_argument& e) {
            kv.fail(kv.line_of(key), e.what());
        }
    }

    if (auto m = kv.text("abc.method")) {
        if (*m == "smc") c.abc.method = AbcMethod::smc;
        else if (*m == "rejection") c.abc.method = AbcMethod::rejection;
        else kv.fail(kv.line_of("abc.method"), "abc.method must be smc or rejection");
    }
    if (auto v = kv.number<std::size_t>("abc.pop_size")) c.abc.pop_size = *v;
    if (auto v = kv.text("abc.schedule"); v && *v != "adaptive") c.abc.schedule = parse_list(*v, kv, "abc.schedule");
    if (auto v = kv.number<double>("abc.keep_fraction")) c.abc.keep_fraction = *v;
    if (auto v = kv.number<std::size_t>("abc.stages")) c.abc.stages = *v;
    if (auto v = kv.number<std::size_t>("abc.max_sims_per_particle")) c.abc.max_sims_per_particle = *v;
    if (auto v = kv.number<std::size_t>("abc.draws")) c.abc.draws = *v;
    if (auto v = kv.text("abc.epsilon"); v && *v != "none") c.abc.epsilon = kv.number<double>("abc.epsilon");
    if (auto v = kv.number<double>("abc.quantile")) c.abc.quantile = *v;
    if (auto v = kv.number<std::size_t>("predictive_draws")) c.predictive_draws = *v;

    if (auto v = kv.number<std::uint64_t>("seed")) c.seed = *v;
    if (auto v = kv.number<int>("threads")) c.threads = *v;
    if (auto v = kv.text("out_dir")) c.out_dir = *v;
    if (auto v = kv.text("fill.cases")) c.fill_cases = parse_fill_policy(*v);
    if (auto v = kv.text("fill.search")) c.fill_search = parse_fill_policy(*v);
    if (auto v = kv.boolean("smooth_search")) c.smooth_search = *v;
    if (auto v = kv.text("synthetic_truth")) c.synthetic_truth = *v;
    if (auto d = kv.date("rt_split_date")) c.rt_split = *d;
    kv.finish();
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto base = path.parent_path();
    if (base.empty()) base = ".";
    auto config = parse_config(text, base);
    validate(config);
    check_inputs_exist(config);
    return config;
}

namespace {

void write_body(std::ostream& os, const RunConfig& c)
{
    write_input(os, "cases", c.cases);
    write_input(os, "search", c.search);
    write_input(os, "rt", c.rt);
    write_input(os, "survey", c.survey);
    os << "window.start = " << format_iso_date(c.window.first) << '\n';
    os << "window.end = " << format_iso_date(c.window.last) << '\n';
    std::visit(
        [&os](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Complete>) os << "network.kind = complete\n";
            else if constexpr (std::is_same_v<K, ErdosRenyi>)
                os << "network.kind = erdos_renyi\nnetwork.p = " << format_double(k.p) << '\n';
            else if constexpr (std::is_same_v<K, WattsStrogatz>)
                os << "network.kind = watts_strogatz\nnetwork.k = " << k.k << "\nnetwork.beta = " << format_double(k.beta)
                   << '\n';
            else os << "network.kind = barabasi_albert\nnetwork.m = " << k.m << '\n';
        },
        c.network);
    os << "network.agents = " << c.agents << '\n';
    if (!c.network_edges.empty()) os << "network.edges = " << c.network_edges << '\n';
    for (std::size_t i = 0; i < ModelParams::kCount; ++i)
        os << "prior." << ModelParams::kNames[i] << " = " << format_double(c.prior.ranges[i].first) << ' '
           << format_double(c.prior.ranges[i].second) << '\n';
    os << "abc.method = " << (c.abc.method == AbcMethod::smc ? "smc" : "rejection") << '\n';
    os << "abc.pop_size = " << c.abc.pop_size << '\n';
    os << "abc.schedule = ";
    if (c.abc.schedule.empty()) os << "adaptive";
    for (std::size_t i = 0; i < c.abc.schedule.size(); ++i) os << (i ? "," : "") << format_double(c.abc.schedule[i]);
    os << '\n';
    os << "abc.keep_fraction = " << format_double(c.abc.keep_fraction) << '\n';
    os << "abc.stages = " << c.abc.stages << '\n';
    os << "abc.max_sims_per_particle = " << c.abc.max_sims_per_particle << '\n';
    os << "abc.draws = " << c.abc.draws << '\n';
    os << "abc.epsilon = " << (c.abc.epsilon ? format_double(*c.abc.epsilon) : std::string("none")) << '\n';
    os << "abc.quantile = " << format_double(c.abc.quantile) << '\n';
    os << "predictive_draws = " << c.predictive_draws << '\n';
    if (c.seed) os << "seed = " << *c.seed << '\n';
    os << "fill.cases = " << to_string(c.fill_cases) << '\n';
    os << "fill.search = " << to_string(c.fill_search) << '\n';
    os << "smooth_search = " << (c.smooth_search ? "true" : "false") << '\n';
    if (!c.synthetic_truth.empty()) os << "synthetic_truth = " << c.synthetic_truth << '\n';
    os << "rt_split_date = " << format_iso_date(c.rt_split) << '\n';
}

}  // namespace

std::string result_text(const RunConfig& config)
{
    std::ostringstream os;
    write_body(os, config);
    return os.str();
}

std::string to_text(const RunConfig& config)
{
    std::ostringstream os;
    write_body(os, config);
    os << "threads = " << config.threads << '\n';
    os << "out_dir = " << config.out_dir << '\n';
    return os.str();
}

void validate(const RunConfig& c)
{
    validate(c.prior);
    if (c.window.last < c.window.first) throw std::invalid_argument("config: window.end precedes window.start");
    validate_network_kind(c.network, c.agents);
    if (c.threads < 1) throw std::invalid_argument("config: threads must be >= 1");
    if (c.predictive_draws < 2) throw std::invalid_argument("config: predictive_draws must be >= 2");
    const auto& a = c.abc;
    if (a.method == AbcMethod::smc) {
        if (a.pop_size < 2) throw std::invalid_argument("config: abc.pop_size must be >= 2");
        if (a.schedule.empty()) {
            if (!(a.keep_fraction > 0.0 && a.keep_fraction <= 1.0))
                throw std::invalid_argument("config: abc.keep_fraction must lie in (0, 1]");
            if (a.stages < 1) throw std::invalid_argument("config: abc.stages must be >= 1");
        }
        for (std::size_t i = 0; i < a.schedule.size(); ++i) {
            if (!(a.schedule[i] > 0.0)) throw std::invalid_argument("config: abc.schedule entries must be > 0");
            if (i > 0 && !(a.schedule[i] < a.schedule[i - 1]))
                throw std::invalid_argument("config: abc.schedule must be strictly decreasing");
        }
    } else {
        if (a.draws < 1) throw std::invalid_argument("config: abc.draws must be >= 1");
        if (a.epsilon && !(*a.epsilon > 0.0)) throw std::invalid_argument("config: abc.epsilon must be > 0");
        if (!(a.quantile > 0.0 && a.quantile <= 1.0))
            throw std::invalid_argument("config: abc.quantile must lie in (0, 1]");
    }
}

void check_inputs_exist(const RunConfig& c)
{
    for (const auto* p : {&c.cases.path, &c.search.path, &c.rt.path, &c.survey.path, &c.network_edges,
                          &c.synthetic_truth}) {
        if (!p->empty() && !std::filesystem::exists(c.resolve(*p)))
            throw std::runtime_error("input file not found: " + c.resolve(*p).string());
    }
}

std::uint64_t require_seed(const RunConfig& config)
{
    if (!config.seed) throw std::invalid_argument("config: no seed given (set 'seed' or pass --seed)");
    return *config.seed;
}

ModelParams parse_params(std::string_view text, const std::string& origin)
{
    KeyValues kv(text, origin);
    std::array<double, ModelParams::kCount> v{};
    std::string missing;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto name = std::string(ModelParams::kNames[i]);
        if (auto x = kv.number<double>(name)) v[i] = *x;
        else missing += (missing.empty() ? "" : ", ") + name;
    }
    kv.finish();
    if (!missing.empty()) throw std::invalid_argument(origin + ": missing parameters: " + missing);
    auto params = ModelParams::from_array(v);
    validate(params);
    return params;
}

ModelParams load_params(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open parameter file " + path.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_params(text, path.string());
}

std::string to_text(const ModelParams& params)
{
    std::ostringstream os;
    const auto v = params.to_array();
    for (std::size_t i = 0; i < v.size(); ++i) os << ModelParams::kNames[i] << " = " << format_double(v[i]) << '\n';
    return os.str();
}

std::string fnv1a_hex(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_hash(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a_hex(bytes);
}

std::uint64_t derive_seed(std::uint64_t seed, SeedRole role)
{
    return mix64(seed ^ mix64(static_cast<std::uint64_t>(role) * kGoldenGamma));
}

}  // namespace cbsim

#include "mmg/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mmg/errors.hpp"

namespace mmg {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }
bool is_key_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_key_char(char c) { return is_key_start(c) || (c >= '0' && c <= '9'); }

const std::map<std::string, std::vector<std::string>, std::less<>>& known_keys() {
    static const std::map<std::string, std::vector<std::string>, std::less<>> keys{
        {"game",
         {"N", "K", "s", "m", "payoff", "topology", "n1", "n2", "init", "init_low", "init_high", "tie_break",
          "zero_demand", "seed", "T", "trace"}},
        {"analysis",
         {"window", "theta", "belt", "min_hold", "split_gap", "split_sustain", "herd_above", "cooperation_below"}},
        {"ensemble", {"seeds", "threads"}},
        {"sweep", {"param", "values", "seeds"}},
    };
    return keys;
}

[[noreturn]] void reject(const ConfigEntry& e, const std::string& what) {
    throw ConfigError(e.key, what + ", got '" + e.value + "'");
}

template <class Int>
Int parse_integer(const ConfigEntry& e) {
    Int v{};
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || p != last) reject(e, "expected an integer");
    return v;
}

double parse_real(const ConfigEntry& e) {
    double v = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || p != last) reject(e, "expected a number");
    return v;
}

bool parse_bool(const ConfigEntry& e) {
    if (e.value == "true" || e.value == "1") return true;
    if (e.value == "false" || e.value == "0") return false;
    reject(e, "expected true or false");
}

std::vector<int> parse_int_list(const ConfigEntry& e) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= e.value.size()) {
        std::size_t comma = e.value.find(',', start);
        if (comma == std::string::npos) comma = e.value.size();
        ConfigEntry item = e;
        item.value = e.value.substr(start, comma - start);
        if (item.value.empty()) reject(e, "empty list item");
        out.push_back(parse_integer<int>(item));
        start = comma + 1;
    }
    return out;
}

const char* name_of(PayoffKind k) {
    switch (k) {
        case PayoffKind::linear: return "linear";
        case PayoffKind::sign: return "sign";
        case PayoffKind::scaled: return "scaled";
    }
    return "linear";
}
const char* name_of(TieBreak t) { return t == TieBreak::random ? "random" : "lowest-index"; }
const char* name_of(ZeroDemandRule z) { return z == ZeroDemandRule::coin ? "coin" : "plus-one"; }
const char* name_of(InitKind k) { return k == InitKind::zero ? "zero" : "uniform"; }
const char* name_of(MarketTopology::Kind k) {
    switch (k) {
        case MarketTopology::Kind::regular: return "regular";
        case MarketTopology::Kind::irregular: return "irregular";
        case MarketTopology::Kind::custom: return "custom";
    }
    return "regular";
}

PayoffKind payoff_from(const ConfigEntry& e) {
    if (e.value == "linear") return PayoffKind::linear;
    if (e.value == "sign") return PayoffKind::sign;
    if (e.value == "scaled") return PayoffKind::scaled;
    reject(e, "expected linear, sign or scaled");
}
TieBreak tie_break_from(const ConfigEntry& e) {
    if (e.value == "random") return TieBreak::random;
    if (e.value == "lowest-index" || e.value == "lowest") return TieBreak::lowest_index;
    reject(e, "expected random or lowest-index");
}
ZeroDemandRule zero_demand_from(const ConfigEntry& e) {
    if (e.value == "coin") return ZeroDemandRule::coin;
    if (e.value == "plus-one") return ZeroDemandRule::plus_one;
    reject(e, "expected coin or plus-one");
}
InitKind init_from(const ConfigEntry& e) {
    if (e.value == "zero") return InitKind::zero;
    if (e.value == "uniform") return InitKind::uniform;
    reject(e, "expected zero or uniform");
}

std::string window_name(const AnalysisOptions& a) {
    switch (a.window) {
        case WindowPolicy::last_half: return "last-half";
        case WindowPolicy::all: return "all";
        case WindowPolicy::last_count: return "last:" + std::to_string(a.window_count);
    }
    return "last-half";
}

}  // namespace

std::vector<ConfigEntry> tokenize_config(std::string_view text) {
    std::vector<ConfigEntry> out;
    std::string section = "game";
    std::size_t line_no = 0;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        std::size_t end = text.find('\n', begin);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        std::string_view line = text.substr(begin, end - begin);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        std::size_t pos = 0;
        auto skip = [&] {
            while (pos < line.size() && is_space(line[pos])) ++pos;
        };
        skip();
        if (pos < line.size() && line[pos] == '[') {
            const std::size_t close = line.find(']', pos);
            if (close == std::string_view::npos) throw SyntaxError(line_no, pos + 1, "unterminated section header");
            std::string name(line.substr(pos + 1, close - pos - 1));
            while (!name.empty() && is_space(name.back())) name.pop_back();
            while (!name.empty() && is_space(name.front())) name.erase(name.begin());
            if (!known_keys().contains(name)) throw SyntaxError(line_no, pos + 2, "unknown section [" + name + "]");
            pos = close + 1;
            skip();
            if (pos < line.size()) throw SyntaxError(line_no, pos + 1, "unexpected text after section header");
            section = name;
        } else {
            while (pos < line.size()) {
                ConfigEntry e;
                e.section = section;
                e.line = line_no;
                e.column = pos + 1;
                if (!is_key_start(line[pos])) throw SyntaxError(line_no, pos + 1, "expected a key");
                while (pos < line.size() && is_key_char(line[pos])) e.key.push_back(line[pos++]);
                skip();
                if (pos >= line.size() || line[pos] != '=')
                    throw SyntaxError(line_no, pos + 1, "expected '=' after key '" + e.key + "'");
                ++pos;
                skip();
                const std::size_t value_column = pos + 1;
                while (pos < line.size()) {
                    while (pos < line.size() && !is_space(line[pos])) e.value.push_back(line[pos++]);
                    if (e.value.empty() || e.value.back() != ',') break;
                    skip();
                }
                if (e.value.empty()) throw SyntaxError(line_no, value_column, "missing value for key '" + e.key + "'");
                out.push_back(std::move(e));
                skip();
            }
        }
        begin = end + 1;
    }
    return out;
}

ParsedConfig materialize(std::span<const ConfigEntry> entries) {
    std::map<std::string, ConfigEntry> last;  // "section.key"
    for (const auto& e : entries) {
        const auto section = known_keys().find(e.section);
        if (section == known_keys().end()) throw ConfigError(e.key, "unknown section [" + e.section + "]");
        const auto& keys = section->second;
        if (std::find(keys.begin(), keys.end(), e.key) == keys.end()) {
            const std::string what = "unknown key '" + e.key + "' in [" + e.section + "]";
            if (e.line > 0) throw SyntaxError(e.line, e.column, what);
            throw ConfigError(e.key, what);
        }
        last[e.section + "." + e.key] = e;
    }
    auto get = [&](const char* name) -> const ConfigEntry* {
        auto it = last.find(name);
        return it == last.end() ? nullptr : &it->second;
    };

    ParsedConfig c;
    GameConfig& g = c.game;
    if (auto e = get("game.K")) g.markets = parse_integer<int>(*e);
    if (auto e = get("game.s")) g.slots = parse_integer<int>(*e);
    if (auto e = get("game.m")) g.memory = parse_integer<int>(*e);
    if (auto e = get("game.payoff")) g.payoff = payoff_from(*e);
    if (auto e = get("game.init")) g.init.kind = init_from(*e);
    if (auto e = get("game.init_low")) g.init.low = parse_real(*e);
    if (auto e = get("game.init_high")) g.init.high = parse_real(*e);
    if (auto e = get("game.tie_break")) g.tie_break = tie_break_from(*e);
    if (auto e = get("game.zero_demand")) g.zero_demand = zero_demand_from(*e);
    if (auto e = get("game.trace")) g.trace_agents = parse_bool(*e);
    if (auto e = get("game.seed")) {
        g.seed = parse_integer<std::uint64_t>(*e);
        c.seed_given = true;
    }
    if (auto e = get("game.T")) {
        c.ticks = parse_integer<std::int64_t>(*e);
        if (c.ticks < 1) reject(*e, "must be at least 1");
    }

    if (auto e = get("sweep.values")) {
        SweepDirectives sweep;
        sweep.values = parse_int_list(*e);
        if (auto p = get("sweep.param")) {
            if (p->value == "N")
                sweep.parameter = SweepParameter::agents;
            else if (p->value == "n1")
                sweep.parameter = SweepParameter::shared_agents;
            else
                reject(*p, "expected N or n1");
        }
        c.sweep = std::move(sweep);
    } else if (auto p = get("sweep.param")) {
        throw ConfigError("values", "[sweep] needs a value list");
    }

    std::string topology = "regular";
    if (auto e = get("game.topology")) {
        topology = e->value;
        if (topology != "regular" && topology != "irregular") reject(*e, "expected regular or irregular");
    }
    const ConfigEntry* n = get("game.N");
    const ConfigEntry* n1 = get("game.n1");
    const ConfigEntry* n2 = get("game.n2");
    if (topology == "regular") {
        if (n1 || n2) throw ConfigError("topology", "n1 and n2 only apply to topology=irregular");
        if (n)
            g.agents = parse_integer<int>(*n);
        else if (c.sweep && c.sweep->parameter == SweepParameter::agents)
            g.agents = c.sweep->values.front();
        else
            throw ConfigError("N", "required for a regular topology");
        if (g.agents < 1) throw ConfigError("N", "must be at least 1, got " + std::to_string(g.agents));
        if (g.markets < 1) throw ConfigError("K", "must be at least 1, got " + std::to_string(g.markets));
        g.topology = MarketTopology::regular(g.agents, g.markets);
    } else {
        if (!n1 || !n2) throw ConfigError("topology", "irregular topology needs n1 and n2");
        if (get("game.K") && g.markets != 2) throw ConfigError("K", "irregular topology needs K = 2");
        g.markets = 2;
        const int a = parse_integer<int>(*n1);
        const int b = parse_integer<int>(*n2);
        g.topology = MarketTopology::irregular(a, b);
        g.agents = a + b;
        if (n && parse_integer<int>(*n) != g.agents)
            throw ConfigError("topology", "N = " + n->value + " does not match n1 + n2 = " + std::to_string(g.agents));
    }
    if (c.sweep && c.sweep->parameter == SweepParameter::shared_agents && topology != "irregular")
        throw ConfigError("param", "sweeping n1 needs topology=irregular");
    g.validate();

    AnalysisOptions& a = c.analysis;
    if (auto e = get("analysis.window")) {
        if (e->value == "last-half")
            a.window = WindowPolicy::last_half;
        else if (e->value == "all")
            a.window = WindowPolicy::all;
        else if (e->value.starts_with("last:")) {
            ConfigEntry count = *e;
            count.value = e->value.substr(5);
            a.window = WindowPolicy::last_count;
            a.window_count = parse_integer<std::int64_t>(count);
            if (a.window_count < 1) reject(*e, "window count must be at least 1");
        } else
            reject(*e, "expected last-half, all or last:<count>");
    }
    auto fraction = [&](const char* name, double& field, bool zero_ok, bool one_ok) {
        if (auto e = get(name)) {
            field = parse_real(*e);
            const bool lo = zero_ok ? field >= 0.0 : field > 0.0;
            const bool hi = one_ok ? field <= 1.0 : field < 1.0;
            if (!(lo && hi)) reject(*e, "out of range");
        }
    };
    fraction("analysis.theta", a.theta, false, true);
    fraction("analysis.belt", a.belt, false, false);
    fraction("analysis.min_hold", a.min_hold_fraction, true, true);
    fraction("analysis.split_gap", a.split_gap, false, true);
    fraction("analysis.split_sustain", a.split_sustain, false, true);
    if (auto e = get("analysis.herd_above")) a.modes.herd_above = parse_real(*e);
    if (auto e = get("analysis.cooperation_below")) a.modes.cooperation_below = parse_real(*e);
    if (!(a.modes.cooperation_below <= a.modes.herd_above))
        throw ConfigError("cooperation_below", "must not exceed herd_above");

    for (const char* name : {"ensemble.seeds", "sweep.seeds"})
        if (auto e = get(name)) {
            c.seeds = parse_integer<int>(*e);
            if (c.seeds < 1) reject(*e, "must be at least 1");
        }
    if (auto e = get("ensemble.threads")) c.threads = parse_integer<unsigned>(*e);
    return c;
}

ParsedConfig parse_config(std::string_view text) {
    const auto entries = tokenize_config(text);
    return materialize(entries);
}

std::string serialize_config(const ParsedConfig& c) {
    const GameConfig& g = c.game;
    if (g.topology.kind() == MarketTopology::Kind::custom)
        throw ConfigError("topology", "custom topologies have no text form");
    std::ostringstream s;
    s << "[game]\n";
    if (g.topology.kind() == MarketTopology::Kind::regular)
        s << "N=" << g.agents << "\ntopology=regular\n";
    else
        s << "topology=irregular\nn1=" << g.topology.n1() << "\nn2=" << g.topology.n2() << "\n";
    s << "K=" << g.markets << "\ns=" << g.slots << "\nm=" << g.memory << "\npayoff=" << name_of(g.payoff)
      << "\ninit=" << name_of(g.init.kind) << "\ninit_low=" << format_real(g.init.low)
      << "\ninit_high=" << format_real(g.init.high) << "\ntie_break=" << name_of(g.tie_break)
      << "\nzero_demand=" << name_of(g.zero_demand) << "\n";
    if (c.seed_given) s << "seed=" << g.seed << "\n";
    s << "T=" << c.ticks << "\ntrace=" << (g.trace_agents ? "true" : "false") << "\n";
    const AnalysisOptions& a = c.analysis;
    s << "\n[analysis]\nwindow=" << window_name(a) << "\ntheta=" << format_real(a.theta)
      << "\nbelt=" << format_real(a.belt) << "\nmin_hold=" << format_real(a.min_hold_fraction)
      << "\nsplit_gap=" << format_real(a.split_gap) << "\nsplit_sustain=" << format_real(a.split_sustain)
      << "\nherd_above=" << format_real(a.modes.herd_above)
      << "\ncooperation_below=" << format_real(a.modes.cooperation_below) << "\n";
    s << "\n[ensemble]\nseeds=" << c.seeds << "\nthreads=" << c.threads << "\n";
    if (c.sweep) {
        s << "\n[sweep]\nparam=" << (c.sweep->parameter == SweepParameter::agents ? "N" : "n1") << "\nvalues=";
        for (std::size_t i = 0; i < c.sweep->values.size(); ++i) s << (i ? "," : "") << c.sweep->values[i];
        s << "\n";
    }
    return s.str();
}

RecordFormat parse_record_format(std::string_view name) {
    if (name == "csv") return RecordFormat::csv;
    if (name == "jsonl") return RecordFormat::jsonl;
    throw ConfigError("format", "expected csv or jsonl, got '" + std::string(name) + "'");
}

std::string format_real(double value) {
    std::array<char, 64> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
    return std::string(buf.data(), p);
}

std::string content_hash(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a64:") + buf;
}

void emit_records(std::span<const TickRecord> records, RecordFormat format, std::ostream& out) {
    if (format == RecordFormat::csv) {
        out << "t,k,O,A,astar,mu,C\n";
        for (const auto& r : records)
            for (int k = 0; k < r.markets(); ++k)
                out << r.t << ',' << k << ',' << r.occupancy[k] << ',' << r.demand[k] << ','
                    << to_int(r.minority[k]) << ',' << r.mu[k] << ',' << r.switched << '\n';
        return;
    }
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["t"] = r.t;
        j["O"] = r.occupancy;
        j["A"] = r.demand;
        auto& astar = j["astar"] = nlohmann::ordered_json::array();
        for (Action a : r.minority) astar.push_back(to_int(a));
        j["mu"] = r.mu;
        j["C"] = r.switched;
        if (!r.agents.empty()) {
            auto& agents = j["agents"] = nlohmann::ordered_json::array();
            for (const auto& c : r.agents) agents.push_back({c.market, c.slot, to_int(c.action)});
        }
        out << j.dump() << '\n';
    }
}

std::string emit_records(std::span<const TickRecord> records, RecordFormat format) {
    std::ostringstream s;
    emit_records(records, format, s);
    return s.str();
}

namespace {

Action action_from_int(long long v) {
    if (v == 1) return Action::plus;
    if (v == -1) return Action::minus;
    throw std::invalid_argument("action must be -1 or +1");
}

}  // namespace

std::vector<TickRecord> parse_records(std::string_view text, RecordFormat format) {
    std::vector<TickRecord> out;
    std::size_t begin = 0;
    std::size_t line_no = 0;
    while (begin < text.size()) {
        std::size_t end = text.find('\n', begin);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(begin, end - begin);
        begin = end + 1;
        ++line_no;
        if (line.empty()) continue;
        if (format == RecordFormat::jsonl) {
            const auto j = nlohmann::json::parse(line);
            TickRecord r;
            r.t = j.at("t").get<std::int64_t>();
            r.occupancy = j.at("O").get<std::vector<int>>();
            r.demand = j.at("A").get<std::vector<int>>();
            for (long long a : j.at("astar").get<std::vector<long long>>()) r.minority.push_back(action_from_int(a));
            r.mu = j.at("mu").get<std::vector<std::uint32_t>>();
            r.switched = j.at("C").get<int>();
            if (j.contains("agents"))
                for (const auto& c : j.at("agents"))
                    r.agents.push_back({c.at(0).get<int>(), c.at(1).get<int>(), action_from_int(c.at(2).get<int>())});
            out.push_back(std::move(r));
            continue;
        }
        if (line_no == 1) {
            if (line != "t,k,O,A,astar,mu,C") throw std::invalid_argument("unexpected CSV header");
            continue;
        }
        std::array<long long, 7> f{};
        std::size_t pos = 0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const std::size_t comma = i + 1 < f.size() ? line.find(',', pos) : line.size();
            if (comma == std::string_view::npos) throw std::invalid_argument("short CSV row");
            auto [p, ec] = std::from_chars(line.data() + pos, line.data() + comma, f[i]);
            if (ec != std::errc{} || p != line.data() + comma) throw std::invalid_argument("bad CSV field");
            pos = comma + 1;
        }
        const auto k = static_cast<std::size_t>(f[1]);
        if (k == 0) {
            out.emplace_back();
            out.back().t = f[0];
            out.back().switched = static_cast<int>(f[6]);
        }
        if (out.empty() || out.back().t != f[0] || out.back().occupancy.size() != k)
            throw std::invalid_argument("CSV rows out of order");
        auto& r = out.back();
        r.occupancy.push_back(static_cast<int>(f[2]));
        r.demand.push_back(static_cast<int>(f[3]));
        r.minority.push_back(action_from_int(f[4]));
        r.mu.push_back(static_cast<std::uint32_t>(f[5]));
    }
    return out;
}

std::string serialize_manifest(const RunManifest& m) {
    const GameConfig& g = m.config;
    nlohmann::ordered_json topo;
    topo["kind"] = name_of(g.topology.kind());
    if (g.topology.kind() == MarketTopology::Kind::irregular) {
        topo["n1"] = g.topology.n1();
        topo["n2"] = g.topology.n2();
    }
    if (g.topology.kind() == MarketTopology::Kind::custom) {
        auto& links = topo["links"] = nlohmann::ordered_json::array();
        for (int a = 0; a < g.agents; ++a) {
            auto row = g.topology.links_of(a);
            links.push_back(std::vector<int>(row.begin(), row.end()));
        }
    }
    nlohmann::ordered_json cfg;
    cfg["N"] = g.agents;
    cfg["K"] = g.markets;
    cfg["s"] = g.slots;
    cfg["m"] = g.memory;
    cfg["payoff"] = name_of(g.payoff);
    cfg["topology"] = topo;
    cfg["init"] = {{"kind", name_of(g.init.kind)}, {"low", g.init.low}, {"high", g.init.high}};
    cfg["seed"] = g.seed;
    cfg["tie_break"] = name_of(g.tie_break);
    cfg["zero_demand"] = name_of(g.zero_demand);
    cfg["trace"] = g.trace_agents;
    nlohmann::ordered_json j;
    j["version"] = m.version;
    j["config"] = cfg;
    j["T"] = m.ticks;
    j["format"] = m.format;
    j["content_hash"] = m.content_hash;
    return j.dump(2) + "\n";
}

RunManifest parse_manifest(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    const auto& cfg = j.at("config");
    auto entry = [](const char* key, std::string value) { return ConfigEntry{"game", key, std::move(value), 0, 0}; };
    RunManifest m;
    GameConfig& g = m.config;
    g.agents = cfg.at("N").get<int>();
    g.markets = cfg.at("K").get<int>();
    g.slots = cfg.at("s").get<int>();
    g.memory = cfg.at("m").get<int>();
    g.payoff = payoff_from(entry("payoff", cfg.at("payoff").get<std::string>()));
    const auto& topo = cfg.at("topology");
    const auto kind = topo.at("kind").get<std::string>();
    if (kind == "regular")
        g.topology = MarketTopology::regular(g.agents, g.markets);
    else if (kind == "irregular")
        g.topology = MarketTopology::irregular(topo.at("n1").get<int>(), topo.at("n2").get<int>());
    else if (kind == "custom") {
        std::vector<std::uint8_t> links;
        for (const auto& row : topo.at("links"))
            for (const auto& v : row) links.push_back(static_cast<std::uint8_t>(v.get<int>()));
        g.topology = MarketTopology::custom(g.agents, g.markets, std::move(links));
    } else
        throw ConfigError("topology", "unknown topology kind '" + kind + "'");
    g.init.kind = init_from(entry("init", cfg.at("init").at("kind").get<std::string>()));
    g.init.low = cfg.at("init").at("low").get<double>();
    g.init.high = cfg.at("init").at("high").get<double>();
    g.seed = cfg.at("seed").get<std::uint64_t>();
    g.tie_break = tie_break_from(entry("tie_break", cfg.at("tie_break").get<std::string>()));
    g.zero_demand = zero_demand_from(entry("zero_demand", cfg.at("zero_demand").get<std::string>()));
    g.trace_agents = cfg.at("trace").get<bool>();
    g.validate();
    m.version = j.at("version").get<std::string>();
    m.ticks = j.at("T").get<std::int64_t>();
    m.format = j.at("format").get<std::string>();
    m.content_hash = j.at("content_hash").get<std::string>();
    return m;
}

void write_table_csv(const Table& table, std::ostream& out) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_real(row[i]);
        out << '\n';
    }
}

void write_summaries_csv(std::span<const RunSummary> runs, int markets, std::ostream& out) {
    out << "seed_index,seed,failed,big_market,split,mode,tau,tau_raw,tau_hold,censored,nu_big,mu_c,mu_c_tick,"
           "events,maximal_events";
    for (int k = 0; k < markets; ++k) out << ",O" << k + 1 << ",A" << k + 1 << ",var" << k + 1;
    out << ",error\n";
    for (const auto& r : runs) {
        out << r.seed_index << ',' << r.seed << ',' << (r.failed ? 1 : 0) << ',';
        if (r.failed) {
            out << ",,,,,,,,,,,,";
            for (int k = 0; k < markets; ++k) out << ",,,";
            std::string e = r.error;
            for (std::size_t p = e.find('"'); p != std::string::npos; p = e.find('"', p + 2)) e.insert(p, "\"");
            out << "\"" << e << "\"\n";
            continue;
        }
        int maximal = 0;
        for (const auto& e : r.events)
            if (std::abs(e.demand) == e.occupancy) ++maximal;
        out << r.big_market << ',' << (r.split ? 1 : 0) << ',' << to_string(r.mode) << ',';
        if (r.relaxation.tau) out << *r.relaxation.tau;
        out << ',';
        if (r.relaxation.raw_tau) out << *r.relaxation.raw_tau;
        out << ',' << r.relaxation.hold << ',' << (r.relaxation.censored ? 1 : 0) << ','
            << format_real(r.big_fluctuation_frequency) << ',';
        if (r.critical) out << r.critical->mu;
        out << ',';
        if (r.critical) out << r.critical->first_tick;
        out << ',' << r.events.size() << ',' << maximal;
        for (int k = 0; k < markets; ++k) {
            const auto& m = r.stats.markets[k];
            out << ',' << format_real(m.mean_occupancy) << ',' << format_real(m.mean_demand) << ','
                << format_real(m.per_capita_variance);
        }
        out << ",\n";
    }
}

}  // namespace mmg

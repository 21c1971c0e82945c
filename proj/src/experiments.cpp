#include "mmg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "mmg/errors.hpp"

namespace mmg {

Window AnalysisOptions::window_for(std::size_t n) const {
    switch (window) {
        case WindowPolicy::last_half: return Window::last_half(n);
        case WindowPolicy::last_count: return Window::last(n, static_cast<std::size_t>(window_count));
        case WindowPolicy::all: return Window::all(n);
    }
    return Window::all(n);
}

RunSummary summarize(std::span<const TickRecord> records, const GameConfig& cfg, const AnalysisOptions& options) {
    RunSummary s;
    s.seed = cfg.seed;
    const Window window = options.window_for(records.size());
    s.stats = series_stats(records, window);
    s.rank = s.stats.rank_by_occupancy();
    s.big_market = s.rank.front();
    s.split = detect_split(records, window, cfg.agents, options.split_gap, options.split_sustain);
    s.mode = classify_mode(s.stats, s.split, options.modes);
    const auto min_hold =
        static_cast<std::int64_t>(std::ceil(options.min_hold_fraction * static_cast<double>(records.size())));
    s.relaxation = relaxation_time(records, cfg.agents, cfg.slots, options.belt, min_hold);
    s.big_fluctuation_frequency = fluctuation_frequency(records, s.big_market, options.theta, window);
    s.critical = detect_critical_history(records, s.big_market, options.theta);
    if (s.critical) {
        const std::int64_t start = s.relaxation.tau ? *s.relaxation.tau : s.critical->first_tick + 1;
        const int big = s.big_market;
        for (auto t : s.critical->recurrences) {
            if (t < start) continue;
            const auto i = static_cast<std::size_t>(t);
            RecurrenceEvent e;
            e.t = t;
            e.occupancy = records[i].occupancy[big];
            e.demand = records[i].demand[big];
            if (i + 1 < records.size()) {
                e.switched_next = records[i + 1].switched;
                e.occupancy_change = records[i + 1].occupancy[big] - records[i].occupancy[big];
            }
            s.events.push_back(e);
        }
    }
    for (int k = 0; k < cfg.markets; ++k) s.histograms.push_back(mu_histogram(records, k, cfg.memory, window));
    return s;
}

std::vector<RunSummary> ensemble_run(const GameConfig& cfg, std::int64_t ticks, int n_seeds,
                                     const AnalysisOptions& options, unsigned threads) {
    if (n_seeds < 1) throw ConfigError("seeds", "must be at least 1");
    if (ticks < 1) throw ConfigError("T", "must be at least 1");
    cfg.validate();
    std::vector<RunSummary> out(static_cast<std::size_t>(n_seeds));
    auto one = [&](std::size_t i) {
        GameConfig c = cfg;
        c.seed = RngStream::derive_seed(cfg.seed, i);
        RunSummary s;
        try {
            const auto records = run(c, ticks);
            s = summarize(records, c, options);
        } catch (const std::exception& e) {
            s = RunSummary{};
            s.failed = true;
            s.error = e.what();
        }
        s.seed_index = i;
        s.seed = c.seed;
        out[i] = std::move(s);
    };
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(n_seeds));
    if (threads <= 1) {
        for (std::size_t i = 0; i < out.size(); ++i) one(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < out.size(); i = next++) one(i);
            });
    }
    return out;
}

void SweepSpec::validate() const {
    if (values.empty()) throw ConfigError("values", "sweep needs at least one value");
    if (seeds < 1) throw ConfigError("seeds", "must be at least 1");
    if (ticks < 1) throw ConfigError("T", "must be at least 1");
    if (parameter == SweepParameter::shared_agents && base.topology.kind() != MarketTopology::Kind::irregular)
        throw ConfigError("param", "sweeping n1 needs an irregular base topology");
    for (int v : values)
        if (v < (parameter == SweepParameter::agents ? 1 : 0))
            throw ConfigError("values", "sweep value " + std::to_string(v) + " out of range");
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd r;
    r.count = values.size();
    if (values.empty()) return r;
    double sum = 0.0;
    for (double v : values) sum += v;
    r.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - r.mean) * (v - r.mean);
        r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return r;
}

GameConfig sweep_config(const SweepSpec& spec, int value) {
    GameConfig c = spec.base;
    if (spec.parameter == SweepParameter::agents) {
        c.agents = value;
        c.topology = MarketTopology::regular(value, c.markets);
    } else {
        c.topology = MarketTopology::irregular(value, spec.base.topology.n2());
        c.agents = c.topology.agents();
        c.markets = 2;
    }
    return c;
}

namespace {

double sweep_q(const GameConfig& cfg, SweepParameter parameter, int value) {
    const double p = std::ldexp(1.0, cfg.memory);
    return (parameter == SweepParameter::agents ? cfg.agents : value) / p;
}

}  // namespace

SweepPoint aggregate(int value, const GameConfig& cfg, std::span<const RunSummary> runs) {
    SweepPoint p;
    p.value = value;
    p.agents = cfg.agents;
    p.q = cfg.q();
    const int markets = cfg.markets;
    std::vector<std::vector<double>> occ_rank(markets), var_rank(markets), occ_idx(markets), var_idx(markets);
    std::vector<double> taus, nus;
    int ok = 0, split = 0, dominance = 0;
    for (const auto& r : runs) {
        if (r.failed) {
            ++p.failed;
            continue;
        }
        ++ok;
        for (int i = 0; i < markets; ++i) {
            const auto& by_rank = r.stats.markets[r.rank[i]];
            occ_rank[i].push_back(by_rank.mean_occupancy);
            var_rank[i].push_back(by_rank.per_capita_variance);
            occ_idx[i].push_back(r.stats.markets[i].mean_occupancy);
            var_idx[i].push_back(r.stats.markets[i].per_capita_variance);
        }
        if (r.relaxation.tau) taus.push_back(static_cast<double>(*r.relaxation.tau));
        nus.push_back(r.big_fluctuation_frequency);
        if (r.split) ++split;
        if (markets >= 2 &&
            r.stats.markets[r.rank[0]].per_capita_variance > r.stats.markets[r.rank[1]].per_capita_variance)
            ++dominance;
    }
    for (int i = 0; i < markets; ++i) {
        p.occupancy_by_rank.push_back(mean_std(occ_rank[i]));
        p.variance_by_rank.push_back(mean_std(var_rank[i]));
        p.occupancy_by_market.push_back(mean_std(occ_idx[i]));
        p.variance_by_market.push_back(mean_std(var_idx[i]));
    }
    p.tau = mean_std(taus);
    p.big_fluctuation_frequency = mean_std(nus);
    if (ok > 0) {
        p.split_fraction = static_cast<double>(split) / ok;
        p.big_variance_dominance = static_cast<double>(dominance) / ok;
    }
    return p;
}

std::vector<SweepPoint> q_sweep(const SweepSpec& spec) {
    spec.validate();
    std::vector<SweepPoint> out;
    for (int v : spec.values) {
        const GameConfig c = sweep_config(spec, v);
        const auto runs = ensemble_run(c, spec.ticks, spec.seeds, spec.options, spec.threads);
        out.push_back(aggregate(v, c, runs));
        out.back().q = sweep_q(c, spec.parameter, v);
    }
    std::stable_sort(out.begin(), out.end(), [](const SweepPoint& a, const SweepPoint& b) { return a.q < b.q; });
    return out;
}

std::optional<double> estimate_critical_q(std::span<const SweepPoint> input, double low, double high) {
    std::vector<SweepPoint> points(input.begin(), input.end());
    std::stable_sort(points.begin(), points.end(), [](const SweepPoint& a, const SweepPoint& b) { return a.q < b.q; });
    std::optional<double> best_width, best_mid;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].split_fraction < low)) continue;
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if (!(points[j].split_fraction > high)) continue;
            const double width = points[j].q - points[i].q;
            if (!best_width || width < *best_width) {
                best_width = width;
                best_mid = 0.5 * (points[i].q + points[j].q);
            }
            break;
        }
    }
    return best_mid;
}

// ---------------------------------------------------------------------------
// Figure datasets

namespace {

constexpr std::uint64_t default_figure_seed = 1;

GameConfig figure_config(int agents, int markets, const FigureOverrides& o) {
    return GameConfig::regular(agents, markets, 2, 5, o.seed.value_or(default_figure_seed));
}

Table time_series(const std::string& name, std::span<const TickRecord> records, bool occupancy, bool demand,
                  bool switched) {
    Table t;
    t.name = name;
    t.columns.push_back("t");
    const int markets = records.empty() ? 0 : records.front().markets();
    if (occupancy)
        for (int k = 0; k < markets; ++k) t.columns.push_back("O" + std::to_string(k + 1));
    if (demand)
        for (int k = 0; k < markets; ++k) t.columns.push_back("A" + std::to_string(k + 1));
    if (switched) t.columns.push_back("C");
    for (const auto& r : records) {
        std::vector<double> row{static_cast<double>(r.t)};
        if (occupancy)
            for (int k = 0; k < markets; ++k) row.push_back(r.occupancy[k]);
        if (demand)
            for (int k = 0; k < markets; ++k) row.push_back(r.demand[k]);
        if (switched) row.push_back(r.switched);
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table histogram_table(const std::string& name, const MuHistogram& h) {
    Table t{name, {"mu", "count", "p"}, {}};
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        t.rows.push_back({static_cast<double>(i), static_cast<double>(h.counts[i]), h.p[i]});
    return t;
}

Dataset fig_traces(const std::string& name, const FigureOverrides& o, bool occupancy, bool demand) {
    Dataset d{name, {}};
    for (int n : {11, 253, 1447}) {
        const auto records = run(figure_config(n, 2, o), o.ticks.value_or(5000));
        d.tables.push_back(time_series("N" + std::to_string(n), records, occupancy, demand, false));
    }
    return d;
}

GameConfig fig5_config(const FigureOverrides& o) {
    GameConfig c = figure_config(1600, 2, o);
    c.init.kind = InitKind::uniform;
    return c;
}

Dataset fig6(const FigureOverrides& o) {
    const GameConfig cfg = fig5_config(o);
    const std::int64_t ticks = o.ticks.value_or(300);
    const AnalysisOptions defaults;

    Game probe(cfg);
    std::optional<std::int64_t> t1;
    int market = 0;
    std::uint32_t mu = 0;
    Action winner = Action::plus;
    for (std::int64_t t = 0; t < ticks && !t1; ++t) {
        const TickRecord r = probe.step();
        for (int k = 0; k < r.markets(); ++k)
            if (is_large_fluctuation(r, k, defaults.theta)) {
                t1 = r.t;
                market = k;
                mu = r.mu[k];
                winner = r.minority[k];
                break;
            }
    }
    if (!t1) throw std::runtime_error("fig6: no large fluctuation within the run");

    // Agents grouped by how many of their strategies on the fluctuating
    // market were rewarded at t1; first agent of each group is tracked.
    const Endowment& e = probe.endowment();
    std::vector<int> chosen(static_cast<std::size_t>(cfg.slots) + 1, -1);
    for (int a = 0; a < cfg.agents; ++a) {
        int good = 0;
        for (int j = 0; j < cfg.slots; ++j)
            if (e.table(a, market, j).bit(mu) == bit_of(winner)) ++good;
        if (chosen[good] < 0) chosen[good] = a;
    }

    Dataset d{"fig6", {}};
    d.tables.push_back({"selection",
                        {"t1", "market", "mu", "minority"},
                        {{static_cast<double>(*t1), static_cast<double>(market + 1), static_cast<double>(mu),
                          static_cast<double>(to_int(winner))}}});
    Game game(cfg);
    std::vector<Table> tracks;
    for (int good = cfg.slots; good >= 0; --good) {
        Table t;
        t.name = "high" + std::to_string(good);
        t.columns = {"t", "agent"};
        for (int k = 0; k < cfg.markets; ++k)
            for (int j = 0; j < cfg.slots; ++j)
                t.columns.push_back("U_m" + std::to_string(k + 1) + "_s" + std::to_string(j + 1));
        tracks.push_back(std::move(t));
    }
    auto sample = [&](std::int64_t t) {
        for (int good = cfg.slots, i = 0; good >= 0; --good, ++i) {
            const int a = chosen[good];
            if (a < 0) continue;
            std::vector<double> row{static_cast<double>(t), static_cast<double>(a)};
            for (int k = 0; k < cfg.markets; ++k)
                for (int j = 0; j < cfg.slots; ++j) row.push_back(game.utility(a, k, j));
            tracks[i].rows.push_back(std::move(row));
        }
    };
    for (std::int64_t t = 0; t < ticks; ++t) {
        sample(t);
        game.step();
    }
    sample(ticks);
    for (auto& t : tracks) d.tables.push_back(std::move(t));
    return d;
}

Dataset fig6_0(const FigureOverrides& o) {
    Dataset d{"fig6_0", {}};
    const AnalysisOptions options;
    for (int n : {1447, 11}) {
        const GameConfig cfg = figure_config(n, 2, o);
        const auto records = run(cfg, o.ticks.value_or(5000));
        const Window all = Window::all(records.size());
        const auto stats = series_stats(records, options.window_for(records.size()));
        const auto rank = stats.rank_by_occupancy();
        d.tables.push_back(histogram_table("N" + std::to_string(n) + "_big", mu_histogram(records, rank[0], 5, all)));
        d.tables.push_back(
            histogram_table("N" + std::to_string(n) + "_small", mu_histogram(records, rank[1], 5, all)));
    }
    return d;
}

SweepSpec regular_sweep(const FigureOverrides& o, std::vector<int> values) {
    SweepSpec spec;
    spec.base = figure_config(values.front(), 2, o);
    spec.values = std::move(values);
    spec.seeds = o.seeds.value_or(10);
    spec.ticks = o.ticks.value_or(5000);
    spec.threads = o.threads;
    return spec;
}

Dataset fig6_1(const FigureOverrides& o) {
    const auto points = q_sweep(regular_sweep(o, {256, 384, 512, 768, 1024, 1447, 2048}));
    Table t{"tau", {"Q", "N", "tau_mean", "tau_std", "tau_count", "seeds"}, {}};
    for (const auto& p : points)
        t.rows.push_back({p.q, static_cast<double>(p.agents), p.tau.mean, p.tau.std,
                          static_cast<double>(p.tau.count), static_cast<double>(o.seeds.value_or(10))});
    return {"fig6_1", {t}};
}

Dataset fig7(const FigureOverrides& o) {
    const auto points = q_sweep(regular_sweep(o, {11, 64, 128, 256, 512, 1024, 1447}));
    Dataset d{"fig7", {sweep_table("sweep", points, false)}};
    if (auto qc = estimate_critical_q(points)) d.tables.push_back({"critical", {"Q_c"}, {{*qc}}});
    return d;
}

Dataset fig8(const FigureOverrides& o) {
    SweepSpec spec;
    spec.base = GameConfig::irregular(301, 301, 2, 5, o.seed.value_or(default_figure_seed));
    spec.parameter = SweepParameter::shared_agents;
    spec.values = {64, 301, 1000, 3000, 10000};
    spec.seeds = o.seeds.value_or(10);
    spec.ticks = o.ticks.value_or(5000);
    spec.threads = o.threads;
    return {"fig8", {sweep_table("sweep", q_sweep(spec), true)}};
}

void push_mean_std(std::vector<std::string>& cols, std::vector<double>& row, const std::string& label,
                   const MeanStd& m, bool header) {
    if (header) {
        cols.push_back(label + "_mean");
        cols.push_back(label + "_std");
    }
    row.push_back(m.mean);
    row.push_back(m.std);
}

}  // namespace

Table sweep_table(const std::string& name, std::span<const SweepPoint> points, bool by_market) {
    Table t;
    t.name = name;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        const bool header = i == 0;
        std::vector<double> row{p.q, static_cast<double>(p.value), static_cast<double>(p.agents)};
        if (header) t.columns = {"Q", "value", "N"};
        const auto& occ = by_market ? p.occupancy_by_market : p.occupancy_by_rank;
        const auto& var = by_market ? p.variance_by_market : p.variance_by_rank;
        for (std::size_t k = 0; k < occ.size(); ++k) {
            std::string label = "rank" + std::to_string(k + 1);
            if (by_market)
                label = "market" + std::to_string(k + 1);
            else if (k == 0)
                label = "big";
            else if (k + 1 == occ.size())
                label = "small";
            push_mean_std(t.columns, row, "O_" + label, occ[k], header);
            push_mean_std(t.columns, row, "var_" + label, var[k], header);
        }
        push_mean_std(t.columns, row, "tau", p.tau, header);
        push_mean_std(t.columns, row, "nu_big", p.big_fluctuation_frequency, header);
        if (header) {
            t.columns.push_back("tau_count");
            t.columns.push_back("split_fraction");
            t.columns.push_back("big_variance_dominance");
            t.columns.push_back("failed");
        }
        row.push_back(static_cast<double>(p.tau.count));
        row.push_back(p.split_fraction);
        row.push_back(p.big_variance_dominance);
        row.push_back(p.failed);
        t.rows.push_back(std::move(row));
    }
    return t;
}

const std::vector<std::string>& figure_names() {
    static const std::vector<std::string> names{"fig3", "fig4", "fig5", "fig6", "fig6_0",
                                                "fig6_1", "fig7", "fig8", "fig010"};
    return names;
}

Dataset figure_dataset(const std::string& name, const FigureOverrides& overrides) {
    const auto& o = overrides;
    if (name == "fig3") return fig_traces(name, o, true, false);
    if (name == "fig4") return fig_traces(name, o, false, true);
    if (name == "fig5") {
        const auto records = run(fig5_config(o), o.ticks.value_or(300));
        return {name, {time_series("traces", records, true, true, true)}};
    }
    if (name == "fig6") return fig6(o);
    if (name == "fig6_0") return fig6_0(o);
    if (name == "fig6_1") return fig6_1(o);
    if (name == "fig7") return fig7(o);
    if (name == "fig8") return fig8(o);
    if (name == "fig010") {
        const auto records = run(figure_config(3001, 3, o), o.ticks.value_or(5000));
        return {name, {time_series("traces", records, true, true, false)}};
    }
    throw std::invalid_argument("unknown figure '" + name + "'");
}

}  // namespace mmg

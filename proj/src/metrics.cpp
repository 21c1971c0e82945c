#include "mmg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace mmg {

namespace {

void check_window(std::span<const TickRecord> records, Window w) {
    if (w.size() == 0) throw std::invalid_argument("empty measurement window");
    if (w.end > records.size()) throw std::out_of_range("measurement window beyond recorded range");
}

}  // namespace

std::vector<int> SeriesStats::rank_by_occupancy() const {
    std::vector<int> order(markets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return markets[a].mean_occupancy > markets[b].mean_occupancy;
    });
    return order;
}

SeriesStats series_stats(std::span<const TickRecord> records, Window window) {
    check_window(records, window);
    const int markets = records[window.begin].markets();
    std::vector<double> o(markets, 0.0), a(markets, 0.0), a2(markets, 0.0);
    for (std::size_t t = window.begin; t < window.end; ++t) {
        const auto& r = records[t];
        for (int k = 0; k < markets; ++k) {
            const double d = r.demand[k];
            o[k] += r.occupancy[k];
            a[k] += d;
            a2[k] += d * d;
        }
    }
    const double n = static_cast<double>(window.size());
    SeriesStats s;
    s.window = window;
    s.markets.resize(markets);
    for (int k = 0; k < markets; ++k) {
        auto& m = s.markets[k];
        m.mean_occupancy = o[k] / n;
        m.mean_demand = a[k] / n;
        m.mean_square_demand = a2[k] / n;
        m.per_capita_variance = o[k] > 0.0 ? a2[k] / o[k] : 0.0;
    }
    return s;
}

std::uint64_t MuHistogram::total() const noexcept {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

double MuHistogram::max_deviation_from_uniform() const noexcept {
    const double u = 1.0 / static_cast<double>(p.size());
    double worst = 0.0;
    for (double x : p) worst = std::max(worst, std::abs(x - u));
    return worst;
}

double MuHistogram::chi_square_uniform() const noexcept {
    const double expected = static_cast<double>(total()) / static_cast<double>(counts.size());
    double chi2 = 0.0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        chi2 += d * d / expected;
    }
    return chi2;
}

double MuHistogram::uniform_p_value() const {
    const double dof = static_cast<double>(counts.size()) - 1.0;
    return boost::math::gamma_q(dof / 2.0, chi_square_uniform() / 2.0);
}

MuHistogram mu_histogram(std::span<const TickRecord> records, int market, int memory, Window window) {
    check_window(records, window);
    if (memory < 1 || memory > max_memory) throw std::invalid_argument("memory out of range");
    const std::size_t size = std::size_t{1} << memory;
    MuHistogram h;
    h.counts.assign(size, 0);
    for (std::size_t t = window.begin; t < window.end; ++t) {
        const auto mu = records[t].mu[market];
        if (mu >= size) throw std::invalid_argument("history value exceeds 2^m");
        ++h.counts[mu];
    }
    h.p.resize(size);
    const double n = static_cast<double>(window.size());
    for (std::size_t i = 0; i < size; ++i) h.p[i] = static_cast<double>(h.counts[i]) / n;
    return h;
}

bool is_large_fluctuation(const TickRecord& r, int market, double theta) noexcept {
    const int o = r.occupancy[market];
    return o > 0 && std::abs(static_cast<double>(r.demand[market])) >= theta * static_cast<double>(o);
}

double fluctuation_frequency(std::span<const TickRecord> records, int market, double theta, Window window) {
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1]");
    check_window(records, window);
    std::size_t hits = 0;
    for (std::size_t t = window.begin; t < window.end; ++t)
        if (is_large_fluctuation(records[t], market, theta)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(window.size());
}

Relaxation relaxation_time(std::span<const TickRecord> records, int agents, int slots, double belt,
                           std::int64_t min_hold) {
    if (!(belt > 0.0 && belt < 1.0)) throw std::invalid_argument("belt must lie in (0, 1)");
    Relaxation out;
    if (records.empty()) return out;
    const int markets = records.front().markets();
    const auto levels = predicted_occupancies(agents, markets, slots);
    const double width = belt * static_cast<double>(agents);
    auto inside = [&](const TickRecord& r) {
        for (int k = 0; k < markets; ++k) {
            const double o = r.occupancy[k];
            const bool near = std::any_of(levels.begin(), levels.end(),
                                          [&](double level) { return std::abs(o - level) <= width; });
            if (!near) return false;
        }
        return true;
    };
    std::size_t t = records.size();
    while (t > 0 && inside(records[t - 1])) --t;
    if (t == records.size()) return out;
    out.raw_tau = records[t].t;
    out.hold = static_cast<std::int64_t>(records.size() - t);
    out.censored = out.hold < min_hold;
    if (!out.censored) out.tau = out.raw_tau;
    return out;
}

std::vector<double> predicted_occupancies(int agents, int markets, int slots) {
    if (markets < 1) throw std::invalid_argument("K must be at least 1");
    if (slots < 1) throw std::invalid_argument("s must be at least 1");
    const double n = agents;
    const double stay = std::ldexp(1.0, -slots);  // 1/2^s
    std::vector<double> out(markets);
    double remaining = n;
    for (int k = 0; k + 1 < markets; ++k) {
        out[k] = remaining * (1.0 - stay);
        remaining *= stay;
    }
    out[markets - 1] = remaining;
    return out;
}

IrregularPrediction predicted_irregular(int n1, int n2, int slots) {
    if (n1 < 0 || n2 < 0) throw std::invalid_argument("agent counts must be non-negative");
    if (slots < 1) throw std::invalid_argument("s must be at least 1");
    const double stay = std::ldexp(1.0, -slots);
    return {static_cast<double>(n1) + (1.0 - stay) * n2, n2 * stay};
}

std::optional<CriticalHistory> detect_critical_history(std::span<const TickRecord> records, int market,
                                                       double theta) {
    std::size_t first = 0;
    while (first < records.size() && !is_large_fluctuation(records[first], market, theta)) ++first;
    if (first == records.size()) return std::nullopt;
    CriticalHistory c;
    c.mu = records[first].mu[market];
    c.first_tick = records[first].t;
    for (std::size_t t = first + 1; t < records.size(); ++t)
        if (records[t].mu[market] == c.mu) c.recurrences.push_back(records[t].t);
    return c;
}

SwitchSeries switch_series(std::span<const TickRecord> records, const std::optional<CriticalHistory>& critical) {
    SwitchSeries s;
    s.switched.reserve(records.size());
    for (const auto& r : records) s.switched.push_back(r.switched);
    if (critical && !records.empty()) {
        const std::int64_t t0 = records.front().t;
        double sum = 0.0;
        std::size_t n = 0;
        for (auto t : critical->recurrences) {
            const auto next = static_cast<std::size_t>(t - t0 + 1);
            if (next < records.size()) {
                sum += records[next].switched;
                ++n;
            }
        }
        if (n > 0) s.mean_after_recurrence = sum / static_cast<double>(n);
    }
    return s;
}

bool detect_split(std::span<const TickRecord> records, Window window, int agents, double gap_fraction,
                  double sustain_fraction) {
    check_window(records, window);
    if (records[window.begin].markets() < 2) return false;
    const auto stats = series_stats(records, window);
    const auto rank = stats.rank_by_occupancy();
    const int big = rank[0];
    const int second = rank[1];
    const double gap = gap_fraction * static_cast<double>(agents);
    std::size_t held = 0;
    for (std::size_t t = window.begin; t < window.end; ++t)
        if (static_cast<double>(records[t].occupancy[big] - records[t].occupancy[second]) > gap) ++held;
    return static_cast<double>(held) >= sustain_fraction * static_cast<double>(window.size());
}

const char* to_string(GameMode mode) noexcept {
    switch (mode) {
        case GameMode::random: return "random";
        case GameMode::herd_symmetric: return "herd-symmetric";
        case GameMode::herd_asymmetric: return "herd-asymmetric";
        case GameMode::cooperation: return "cooperation";
    }
    return "unknown";
}

GameMode classify_mode(const SeriesStats& stats, bool split, const ModeThresholds& thresholds) {
    if (split) return GameMode::herd_asymmetric;
    double v = 0.0;
    for (const auto& m : stats.markets)
        if (m.mean_occupancy > 0.0) v = std::max(v, m.per_capita_variance);
    if (v > thresholds.herd_above) return GameMode::herd_symmetric;
    if (v < thresholds.cooperation_below) return GameMode::cooperation;
    return GameMode::random;
}

}  // namespace mmg

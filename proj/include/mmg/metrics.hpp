#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mmg/game.hpp"

namespace mmg {

/// Half-open tick-index range [begin, end) into a record stream.
struct Window {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end > begin ? end - begin : 0; }

    static Window all(std::size_t n) { return {0, n}; }
    static Window last_half(std::size_t n) { return {n / 2, n}; }
    /// Last count ticks (all of them when count >= n).
    static Window last(std::size_t n, std::size_t count) { return {count >= n ? 0 : n - count, n}; }

    bool operator==(const Window&) const = default;
};

struct MarketStats {
    double mean_occupancy = 0.0;
    double mean_demand = 0.0;
    double mean_square_demand = 0.0;
    /// <A^2> / <O>; zero for a market nobody visited.
    double per_capita_variance = 0.0;
};

struct SeriesStats {
    Window window;
    std::vector<MarketStats> markets;

    /// Market indices sorted by mean occupancy, biggest first (lower index on ties).
    std::vector<int> rank_by_occupancy() const;
    int big_market() const { return rank_by_occupancy().front(); }
};

SeriesStats series_stats(std::span<const TickRecord> records, Window window);

struct MuHistogram {
    std::vector<std::uint64_t> counts;
    std::vector<double> p;

    std::uint64_t total() const noexcept;
    double max_deviation_from_uniform() const noexcept;
    double chi_square_uniform() const noexcept;
    /// Upper-tail probability of chi_square_uniform() with 2^m - 1 degrees of freedom.
    double uniform_p_value() const;
};

/// Empirical distribution of mu_k over the window, 2^memory bins.
MuHistogram mu_histogram(std::span<const TickRecord> records, int market, int memory, Window window);

/// Ticks with |A_k| >= theta * O_k and O_k > 0.
bool is_large_fluctuation(const TickRecord& r, int market, double theta) noexcept;

/// Share of window ticks holding a large fluctuation on the market.
double fluctuation_frequency(std::span<const TickRecord> records, int market, double theta, Window window);

struct Relaxation {
    /// First tick after which every occupancy stays inside the belt until the
    /// end of the records and for at least min_hold ticks.
    std::optional<std::int64_t> tau;
    /// Same, ignoring min_hold. Set whenever the final tick is inside the belt.
    std::optional<std::int64_t> raw_tau;
    /// Ticks spent in the belt after raw_tau.
    std::int64_t hold = 0;
    /// raw_tau exists but the hold is shorter than min_hold.
    bool censored = false;
};

/// Belt of +-belt*N around the predicted occupancy levels for K markets
/// (N/2^s and N(1-1/2^s) when K = 2).
Relaxation relaxation_time(std::span<const TickRecord> records, int agents, int slots, double belt = 0.05,
                           std::int64_t min_hold = 0);

/// Asymptotic occupancies, biggest first. Sums to N.
std::vector<double> predicted_occupancies(int agents, int markets, int slots);

struct IrregularPrediction {
    double shared_market_asymptote = 0.0;  // <O_1> ~ N1 + (1 - 1/2^s) N2
    double bridge_market_limit = 0.0;      // lim <O_2> = N2 / 2^s
};

IrregularPrediction predicted_irregular(int n1, int n2, int slots);

struct CriticalHistory {
    std::uint32_t mu = 0;
    std::int64_t first_tick = 0;
    std::vector<std::int64_t> recurrences;  // later ticks with mu_k == mu
};

/// History seen at the first large fluctuation on the market.
std::optional<CriticalHistory> detect_critical_history(std::span<const TickRecord> records, int market,
                                                       double theta = 0.9);

struct SwitchSeries {
    std::vector<int> switched;  // C(t)
    /// Mean of C(t + 1) over recurrence ticks t of the critical history, the
    /// tick on which agents respond to the collective event.
    std::optional<double> mean_after_recurrence;
};

SwitchSeries switch_series(std::span<const TickRecord> records,
                           const std::optional<CriticalHistory>& critical = std::nullopt);

/// True when the gap between the two most occupied markets exceeds
/// gap_fraction * N on at least sustain_fraction of the window ticks.
bool detect_split(std::span<const TickRecord> records, Window window, int agents, double gap_fraction = 0.2,
                  double sustain_fraction = 1.0);

enum class GameMode { random, herd_symmetric, herd_asymmetric, cooperation };

const char* to_string(GameMode mode) noexcept;

struct ModeThresholds {
    /// Per-capita variance above this is herding.
    double herd_above = 2.0;
    /// Per-capita variance below this is cooperation.
    double cooperation_below = 0.5;
};

/// Split wins; otherwise the largest per-capita variance over markets picks
/// the band. Boundaries belong to random.
GameMode classify_mode(const SeriesStats& stats, bool split, const ModeThresholds& thresholds = {});

}  // namespace mmg

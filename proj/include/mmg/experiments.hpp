#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmg/game.hpp"
#include "mmg/metrics.hpp"

namespace mmg {

enum class WindowPolicy { last_half, last_count, all };

/// Knobs shared by every per-run analysis.
struct AnalysisOptions {
    WindowPolicy window = WindowPolicy::last_half;
    std::int64_t window_count = 0;  // used with last_count
    double theta = 0.9;             // large-fluctuation threshold
    double belt = 0.05;             // relaxation belt, fraction of N
    double min_hold_fraction = 0.1; // tau needs this share of the run inside the belt
    double split_gap = 0.2;         // fraction of N
    double split_sustain = 1.0;     // share of window ticks the gap must hold
    ModeThresholds modes;

    Window window_for(std::size_t n) const;

    bool operator==(const AnalysisOptions& o) const {
        return window == o.window && window_count == o.window_count && theta == o.theta && belt == o.belt &&
               min_hold_fraction == o.min_hold_fraction && split_gap == o.split_gap &&
               split_sustain == o.split_sustain && modes.herd_above == o.modes.herd_above &&
               modes.cooperation_below == o.modes.cooperation_below;
    }
};

/// The big market's response to one recurrence of its critical history.
struct RecurrenceEvent {
    std::int64_t t = 0;
    int occupancy = 0;         // O_big(t)
    int demand = 0;            // A_big(t)
    int switched_next = -1;    // C(t + 1); -1 at the last tick
    int occupancy_change = 0;  // O_big(t + 1) - O_big(t)
};

struct RunSummary {
    std::size_t seed_index = 0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;

    SeriesStats stats;
    std::vector<int> rank;  // markets by mean occupancy, biggest first
    int big_market = 0;
    bool split = false;
    GameMode mode = GameMode::random;
    Relaxation relaxation;
    double big_fluctuation_frequency = 0.0;  // over the measurement window
    std::optional<CriticalHistory> critical;  // on the big market
    /// Recurrences at or after stabilization (tau, or the first fluctuation
    /// when tau is undefined).
    std::vector<RecurrenceEvent> events;
    std::vector<MuHistogram> histograms;  // per market, over the window
};

/// Analyses one finished run.
RunSummary summarize(std::span<const TickRecord> records, const GameConfig& cfg, const AnalysisOptions& options);

/// Runs n_seeds games whose seeds are RngStream::derive_seed(cfg.seed, i).
/// threads = 0 picks the hardware concurrency. Results are in seed order.
std::vector<RunSummary> ensemble_run(const GameConfig& cfg, std::int64_t ticks, int n_seeds,
                                     const AnalysisOptions& options = {}, unsigned threads = 0);

enum class SweepParameter { agents, shared_agents };

struct SweepSpec {
    GameConfig base;
    SweepParameter parameter = SweepParameter::agents;
    std::vector<int> values;
    int seeds = 10;
    std::int64_t ticks = 5000;
    AnalysisOptions options;
    unsigned threads = 0;

    void validate() const;
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, 0 with fewer than two values
    std::size_t count = 0;
};

MeanStd mean_std(std::span<const double> values);

struct SweepPoint {
    int value = 0;
    double q = 0.0;
    int agents = 0;
    std::vector<MeanStd> occupancy_by_rank;
    std::vector<MeanStd> variance_by_rank;
    std::vector<MeanStd> occupancy_by_market;
    std::vector<MeanStd> variance_by_market;
    MeanStd tau;  // over seeds with a defined tau
    MeanStd big_fluctuation_frequency;
    double split_fraction = 0.0;
    /// Share of seeds whose big market has the larger per-capita variance.
    double big_variance_dominance = 0.0;
    int failed = 0;
};

SweepPoint aggregate(int value, const GameConfig& cfg, std::span<const RunSummary> runs);

GameConfig sweep_config(const SweepSpec& spec, int value);

/// One ensemble per value, ordered by Q.
std::vector<SweepPoint> q_sweep(const SweepSpec& spec);

/// Midpoint of the narrowest Q interval across which the split fraction goes
/// from below `low` to above `high`.
std::optional<double> estimate_critical_q(std::span<const SweepPoint> points, double low = 0.25,
                                          double high = 0.75);

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct Dataset {
    std::string figure;
    std::vector<Table> tables;
};

/// One row per point: Q, value, N, mean/std of occupancy and per-capita
/// variance (by rank, or by market index when by_market), tau, nu and the
/// split fraction.
Table sweep_table(const std::string& name, std::span<const SweepPoint> points, bool by_market);

struct FigureOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> ticks;
    std::optional<int> seeds;
    unsigned threads = 0;
};

const std::vector<std::string>& figure_names();

/// Runs the canned configuration for a figure. Throws std::invalid_argument
/// for an unknown name.
Dataset figure_dataset(const std::string& name, const FigureOverrides& overrides = {});

}  // namespace mmg

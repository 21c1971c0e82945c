// Runs every acceptance criterion at its stated tolerance and prints one
// PASS/FAIL line per criterion. Exit status is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "mmg/experiments.hpp"
#include "mmg/game.hpp"
#include "mmg/metrics.hpp"

using namespace mmg;

namespace {

constexpr std::uint64_t master_seed = 1;
constexpr std::int64_t ticks = 5000;
constexpr int seeds = 10;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * target; }

GameConfig seeded(GameConfig cfg, std::size_t i) {
    cfg.seed = RngStream::derive_seed(master_seed, i);
    return cfg;
}

// First ten N=1447 runs, shared by several criteria.
const std::vector<std::vector<TickRecord>>& big_runs() {
    static const auto runs = [] {
        std::vector<std::vector<TickRecord>> out;
        for (int i = 0; i < seeds; ++i) out.push_back(run(seeded(GameConfig::regular(1447, 2, 2, 5, 0), i), ticks));
        return out;
    }();
    return runs;
}

std::vector<RunSummary> big_summaries() {
    std::vector<RunSummary> out;
    for (int i = 0; i < seeds; ++i) {
        const auto cfg = seeded(GameConfig::regular(1447, 2, 2, 5, 0), i);
        out.push_back(summarize(big_runs()[i], cfg, {}));
    }
    return out;
}

Outcome criterion1() {
    int split = 0, good = 0;
    double worst = 0.0;
    for (const auto& s : big_summaries()) {
        if (!s.split) continue;
        ++split;
        const double big = s.stats.markets[s.rank[0]].mean_occupancy;
        const double small = s.stats.markets[s.rank[1]].mean_occupancy;
        worst = std::max({worst, std::abs(big / 1085.25 - 1), std::abs(small / 361.75 - 1)});
        good += within(big, 1085.25, 0.05) && within(small, 361.75, 0.05);
    }
    return {split > 0 && good == split, std::to_string(split) + "/10 seeds split, " + std::to_string(good) +
                                             " within 5%, worst deviation " + fmt("%.2f%%", 100 * worst)};
}

Outcome criterion2() {
    int undefined = 0;
    const auto runs = ensemble_run(GameConfig::regular(11, 2, 2, 5, master_seed), ticks, seeds, {}, 0);
    for (const auto& s : runs) undefined += !s.relaxation.tau;
    return {undefined >= 9, "tau undefined in " + std::to_string(undefined) + "/10 seeds"};
}

Outcome criterion3() {
    const std::vector<double> target = predicted_occupancies(3001, 3, 2);
    const auto runs = ensemble_run(GameConfig::regular(3001, 3, 2, 5, master_seed), ticks, seeds, {}, 0);
    int good = 0;
    std::string seen;
    for (const auto& s : runs) {
        bool ok = true;
        for (int r = 0; r < 3; ++r) ok = ok && within(s.stats.markets[s.rank[r]].mean_occupancy, target[r], 0.07);
        good += ok;
        if (seen.size() < 60)
            seen += " (" + fmt("%.0f", s.stats.markets[s.rank[0]].mean_occupancy) + "," +
                    fmt("%.0f", s.stats.markets[s.rank[1]].mean_occupancy) + "," +
                    fmt("%.0f", s.stats.markets[s.rank[2]].mean_occupancy) + ")";
    }
    return {good >= 8, std::to_string(good) + "/10 seeds within 7%; first seeds" + seen};
}

Outcome criterion4() {
    int good = 0;
    double lo = 1, hi = 0;
    for (const auto& recs : big_runs()) {
        const Window w = Window::last(recs.size(), 4000);
        const int big = series_stats(recs, w).big_market();
        const double nu = fluctuation_frequency(recs, big, 0.9, w);
        lo = std::min(lo, nu);
        hi = std::max(hi, nu);
        good += nu >= 0.02 && nu <= 0.045;
    }
    return {good >= 8, std::to_string(good) + "/10 seeds in [0.02, 0.045], nu range [" + fmt("%.4f", lo) + ", " +
                           fmt("%.4f", hi) + "]"};
}

Outcome criterion5() {
    int split = 0, clean = 0;
    std::size_t events = 0, exact = 0;
    for (const auto& s : big_summaries()) {
        if (!s.split) continue;
        ++split;
        std::size_t ok = 0;
        for (const auto& e : s.events) ok += std::abs(e.demand) == e.occupancy;
        events += s.events.size();
        exact += ok;
        clean += !s.events.empty() && ok == s.events.size();
    }
    return {split > 0 && clean == split, std::to_string(clean) + "/" + std::to_string(split) +
                                             " split seeds with |A| = O at every recurrence; " +
                                             std::to_string(exact) + "/" + std::to_string(events) +
                                             " recurrences exact overall"};
}

Outcome criterion6() {
    const double n = 1447;
    int good = 0;
    for (const auto& s : big_summaries()) {
        bool ok = !s.events.empty();
        for (const auto& e : s.events) {
            if (e.switched_next < 0) continue;
            ok = ok && e.switched_next >= 0.4 * n && e.switched_next <= 0.6 * n &&
                 std::abs(e.occupancy_change) <= 0.05 * n;
        }
        good += ok;
    }
    return {good >= 8, std::to_string(good) + "/10 seeds with C in [0.4N, 0.6N] and |dO| <= 5% N at every recurrence"};
}

Outcome criterion7() {
    int uniform = 0;
    double worst = 0;
    for (const auto& recs : big_runs()) {
        const int big = series_stats(recs, Window::all(recs.size())).big_market();
        const double dev = mu_histogram(recs, big, 5, Window::all(recs.size())).max_deviation_from_uniform();
        worst = std::max(worst, dev);
        uniform += dev <= 1.0 / 32;
    }
    int rejected = 0;
    for (int i = 0; i < seeds; ++i) {
        const auto recs = run(seeded(GameConfig::regular(11, 2, 2, 5, 0), i), ticks);
        const int big = series_stats(recs, Window::all(recs.size())).big_market();
        rejected += mu_histogram(recs, big, 5, Window::all(recs.size())).uniform_p_value() < 0.01;
    }
    return {uniform == seeds && rejected >= 8,
            "N=1447: " + std::to_string(uniform) + "/10 seeds max|p-1/32| <= 1/32 (worst " + fmt("%.4f", worst) +
                "); N=11: uniformity rejected in " + std::to_string(rejected) + "/10"};
}

Outcome criterion8() {
    SweepSpec spec;
    spec.base = GameConfig::regular(11, 2, 2, 5, master_seed);
    spec.values = {11, 64, 128, 256, 512, 1024, 1447};
    spec.seeds = seeds;
    spec.ticks = ticks;
    const auto points = q_sweep(spec);
    const auto qc = estimate_critical_q(points);
    std::string fractions;
    for (const auto& p : points) fractions += " " + fmt("%.3g", p.q) + ":" + fmt("%.1f", p.split_fraction);
    const double above = qc ? *qc : 8.0;
    bool dominance = true;
    std::string dom;
    for (const auto& p : points)
        if (p.q > above) {
            dominance = dominance && p.big_variance_dominance >= 0.8;
            dom += " " + fmt("%.3g", p.q) + ":" + fmt("%.1f", p.big_variance_dominance);
        }
    const bool in_range = qc && *qc >= 4 && *qc <= 16;
    return {in_range && dominance, "Q_c " + (qc ? fmt("%.4g", *qc) : std::string("undefined")) +
                                       "; split fraction by Q" + fractions + "; big-variance share above Q_c" + dom};
}

Outcome criterion9() {
    SweepSpec spec;
    spec.base = GameConfig::irregular(1, 301, 2, 5, master_seed);
    spec.parameter = SweepParameter::shared_agents;
    spec.values = {301, 1000, 3000, 10000};
    spec.seeds = seeds;
    spec.ticks = ticks;
    const auto points = q_sweep(spec);
    bool decreasing = true;
    std::string o2;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& m = points[i].occupancy_by_market[1];
        o2 += " " + std::to_string(points[i].value) + ":" + fmt("%.2f", m.mean);
        if (i == 0) continue;
        const auto& prev = points[i - 1].occupancy_by_market[1];
        const double se = std::sqrt(prev.std * prev.std / prev.count + m.std * m.std / m.count);
        decreasing = decreasing && m.mean <= prev.mean + se;
    }
    const auto& last = points.back();
    const double o2_last = last.occupancy_by_market[1].mean;
    const double o1_last = last.occupancy_by_market[0].mean;
    const bool o2_ok = within(o2_last, 75.25, 0.15);
    const bool o1_ok = within(o1_last, 10000 + 225.75, 0.05);
    return {decreasing && o2_ok && o1_ok, "<O2> by N1" + o2 + (decreasing ? " (decreasing)" : " (not decreasing)") +
                                              "; <O1> at N1=10000 " + fmt("%.2f", o1_last)};
}

Outcome criterion10() {
    auto sign = GameConfig::regular(1447, 2, 2, 5, master_seed);
    sign.payoff = PayoffKind::sign;
    auto one = GameConfig::regular(1447, 2, 1, 5, master_seed);
    int no_split_sign = 0, no_split_one = 0;
    for (const auto& s : ensemble_run(sign, ticks, seeds, {}, 0)) no_split_sign += !s.split;
    for (const auto& s : ensemble_run(one, ticks, seeds, {}, 0)) no_split_one += !s.split;
    return {no_split_sign >= 9 && no_split_one >= 9, "no split with g=sgn in " + std::to_string(no_split_sign) +
                                                         "/10, with s=1 in " + std::to_string(no_split_one) + "/10"};
}

Outcome criterion11() {
    const auto runs = ensemble_run(GameConfig::regular(1447, 2, 2, 5, master_seed), ticks, 200, {}, 0);
    int first_big = 0;
    for (const auto& s : runs) first_big += s.big_market == 0;
    const double frac = first_big / 200.0;
    // seed extension: the first ten summaries equal the directly computed ones
    const auto direct = big_summaries();
    bool stable = true;
    for (int i = 0; i < seeds; ++i)
        stable = stable && runs[i].big_market == direct[i].big_market &&
                 runs[i].stats.markets[0].mean_occupancy == direct[i].stats.markets[0].mean_occupancy;
    return {std::abs(frac - 0.5) <= 0.10 && stable, "market 1 big in " + fmt("%.3f", frac) +
                                                        " of 200 seeds; first 10 seeds " +
                                                        (stable ? "unchanged" : "CHANGED") + " by extension"};
}

// Single-market minority game coded independently of the engine.
std::vector<int> reference_smg(const Endowment& e, int n, int s, int m, std::uint32_t mu, int steps) {
    std::vector<double> u(static_cast<std::size_t>(n) * s, 0.0);
    std::vector<int> out;
    for (int t = 0; t < steps; ++t) {
        int A = 0;
        for (int a = 0; a < n; ++a) {
            int best = 0;
            for (int j = 1; j < s; ++j)
                if (u[a * s + j] > u[a * s + best]) best = j;
            A += e.table(a, 0, best).bit(mu) ? 1 : -1;
        }
        for (int a = 0; a < n; ++a)
            for (int j = 0; j < s; ++j) u[a * s + j] -= (e.table(a, 0, j).bit(mu) ? 1 : -1) * A;
        mu = ((mu << 1) | (A <= 0 ? 1U : 0U)) & ((1U << m) - 1);
        out.push_back(A);
    }
    return out;
}

Outcome criterion12() {
    std::vector<std::string> broken;
    RngStream meta(12);

    // conservation, bound, parity, and exact utility replay under g = x
    bool conservation = true, bound = true, replay = true;
    for (int trial = 0; trial < 20; ++trial) {
        auto cfg = GameConfig::regular(2 + static_cast<int>(meta.below(300)), 1 + static_cast<int>(meta.below(3)),
                                       1 + static_cast<int>(meta.below(3)), 1 + static_cast<int>(meta.below(8)),
                                       meta.next_u64());
        if (meta.coin()) cfg.init = {InitKind::uniform, 0.0, 1.0};
        Game g(cfg);
        const auto u0 = g.state().utilities;
        std::vector<TickRecord> recs;
        for (int t = 0; t < 300; ++t) recs.push_back(g.step());
        for (const auto& r : recs) {
            int total = 0;
            for (int k = 0; k < r.markets(); ++k) {
                total += r.occupancy[k];
                bound = bound && std::abs(r.demand[k]) <= r.occupancy[k] && (r.occupancy[k] - r.demand[k]) % 2 == 0;
            }
            conservation = conservation && total == cfg.agents;
        }
        const auto& e = g.endowment();
        for (int a = 0; a < cfg.agents; ++a)
            for (int k = 0; k < cfg.markets; ++k)
                for (int j = 0; j < cfg.slots; ++j) {
                    double u = u0[e.index(a, k, j)];
                    for (const auto& r : recs) u -= (e.table(a, k, j).bit(r.mu[k]) ? 1 : -1) * r.demand[k];
                    replay = replay && u == g.utility(a, k, j);
                }
    }
    if (!conservation) broken.push_back("conservation");
    if (!bound) broken.push_back("bound/parity");
    if (!replay) broken.push_back("utility replay");

    // complement antisymmetry
    {
        auto cfg = GameConfig::regular(40, 2, 2, 4, 5);
        RngStream rng(cfg.seed);
        auto e = draw_strategies(rng, cfg.topology, 2, 4);
        for (int a = 0; a < 40; ++a)
            for (int k = 0; k < 2; ++k) {
                StrategyTable t(4, k);
                for (std::uint32_t i = 0; i < 16; ++i) t.set_bit(i, e.table(a, k, 0).bit(i));
                e.set_table(a, 1, t.complement());
            }
        Game g(cfg, e);
        bool ok = true;
        for (int t = 0; t < 300; ++t) {
            g.step();
            for (int a = 0; a < 40; ++a)
                for (int k = 0; k < 2; ++k) ok = ok && g.utility(a, k, 0) + g.utility(a, k, 1) == 0.0;
        }
        if (!ok) broken.push_back("complement antisymmetry");
    }

    // replay determinism
    {
        auto cfg = GameConfig::regular(257, 2, 2, 5, 99);
        cfg.trace_agents = true;
        if (!(run(cfg, 1000) == run(cfg, 1000))) broken.push_back("replay determinism");
    }

    // K = 1 reduction
    {
        bool ok = true;
        for (int trial = 0; trial < 20; ++trial) {
            const int n = 1 + static_cast<int>(meta.below(9));
            const int m = 1 + static_cast<int>(meta.below(3));
            const int s = 1 + static_cast<int>(meta.below(3));
            auto cfg = GameConfig::regular(n, 1, s, m, meta.next_u64());
            cfg.tie_break = TieBreak::lowest_index;
            cfg.zero_demand = ZeroDemandRule::plus_one;
            Game g(cfg);
            const auto expected = reference_smg(g.endowment(), n, s, m, g.state().histories[0].bits(), 100);
            for (int t = 0; t < 100; ++t) ok = ok && g.step().demand[0] == expected[t];
        }
        if (!ok) broken.push_back("K=1 reduction");
    }

    std::string detail = "all properties hold";
    if (!broken.empty()) {
        detail = "broken:";
        for (const auto& b : broken) detail += " " + b;
    }
    return {broken.empty(), detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"occupancy split levels", criterion1},
        {"no split at small N", criterion2},
        {"three-market occupancies", criterion3},
        {"fluctuation frequency", criterion4},
        {"collective event identity", criterion5},
        {"half-population switching", criterion6},
        {"mu-histogram uniformity", criterion7},
        {"critical point", criterion8},
        {"irregular limits", criterion9},
        {"kill switches", criterion10},
        {"equal likelihood of big market", criterion11},
        {"property suite", criterion12},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        const Outcome o = criteria[i].second();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("criterion %2zu %s  %s: %s [%.1fs]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed;
}

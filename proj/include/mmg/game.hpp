#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mmg/rng.hpp"
#include "mmg/strategy.hpp"
#include "mmg/topology.hpp"

namespace mmg {

enum class PayoffKind { linear, sign, scaled };
enum class TieBreak { random, lowest_index };
enum class ZeroDemandRule { coin, plus_one };
enum class InitKind { zero, uniform };

struct InitUtilities {
    InitKind kind = InitKind::zero;
    double low = 0.0;
    double high = 1.0;

    bool operator==(const InitUtilities&) const = default;
};

struct GameConfig {
    int agents = 1;       // N
    int markets = 2;      // K
    int slots = 2;        // s, strategies per market per agent
    int memory = 5;       // m
    PayoffKind payoff = PayoffKind::linear;
    MarketTopology topology;
    InitUtilities init;
    std::uint64_t seed = 0;
    TieBreak tie_break = TieBreak::random;
    ZeroDemandRule zero_demand = ZeroDemandRule::coin;
    bool trace_agents = false;

    /// Regular topology with the given sizes; other fields at their defaults.
    static GameConfig regular(int agents, int markets, int slots, int memory, std::uint64_t seed);
    /// Two-market irregular topology, N = n1 + n2.
    static GameConfig irregular(int n1, int n2, int slots, int memory, std::uint64_t seed);

    /// Throws ConfigError naming the offending field.
    void validate() const;

    double q() const noexcept { return static_cast<double>(agents) / static_cast<double>(1U << memory); }

    bool operator==(const GameConfig&) const = default;
};

struct ActiveChoice {
    int market = 0;
    int slot = 0;
    Action action = Action::plus;

    bool operator==(const ActiveChoice&) const = default;
};

/// Observables of one tick. mu[k] is the history the agents saw.
struct TickRecord {
    std::int64_t t = 0;
    std::vector<int> occupancy;      // O_k
    std::vector<int> demand;         // A_k
    std::vector<Action> minority;    // a*_k
    std::vector<std::uint32_t> mu;   // mu_k(t)
    int switched = 0;                // C(t)
    std::vector<ActiveChoice> agents;  // filled only with trace_agents

    int markets() const noexcept { return static_cast<int>(occupancy.size()); }

    bool operator==(const TickRecord&) const = default;
};

struct GameState {
    std::int64_t t = 0;
    std::vector<double> utilities;   // (agent, market, slot) order, N*K*s entries
    std::vector<History> histories;
    std::vector<int> last_market;    // -1 before the first tick
    std::vector<int> last_slot;
};

double payoff_scale(PayoffKind kind, int demand, int agents) noexcept;

/// -action * g(A).
double payoff(Action action, int demand, PayoffKind kind, int agents) noexcept;

int aggregate_demand(std::span<const Action> actions) noexcept;

/// -sgn(A); A == 0 resolved by the rule (a coin consumes one draw).
Action minority_action(int demand, RngStream& rng, ZeroDemandRule rule);

/// Reference to one strategy of an agent.
struct SlotRef {
    int market = 0;
    int slot = 0;

    bool operator==(const SlotRef&) const = default;
};

/// Highest-utility strategy among linked markets. agent_utilities holds the
/// agent's K*s utilities in (market, slot) order. The random tie break draws
/// from rng only when more than one strategy attains the maximum.
SlotRef argmax_strategy(std::span<const double> agent_utilities, std::span<const std::uint8_t> linked,
                        int slots, TieBreak tie_break, RngStream& rng);

/// One running multi-market minority game.
class Game {
public:
    /// Draws the endowment, then initial utilities, then one initial history
    /// per market, all from RngStream(cfg.seed).
    explicit Game(GameConfig cfg);

    /// Uses the given endowment instead of drawing one; utilities and
    /// histories are still drawn in the usual order. When histories is
    /// non-empty it replaces the drawn initial histories.
    Game(GameConfig cfg, Endowment endowment, std::vector<History> histories = {});

    const GameConfig& config() const noexcept { return cfg_; }
    const Endowment& endowment() const noexcept { return endowment_; }
    const GameState& state() const noexcept { return state_; }
    RngStream& rng() noexcept { return rng_; }

    double utility(int agent, int market, int slot) const noexcept {
        return state_.utilities[endowment_.index(agent, market, slot)];
    }
    std::span<const double> agent_utilities(int agent) const noexcept;

    /// Greedy choice for one agent against the current state.
    ActiveChoice choose_active_strategy(int agent);

    /// Advances one tick and returns its observables.
    TickRecord step();

private:
    void init_state(bool draw_histories, std::vector<History> histories);

    GameConfig cfg_;
    RngStream rng_;
    Endowment endowment_;
    GameState state_;
    std::vector<ActiveChoice> choices_;
};

GameState init_game(const GameConfig& cfg);

using RecordSink = std::function<void(const TickRecord&)>;

/// init_game then T ticks, each record delivered to sink before the next tick.
void run(const GameConfig& cfg, std::int64_t ticks, const RecordSink& sink);
std::vector<TickRecord> run(const GameConfig& cfg, std::int64_t ticks);

}  // namespace mmg

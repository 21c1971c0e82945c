#include "mmg/game.hpp"

#include <string>

#include "mmg/errors.hpp"

namespace mmg {

GameConfig GameConfig::regular(int agents, int markets, int slots, int memory, std::uint64_t seed) {
    GameConfig cfg;
    cfg.agents = agents;
    cfg.markets = markets;
    cfg.slots = slots;
    cfg.memory = memory;
    cfg.seed = seed;
    cfg.topology = MarketTopology::regular(agents, markets);
    return cfg;
}

GameConfig GameConfig::irregular(int n1, int n2, int slots, int memory, std::uint64_t seed) {
    GameConfig cfg;
    cfg.agents = n1 + n2;
    cfg.markets = 2;
    cfg.slots = slots;
    cfg.memory = memory;
    cfg.seed = seed;
    cfg.topology = MarketTopology::irregular(n1, n2);
    return cfg;
}

void GameConfig::validate() const {
    if (agents < 1) throw ConfigError("N", "must be at least 1, got " + std::to_string(agents));
    if (markets < 1) throw ConfigError("K", "must be at least 1, got " + std::to_string(markets));
    if (slots < 1) throw ConfigError("s", "must be at least 1, got " + std::to_string(slots));
    if (memory < 1 || memory > max_memory)
        throw ConfigError("m", "must be in [1, " + std::to_string(max_memory) + "], got " +
                                   std::to_string(memory));
    if (init.kind == InitKind::uniform && !(init.low <= init.high))
        throw ConfigError("init_low", "uniform initial utilities need low <= high");
    topology.validate(agents, markets);
}

double payoff_scale(PayoffKind kind, int demand, int agents) noexcept {
    switch (kind) {
        case PayoffKind::linear: return static_cast<double>(demand);
        case PayoffKind::sign: return demand > 0 ? 1.0 : (demand < 0 ? -1.0 : 0.0);
        case PayoffKind::scaled: return static_cast<double>(demand) / static_cast<double>(agents);
    }
    return 0.0;
}

double payoff(Action action, int demand, PayoffKind kind, int agents) noexcept {
    return -static_cast<double>(to_int(action)) * payoff_scale(kind, demand, agents);
}

int aggregate_demand(std::span<const Action> actions) noexcept {
    int sum = 0;
    for (Action a : actions) sum += to_int(a);
    return sum;
}

Action minority_action(int demand, RngStream& rng, ZeroDemandRule rule) {
    if (demand > 0) return Action::minus;
    if (demand < 0) return Action::plus;
    if (rule == ZeroDemandRule::plus_one) return Action::plus;
    return rng.coin() ? Action::plus : Action::minus;
}

SlotRef argmax_strategy(std::span<const double> agent_utilities, std::span<const std::uint8_t> linked,
                        int slots, TieBreak tie_break, RngStream& rng) {
    const int markets = static_cast<int>(linked.size());
    double best = 0.0;
    int best_index = -1;
    int ties = 0;
    for (int k = 0; k < markets; ++k) {
        if (!linked[k]) continue;
        for (int j = 0; j < slots; ++j) {
            const int i = k * slots + j;
            const double u = agent_utilities[i];
            if (best_index < 0 || u > best) {
                best = u;
                best_index = i;
                ties = 1;
            } else if (u == best) {
                ++ties;
            }
        }
    }
    if (ties > 1 && tie_break == TieBreak::random) {
        auto pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(ties)));
        for (int k = 0; k < markets; ++k) {
            if (!linked[k]) continue;
            for (int j = 0; j < slots; ++j) {
                const int i = k * slots + j;
                if (agent_utilities[i] == best && pick-- == 0) return {k, j};
            }
        }
    }
    return {best_index / slots, best_index % slots};
}

Game::Game(GameConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
    cfg_.validate();
    endowment_ = draw_strategies(rng_, cfg_.topology, cfg_.slots, cfg_.memory);
    init_state(true, {});
}

Game::Game(GameConfig cfg, Endowment endowment, std::vector<History> histories)
    : cfg_(std::move(cfg)), rng_(cfg_.seed), endowment_(std::move(endowment)) {
    cfg_.validate();
    if (endowment_.topology() != cfg_.topology || endowment_.slots() != cfg_.slots ||
        endowment_.memory() != cfg_.memory)
        throw ConfigError("endowment", "endowment shape does not match the configuration");
    if (!histories.empty() && histories.size() != static_cast<std::size_t>(cfg_.markets))
        throw ConfigError("histories", "need one initial history per market");
    for (const auto& h : histories)
        if (h.memory() != cfg_.memory) throw ConfigError("m", "initial history memory mismatch");
    const bool draw = histories.empty();
    init_state(draw, std::move(histories));
}

void Game::init_state(bool draw_histories, std::vector<History> histories) {
    const std::size_t n = static_cast<std::size_t>(cfg_.agents) * cfg_.markets * cfg_.slots;
    state_.t = 0;
    state_.utilities.assign(n, 0.0);
    if (cfg_.init.kind == InitKind::uniform) {
        for (int a = 0; a < cfg_.agents; ++a)
            for (int k = 0; k < cfg_.markets; ++k) {
                if (!cfg_.topology.linked(a, k)) continue;
                for (int j = 0; j < cfg_.slots; ++j)
                    state_.utilities[endowment_.index(a, k, j)] = rng_.uniform(cfg_.init.low, cfg_.init.high);
            }
    }
    if (draw_histories) {
        const std::uint64_t p = std::uint64_t{1} << cfg_.memory;
        state_.histories.clear();
        for (int k = 0; k < cfg_.markets; ++k)
            state_.histories.emplace_back(cfg_.memory, static_cast<std::uint32_t>(rng_.below(p)));
    } else {
        state_.histories = std::move(histories);
    }
    state_.last_market.assign(static_cast<std::size_t>(cfg_.agents), -1);
    state_.last_slot.assign(static_cast<std::size_t>(cfg_.agents), -1);
    choices_.resize(static_cast<std::size_t>(cfg_.agents));
}

std::span<const double> Game::agent_utilities(int agent) const noexcept {
    const std::size_t width = static_cast<std::size_t>(cfg_.markets) * cfg_.slots;
    return std::span<const double>(state_.utilities).subspan(static_cast<std::size_t>(agent) * width, width);
}

ActiveChoice Game::choose_active_strategy(int agent) {
    const SlotRef ref = argmax_strategy(agent_utilities(agent), cfg_.topology.links_of(agent), cfg_.slots,
                                        cfg_.tie_break, rng_);
    const History h = state_.histories[static_cast<std::size_t>(ref.market)];
    return {ref.market, ref.slot, action_from_bit(endowment_.table(agent, ref.market, ref.slot).bit(h.bits()))};
}

TickRecord Game::step() {
    const int n = cfg_.agents;
    const int markets = cfg_.markets;
    const int slots = cfg_.slots;

    TickRecord rec;
    rec.t = state_.t;
    rec.occupancy.assign(static_cast<std::size_t>(markets), 0);
    rec.demand.assign(static_cast<std::size_t>(markets), 0);
    rec.mu.resize(static_cast<std::size_t>(markets));
    for (int k = 0; k < markets; ++k) rec.mu[k] = state_.histories[k].bits();

    // (1)-(2) choices against pre-update utilities, then demand per market.
    for (int a = 0; a < n; ++a) {
        const ActiveChoice c = choose_active_strategy(a);
        choices_[a] = c;
        rec.occupancy[c.market] += 1;
        rec.demand[c.market] += to_int(c.action);
    }

    // (3)
    rec.minority.resize(static_cast<std::size_t>(markets));
    for (int k = 0; k < markets; ++k) rec.minority[k] = minority_action(rec.demand[k], rng_, cfg_.zero_demand);

    // (4) every strategy on every linked market is scored with that market's A_k.
    std::vector<double> gain_plus(static_cast<std::size_t>(markets));
    std::vector<double> gain_minus(static_cast<std::size_t>(markets));
    for (int k = 0; k < markets; ++k) {
        gain_plus[k] = payoff(Action::plus, rec.demand[k], cfg_.payoff, n);
        gain_minus[k] = payoff(Action::minus, rec.demand[k], cfg_.payoff, n);
    }
    double* u = state_.utilities.data();
    const bool single_word = cfg_.memory <= 6;
    for (int a = 0; a < n; ++a) {
        const auto links = cfg_.topology.links_of(a);
        for (int k = 0; k < markets; ++k) {
            if (!links[k]) continue;
            const std::uint32_t mu = rec.mu[k];
            const double gp = gain_plus[k];
            const double gm = gain_minus[k];
            const std::size_t base = endowment_.index(a, k, 0);
            for (int j = 0; j < slots; ++j) {
                const std::size_t i = base + j;
                const unsigned bit = single_word ? static_cast<unsigned>((endowment_.first_word(i) >> mu) & 1U)
                                                 : endowment_.table(a, k, j).bit(mu);
                u[i] += bit ? gp : gm;
            }
        }
    }

    // (5)
    for (int k = 0; k < markets; ++k) state_.histories[k] = update_history(state_.histories[k], rec.minority[k]);

    // (6)
    int switched = 0;
    for (int a = 0; a < n; ++a) {
        if (state_.last_market[a] >= 0 && state_.last_market[a] != choices_[a].market) ++switched;
        state_.last_market[a] = choices_[a].market;
        state_.last_slot[a] = choices_[a].slot;
    }
    rec.switched = switched;
    if (cfg_.trace_agents) rec.agents = choices_;
    ++state_.t;
    return rec;
}

GameState init_game(const GameConfig& cfg) { return Game(cfg).state(); }

void run(const GameConfig& cfg, std::int64_t ticks, const RecordSink& sink) {
    if (ticks < 1) throw ConfigError("T", "must be at least 1");
    Game game(cfg);
    for (std::int64_t t = 0; t < ticks; ++t) sink(game.step());
}

std::vector<TickRecord> run(const GameConfig& cfg, std::int64_t ticks) {
    std::vector<TickRecord> out;
    out.reserve(static_cast<std::size_t>(ticks > 0 ? ticks : 0));
    run(cfg, ticks, [&](const TickRecord& r) { out.push_back(r); });
    return out;
}

}  // namespace mmg

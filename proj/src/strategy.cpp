#include "mmg/strategy.hpp"

#include <string>

#include "mmg/errors.hpp"

namespace mmg {

namespace {

void check_memory(int memory) {
    if (memory < 1 || memory > max_memory)
        throw ConfigError("m", "must be in [1, " + std::to_string(max_memory) + "], got " +
                                   std::to_string(memory));
}

std::uint64_t low_mask(int memory) {
    return memory >= 6 ? ~std::uint64_t{0} : (std::uint64_t{1} << (1U << memory)) - 1;
}

}  // namespace

History::History(int memory, std::uint32_t bits) : bits_(bits), memory_(memory) {
    check_memory(memory);
    if (bits >= size())
        throw ConfigError("history", "value " + std::to_string(bits) + " does not fit in " +
                                         std::to_string(memory) + " bits");
}

History update_history(History h, Action winner) noexcept {
    const std::uint32_t mask = h.size() - 1;
    return History(h.memory(), ((h.bits() << 1) | bit_of(winner)) & mask);
}

StrategyTable::StrategyTable(int memory, int market)
    : words_((check_memory(memory), words_for_memory(memory)), 0), memory_(memory), market_(market) {}

StrategyTable StrategyTable::constant(int memory, int market, Action a) {
    StrategyTable t(memory, market);
    if (a == Action::plus) {
        for (auto& w : t.words_) w = ~std::uint64_t{0};
        t.words_.back() &= low_mask(memory);
    }
    return t;
}

StrategyTable StrategyTable::from_pattern(int memory, int market, std::uint64_t pattern) {
    if (memory > 6) throw ConfigError("m", "bit patterns only cover m <= 6");
    StrategyTable t(memory, market);
    t.words_[0] = pattern & low_mask(memory);
    return t;
}

void StrategyTable::set_bit(std::uint32_t index, unsigned value) {
    if (index >= length()) throw std::out_of_range("strategy table index");
    auto& w = words_[index >> 6];
    const std::uint64_t b = std::uint64_t{1} << (index & 63U);
    w = value ? (w | b) : (w & ~b);
}

StrategyTable StrategyTable::complement() const {
    StrategyTable t = *this;
    for (auto& w : t.words_) w = ~w;
    t.words_.back() &= low_mask(memory_);
    return t;
}

Action evaluate_strategy(StrategyView table, History h) {
    if (table.memory() != h.memory())
        throw ConfigError("m", "strategy table has 2^" + std::to_string(table.memory()) +
                                   " entries but history memory is " + std::to_string(h.memory()));
    return action_from_bit(table.bit(h.bits()));
}

Endowment::Endowment(MarketTopology topology, int slots, int memory)
    : topology_(std::move(topology)), slots_(slots), memory_(memory), stride_(words_for_memory(memory)) {
    check_memory(memory);
    if (slots < 1) throw ConfigError("s", "must be at least 1");
    words_.assign(static_cast<std::size_t>(agents()) * markets() * slots_ * stride_, 0);
}

std::size_t Endowment::table_count() const noexcept {
    std::size_t n = 0;
    for (int a = 0; a < agents(); ++a) n += static_cast<std::size_t>(topology_.link_count(a)) * slots_;
    return n;
}

void Endowment::set_table(int agent, int slot, const StrategyTable& table) {
    if (table.memory() != memory_) throw ConfigError("m", "table memory does not match endowment");
    if (agent < 0 || agent >= agents() || slot < 0 || slot >= slots_ || table.market() < 0 ||
        table.market() >= markets())
        throw std::out_of_range("endowment slot");
    if (!topology_.linked(agent, table.market()))
        throw ConfigError("topology", "agent " + std::to_string(agent) + " is not linked to market " +
                                          std::to_string(table.market()));
    auto dst = mutable_words(agent, table.market(), slot);
    auto src = table.words();
    std::copy(src.begin(), src.end(), dst.begin());
}

Endowment draw_strategies(RngStream& rng, const MarketTopology& topology, int slots, int memory) {
    Endowment e(topology, slots, memory);
    const std::uint64_t mask = low_mask(memory);
    for (int a = 0; a < e.agents(); ++a)
        for (int k = 0; k < e.markets(); ++k) {
            if (!topology.linked(a, k)) continue;
            for (int j = 0; j < slots; ++j)
                for (auto& w : e.mutable_words(a, k, j)) w = rng.next_u64() & mask;
        }
    return e;
}

Endowment draw_strategies(RngStream& rng, int agents, int markets, int slots, int memory) {
    return draw_strategies(rng, MarketTopology::regular(agents, markets), slots, memory);
}

}  // namespace mmg

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mmg/rng.hpp"
#include "mmg/topology.hpp"

namespace mmg {

inline constexpr int max_memory = 24;

/// A market action or minority decision. Encoded as bit 0 (-1) or 1 (+1).
enum class Action : std::int8_t { minus = -1, plus = 1 };

constexpr int to_int(Action a) noexcept { return static_cast<int>(a); }
constexpr Action action_from_bit(unsigned bit) noexcept { return bit ? Action::plus : Action::minus; }
constexpr unsigned bit_of(Action a) noexcept { return a == Action::plus ? 1U : 0U; }
constexpr Action opposite(Action a) noexcept { return a == Action::plus ? Action::minus : Action::plus; }

/// The m most recent winning decisions of one market, newest in the least
/// significant bit.
class History {
public:
    History() = default;
    History(int memory, std::uint32_t bits);

    std::uint32_t bits() const noexcept { return bits_; }
    int memory() const noexcept { return memory_; }
    std::uint32_t size() const noexcept { return std::uint32_t{1} << memory_; }

    bool operator==(const History&) const = default;

private:
    std::uint32_t bits_ = 0;
    int memory_ = 1;
};

History update_history(History h, Action winner) noexcept;

/// Non-owning view of one strategy's 2^m-bit lookup table. Bit j of the
/// table lives in bit (j % 64) of word j / 64.
class StrategyView {
public:
    StrategyView(std::span<const std::uint64_t> words, int memory) : words_(words), memory_(memory) {}

    int memory() const noexcept { return memory_; }
    std::uint32_t length() const noexcept { return std::uint32_t{1} << memory_; }
    std::span<const std::uint64_t> words() const noexcept { return words_; }

    unsigned bit(std::uint32_t index) const noexcept {
        return static_cast<unsigned>((words_[index >> 6] >> (index & 63U)) & 1U);
    }

private:
    std::span<const std::uint64_t> words_;
    int memory_;
};

inline std::size_t words_for_memory(int memory) noexcept {
    return ((std::size_t{1} << memory) + 63) / 64;
}

/// Owning strategy table bound to one market.
class StrategyTable {
public:
    StrategyTable(int memory, int market);

    static StrategyTable constant(int memory, int market, Action a);
    /// Table whose bit j is (pattern >> j) & 1; requires m <= 6.
    static StrategyTable from_pattern(int memory, int market, std::uint64_t pattern);

    int memory() const noexcept { return memory_; }
    int market() const noexcept { return market_; }
    std::uint32_t length() const noexcept { return std::uint32_t{1} << memory_; }

    unsigned bit(std::uint32_t index) const noexcept { return view().bit(index); }
    void set_bit(std::uint32_t index, unsigned value);
    StrategyTable complement() const;

    StrategyView view() const noexcept { return {words_, memory_}; }
    std::span<const std::uint64_t> words() const noexcept { return words_; }

    bool operator==(const StrategyTable&) const = default;

private:
    std::vector<std::uint64_t> words_;
    int memory_;
    int market_;
};

/// Action the table prescribes after history h. Throws ConfigError when the
/// table was built for a different memory length.
Action evaluate_strategy(StrategyView table, History h);
inline Action evaluate_strategy(const StrategyTable& table, History h) {
    return evaluate_strategy(table.view(), h);
}

/// All strategy tables of a game, flat in (agent, market, slot) order.
/// Entries of unlinked (agent, market) pairs exist in storage but are never
/// drawn or used.
class Endowment {
public:
    Endowment() = default;
    Endowment(MarketTopology topology, int slots, int memory);

    int agents() const noexcept { return topology_.agents(); }
    int markets() const noexcept { return topology_.markets(); }
    int slots() const noexcept { return slots_; }
    int memory() const noexcept { return memory_; }
    const MarketTopology& topology() const noexcept { return topology_; }

    /// Number of tables an agent actually holds, summed over agents.
    std::size_t table_count() const noexcept;

    std::size_t index(int agent, int market, int slot) const noexcept {
        return (static_cast<std::size_t>(agent) * markets() + market) * slots_ + slot;
    }

    StrategyView table(int agent, int market, int slot) const noexcept {
        return {std::span<const std::uint64_t>(words_).subspan(index(agent, market, slot) * stride_,
                                                              stride_),
                memory_};
    }

    /// Lowest word of a table; the whole table when m <= 6.
    std::uint64_t first_word(std::size_t flat_index) const noexcept {
        return words_[flat_index * stride_];
    }
    std::span<std::uint64_t> mutable_words(int agent, int market, int slot) noexcept {
        return std::span<std::uint64_t>(words_).subspan(index(agent, market, slot) * stride_, stride_);
    }

    void set_table(int agent, int slot, const StrategyTable& table);

    bool operator==(const Endowment&) const = default;

private:
    MarketTopology topology_;
    int slots_ = 0;
    int memory_ = 1;
    std::size_t stride_ = 1;
    std::vector<std::uint64_t> words_;
};

/// Draws s tables for every linked (agent, market) pair, each bit an
/// independent fair coin. Draw order: agent, then market, then slot, then
/// 64-bit word of the table (low bits first).
Endowment draw_strategies(RngStream& rng, const MarketTopology& topology, int slots, int memory);
Endowment draw_strategies(RngStream& rng, int agents, int markets, int slots, int memory);

}  // namespace mmg

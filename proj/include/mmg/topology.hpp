#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mmg {

/// Which markets each agent may act on.
class MarketTopology {
public:
    enum class Kind { regular, irregular, custom };

    MarketTopology() = default;

    /// Every agent linked to all K markets.
    static MarketTopology regular(int agents, int markets);

    /// Two markets: agents [0, n1) linked to market 0 only, agents
    /// [n1, n1 + n2) linked to both.
    static MarketTopology irregular(int n1, int n2);

    /// Row-major agents x markets link flags.
    static MarketTopology custom(int agents, int markets, std::vector<std::uint8_t> links);

    Kind kind() const noexcept { return kind_; }
    int agents() const noexcept { return agents_; }
    int markets() const noexcept { return markets_; }
    int n1() const noexcept { return n1_; }
    int n2() const noexcept { return n2_; }

    bool linked(int agent, int market) const noexcept {
        return links_[static_cast<std::size_t>(agent) * markets_ + market] != 0;
    }
    std::span<const std::uint8_t> links_of(int agent) const noexcept {
        return {links_.data() + static_cast<std::size_t>(agent) * markets_,
                static_cast<std::size_t>(markets_)};
    }
    int link_count(int agent) const noexcept;

    /// Throws ConfigError unless every agent has a link and sizes match.
    void validate(int agents, int markets) const;

    bool operator==(const MarketTopology&) const = default;

private:
    Kind kind_ = Kind::regular;
    int agents_ = 0;
    int markets_ = 0;
    int n1_ = 0;
    int n2_ = 0;
    std::vector<std::uint8_t> links_;
};

}  // namespace mmg

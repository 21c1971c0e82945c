#include "mmg/topology.hpp"

#include <algorithm>
#include <string>

#include "mmg/errors.hpp"

namespace mmg {

MarketTopology MarketTopology::regular(int agents, int markets) {
    if (agents < 1) throw ConfigError("N", "must be at least 1");
    if (markets < 1) throw ConfigError("K", "must be at least 1");
    MarketTopology t;
    t.kind_ = Kind::regular;
    t.agents_ = agents;
    t.markets_ = markets;
    t.links_.assign(static_cast<std::size_t>(agents) * markets, 1);
    return t;
}

MarketTopology MarketTopology::irregular(int n1, int n2) {
    if (n1 < 0) throw ConfigError("n1", "must be non-negative");
    if (n2 < 0) throw ConfigError("n2", "must be non-negative");
    if (n1 + n2 < 1) throw ConfigError("n1", "irregular topology needs n1 + n2 >= 1");
    MarketTopology t;
    t.kind_ = Kind::irregular;
    t.agents_ = n1 + n2;
    t.markets_ = 2;
    t.n1_ = n1;
    t.n2_ = n2;
    t.links_.assign(static_cast<std::size_t>(t.agents_) * 2, 1);
    for (int a = 0; a < n1; ++a) t.links_[static_cast<std::size_t>(a) * 2 + 1] = 0;
    return t;
}

MarketTopology MarketTopology::custom(int agents, int markets, std::vector<std::uint8_t> links) {
    if (agents < 1) throw ConfigError("N", "must be at least 1");
    if (markets < 1) throw ConfigError("K", "must be at least 1");
    if (links.size() != static_cast<std::size_t>(agents) * markets)
        throw ConfigError("topology", "link table size does not match N x K");
    MarketTopology t;
    t.kind_ = Kind::custom;
    t.agents_ = agents;
    t.markets_ = markets;
    t.links_ = std::move(links);
    for (auto& l : t.links_) l = l ? 1 : 0;
    t.validate(agents, markets);
    return t;
}

int MarketTopology::link_count(int agent) const noexcept {
    auto row = links_of(agent);
    return static_cast<int>(std::count(row.begin(), row.end(), std::uint8_t{1}));
}

void MarketTopology::validate(int agents, int markets) const {
    if (agents_ != agents)
        throw ConfigError("topology", "topology has " + std::to_string(agents_) +
                                          " agents but N = " + std::to_string(agents));
    if (markets_ != markets)
        throw ConfigError("topology", "topology has " + std::to_string(markets_) +
                                          " markets but K = " + std::to_string(markets));
    for (int a = 0; a < agents_; ++a)
        if (link_count(a) == 0)
            throw ConfigError("topology", "agent " + std::to_string(a) + " has no market link");
}

}  // namespace mmg
